//! JSON experiment configuration.
//!
//! ```json
//! {
//!   "problem":      { "name": "quadratic", "dim": 4, "seed": 7, "params": {"lambda": 0.5, "x0": [..]} },
//!   "solver":       { "alpha": 3.0, "s": "auto", "max_iter": 10000, "value_tol": 0.0 },
//!   "perturbation": { "kind": "power_law", "c": 0.01, "p": 3.0, "direction_seed": 1 },
//!   "ode":          { "t0": 1.0, "T": 1000.0, "rtol": 1e-8, "atol": 1e-12, "v0": [0.0] },
//!   "output":       { "dir": "out", "formats": ["csv", "json"] },
//!   "grid":         { "alpha": [3, 4, 5], "p": [3], "s": ["auto"] }
//! }
//! ```
//!
//! `"s": "auto"` resolves to 1/L with L taken from the instance.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::perturbation::{Direction, PerturbationSchedule};
use crate::problems::{by_name, ProblemInstance};
use crate::solver::SolverParams;

/// Step size: a number or the string `"auto"` (= 1/L).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepSpec {
    Auto,
    Fixed(f64),
}

impl StepSpec {
    pub fn resolve(&self, lipschitz: f64) -> f64 {
        match self {
            StepSpec::Auto => 1.0 / lipschitz,
            StepSpec::Fixed(s) => *s,
        }
    }
}

impl Serialize for StepSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            StepSpec::Auto => serializer.serialize_str("auto"),
            StepSpec::Fixed(v) => serializer.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for StepSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct StepVisitor;
        impl Visitor<'_> for StepVisitor {
            type Value = StepSpec;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a positive number or the string \"auto\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<StepSpec, E> {
                Ok(StepSpec::Fixed(v))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<StepSpec, E> {
                Ok(StepSpec::Fixed(v as f64))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<StepSpec, E> {
                Ok(StepSpec::Fixed(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<StepSpec, E> {
                if v == "auto" {
                    Ok(StepSpec::Auto)
                } else {
                    Err(E::custom(format!("step must be a number or \"auto\", got \"{v}\"")))
                }
            }
        }
        deserializer.deserialize_any(StepVisitor)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProblemConfig {
    pub name: String,
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub params: Option<ProblemParams>,
}

/// Instance-specific knobs.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ProblemParams {
    /// ℓ₁ weight for the lasso instances.
    #[serde(default)]
    pub lambda: Option<f64>,
    /// Start-point override (must be feasible for indicator instances).
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolverConfig {
    pub alpha: f64,
    pub s: StepSpec,
    pub max_iter: usize,
    #[serde(default)]
    pub value_tol: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PerturbationConfig {
    /// "zero", "power_law", or "finite_list".
    #[serde(default = "default_kind")]
    pub kind: String,
    #[serde(default)]
    pub c: f64,
    #[serde(default)]
    pub p: f64,
    #[serde(default)]
    pub direction_seed: Option<u64>,
    /// Fixed direction; overrides the seeded one.
    #[serde(default)]
    pub direction: Option<Vec<f64>>,
    /// Entries for the finite_list kind.
    #[serde(default)]
    pub entries: Option<Vec<Vec<f64>>>,
}

fn default_kind() -> String {
    "zero".to_string()
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        PerturbationConfig {
            kind: default_kind(),
            c: 0.0,
            p: 0.0,
            direction_seed: None,
            direction: None,
            entries: None,
        }
    }
}

impl PerturbationConfig {
    pub fn to_schedule(&self, dim: usize) -> Result<PerturbationSchedule> {
        match self.kind.as_str() {
            "zero" => Ok(PerturbationSchedule::zero(dim)),
            "power_law" => {
                let direction = match &self.direction {
                    Some(v) => {
                        if v.len() != dim {
                            return Err(Error::usage(format!(
                                "perturbation direction has dimension {}, problem has {dim}",
                                v.len()
                            )));
                        }
                        Direction::fixed(v.clone())?
                    }
                    None => Direction::seeded(self.direction_seed.unwrap_or(0), dim),
                };
                PerturbationSchedule::power_law(self.c, self.p, direction)
            }
            "finite_list" => {
                let entries = self.entries.clone().unwrap_or_default();
                PerturbationSchedule::finite_list(entries, dim)
            }
            other => Err(Error::usage(format!(
                "unknown perturbation kind '{other}' (expected zero, power_law, finite_list)"
            ))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OdeConfig {
    pub t0: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
    #[serde(default)]
    pub v0: Option<Vec<f64>>,
}

fn default_rtol() -> f64 {
    1e-8
}

fn default_atol() -> f64 {
    1e-12
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub formats: Option<Vec<String>>,
}

/// Cartesian sweep over α × p × s.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridConfig {
    #[serde(default)]
    pub alpha: Option<Vec<f64>>,
    #[serde(default)]
    pub p: Option<Vec<f64>>,
    #[serde(default)]
    pub s: Option<Vec<StepSpec>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    #[serde(default)]
    pub solver: Option<SolverConfig>,
    #[serde(default)]
    pub perturbation: PerturbationConfig,
    #[serde(default)]
    pub ode: Option<OdeConfig>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub grid: Option<GridConfig>,
}

impl ExperimentConfig {
    /// Parses and structurally validates a config, with field-path and
    /// line/column diagnostics on malformed input.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            Error::usage(format!(
                "malformed config at field '{}': {}",
                e.path(),
                e.inner()
            ))
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn validate(&self) -> Result<()> {
        if let Some(solver) = &self.solver {
            if !(solver.alpha > 0.0) {
                return Err(Error::usage(format!(
                    "solver.alpha must be positive, got {}",
                    solver.alpha
                )));
            }
            if let StepSpec::Fixed(s) = solver.s {
                if !(s > 0.0) {
                    return Err(Error::usage(format!("solver.s must be positive, got {s}")));
                }
            }
            if solver.max_iter == 0 {
                return Err(Error::usage("solver.max_iter must be at least 1"));
            }
        }
        if let Some(ode) = &self.ode {
            if !(ode.t0 > 0.0) {
                return Err(Error::usage(format!("ode.t0 must be positive, got {}", ode.t0)));
            }
            if !(ode.t_end > ode.t0) {
                return Err(Error::usage("ode.T must exceed ode.t0"));
            }
        }
        Ok(())
    }

    /// Instantiates the named problem.
    pub fn build_problem(&self) -> Result<ProblemInstance> {
        let lambda = self.problem.params.as_ref().and_then(|p| p.lambda);
        by_name(
            &self.problem.name,
            self.problem.dim,
            self.problem.seed.unwrap_or(0),
            lambda,
        )
    }

    /// Start point: config override or the instance default.
    pub fn start_point(&self, instance: &ProblemInstance) -> Result<Vec<f64>> {
        match self.problem.params.as_ref().and_then(|p| p.x0.clone()) {
            None => Ok(instance.default_x0.clone()),
            Some(x0) => {
                if x0.len() != instance.objective.dim() {
                    return Err(Error::usage(format!(
                        "x0 has dimension {}, problem has {}",
                        x0.len(),
                        instance.objective.dim()
                    )));
                }
                Ok(x0)
            }
        }
    }

    /// Resolves solver parameters against an instance ("auto" → 1/L).
    pub fn solver_params(
        &self,
        instance: &ProblemInstance,
        allow_no_guarantee: bool,
    ) -> Result<SolverParams> {
        let solver = self
            .solver
            .as_ref()
            .ok_or_else(|| Error::usage("config has no solver block"))?;
        let lipschitz = instance.objective.lipschitz();
        let params = SolverParams {
            alpha: solver.alpha,
            step: solver.s.resolve(lipschitz),
            max_iter: solver.max_iter,
            value_tol: solver.value_tol.unwrap_or(0.0),
            allow_no_guarantee,
        };
        params.validate(lipschitz)?;
        Ok(params)
    }
}
