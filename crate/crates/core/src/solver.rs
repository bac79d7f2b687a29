//! Inertial forward-backward iteration with vanishing damping.
//!
//! One iteration at index k ≥ 1:
//!
//! ```text
//! y_k     = x_k + γ_k (x_k − x_{k−1}),          γ_k = (k−1)/(k+α−1)
//! x_{k+1} = prox_{sΦ}( y_k − s(∇Ψ(y_k) − g_k) )
//! ```
//!
//! The auxiliary sequence z_k = ((k+α−1)·y_k − k·x_k)/(α−1) tracks the
//! continuous-time quantity x(t) − x* + (t/(α−1))ẋ(t) and drives every
//! Lyapunov diagnostic. Iterations start at k = 1 with x_1 = x_0 (zero
//! initial velocity), so γ_1 = 0 and the first step is a plain
//! forward-backward step.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dist, ensure_finite, norm};
use crate::objective::CompositeObjective;
use crate::perturbation::PerturbationSchedule;

/// Slack admitted on the step bound s·L ≤ 1.
pub const STEP_BOUND_SLACK: f64 = 1e-12;

/// Solver hyperparameters.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolverParams {
    /// Inertia exponent α; rate guarantees need α ≥ 3.
    pub alpha: f64,
    /// Step size s = h² with h the time step; must satisfy s·L ≤ 1.
    pub step: f64,
    /// Largest iterate index to produce (the run stops at x_{max_iter}).
    pub max_iter: usize,
    /// Early-stop threshold on the value gap, active only with a reference.
    pub value_tol: f64,
    /// Accept α < 3 (reports are stamped "outside guarantee regime").
    pub allow_no_guarantee: bool,
}

impl SolverParams {
    pub fn new(alpha: f64, step: f64, max_iter: usize) -> Self {
        SolverParams { alpha, step, max_iter, value_tol: 0.0, allow_no_guarantee: false }
    }

    /// True when α is in the regime the fast-rate theory covers.
    pub fn guarantee_regime(&self) -> bool {
        self.alpha >= 3.0
    }

    pub fn validate(&self, lipschitz: f64) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(Error::usage(format!("alpha must be positive, got {}", self.alpha)));
        }
        if self.alpha < 3.0 && !self.allow_no_guarantee {
            return Err(Error::usage(format!(
                "alpha = {} is below 3; pass allow_no_guarantee to run outside the guarantee regime",
                self.alpha
            )));
        }
        if !(self.step > 0.0) {
            return Err(Error::usage(format!("step must be positive, got {}", self.step)));
        }
        if self.step * lipschitz > 1.0 + STEP_BOUND_SLACK {
            return Err(Error::usage(format!(
                "step bound violated: s*L = {} exceeds 1 (s = {}, L = {lipschitz})",
                self.step * lipschitz,
                self.step
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::usage("max_iter must be at least 1"));
        }
        if self.value_tol < 0.0 {
            return Err(Error::usage("value_tol must be nonnegative"));
        }
        Ok(())
    }
}

/// γ_k = (k−1)/(k+α−1) ∈ [0, 1).
pub fn momentum_coefficient(k: usize, alpha: f64) -> f64 {
    debug_assert!(k >= 1 && alpha > 0.0);
    (k as f64 - 1.0) / (k as f64 + alpha - 1.0)
}

/// Perturbed forward-backward gradient map
/// G_{s,k}(y) = (y − prox_{sΦ}(y − s(∇Ψ(y) − g_k)))/s.
///
/// With Φ ≡ 0 this reduces to ∇Ψ(y) − g_k; it vanishes exactly at composite
/// minimizers when g_k = 0.
pub fn gradient_map(
    obj: &CompositeObjective,
    g_k: &[f64],
    s: f64,
    y: &[f64],
) -> Result<Vec<f64>> {
    let (_, grad) = obj.eval_smooth(y)?;
    let shifted: Vec<f64> = y
        .iter()
        .zip(grad.iter().zip(g_k))
        .map(|(yi, (gi, pi))| yi - s * (gi - pi))
        .collect();
    let p = obj.prox(s, &shifted)?;
    Ok(y.iter().zip(&p).map(|(yi, pi)| (yi - pi) / s).collect())
}

/// Full iteration state at index k.
#[derive(Clone, Debug)]
pub struct SolverState {
    pub k: usize,
    pub x_prev: Vec<f64>,
    pub x_curr: Vec<f64>,
    pub y_curr: Vec<f64>,
    pub z_curr: Vec<f64>,
    /// γ_k used to build `y_curr`.
    pub momentum: f64,
    /// G_{s,k−1}(y_{k−1}) from the step that produced this state (zeros at k=1).
    pub last_gradient_map: Vec<f64>,
}

impl SolverState {
    /// State at k = 1: x_1 = x_0, zero initial velocity, z_1 = x_1.
    pub fn initial(x0: &[f64]) -> Self {
        SolverState {
            k: 1,
            x_prev: x0.to_vec(),
            x_curr: x0.to_vec(),
            y_curr: x0.to_vec(),
            z_curr: x0.to_vec(),
            momentum: 0.0,
            last_gradient_map: vec![0.0; x0.len()],
        }
    }
}

/// Advances the state from index k to k+1.
///
/// z is stored in the closed form z_{k+1} = x_k + ((k+α−1)/(α−1))(x_{k+1}−x_k);
/// the equivalent recursion z_{k+1} = z_k − (s/(α−1))(k+α−1)·G_{s,k}(y_k) is
/// cross-checked against it on every step.
pub fn step(
    state: &SolverState,
    obj: &CompositeObjective,
    sched: &PerturbationSchedule,
    params: &SolverParams,
) -> Result<SolverState> {
    let k = state.k;
    let kf = k as f64;
    let alpha = params.alpha;
    let s = params.step;

    let g_k = sched.sample_discrete(k)?;
    let (_, grad) = obj.eval_smooth(&state.y_curr)?;
    let shifted: Vec<f64> = state
        .y_curr
        .iter()
        .zip(grad.iter().zip(&g_k))
        .map(|(yi, (gi, pi))| yi - s * (gi - pi))
        .collect();
    let x_next = obj.prox(s, &shifted)?;
    if let Err(e) = ensure_finite(&x_next, "iterate") {
        return Err(Error::numerical(format!("at iteration k = {k}: {e}")));
    }
    let g_map: Vec<f64> = state
        .y_curr
        .iter()
        .zip(&x_next)
        .map(|(yi, xi)| (yi - xi) / s)
        .collect();

    let weight = (kf + alpha - 1.0) / (alpha - 1.0);
    let z_next: Vec<f64> = state
        .x_curr
        .iter()
        .zip(&x_next)
        .map(|(xc, xn)| xc + weight * (xn - xc))
        .collect();
    debug_assert!({
        let scale = s * (kf + alpha - 1.0) / (alpha - 1.0);
        let z_rec: Vec<f64> = state
            .z_curr
            .iter()
            .zip(&g_map)
            .map(|(z, g)| z - scale * g)
            .collect();
        dist(&z_rec, &z_next) <= 1e-10 * (1.0 + norm(&z_next))
    });

    let momentum = momentum_coefficient(k + 1, alpha);
    let y_next: Vec<f64> = x_next
        .iter()
        .zip(&state.x_curr)
        .map(|(xn, xc)| xn + momentum * (xn - xc))
        .collect();

    Ok(SolverState {
        k: k + 1,
        x_prev: state.x_curr.clone(),
        x_curr: x_next,
        y_curr: y_next,
        z_curr: z_next,
        momentum,
        last_gradient_map: g_map,
    })
}

/// One per-iterate row of a run history.
#[derive(Clone, Debug)]
pub struct RunRecord {
    pub k: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    /// Θ(x_k)
    pub theta: f64,
    /// ‖x_k − x_{k−1}‖ (zero at k = 1)
    pub step_norm: f64,
    /// ‖g_k‖
    pub perturb_norm: f64,
    /// γ_k
    pub momentum: f64,
}

/// Complete record of a solver run, contiguous in k from 1.
#[derive(Clone, Debug)]
pub struct RunHistory {
    pub records: Vec<RunRecord>,
    pub params: SolverParams,
    pub problem: String,
}

impl RunHistory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Record at iterate index k (1-based).
    pub fn record(&self, k: usize) -> Result<&RunRecord> {
        if k == 0 || k > self.records.len() {
            return Err(Error::usage(format!(
                "iterate index {k} out of range 1..={}",
                self.records.len()
            )));
        }
        Ok(&self.records[k - 1])
    }

    /// Θ(x_k) − θ* for every recorded k.
    pub fn gaps(&self, theta_star: f64) -> Vec<f64> {
        self.records.iter().map(|r| r.theta - theta_star).collect()
    }

    pub fn final_record(&self) -> &RunRecord {
        self.records.last().expect("history is never empty")
    }
}

/// A failed run that preserves the partial history up to the failure.
/// Keeps the error class: parameter validation stays a usage error,
/// non-finite iterates stay numerical.
#[derive(Debug)]
pub struct SolverFailure {
    pub at_iter: usize,
    pub error: Error,
    pub partial: RunHistory,
}

impl From<SolverFailure> for Error {
    fn from(f: SolverFailure) -> Error {
        f.error
    }
}

/// Runs the iteration from x_0, recording every iterate.
///
/// `theta_star` activates early stopping on the value gap when
/// `params.value_tol > 0`. The callback observes each record and may stop
/// the run by returning `true`.
pub fn run(
    obj: &CompositeObjective,
    sched: &PerturbationSchedule,
    params: &SolverParams,
    x0: &[f64],
    theta_star: Option<f64>,
    mut callback: impl FnMut(&RunRecord) -> bool,
) -> std::result::Result<RunHistory, SolverFailure> {
    let bail = |at: usize, error: Error, partial: Vec<RunRecord>| SolverFailure {
        at_iter: at,
        error,
        partial: RunHistory {
            records: partial,
            params: params.clone(),
            problem: obj.label().to_string(),
        },
    };

    if let Err(e) = params.validate(obj.lipschitz()) {
        return Err(bail(0, e, Vec::new()));
    }
    if let Err(e) = ensure_finite(x0, "x0") {
        return Err(bail(0, Error::usage(format!("invalid start point: {e}")), Vec::new()));
    }

    let mut records: Vec<RunRecord> = Vec::with_capacity(params.max_iter);
    let mut state = SolverState::initial(x0);

    let make_record = |state: &SolverState,
                       obj: &CompositeObjective,
                       sched: &PerturbationSchedule|
     -> Result<RunRecord> {
        Ok(RunRecord {
            k: state.k,
            x: state.x_curr.clone(),
            y: state.y_curr.clone(),
            z: state.z_curr.clone(),
            theta: obj.eval_composite(&state.x_curr)?,
            step_norm: dist(&state.x_curr, &state.x_prev),
            perturb_norm: sched.norm_at(state.k),
            momentum: state.momentum,
        })
    };

    loop {
        let record = match make_record(&state, obj, sched) {
            Ok(r) => r,
            Err(e) => return Err(bail(state.k, e, records)),
        };
        let stop_requested = callback(&record);
        let gap_reached = match theta_star {
            Some(ts) if params.value_tol > 0.0 => record.theta - ts <= params.value_tol,
            _ => false,
        };
        records.push(record);
        if stop_requested || gap_reached || state.k >= params.max_iter {
            break;
        }
        state = match step(&state, obj, sched, params) {
            Ok(next) => next,
            Err(e) => return Err(bail(state.k, e, records)),
        };
    }

    Ok(RunHistory { records, params: params.clone(), problem: obj.label().to_string() })
}

/// `run` without callback or reference value.
pub fn run_basic(
    obj: &CompositeObjective,
    sched: &PerturbationSchedule,
    params: &SolverParams,
    x0: &[f64],
) -> std::result::Result<RunHistory, SolverFailure> {
    run(obj, sched, params, x0, None, |_| false)
}
