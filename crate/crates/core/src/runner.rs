//! Batch experiment commands behind the CLI: solve, simulate-ode, sweep,
//! verify.
//!
//! All artifacts land in a single output directory and embed the config
//! hash. Sweeps parallelize across cells, never within a run, so each
//! cell stays deterministic; rows are ordered by cell index.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, StepSpec};
use crate::diagnostics::{certify, fit_rate, CertifyOptions};
use crate::dynamics::{energy_series, integrate, DynamicsProblem};
use crate::error::{Error, Result};
use crate::report::{
    config_hash, write_history_csv, write_json, write_sweep_csv, write_trajectory_csv,
    CertificationDoc, SweepRow,
};
use crate::solver::{run, RunHistory, SolverParams};
use crate::verify::{CriterionResult, Suite};

/// Output locations of a solve run.
#[derive(Debug)]
pub struct SolveArtifacts {
    pub history_csv: PathBuf,
    pub certification_json: Option<PathBuf>,
    pub iterations: usize,
    pub final_theta: f64,
    pub violations: usize,
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)
        .map_err(|e| Error::usage(format!("cannot create output dir {}: {e}", dir.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::usage(format!("cannot create {}: {e}", path.display())))
}

fn out_dir(config: &ExperimentConfig, override_dir: Option<&Path>) -> PathBuf {
    override_dir
        .map(Path::to_path_buf)
        .or_else(|| config.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn fit_window_slope(history: &RunHistory, theta_star: f64) -> Option<f64> {
    let len = history.len();
    let from = (len / 100).max(10);
    fit_rate(&history.gaps(theta_star), from, len).ok().map(|f| f.slope)
}

/// Runs the solver per the config and writes history + certification
/// artifacts. On a numerical failure the partial history is still written
/// before the error (exit code 2) propagates.
pub fn cmd_solve(
    config: &ExperimentConfig,
    config_bytes: &[u8],
    override_dir: Option<&Path>,
    allow_no_guarantee: bool,
) -> Result<SolveArtifacts> {
    let hash = config_hash(config_bytes);
    let dir = out_dir(config, override_dir);
    ensure_dir(&dir)?;

    let instance = config.build_problem()?;
    let params = config.solver_params(&instance, allow_no_guarantee)?;
    let sched = config.perturbation.to_schedule(instance.objective.dim())?;
    let x0 = config.start_point(&instance)?;
    let theta_star = instance.theta_star;

    let history_path = dir.join("history.csv");
    let reference = instance.reference();

    let history = match run(&instance.objective, &sched, &params, &x0, theta_star, |_| false) {
        Ok(h) => h,
        Err(failure) => {
            write_history_csv(create(&history_path)?, &failure.partial, reference, Some(&hash))?;
            return Err(failure.into());
        }
    };
    write_history_csv(create(&history_path)?, &history, reference, Some(&hash))?;

    let mut certification_json = None;
    let mut violations = 0;
    if let Some((xs, ts)) = reference {
        let report = certify(
            &history,
            &instance.objective,
            &sched,
            xs,
            ts,
            CertifyOptions::default(),
        )?;
        violations = report.violations.len();
        let doc = CertificationDoc::from_report(
            &history,
            &report,
            fit_window_slope(&history, ts),
            Some(hash.clone()),
        );
        let path = dir.join("certification.json");
        write_json(create(&path)?, &doc)?;
        certification_json = Some(path);
    }

    Ok(SolveArtifacts {
        history_csv: history_path,
        certification_json,
        iterations: history.len(),
        final_theta: history.final_record().theta,
        violations,
    })
}

/// Output locations of an ODE run.
#[derive(Debug)]
pub struct OdeArtifacts {
    pub trajectory_csv: PathBuf,
    pub samples: usize,
    pub final_value: f64,
}

/// Integrates the continuous flow per the config and writes the trajectory
/// CSV with its energy series.
pub fn cmd_simulate_ode(
    config: &ExperimentConfig,
    config_bytes: &[u8],
    override_dir: Option<&Path>,
) -> Result<OdeArtifacts> {
    let hash = config_hash(config_bytes);
    let dir = out_dir(config, override_dir);
    ensure_dir(&dir)?;

    let ode = config
        .ode
        .as_ref()
        .ok_or_else(|| Error::usage("config has no ode block"))?;
    let alpha = config
        .solver
        .as_ref()
        .map(|s| s.alpha)
        .ok_or_else(|| Error::usage("ode runs read alpha from the solver block"))?;
    let instance = config.build_problem()?;
    let sched = config.perturbation.to_schedule(instance.objective.dim())?;
    let x0 = config.start_point(&instance)?;
    let dim = instance.objective.dim();
    let v0 = match &ode.v0 {
        None => vec![0.0; dim],
        Some(v) => v.clone(),
    };

    let prob = DynamicsProblem::new(instance.objective.clone(), sched, alpha, ode.t0, x0, v0)?;
    let traj = integrate(&prob, ode.t_end, ode.rtol, ode.atol)?;
    let phistar = instance
        .theta_star
        .ok_or_else(|| Error::usage("instance has no reference infimum for the energy series"))?;
    let series = energy_series(&traj, &prob, instance.xstar.as_deref(), phistar)?;

    let path = dir.join("trajectory.csv");
    write_trajectory_csv(create(&path)?, &traj, &series, Some(&hash))?;
    let final_value = instance
        .objective
        .eval_smooth(traj.positions.last().expect("nonempty"))?
        .0;
    Ok(OdeArtifacts { trajectory_csv: path, samples: traj.len(), final_value })
}

/// Outcome of a parameter sweep.
#[derive(Debug)]
pub struct SweepOutcome {
    pub summary_csv: PathBuf,
    pub cells: usize,
    pub failed_cells: usize,
}

struct CellSpec {
    index: usize,
    alpha: f64,
    p: f64,
    step: StepSpec,
}

/// Runs the Cartesian α × p × s grid concurrently and writes one summary
/// row per cell (deterministic order). Numerically failing cells are
/// flagged; the sweep only counts as failed when every cell fails.
pub fn cmd_sweep(
    config: &ExperimentConfig,
    config_bytes: &[u8],
    override_dir: Option<&Path>,
    jobs: Option<usize>,
    allow_no_guarantee: bool,
) -> Result<SweepOutcome> {
    let hash = config_hash(config_bytes);
    let dir = out_dir(config, override_dir);
    ensure_dir(&dir)?;

    let solver = config
        .solver
        .as_ref()
        .ok_or_else(|| Error::usage("sweep needs a solver block"))?;
    let grid = config
        .grid
        .as_ref()
        .ok_or_else(|| Error::usage("sweep needs a grid block"))?;
    let alphas = grid.alpha.clone().unwrap_or_else(|| vec![solver.alpha]);
    let ps = grid.p.clone().unwrap_or_else(|| vec![config.perturbation.p]);
    let steps = grid.s.clone().unwrap_or_else(|| vec![solver.s]);
    if alphas.is_empty() || ps.is_empty() || steps.is_empty() {
        return Err(Error::usage("grid value sets must be nonempty"));
    }

    let instance = config.build_problem()?;
    let dim = instance.objective.dim();
    let x0 = config.start_point(&instance)?;
    let lipschitz = instance.objective.lipschitz();

    let mut cells = Vec::new();
    let mut index = 0usize;
    for alpha in &alphas {
        for p in &ps {
            for step in &steps {
                cells.push(CellSpec { index, alpha: *alpha, p: *p, step: *step });
                index += 1;
            }
        }
    }

    // Usage-level validation happens before any cell runs.
    for cell in &cells {
        let params = SolverParams {
            alpha: cell.alpha,
            step: cell.step.resolve(lipschitz),
            max_iter: solver.max_iter,
            value_tol: solver.value_tol.unwrap_or(0.0),
            allow_no_guarantee,
        };
        params.validate(lipschitz)?;
        // The perturbation block must instantiate at each grid p.
        let mut pert = config.perturbation.clone();
        if grid.p.is_some() {
            pert.kind = "power_law".to_string();
            pert.p = cell.p;
        }
        pert.to_schedule(dim)?;
    }

    let run_cell = |cell: &CellSpec| -> SweepRow {
        let step = cell.step.resolve(lipschitz);
        let params = SolverParams {
            alpha: cell.alpha,
            step,
            max_iter: solver.max_iter,
            value_tol: solver.value_tol.unwrap_or(0.0),
            allow_no_guarantee,
        };
        let mut pert = config.perturbation.clone();
        if grid.p.is_some() {
            pert.kind = "power_law".to_string();
            pert.p = cell.p;
        }
        let sched = pert.to_schedule(dim).expect("validated above");
        let row = SweepRow {
            cell: cell.index,
            alpha: cell.alpha,
            p: cell.p,
            s: step,
            final_gap: None,
            slope: None,
            constant_c: None,
            violations: 0,
            failed: false,
        };
        match crate::solver::run(
            &instance.objective,
            &sched,
            &params,
            &x0,
            instance.theta_star,
            |_| false,
        ) {
            Err(_) => SweepRow { failed: true, ..row },
            Ok(history) => {
                let mut out = row;
                if let Some((xs, ts)) = instance.reference() {
                    out.final_gap = Some(history.final_record().theta - ts);
                    out.slope = fit_window_slope(&history, ts);
                    if let Ok(report) = certify(
                        &history,
                        &instance.objective,
                        &sched,
                        xs,
                        ts,
                        CertifyOptions::default(),
                    ) {
                        out.constant_c = report.constant_c;
                        out.violations = report.violations.len();
                    }
                } else {
                    out.final_gap = instance
                        .theta_star
                        .map(|ts| history.final_record().theta - ts);
                }
                out
            }
        }
    };

    let rows: Vec<SweepRow> = match jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::usage(format!("cannot build thread pool: {e}")))?;
            pool.install(|| cells.par_iter().map(run_cell).collect())
        }
        None => cells.par_iter().map(run_cell).collect(),
    };

    let failed_cells = rows.iter().filter(|r| r.failed).count();
    let path = dir.join("sweep_summary.csv");
    write_sweep_csv(create(&path)?, &rows, Some(&hash))?;

    if failed_cells == rows.len() {
        return Err(Error::numerical(format!(
            "all {} sweep cells failed numerically",
            rows.len()
        )));
    }
    Ok(SweepOutcome { summary_csv: path, cells: rows.len(), failed_cells })
}

/// Verdict document written by the verify command.
#[derive(Debug, Serialize)]
pub struct VerdictDoc {
    pub suite: String,
    pub criteria: Vec<CriterionResult>,
    pub verdict: String,
}

/// Outcome of a verification run.
#[derive(Debug)]
pub struct VerifyOutcome {
    pub verdict_json: PathBuf,
    pub results: Vec<CriterionResult>,
    pub all_pass: bool,
}

/// Runs the named criteria suite and writes the verdict JSON listing each
/// criterion with its measured value and threshold.
pub fn cmd_verify(suite_name: &str, out: &Path) -> Result<VerifyOutcome> {
    let suite: Suite = suite_name.parse()?;
    let results = crate::verify::run_suite(suite)?;
    let all_pass = results.iter().all(|r| r.pass);
    ensure_dir(out)?;
    let path = out.join("verdict.json");
    let doc = VerdictDoc {
        suite: suite_name.to_string(),
        criteria: results.clone(),
        verdict: if all_pass { "pass".to_string() } else { "fail".to_string() },
    };
    write_json(create(&path)?, &doc)?;
    Ok(VerifyOutcome { verdict_json: path, results, all_pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn solve_config(extra: &str) -> (ExperimentConfig, Vec<u8>) {
        let text = format!(
            r#"{{
            "problem": {{"name": "quadratic", "dim": 2}},
            "solver": {{"alpha": 3.0, "s": "auto", "max_iter": 200}}{extra}
        }}"#
        );
        (ExperimentConfig::from_json(&text).unwrap(), text.into_bytes())
    }

    #[test]
    fn solve_writes_artifacts() {
        let (cfg, bytes) = solve_config("");
        let dir = tempdir().unwrap();
        let artifacts = cmd_solve(&cfg, &bytes, Some(dir.path()), false).unwrap();
        assert!(artifacts.history_csv.exists());
        assert!(artifacts.certification_json.unwrap().exists());
        assert_eq!(artifacts.iterations, 200);
        assert_eq!(artifacts.violations, 0);
    }

    #[test]
    fn solve_artifacts_are_reproducible() {
        let (cfg, bytes) = solve_config("");
        let d1 = tempdir().unwrap();
        let d2 = tempdir().unwrap();
        cmd_solve(&cfg, &bytes, Some(d1.path()), false).unwrap();
        cmd_solve(&cfg, &bytes, Some(d2.path()), false).unwrap();
        let a = fs::read(d1.path().join("history.csv")).unwrap();
        let b = fs::read(d2.path().join("history.csv")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn low_alpha_certification_is_stamped() {
        let (cfg, bytes) = solve_config("");
        let mut cfg2 = cfg.clone();
        cfg2.solver.as_mut().unwrap().alpha = 2.5;
        let dir = tempdir().unwrap();
        cmd_solve(&cfg2, &bytes, Some(dir.path()), true).unwrap();
        let cert: serde_json::Value = serde_json::from_str(
            &fs::read_to_string(dir.path().join("certification.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(cert["guarantee_regime"], false);
        assert!(cert["verdict"]
            .as_str()
            .unwrap()
            .contains("outside guarantee regime"));
    }

    #[test]
    fn ode_run_writes_trajectory() {
        let text = r#"{
            "problem": {"name": "quadratic", "dim": 1},
            "solver": {"alpha": 3.0, "s": "auto", "max_iter": 1},
            "ode": {"t0": 1.0, "T": 50.0, "rtol": 1e-8, "atol": 1e-12}
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        let dir = tempdir().unwrap();
        let artifacts = cmd_simulate_ode(&cfg, text.as_bytes(), Some(dir.path())).unwrap();
        assert!(artifacts.trajectory_csv.exists());
        assert!(artifacts.samples >= 500);
    }

    #[test]
    fn ode_rejects_nonsmooth() {
        let text = r#"{
            "problem": {"name": "lasso1d"},
            "solver": {"alpha": 3.0, "s": "auto", "max_iter": 1},
            "ode": {"t0": 1.0, "T": 10.0}
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        let dir = tempdir().unwrap();
        let err = cmd_simulate_ode(&cfg, text.as_bytes(), Some(dir.path())).unwrap_err();
        assert!(err.to_string().contains("differentiable"), "{err}");
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn sweep_grid_shape_and_determinism() {
        let text = r#"{
            "problem": {"name": "quadratic", "dim": 2},
            "solver": {"alpha": 3.0, "s": "auto", "max_iter": 300},
            "perturbation": {"kind": "power_law", "c": 0.01, "p": 3.0, "direction_seed": 1},
            "grid": {"alpha": [3.0, 4.0, 5.0], "p": [3.0]}
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        let d1 = tempdir().unwrap();
        let out = cmd_sweep(&cfg, text.as_bytes(), Some(d1.path()), Some(2), false).unwrap();
        assert_eq!(out.cells, 3);
        assert_eq!(out.failed_cells, 0);
        let a = fs::read(&out.summary_csv).unwrap();
        assert_eq!(String::from_utf8_lossy(&a).lines().count(), 2 + 3);

        let d2 = tempdir().unwrap();
        let out2 = cmd_sweep(&cfg, text.as_bytes(), Some(d2.path()), Some(1), false).unwrap();
        let b = fs::read(&out2.summary_csv).unwrap();
        assert_eq!(a, b, "sweep summaries must be byte-identical");
    }

    #[test]
    fn sweep_divergent_p_gets_infinite_sentinel() {
        let text = r#"{
            "problem": {"name": "quadratic", "dim": 2},
            "solver": {"alpha": 3.0, "s": "auto", "max_iter": 200},
            "perturbation": {"kind": "power_law", "c": 0.01, "p": 3.0},
            "grid": {"p": [1.0, 3.0]}
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        let dir = tempdir().unwrap();
        let out = cmd_sweep(&cfg, text.as_bytes(), Some(dir.path()), None, false).unwrap();
        let body = fs::read_to_string(&out.summary_csv).unwrap();
        let p1_row: Vec<&str> = body
            .lines()
            .find(|l| l.starts_with("0,"))
            .unwrap()
            .split(',')
            .collect();
        assert_eq!(p1_row[6], "inf", "p=1 row must carry the infinite-C sentinel: {body}");
    }

    #[test]
    fn verify_fast_suite_passes_and_writes_verdict() {
        let dir = tempdir().unwrap();
        let out = cmd_verify("fast", dir.path()).unwrap();
        assert!(out.all_pass);
        assert!(out.verdict_json.exists());
        let doc: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&out.verdict_json).unwrap()).unwrap();
        assert_eq!(doc["verdict"], "pass");
        assert!(doc["criteria"].as_array().unwrap().len() >= 7);
        assert!(cmd_verify("bogus", dir.path()).is_err());
    }
}
