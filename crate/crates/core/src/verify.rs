//! Machine-checkable verification suite.
//!
//! Every criterion pins its tolerance here, runs against the canonical
//! instances, and reports one measured-vs-threshold entry. The `fast`
//! suite covers the sub-second checks; `full` adds the long-history
//! certification sweeps.

use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::diagnostics::{
    check_monotone, fit_rate, gronwall_bellman_check, gronwall_discrete_check,
    iterate_convergence_report, lyapunov_ek, lyapunov_g_series, theorem_constants,
    value_gap_bound, GronwallInstance,
};
use crate::dynamics::{
    energy_series, fast_rate_bound, integrate, rate_envelope, DynamicsProblem,
};
use crate::error::{Error, Result};
use crate::linalg::{cumtrapz, dist};
use crate::objective::{CompositeObjective, ProxOp};
use crate::oracles::golden_section_min;
use crate::perturbation::{Direction, PerturbationSchedule};
use crate::problems::{by_name, make_empty_argmin, make_quadratic, ProblemInstance};
use crate::solver::{run_basic, RunHistory, SolverParams};

/// Which checks to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Fast,
    Full,
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Suite::Fast),
            "full" => Ok(Suite::Full),
            other => Err(Error::usage(format!("unknown suite '{other}' (expected fast or full)"))),
        }
    }
}

/// One criterion outcome: pass iff `measured <= threshold` (after the
/// criterion's own normalization), with context in `detail`.
#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: String,
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub pass: bool,
    pub detail: String,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "{} {:22} measured {:.6e} vs threshold {:.6e} [{}] {}",
            if self.pass { "PASS" } else { "FAIL" },
            format!("{}:{}", self.id, self.name),
            self.measured,
            self.threshold,
            self.id,
            self.detail
        )
    }
}

const CERT_PROBLEMS: [&str; 5] =
    ["quadratic", "illcond_quadratic", "lasso_rand", "boxqp", "even_quartic"];
const CERT_ALPHAS: [f64; 3] = [3.0, 4.0, 5.0];
/// 10⁴ certified indices need z up to 10⁴ + 1.
const CERT_ITERS: usize = 10_001;
const CERT_K: usize = 10_000;
const PROBLEM_SEED: u64 = 7;
const DIRECTION_SEED: u64 = 42;

struct CertRun {
    label: String,
    instance_idx: usize,
    history: RunHistory,
    sched: PerturbationSchedule,
}

struct CertFixture {
    instances: Vec<ProblemInstance>,
    runs: Vec<CertRun>,
    build_seconds: f64,
}

fn build_cert_fixture() -> Result<CertFixture> {
    let start = Instant::now();
    let mut instances = Vec::new();
    for name in CERT_PROBLEMS {
        instances.push(by_name(name, None, PROBLEM_SEED, None)?);
    }
    let mut runs = Vec::new();
    for (idx, inst) in instances.iter().enumerate() {
        let dim = inst.objective.dim();
        let schedules = [
            PerturbationSchedule::zero(dim),
            PerturbationSchedule::power_law(
                0.01,
                3.0,
                Direction::seeded(DIRECTION_SEED, dim),
            )?,
        ];
        for sched in schedules {
            for alpha in CERT_ALPHAS {
                let params =
                    SolverParams::new(alpha, 1.0 / inst.objective.lipschitz(), CERT_ITERS);
                let history = run_basic(&inst.objective, &sched, &params, &inst.default_x0)
                    .map_err(Error::from)?;
                runs.push(CertRun {
                    label: format!(
                        "{} alpha={alpha} {}",
                        CERT_PROBLEMS[idx],
                        if sched.is_zero() { "g=0" } else { "p=3,c=0.01" }
                    ),
                    instance_idx: idx,
                    history,
                    sched: sched.clone(),
                });
            }
        }
    }
    Ok(CertFixture { instances, runs, build_seconds: start.elapsed().as_secs_f64() })
}

fn hq_objective() -> CompositeObjective {
    make_quadratic(&[1.0], &[0.0]).expect("static").objective
}

fn hq_ode(alpha: f64, sched: PerturbationSchedule) -> DynamicsProblem {
    DynamicsProblem::new(hq_objective(), sched, alpha, 1.0, vec![1.0], vec![0.0])
        .expect("static")
}

fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1e-300)
}

/// Criterion 1: the three-iterate hand run is reproduced to 1e-12 relative
/// in under a millisecond.
fn criterion_hand_run() -> Result<CriterionResult> {
    let obj = hq_objective();
    let sched = PerturbationSchedule::zero(1);
    let params = SolverParams::new(3.0, 0.5, 3);
    let start = Instant::now();
    let history = run_basic(&obj, &sched, &params, &[1.0]).map_err(Error::from)?;
    let elapsed = start.elapsed();
    let g = lyapunov_g_series(&history, 3.0, 0.5, &[0.0], 0.0)?;
    let measured = [
        rel_err(history.record(2)?.x[0], 0.5),
        rel_err(history.record(3)?.x[0], 0.1875),
        rel_err(history.record(2)?.z[0], 0.25),
        rel_err(g[0], 3.0),
        rel_err(g[1], 0.6875),
        rel_err(g[2], 0.171875),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let in_time = elapsed.as_secs_f64() < 1e-3;
    Ok(CriterionResult {
        id: "1".into(),
        name: "hand_run".into(),
        measured,
        threshold: 1e-12,
        pass: measured <= 1e-12 && in_time,
        detail: format!("runtime {:.1} us (< 1 ms required)", elapsed.as_secs_f64() * 1e6),
    })
}

/// Criterion 2: E_K nonincreasing (tolerance 1e-9·(1+|E_K(1)|)) across all
/// 30 certification runs, finishing in under 30 s.
fn criterion_lyapunov_monotone(fix: &CertFixture) -> Result<CriterionResult> {
    let start = Instant::now();
    let mut violations = 0usize;
    let mut worst = String::new();
    for run in &fix.runs {
        let inst = &fix.instances[run.instance_idx];
        let (xs, ts) = inst.reference().expect("certification instances have references");
        let p = &run.history.params;
        let ek = lyapunov_ek(&run.history, &run.sched, p.alpha, p.step, xs, ts, CERT_K)?;
        let tol = 1e-9 * (1.0 + ek[0].abs());
        let v = check_monotone(&ek, tol, 0.0);
        if !v.is_empty() {
            violations += v.len();
            worst = format!("{} first at k={}", run.label, v[0].k);
        }
    }
    let elapsed = fix.build_seconds + start.elapsed().as_secs_f64();
    Ok(CriterionResult {
        id: "2".into(),
        name: "lyapunov_monotone".into(),
        measured: violations as f64,
        threshold: 0.0,
        pass: violations == 0 && elapsed < 30.0,
        detail: format!("30 runs x 10^4 iterations in {elapsed:.2} s (< 30 s required) {worst}"),
    })
}

/// Criterion 3: recorded gap ≤ C(α−1)/(2s(k+α−2)²) for every k ≤ 10⁴ on
/// all certification runs.
fn criterion_value_bound(fix: &CertFixture) -> Result<CriterionResult> {
    let mut violations = 0usize;
    let mut worst = String::new();
    for run in &fix.runs {
        let inst = &fix.instances[run.instance_idx];
        let (xs, ts) = inst.reference().expect("reference");
        let p = &run.history.params;
        let constants =
            theorem_constants(&run.history, &run.sched, p.alpha, p.step, xs, ts)?;
        let c = constants.c.expect("certification schedules are summable");
        for (i, gap) in run.history.gaps(ts).iter().enumerate().take(CERT_K) {
            let bound = value_gap_bound(c, p.alpha, p.step, i + 1);
            if *gap > bound + 1e-12 * (1.0 + bound.abs()) {
                violations += 1;
                if worst.is_empty() {
                    worst = format!("{} at k={} gap {gap} > bound {bound}", run.label, i + 1);
                }
            }
        }
    }
    Ok(CriterionResult {
        id: "3".into(),
        name: "value_bound".into(),
        measured: violations as f64,
        threshold: 0.0,
        pass: violations == 0,
        detail: worst,
    })
}

/// Criterion 4: fitted log-log slope ≤ −1.9 over k ∈ [10², 10⁴] on the
/// ill-conditioned quadratic (α = 3, g ≡ 0), gaps above the floor.
fn criterion_rate_slope(fix: &CertFixture) -> Result<CriterionResult> {
    let run = fix
        .runs
        .iter()
        .find(|r| r.label.starts_with("illcond_quadratic alpha=3 g=0"))
        .expect("fixture contains the illcond run");
    let inst = &fix.instances[run.instance_idx];
    let (_, ts) = inst.reference().expect("reference");
    let fit = fit_rate(&run.history.gaps(ts), 100, 10_000)?;
    Ok(CriterionResult {
        id: "4".into(),
        name: "rate_slope".into(),
        measured: fit.slope,
        threshold: -1.9,
        pass: fit.slope <= -1.9 && fit.excluded.is_empty(),
        detail: format!("{} floor-excluded points (0 required)", fit.excluded.len()),
    })
}

/// Criterion 5: iterate convergence at α = 4 on the quadratic over 10⁵
/// iterations: plateau ratios < 1e-3, final distance ≤ 1e-4, h_k
/// oscillation < 1e-6. Measured value is the worst normalized ratio.
fn criterion_iterate_convergence() -> Result<CriterionResult> {
    let inst = by_name("quadratic", None, PROBLEM_SEED, None)?;
    let sched = PerturbationSchedule::zero(inst.objective.dim());
    let params = SolverParams::new(4.0, 1.0 / inst.objective.lipschitz(), 100_000);
    let history =
        run_basic(&inst.objective, &sched, &params, &inst.default_x0).map_err(Error::from)?;
    let (xs, ts) = inst.reference().expect("reference");
    let rep = iterate_convergence_report(&history, Some(xs), Some(ts))?;
    let final_dist = dist(&history.final_record().x, xs);
    let ratios = [
        rep.plateau_sq_step / 1e-3,
        rep.plateau_gap.expect("reference supplied") / 1e-3,
        final_dist / 1e-4,
        rep.h_tail_oscillation.expect("reference supplied") / 1e-6,
    ];
    let measured = ratios.into_iter().fold(0.0, f64::max);
    Ok(CriterionResult {
        id: "5".into(),
        name: "iterate_convergence".into(),
        measured,
        threshold: 1.0,
        pass: measured <= 1.0,
        detail: format!(
            "plateau_sq {:.2e}, plateau_gap {:.2e}, dist {:.2e}, h_osc {:.2e}",
            rep.plateau_sq_step,
            rep.plateau_gap.unwrap(),
            final_dist,
            rep.h_tail_oscillation.unwrap()
        ),
    })
}

/// Criterion 6: ‖z_k − x*‖ ≤ M + 1e-9·(1+M) on every certification run.
fn criterion_bounded_z(fix: &CertFixture) -> Result<CriterionResult> {
    let mut violations = 0usize;
    let mut worst = String::new();
    for run in &fix.runs {
        let inst = &fix.instances[run.instance_idx];
        let (xs, ts) = inst.reference().expect("reference");
        let p = &run.history.params;
        let constants =
            theorem_constants(&run.history, &run.sched, p.alpha, p.step, xs, ts)?;
        let m = constants.m.expect("summable");
        let allowed = m + 1e-9 * (1.0 + m);
        for r in &run.history.records {
            let zd = dist(&r.z, xs);
            if zd > allowed {
                violations += 1;
                if worst.is_empty() {
                    worst = format!("{} at k={} ‖z−x*‖={zd} > M={m}", run.label, r.k);
                }
            }
        }
    }
    Ok(CriterionResult {
        id: "6".into(),
        name: "bounded_z".into(),
        measured: violations as f64,
        threshold: 0.0,
        pass: violations == 0,
        detail: worst,
    })
}

/// Criterion 7: total energy W nonincreasing within 1e-6 on the scalar
/// quadratic flow over [1, 10³] at rtol 1e-8, and the Lyapunov energy
/// nonincreasing for α ∈ {3, 4}; all in under 5 s.
fn criterion_energy_dissipation() -> Result<CriterionResult> {
    let start = Instant::now();
    let mut violations = 0usize;
    let mut detail = String::new();
    for alpha in [3.0, 4.0] {
        let prob = hq_ode(alpha, PerturbationSchedule::zero(1));
        let traj = integrate(&prob, 1e3, 1e-8, 1e-12)?;
        let series = energy_series(&traj, &prob, Some(&[0.0]), 0.0)?;
        if alpha == 3.0 {
            let vw = check_monotone(&series.total_energy, 1e-6, 0.0);
            violations += vw.len();
            if !vw.is_empty() {
                detail = format!("W violation at sample {}", vw[0].k);
            }
        }
        let e = series.lyapunov.as_ref().expect("minimizer supplied");
        let ve = check_monotone(e, 1e-6 * (1.0 + e[0].abs()), 0.0);
        violations += ve.len();
        if !ve.is_empty() && detail.is_empty() {
            detail = format!("E violation at sample {} (alpha={alpha})", ve[0].k);
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    Ok(CriterionResult {
        id: "7".into(),
        name: "energy_dissipation".into(),
        measured: violations as f64,
        threshold: 0.0,
        pass: violations == 0 && elapsed < 5.0,
        detail: format!("{detail} runtime {elapsed:.2} s (< 5 s required)"),
    })
}

/// Criterion 8: sup t²·gap within the explicit fast-rate bound on the
/// perturbed flow g(t) = 0.01·t⁻³ at α = 3.
fn criterion_ode_fast_rate() -> Result<CriterionResult> {
    let sched =
        PerturbationSchedule::power_law(0.01, 3.0, Direction::fixed(vec![1.0])?)?;
    let prob = hq_ode(3.0, sched);
    let traj = integrate(&prob, 1e3, 1e-8, 1e-12)?;
    let series = energy_series(&traj, &prob, Some(&[0.0]), 0.0)?;
    let envelope = rate_envelope(&series);
    let bound = fast_rate_bound(&prob, &traj, &[0.0], 0.0)?;
    Ok(CriterionResult {
        id: "8".into(),
        name: "ode_fast_rate".into(),
        measured: envelope,
        threshold: bound,
        pass: envelope <= bound,
        detail: format!("sup t^2 gap {envelope:.4} vs bound {bound:.4}"),
    })
}

/// Criterion 9: on the unattained-infimum problem the value at T = 10³
/// drops to a tenth of its initial value.
fn criterion_empty_argmin() -> Result<CriterionResult> {
    let inst = make_empty_argmin();
    let prob = DynamicsProblem::new(
        inst.objective.clone(),
        PerturbationSchedule::zero(1),
        3.0,
        1.0,
        inst.default_x0.clone(),
        vec![0.0],
    )?;
    let traj = integrate(&prob, 1e3, 1e-8, 1e-10)?;
    let v_start = inst.objective.eval_smooth(&traj.positions[0])?.0;
    let v_end = inst.objective.eval_smooth(traj.positions.last().expect("nonempty"))?.0;
    let ratio = v_end / v_start;
    Ok(CriterionResult {
        id: "9".into(),
        name: "empty_argmin".into(),
        measured: ratio,
        threshold: 0.1,
        pass: ratio <= 0.1,
        detail: format!("value {v_start:.4} -> {v_end:.6}"),
    })
}

fn saturating_gronwall_instance(rng: &mut ChaCha8Rng) -> GronwallInstance {
    let n = rng.random_range(3..50);
    let c: f64 = rng.random_range(0.01..5.0);
    let coeffs: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..0.5)).collect();
    let mut acc = c;
    let mut subject = Vec::with_capacity(n);
    for b in &coeffs {
        let a = (b + (b * b + 4.0 * acc).sqrt()) / 2.0;
        acc += b * a;
        subject.push(a);
    }
    GronwallInstance { constant: c, coeffs, subject }
}

/// Criterion 10: 10³ randomized saturating instances per Gronwall lemma
/// with zero bound violations, plus the worst-case quadratic root
/// reproduced to 1e-9.
fn criterion_gronwall_oracles() -> Result<CriterionResult> {
    let mut failures = 0usize;

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..1000 {
        let inst = saturating_gronwall_instance(&mut rng);
        let out = gronwall_discrete_check(&inst)?;
        if !(out.applicable && out.holds) {
            failures += 1;
        }
    }

    // Worst case: a₁ saturates a² = 1 + 0.5·a, root (0.5 + √4.25)/2.
    let root_inst = GronwallInstance {
        constant: 1.0,
        coeffs: vec![0.5, 0.25],
        subject: vec![(0.5 + 4.25f64.sqrt()) / 2.0, 0.0],
    };
    let a1 = root_inst.subject[0];
    let expected_root = (0.5 + 4.25f64.sqrt()) / 2.0;
    let out = gronwall_discrete_check(&root_inst)?;
    if !(out.applicable && out.holds) || (out.bound - 1.75).abs() > 1e-12 {
        failures += 1;
    }
    if (a1 - expected_root).abs() > 1e-9 || a1 > 1.75 {
        failures += 1;
    }

    // Continuous lemma: saturating-profile instances on random grids.
    let mut rng = ChaCha8Rng::seed_from_u64(2025);
    for _ in 0..1000 {
        let n = rng.random_range(20..120);
        let mut grid = Vec::with_capacity(n);
        let mut t = 0.0;
        for _ in 0..n {
            grid.push(t);
            t += rng.random_range(0.01..0.1);
        }
        let c: f64 = rng.random_range(0.1..3.0);
        let m: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0)).collect();
        let theta: f64 = rng.random_range(0.5..0.95);
        let im = cumtrapz(&grid, &m);
        let w: Vec<f64> = im.iter().map(|s| c + theta * s).collect();
        let out = gronwall_bellman_check(c, &m, &w, &grid)?;
        if !(out.applicable && out.holds) {
            failures += 1;
        }
    }

    // Saturating equality: m ≡ 1 on [0,1], c = 1, w = 1 + t, w(1) = 2 = bound.
    let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    let ones = vec![1.0; grid.len()];
    let w_sat: Vec<f64> = grid.iter().map(|t| 1.0 + t).collect();
    let out = gronwall_bellman_check(1.0, &ones, &w_sat, &grid)?;
    if !(out.applicable && out.holds) {
        failures += 1;
    }

    Ok(CriterionResult {
        id: "10".into(),
        name: "gronwall_oracles".into(),
        measured: failures as f64,
        threshold: 0.0,
        pass: failures == 0,
        detail: format!("worst-case root {a1:.12} <= 1.75"),
    })
}

/// Criterion 11: closed-form proximal maps against the golden-section
/// oracle, 100 seeded inputs per kind, tolerance 1e-6.
fn criterion_prox_oracle() -> Result<CriterionResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut max_diff = 0.0f64;
    for kind in 0..4usize {
        for _ in 0..100 {
            let x = rng.random_range(-5.0..5.0);
            let gamma = rng.random_range(0.05..3.0);
            let (op, oracle): (ProxOp, f64) = match kind {
                0 => (ProxOp::Zero, golden_section_min(|t| (t - x) * (t - x) / (2.0 * gamma), x - 1.0, x + 1.0, 1e-10)),
                1 => {
                    let w = 0.8;
                    (
                        ProxOp::L1 { weight: w },
                        golden_section_min(
                            |t| w * t.abs() + (t - x) * (t - x) / (2.0 * gamma),
                            -6.0,
                            6.0,
                            1e-10,
                        ),
                    )
                }
                2 => (
                    // Indicator prox restricted to its domain: minimize the
                    // quadratic over the feasible bracket.
                    ProxOp::Box { lower: vec![-0.5], upper: vec![1.5] },
                    golden_section_min(|t| (t - x) * (t - x) / (2.0 * gamma), -0.5, 1.5, 1e-10),
                ),
                _ => {
                    let (w, c) = (2.0, 0.3);
                    (
                        ProxOp::Quadratic { weight: w, center: vec![c] },
                        golden_section_min(
                            |t| 0.5 * w * (t - c) * (t - c) + (t - x) * (t - x) / (2.0 * gamma),
                            -6.0,
                            6.0,
                            1e-10,
                        ),
                    )
                }
            };
            let got = op.prox(gamma, &[x])?[0];
            max_diff = max_diff.max((got - oracle).abs());
        }
    }
    Ok(CriterionResult {
        id: "11".into(),
        name: "prox_oracle".into(),
        measured: max_diff,
        threshold: 1e-6,
        pass: max_diff <= 1e-6,
        detail: "4 closed-form kinds x 100 inputs".into(),
    })
}

/// Criterion 12: with α = 3 and g ≡ 0 the solver bit-matches an
/// independently coded momentum/prox-step loop for 100 iterations.
fn criterion_fista_bitmatch() -> Result<CriterionResult> {
    let obj = hq_objective();
    let sched = PerturbationSchedule::zero(1);
    let params = SolverParams::new(3.0, 0.5, 100);
    let history = run_basic(&obj, &sched, &params, &[1.0]).map_err(Error::from)?;

    // Independent loop: y = x_k + ((k−1)/(k+2))(x_k − x_{k−1});
    // x_{k+1} = prox_{sΦ}(y − s∇Ψ(y)).
    let s = 0.5;
    let mut x_prev = vec![1.0];
    let mut x = vec![1.0];
    let mut mismatches = 0usize;
    let mut max_diff = 0.0f64;
    for k in 1..=100usize {
        let recorded = &history.record(k)?.x;
        if recorded[0] != x[0] {
            mismatches += 1;
            max_diff = max_diff.max((recorded[0] - x[0]).abs());
        }
        if k == 100 {
            break;
        }
        let gamma = (k as f64 - 1.0) / (k as f64 + 2.0);
        let y: Vec<f64> =
            x.iter().zip(&x_prev).map(|(a, b)| a + gamma * (a - b)).collect();
        let (_, grad) = obj.eval_smooth(&y)?;
        let shifted: Vec<f64> = y.iter().zip(&grad).map(|(yi, gi)| yi - s * gi).collect();
        let next = obj.prox(s, &shifted)?;
        x_prev = x;
        x = next;
    }
    Ok(CriterionResult {
        id: "12".into(),
        name: "fista_bitmatch".into(),
        measured: max_diff,
        threshold: 0.0,
        pass: mismatches == 0,
        detail: format!("{mismatches} mismatched iterates over 100"),
    })
}

/// Runs the suite, returning one result per criterion in order.
pub fn run_suite(suite: Suite) -> Result<Vec<CriterionResult>> {
    let mut out = Vec::new();
    out.push(criterion_hand_run()?);
    if suite == Suite::Full {
        let fixture = build_cert_fixture()?;
        out.push(criterion_lyapunov_monotone(&fixture)?);
        out.push(criterion_value_bound(&fixture)?);
        out.push(criterion_rate_slope(&fixture)?);
        out.push(criterion_iterate_convergence()?);
        out.push(criterion_bounded_z(&fixture)?);
    }
    out.push(criterion_energy_dissipation()?);
    out.push(criterion_ode_fast_rate()?);
    out.push(criterion_empty_argmin()?);
    out.push(criterion_gronwall_oracles()?);
    out.push(criterion_prox_oracle()?);
    out.push(criterion_fista_bitmatch()?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::RunRecord;

    #[test]
    fn fast_suite_passes() {
        let results = run_suite(Suite::Fast).unwrap();
        assert_eq!(results.len(), 7);
        for r in &results {
            assert!(r.pass, "{}", r.line());
        }
    }

    #[test]
    fn suite_parsing() {
        assert_eq!("fast".parse::<Suite>().unwrap(), Suite::Fast);
        assert_eq!("full".parse::<Suite>().unwrap(), Suite::Full);
        assert!("quick".parse::<Suite>().is_err());
    }

    #[test]
    fn tampered_momentum_breaks_certification() {
        // Mutation check: an off-by-one momentum (γ = k/(k+α−1)) run on the
        // scalar quadratic produces a G-monotonicity violation.
        let alpha = 3.0;
        let s = 0.5;
        let mut x_prev = 1.0f64;
        let mut x = 1.0f64;
        let mut records = Vec::new();
        for k in 1..=50usize {
            let kf = k as f64;
            let z = if k == 1 {
                x
            } else {
                x_prev + (kf - 1.0 + alpha - 1.0) / (alpha - 1.0) * (x - x_prev)
            };
            records.push(RunRecord {
                k,
                x: vec![x],
                y: vec![x],
                z: vec![z],
                theta: 0.5 * x * x,
                step_norm: (x - x_prev).abs(),
                perturb_norm: 0.0,
                momentum: kf / (kf + alpha - 1.0),
            });
            let gamma = kf / (kf + alpha - 1.0); // off by one: (k−1) became k
            let y = x + gamma * (x - x_prev);
            let next = y - s * y;
            x_prev = x;
            x = next;
        }
        let history = RunHistory {
            records,
            params: SolverParams::new(alpha, s, 50),
            problem: "tampered".into(),
        };
        let g = lyapunov_g_series(&history, alpha, s, &[0.0], 0.0).unwrap();
        let violations = check_monotone(&g, 1e-9 * (1.0 + g[0].abs()), 0.0);
        assert!(!violations.is_empty(), "tampered run must violate monotonicity");
    }
}
