//! Lyapunov functions, theorem constants, and bound certification for
//! solver histories.
//!
//! The discrete Lyapunov function along a run with reference (x*, θ*) is
//!
//! ```text
//! G(k)   = (2s/(α−1))·(k+α−2)²·(Θ(x_k) − θ*) + (α−1)·‖z_k − x*‖²
//! E_K(k) = G(k) + Σ_{j=k}^{K} 2s·(j+α−1)·⟨g_j, z_{j+1} − x*⟩
//! ```
//!
//! For α ≥ 3 and any perturbation sequence, (E_K(k)) is nonincreasing in k;
//! with k-weighted-summable perturbations the constants C and M bound the
//! value gap by C(α−1)/(2s(k+α−2)²) and ‖z_k − x*‖ by M. Everything here is
//! a pure function of immutable histories.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{dist, dot};
use crate::objective::CompositeObjective;
use crate::perturbation::PerturbationSchedule;
use crate::solver::RunHistory;

/// Default absolute/relative tolerances for monotonicity certification.
/// Floating-point summation noise in the E_K tails must not produce false
/// violations; override via [`CertifyOptions`] when needed.
pub const MONOTONE_TOL_ABS: f64 = 1e-9;
pub const MONOTONE_TOL_REL: f64 = 1e-9;

/// One certified-check failure: series index (1-based) and overshoot.
#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub k: usize,
    pub magnitude: f64,
}

/// G(k) evaluated from a history at index k (1-based).
pub fn lyapunov_g(
    history: &RunHistory,
    alpha: f64,
    s: f64,
    xstar: &[f64],
    theta_star: f64,
    k: usize,
) -> Result<f64> {
    let r = history.record(k)?;
    let kf = k as f64;
    let zd = dist(&r.z, xstar);
    Ok(2.0 * s / (alpha - 1.0) * (kf + alpha - 2.0) * (kf + alpha - 2.0) * (r.theta - theta_star)
        + (alpha - 1.0) * zd * zd)
}

/// G(k) for k = 1..=len.
pub fn lyapunov_g_series(
    history: &RunHistory,
    alpha: f64,
    s: f64,
    xstar: &[f64],
    theta_star: f64,
) -> Result<Vec<f64>> {
    (1..=history.len())
        .map(|k| lyapunov_g(history, alpha, s, xstar, theta_star, k))
        .collect()
}

/// E_K(k) for k = 1..=K. Needs z_{K+1}, so K must be at most len − 1.
/// With a zero schedule this equals the G series on 1..=K.
pub fn lyapunov_ek(
    history: &RunHistory,
    sched: &PerturbationSchedule,
    alpha: f64,
    s: f64,
    xstar: &[f64],
    theta_star: f64,
    big_k: usize,
) -> Result<Vec<f64>> {
    if big_k == 0 || big_k + 1 > history.len() {
        return Err(Error::usage(format!(
            "E_K needs z up to index K+1: K = {big_k} requires history length >= {}, got {}",
            big_k + 1,
            history.len()
        )));
    }
    // Backward tail recursion: T(k) = term(k) + T(k+1), empty tail at K+1.
    let mut tail = vec![0.0; big_k + 1];
    for j in (1..=big_k).rev() {
        let g_j = sched.sample_discrete(j)?;
        let z_next = &history.record(j + 1)?.z;
        let shifted: Vec<f64> = z_next.iter().zip(xstar).map(|(z, x)| z - x).collect();
        let term = 2.0 * s * (j as f64 + alpha - 1.0) * dot(&g_j, &shifted);
        tail[j - 1] = term + tail[j];
    }
    (1..=big_k)
        .map(|k| Ok(lyapunov_g(history, alpha, s, xstar, theta_star, k)? + tail[k - 1]))
        .collect()
}

/// The constants of the value-gap bound; `None` means the perturbation
/// series diverges (hypothesis violated), with the reason in `note`.
#[derive(Clone, Debug, Serialize)]
pub struct TheoremConstants {
    pub c: Option<f64>,
    pub m: Option<f64>,
    pub note: Option<String>,
}

impl TheoremConstants {
    pub fn finite(&self) -> bool {
        self.c.is_some()
    }
}

/// C = G(1) + 2s·S·(√(G(1)/(α−1)) + (2s/(α−1))·S) and
/// M = √(G(1)/(α−1)) + (2s/(α−1))·S, where S = Σ_{j≥1} (j+α−1)‖g_j‖.
///
/// S is truncated at the history length with the analytic power-law tail
/// remainder added (conservative direction). Non-summable schedules get the
/// infinite sentinel.
pub fn theorem_constants(
    history: &RunHistory,
    sched: &PerturbationSchedule,
    alpha: f64,
    s: f64,
    xstar: &[f64],
    theta_star: f64,
) -> Result<TheoremConstants> {
    if !sched.classify_summability().k_weighted_summable {
        return Ok(TheoremConstants {
            c: None,
            m: None,
            note: Some("perturbation schedule is not k-weighted summable".to_string()),
        });
    }
    let g1 = lyapunov_g(history, alpha, s, xstar, theta_star, 1)?;
    let weighted = sched
        .weighted_total_with_tail(alpha, history.len())
        .expect("summable schedule has a finite weighted total");
    let m = (g1 / (alpha - 1.0)).sqrt() + 2.0 * s / (alpha - 1.0) * weighted;
    let c = g1 + 2.0 * s * weighted * m;
    Ok(TheoremConstants { c: Some(c), m: Some(m), note: None })
}

/// Right-hand side of the value-gap bound at index k:
/// C(α−1) / (2s(k+α−2)²).
pub fn value_gap_bound(c: f64, alpha: f64, s: f64, k: usize) -> f64 {
    let kf = k as f64;
    c * (alpha - 1.0) / (2.0 * s * (kf + alpha - 2.0) * (kf + alpha - 2.0))
}

/// All 1-based indices k with series(k+1) > series(k) + tol_abs +
/// tol_rel·|series(k)|. Empty result certifies the series nonincreasing.
pub fn check_monotone(series: &[f64], tol_abs: f64, tol_rel: f64) -> Vec<Violation> {
    let mut out = Vec::new();
    for i in 0..series.len().saturating_sub(1) {
        let allowed = series[i] + tol_abs + tol_rel * series[i].abs();
        if series[i + 1] > allowed {
            out.push(Violation { k: i + 1, magnitude: series[i + 1] - series[i] });
        }
    }
    out
}

/// Least-squares slope of log(gap) against log(k).
#[derive(Clone, Debug, Serialize)]
pub struct RateFit {
    pub slope: f64,
    /// 1-based indices excluded for sitting at the numerical floor.
    pub excluded: Vec<usize>,
}

/// Fits the log-log decay rate of `gaps` (gap at iterate k = position k−1)
/// over k ∈ [k_from, k_to]. Entries at or below the numerical floor
/// 1e-15·gap(1) are excluded and reported; fewer than 10 usable points is
/// a usage error.
pub fn fit_rate(gaps: &[f64], k_from: usize, k_to: usize) -> Result<RateFit> {
    if k_from == 0 || k_from > k_to || k_to > gaps.len() {
        return Err(Error::usage(format!(
            "fit range [{k_from}, {k_to}] invalid for {} gap entries",
            gaps.len()
        )));
    }
    let floor = 1e-15 * gaps[0];
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut excluded = Vec::new();
    for k in k_from..=k_to {
        let g = gaps[k - 1];
        if g <= floor || g <= 0.0 {
            excluded.push(k);
        } else {
            xs.push((k as f64).ln());
            ys.push(g.ln());
        }
    }
    if xs.len() < 10 {
        return Err(Error::usage(format!(
            "rate fit needs at least 10 usable points, got {} ({} excluded at the floor)",
            xs.len(),
            excluded.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(RateFit { slope: sxy / sxx, excluded })
}

/// A discrete Gronwall instance: a_k² ≤ c + Σ_{j≤k} β_j a_j.
#[derive(Clone, Debug)]
pub struct GronwallInstance {
    pub constant: f64,
    pub coeffs: Vec<f64>,
    pub subject: Vec<f64>,
}

/// Outcome of a Gronwall-lemma check. `applicable` records whether the
/// premise inequality held; `holds` is only meaningful when it did.
#[derive(Clone, Debug, Serialize)]
pub struct GronwallOutcome {
    pub applicable: bool,
    pub bound: f64,
    pub holds: bool,
}

/// Checks the discrete Gronwall bound a_k ≤ √c + Σ_j β_j.
pub fn gronwall_discrete_check(inst: &GronwallInstance) -> Result<GronwallOutcome> {
    if inst.constant < 0.0 {
        return Err(Error::usage("Gronwall constant must be nonnegative"));
    }
    if inst.coeffs.len() != inst.subject.len() {
        return Err(Error::usage("coefficient and subject sequences must have equal length"));
    }
    if inst.coeffs.iter().chain(&inst.subject).any(|v| *v < 0.0) {
        return Err(Error::usage("Gronwall sequences must be nonnegative"));
    }
    // Premise: a_k² ≤ c + Σ_{j≤k} β_j a_j, with rounding slack.
    let max_a = inst.subject.iter().copied().fold(0.0, f64::max);
    let pre_tol = 1e-9 * (1.0 + inst.constant + max_a * max_a);
    let mut acc = inst.constant;
    let mut applicable = true;
    for (a, b) in inst.subject.iter().zip(&inst.coeffs) {
        acc += b * a;
        if a * a > acc + pre_tol {
            applicable = false;
            break;
        }
    }
    let bound = inst.constant.sqrt() + inst.coeffs.iter().sum::<f64>();
    let holds = applicable && inst.subject.iter().all(|a| *a <= bound + 1e-12);
    Ok(GronwallOutcome { applicable, bound, holds })
}

/// Outcome of the continuous Gronwall-Bellman check with its pointwise
/// bound curve c + ∫m.
#[derive(Clone, Debug, Serialize)]
pub struct GronwallBellmanOutcome {
    pub applicable: bool,
    pub bound: Vec<f64>,
    pub holds: bool,
}

/// Checks |w(t)| ≤ c + ∫_{t0}^t m on a grid, premise
/// ½w² ≤ ½c² + ∫ m·w verified by trapezoid rule.
pub fn gronwall_bellman_check(
    c: f64,
    m: &[f64],
    w: &[f64],
    grid: &[f64],
) -> Result<GronwallBellmanOutcome> {
    if c < 0.0 {
        return Err(Error::usage("Gronwall-Bellman constant must be nonnegative"));
    }
    if m.len() != grid.len() || w.len() != grid.len() {
        return Err(Error::usage("grid, m, and w must have equal length"));
    }
    if grid.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::usage("grid must be strictly increasing"));
    }
    if m.iter().any(|v| *v < 0.0) {
        return Err(Error::usage("m must be nonnegative"));
    }
    let mw: Vec<f64> = m.iter().zip(w).map(|(mi, wi)| mi * wi).collect();
    let int_mw = crate::linalg::cumtrapz(grid, &mw);
    let int_m = crate::linalg::cumtrapz(grid, m);
    let max_w = w.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let pre_tol = 1e-9 * (1.0 + c * c + max_w * max_w);
    let applicable = w
        .iter()
        .zip(&int_mw)
        .all(|(wi, s)| 0.5 * wi * wi <= 0.5 * c * c + s + pre_tol);
    let bound: Vec<f64> = int_m.iter().map(|s| c + s).collect();
    let holds = applicable && w.iter().zip(&bound).all(|(wi, b)| wi.abs() <= b + 1e-9);
    Ok(GronwallBellmanOutcome { applicable, bound, holds })
}

/// Trajectory-convergence diagnostics mirroring the iterate-convergence
/// theorem: weighted step suprema, summability partial sums, and the
/// distance sequence h_k = ½‖x_k − x*‖².
#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    /// sup_k k·‖x_{k+1} − x_k‖
    pub sup_weighted_step: f64,
    /// partial sums of Σ k‖x_{k+1} − x_k‖²
    pub weighted_sq_step_sums: Vec<f64>,
    /// partial sums of Σ k·θ_k (needs a reference value)
    pub weighted_gap_sums: Option<Vec<f64>>,
    /// h_k = ½‖x_k − x*‖² (needs a reference point)
    pub distance_half_sq: Option<Vec<f64>>,
    /// d_k = ½‖x_k − x_{k−1}‖²
    pub half_sq_steps: Vec<f64>,
    /// γ_k sequence actually used
    pub momentum: Vec<f64>,
    /// fitted log-log slope of θ_k (None without reference or with a
    /// degenerate fit window)
    pub gap_slope: Option<f64>,
    /// tail-decade increment of Σ k‖Δx‖² over its total
    pub plateau_sq_step: f64,
    /// tail-decade increment of Σ k·θ_k over its total
    pub plateau_gap: Option<f64>,
    /// max − min of h_k over the last decade of indices
    pub h_tail_oscillation: Option<f64>,
}

fn plateau_ratio(sums: &[f64]) -> f64 {
    let total = *sums.last().expect("nonempty");
    if total <= 0.0 {
        return 0.0;
    }
    let anchor = sums[sums.len() / 10];
    (total - anchor) / total
}

/// Convergence diagnostics for a history of at least 100 iterates.
pub fn iterate_convergence_report(
    history: &RunHistory,
    xstar: Option<&[f64]>,
    theta_star: Option<f64>,
) -> Result<ConvergenceReport> {
    let len = history.len();
    if len < 100 {
        return Err(Error::usage(format!(
            "convergence report needs at least 100 iterates, got {len}"
        )));
    }
    let records = &history.records;

    let mut sup_weighted_step = 0.0f64;
    let mut weighted_sq_step_sums = Vec::with_capacity(len - 1);
    let mut acc = 0.0;
    // The record at position k (0-based) holds ‖x_{k+1} − x_k‖ for the
    // 1-based iterate index k.
    for (k, r) in records.iter().enumerate().skip(1) {
        let d = r.step_norm;
        sup_weighted_step = sup_weighted_step.max(k as f64 * d);
        acc += k as f64 * d * d;
        weighted_sq_step_sums.push(acc);
    }

    let weighted_gap_sums = theta_star.map(|ts| {
        let mut acc = 0.0;
        records
            .iter()
            .map(|r| {
                acc += r.k as f64 * (r.theta - ts);
                acc
            })
            .collect::<Vec<f64>>()
    });

    let distance_half_sq = xstar.map(|xs| {
        records
            .iter()
            .map(|r| {
                let d = dist(&r.x, xs);
                0.5 * d * d
            })
            .collect::<Vec<f64>>()
    });

    let half_sq_steps = records.iter().map(|r| 0.5 * r.step_norm * r.step_norm).collect();
    let momentum = records.iter().map(|r| r.momentum).collect();

    let gap_slope = theta_star.and_then(|ts| {
        let gaps = history.gaps(ts);
        fit_rate(&gaps, (len / 100).max(10), len).ok().map(|f| f.slope)
    });

    let plateau_sq_step = plateau_ratio(&weighted_sq_step_sums);
    let plateau_gap = weighted_gap_sums.as_ref().map(|s| plateau_ratio(s));
    let h_tail_oscillation = distance_half_sq.as_ref().map(|h| {
        let tail = &h[len / 10..];
        let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    });

    Ok(ConvergenceReport {
        sup_weighted_step,
        weighted_sq_step_sums,
        weighted_gap_sums,
        distance_half_sq,
        half_sq_steps,
        momentum,
        gap_slope,
        plateau_sq_step,
        plateau_gap,
        h_tail_oscillation,
    })
}

/// Replays the forward-backward inequality along a history:
///
/// Θ_k(x_{k+1}) ≤ Θ_k(x) + ⟨G, y_k − x⟩ − (s/2)‖G‖²
///
/// at x = x_k and (when available) x = x*, with Θ_k(u) = Θ(u) − ⟨g_k, u⟩
/// and G = (y_k − x_{k+1})/s recovered from the records. Holds whenever
/// s ≤ 1/L, so violations flag a broken step or a bad Lipschitz constant.
pub fn check_forward_backward(
    history: &RunHistory,
    obj: &CompositeObjective,
    sched: &PerturbationSchedule,
    xstar: Option<&[f64]>,
) -> Result<Vec<Violation>> {
    let s = history.params.step;
    let mut out = Vec::new();
    for pair in history.records.windows(2) {
        let (curr, next) = (&pair[0], &pair[1]);
        let k = curr.k;
        let g_k = sched.sample_discrete(k)?;
        let g_map: Vec<f64> =
            curr.y.iter().zip(&next.x).map(|(y, x)| (y - x) / s).collect();
        let gnorm_sq = dot(&g_map, &g_map);
        let theta_k = |u: &[f64]| -> Result<f64> {
            Ok(obj.eval_composite(u)? - dot(&g_k, u))
        };
        let lhs = theta_k(&next.x)?;
        let mut worst: Option<f64> = None;
        let mut run_point = |x: &[f64]| -> Result<()> {
            let t = theta_k(x)?;
            if !t.is_finite() {
                return Ok(()); // +∞ on the right side: trivially satisfied
            }
            let inner: f64 = g_map
                .iter()
                .zip(curr.y.iter().zip(x))
                .map(|(g, (y, xi))| g * (y - xi))
                .sum();
            let rhs = t + inner - 0.5 * s * gnorm_sq;
            let tol = 1e-9 * (1.0 + lhs.abs().max(t.abs()));
            if lhs > rhs + tol {
                worst = Some(worst.map_or(lhs - rhs, |w: f64| w.max(lhs - rhs)));
            }
            Ok(())
        };
        run_point(&curr.x)?;
        if let Some(xs) = xstar {
            run_point(xs)?;
        }
        if let Some(magnitude) = worst {
            out.push(Violation { k, magnitude });
        }
    }
    Ok(out)
}

/// Tolerances used by [`certify`].
///
/// The E_K monotonicity check runs at the anchored tolerance
/// `tol_abs + tol_rel·|E_K(1)|`: the gap Θ(x_k) − θ* is evaluated by
/// cancellation against |θ*| and enters E_K with a k² weight, so the
/// rounding floor of consecutive differences grows along the run while
/// E_K itself decays. Anchoring at the initial energy keeps that noise
/// from reading as violations.
#[derive(Clone, Copy, Debug)]
pub struct CertifyOptions {
    pub tol_abs: f64,
    pub tol_rel: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions { tol_abs: MONOTONE_TOL_ABS, tol_rel: MONOTONE_TOL_REL }
    }
}

/// One entry of the certification violation ledger.
#[derive(Clone, Debug, Serialize)]
pub struct LedgerEntry {
    pub check: String,
    pub k: usize,
    pub magnitude: f64,
}

/// Full Lyapunov certification of a run against a reference solution.
#[derive(Clone, Debug, Serialize)]
pub struct LyapunovReport {
    pub g_series: Vec<f64>,
    pub ek_series: Vec<f64>,
    /// None encodes the infinite sentinel (non-summable schedule).
    pub constant_c: Option<f64>,
    pub constant_m: Option<f64>,
    pub constants_note: Option<String>,
    pub violations: Vec<LedgerEntry>,
    /// False when α < 3: no monotonicity or rate guarantee applies.
    pub guarantee_regime: bool,
}

/// Evaluates G, E_K (K = len−1), the theorem constants, and every runtime-
/// checkable bound along the history; returns the violation ledger.
pub fn certify(
    history: &RunHistory,
    obj: &CompositeObjective,
    sched: &PerturbationSchedule,
    xstar: &[f64],
    theta_star: f64,
    opts: CertifyOptions,
) -> Result<LyapunovReport> {
    if history.len() < 2 {
        return Err(Error::usage("certification needs at least 2 iterates"));
    }
    let alpha = history.params.alpha;
    let s = history.params.step;
    let guarantee_regime = alpha >= 3.0;

    let g_series = lyapunov_g_series(history, alpha, s, xstar, theta_star)?;
    let big_k = history.len() - 1;
    let ek_series = lyapunov_ek(history, sched, alpha, s, xstar, theta_star, big_k)?;

    let mut violations = Vec::new();
    let anchored_tol = opts.tol_abs + opts.tol_rel * ek_series[0].abs();
    for v in check_monotone(&ek_series, anchored_tol, 0.0) {
        violations.push(LedgerEntry { check: "ek_monotone".into(), k: v.k, magnitude: v.magnitude });
    }

    let constants = theorem_constants(history, sched, alpha, s, xstar, theta_star)?;
    if let (Some(c), Some(m)) = (constants.c, constants.m) {
        let gaps = history.gaps(theta_star);
        for (i, gap) in gaps.iter().enumerate() {
            let bound = value_gap_bound(c, alpha, s, i + 1);
            if *gap > bound + 1e-12 * (1.0 + bound.abs()) {
                violations.push(LedgerEntry {
                    check: "value_bound".into(),
                    k: i + 1,
                    magnitude: gap - bound,
                });
            }
        }
        let z_allowed = m + 1e-9 * (1.0 + m);
        for r in &history.records {
            let zd = dist(&r.z, xstar);
            if zd > z_allowed {
                violations.push(LedgerEntry {
                    check: "z_bound".into(),
                    k: r.k,
                    magnitude: zd - m,
                });
            }
        }
    }

    for v in check_forward_backward(history, obj, sched, Some(xstar))? {
        violations.push(LedgerEntry {
            check: "forward_backward".into(),
            k: v.k,
            magnitude: v.magnitude,
        });
    }

    Ok(LyapunovReport {
        g_series,
        ek_series,
        constant_c: constants.c,
        constant_m: constants.m,
        constants_note: constants.note,
        violations,
        guarantee_regime,
    })
}
