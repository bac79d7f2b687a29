//! Canonical test instances with high-accuracy reference solutions.
//!
//! Each structural regime gets exactly one carrier: smooth strongly convex
//! (quadratic), ill-conditioned smooth (illcond_quadratic), nonsmooth
//! composite (lasso1d / lasso_rand), indicator constraints (boxqp), even
//! objective (even_quartic), and unattained infimum (empty_argmin).

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use crate::objective::{CompositeObjective, ProxOp, SmoothPart};
use crate::perturbation::PerturbationSchedule;
use crate::solver::{gradient_map, step, SolverParams, SolverState};

/// Structural hypotheses an instance exercises.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeTag {
    Smooth,
    Nonsmooth,
    StronglyConvex,
    Even,
    InteriorArgmin,
    EmptyArgmin,
}

/// A problem instance: objective plus (when they exist) a reference
/// minimizer and optimal value. Immutable after construction.
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    pub objective: CompositeObjective,
    pub xstar: Option<Vec<f64>>,
    pub theta_star: Option<f64>,
    pub tags: BTreeSet<RegimeTag>,
    /// Start point used by the CLI when the config does not override it;
    /// always feasible for indicator-constrained instances.
    pub default_x0: Vec<f64>,
}

impl ProblemInstance {
    /// ‖G_s(x*)‖ at s = 1/L with no perturbation: the fixed-point residual
    /// of the forward-backward map at the stored reference.
    pub fn reference_residual(&self) -> Result<Option<f64>> {
        match &self.xstar {
            None => Ok(None),
            Some(xs) => {
                let s = 1.0 / self.objective.lipschitz();
                let g = gradient_map(&self.objective, &vec![0.0; xs.len()], s, xs)?;
                Ok(Some(norm(&g)))
            }
        }
    }

    /// Reference pair (x*, θ*) when both are known.
    pub fn reference(&self) -> Option<(&[f64], f64)> {
        match (&self.xstar, self.theta_star) {
            (Some(x), Some(t)) => Some((x.as_slice(), t)),
            _ => None,
        }
    }
}

fn tags(list: &[RegimeTag]) -> BTreeSet<RegimeTag> {
    list.iter().copied().collect()
}

/// Smooth diagonal quadratic Ψ(x) = ½‖D^{1/2}x − c‖² with c = D^{-1/2}b,
/// so x* = D^{-1}b in closed form, θ* = 0, and L = max dᵢ.
pub fn make_quadratic(diag: &[f64], b: &[f64]) -> Result<ProblemInstance> {
    if diag.is_empty() || diag.len() != b.len() {
        return Err(Error::usage("diag and b must be nonempty and equally sized"));
    }
    if diag.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::usage("diagonal entries must be positive"));
    }
    let scale: Vec<f64> = diag.iter().map(|d| d.sqrt()).collect();
    let shift: Vec<f64> = b.iter().zip(&scale).map(|(bi, a)| bi / a).collect();
    let xstar: Vec<f64> = b.iter().zip(diag).map(|(bi, di)| bi / di).collect();
    let lipschitz = diag.iter().copied().fold(f64::MIN, f64::max);
    let objective = CompositeObjective::new(
        diag.len(),
        SmoothPart::DiagQuadratic { scale, shift },
        ProxOp::Zero,
        lipschitz,
        "quadratic",
    )?;
    Ok(ProblemInstance {
        objective,
        xstar: Some(xstar),
        theta_star: Some(0.0),
        tags: tags(&[RegimeTag::Smooth, RegimeTag::StronglyConvex]),
        default_x0: vec![0.0; diag.len()],
    })
}

/// Exact largest eigenvalue of AᵀA by long power iteration, inflated by a
/// hair so that s = 1/L stays on the safe side of the step bound.
fn lasso_lipschitz(rows: &[Vec<f64>], dim: usize) -> Result<f64> {
    let mut v: Vec<f64> = (0..dim).map(|i| 1.0 + 0.1 * (i % 7) as f64).collect();
    let n = norm(&v);
    v.iter_mut().for_each(|u| *u /= n);
    let mut lambda_prev = f64::INFINITY;
    for _ in 0..100_000 {
        let mut w = vec![0.0; dim];
        for row in rows {
            let r = dot(row, &v);
            for (o, a) in w.iter_mut().zip(row) {
                *o += a * r;
            }
        }
        let lambda = dot(&v, &w);
        let wn = norm(&w);
        if wn == 0.0 {
            return Err(Error::usage("matrix A must be nonzero"));
        }
        if (lambda - lambda_prev).abs() <= 1e-14 * lambda.abs().max(1e-300) {
            return Ok(lambda * (1.0 + 1e-12));
        }
        lambda_prev = lambda;
        v = w.iter().map(|u| u / wn).collect();
    }
    Err(Error::numerical("power iteration on AᵀA did not converge"))
}

/// Lasso: Ψ = ½‖Ax − b‖², Φ = λ‖x‖₁. The reference solution comes from the
/// unperturbed solver at α = 5 (up to 10⁶ iterations) and is certified by
/// the forward-backward fixed-point residual at 1e-10.
pub fn make_lasso(rows: &[Vec<f64>], b: &[f64], lambda: f64) -> Result<ProblemInstance> {
    if rows.is_empty() || rows.len() != b.len() {
        return Err(Error::usage("A and b must be nonempty with matching row counts"));
    }
    let dim = rows[0].len();
    if rows.iter().any(|r| r.len() != dim) {
        return Err(Error::usage("all rows of A must have equal length"));
    }
    if !(lambda > 0.0) {
        return Err(Error::usage("lasso weight must be positive"));
    }
    let lipschitz = lasso_lipschitz(rows, dim)?;
    let objective = CompositeObjective::new(
        dim,
        SmoothPart::DenseQuadratic { rows: rows.to_vec(), target: b.to_vec() },
        ProxOp::L1 { weight: lambda },
        lipschitz,
        "lasso",
    )?;

    let s = 1.0 / lipschitz;
    let sched = PerturbationSchedule::zero(dim);
    let params = SolverParams::new(5.0, s, 1_000_000);
    let mut state = SolverState::initial(&vec![0.0; dim]);
    let zeros = vec![0.0; dim];
    while state.k < params.max_iter {
        state = step(&state, &objective, &sched, &params)?;
        if state.k.is_multiple_of(50)
            && norm(&gradient_map(&objective, &zeros, s, &state.x_curr)?) <= 1e-12
        {
            break;
        }
    }
    let residual = norm(&gradient_map(&objective, &zeros, s, &state.x_curr)?);
    if residual > 1e-10 {
        return Err(Error::numerical(format!(
            "lasso reference run did not certify: fixed-point residual {residual} > 1e-10"
        )));
    }
    let xstar = state.x_curr.clone();
    let theta_star = objective.eval_composite(&xstar)?;
    Ok(ProblemInstance {
        objective,
        xstar: Some(xstar),
        theta_star: Some(theta_star),
        tags: tags(&[RegimeTag::Nonsmooth]),
        default_x0: vec![0.0; dim],
    })
}

/// Box-constrained diagonal quadratic: Φ is the indicator of [lo, hi];
/// x* is the clamp of the unconstrained minimizer (exact for separable
/// quadratics). Tagged interior_argmin iff the unconstrained minimizer is
/// strictly inside the box.
pub fn make_box_qp(diag: &[f64], b: &[f64], lo: &[f64], hi: &[f64]) -> Result<ProblemInstance> {
    let dim = diag.len();
    if dim == 0 || b.len() != dim || lo.len() != dim || hi.len() != dim {
        return Err(Error::usage("diag, b, lo, hi must be nonempty and equally sized"));
    }
    if diag.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::usage("diagonal entries must be positive"));
    }
    if lo.iter().zip(hi).any(|(l, h)| !(l < h)) {
        return Err(Error::usage("box must satisfy lo < hi componentwise"));
    }
    let scale: Vec<f64> = diag.iter().map(|d| d.sqrt()).collect();
    let shift: Vec<f64> = b.iter().zip(&scale).map(|(bi, a)| bi / a).collect();
    let unconstrained: Vec<f64> = b.iter().zip(diag).map(|(bi, di)| bi / di).collect();
    let xstar: Vec<f64> = unconstrained
        .iter()
        .zip(lo.iter().zip(hi))
        .map(|(x, (l, h))| x.clamp(*l, *h))
        .collect();
    let interior = unconstrained
        .iter()
        .zip(lo.iter().zip(hi))
        .all(|(x, (l, h))| *l < *x && *x < *h);
    let lipschitz = diag.iter().copied().fold(f64::MIN, f64::max);
    let objective = CompositeObjective::new(
        dim,
        SmoothPart::DiagQuadratic { scale: scale.clone(), shift },
        ProxOp::Box { lower: lo.to_vec(), upper: hi.to_vec() },
        lipschitz,
        "boxqp",
    )?;
    let theta_star = objective.eval_composite(&xstar)?;
    let mut t = tags(&[RegimeTag::Nonsmooth, RegimeTag::StronglyConvex]);
    if interior {
        t.insert(RegimeTag::InteriorArgmin);
    }
    // Feasible start: midpoint of the box.
    let default_x0: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| 0.5 * (l + h)).collect();
    Ok(ProblemInstance {
        objective,
        xstar: Some(xstar),
        theta_star: Some(theta_star),
        tags: t,
        default_x0,
    })
}

/// Flavor of the even instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvenKind {
    /// Radial quartic with quadratic extension (L certified on radius 2).
    AbsPower4,
    /// Coordinatewise Huber smoothing of |·|.
    SmoothedAbs,
}

/// Even objective with x* = 0 and θ* = 0. The quartic flavor keeps the
/// curvature vanishing at the minimizer so convergence is visibly
/// α-dependent rather than trivially linear.
pub fn make_even(kind: EvenKind, dim: usize) -> Result<ProblemInstance> {
    if dim == 0 {
        return Err(Error::usage("dimension must be positive"));
    }
    let (smooth, lipschitz, label) = match kind {
        EvenKind::AbsPower4 => {
            let radius = 2.0;
            (SmoothPart::RadialQuartic { radius }, 3.0 * radius * radius, "even_quartic")
        }
        EvenKind::SmoothedAbs => {
            let delta = 0.5;
            (SmoothPart::HuberAbs { delta }, 1.0 / delta, "even_smoothed_abs")
        }
    };
    let objective = CompositeObjective::new(dim, smooth, ProxOp::Zero, lipschitz, label)?;
    let mut x0 = vec![0.0; dim];
    for (i, v) in x0.iter_mut().enumerate() {
        *v = if i % 2 == 0 { 1.0 } else { -0.5 };
    }
    Ok(ProblemInstance {
        objective,
        xstar: Some(vec![0.0; dim]),
        theta_star: Some(0.0),
        tags: tags(&[RegimeTag::Smooth, RegimeTag::Even, RegimeTag::InteriorArgmin]),
        default_x0: x0,
    })
}

/// Ψ(x) = √(1+x²) − x: infimum 0, approached only as x → +∞, with a
/// globally 1-Lipschitz gradient. No minimizer is stored.
pub fn make_empty_argmin() -> ProblemInstance {
    let objective =
        CompositeObjective::new(1, SmoothPart::SqrtHyperbola, ProxOp::Zero, 1.0, "empty_argmin")
            .expect("static construction");
    ProblemInstance {
        objective,
        xstar: None,
        theta_star: Some(0.0),
        tags: tags(&[RegimeTag::Smooth, RegimeTag::EmptyArgmin]),
        default_x0: vec![0.0],
    }
}

/// Instance names addressable from experiment configs.
pub const INSTANCE_NAMES: &[&str] = &[
    "quadratic",
    "illcond_quadratic",
    "lasso1d",
    "lasso_rand",
    "boxqp",
    "even_quartic",
    "empty_argmin",
];

fn default_dim(name: &str) -> usize {
    match name {
        "quadratic" => 4,
        "illcond_quadratic" => 2,
        "lasso1d" => 1,
        "lasso_rand" => 30,
        "boxqp" => 4,
        "even_quartic" => 2,
        _ => 1,
    }
}

/// Builds a named instance. `dim` falls back to the instance default;
/// `seed` only affects the randomized lasso; `lambda_override` applies to
/// the lasso instances.
pub fn by_name(
    name: &str,
    dim: Option<usize>,
    seed: u64,
    lambda_override: Option<f64>,
) -> Result<ProblemInstance> {
    let dim = dim.unwrap_or_else(|| default_dim(name));
    if dim == 0 {
        return Err(Error::usage("dimension must be positive"));
    }
    match name {
        "quadratic" => {
            // Ψ(x) = ½ Σ i·x_i², minimized at the origin; start at ones.
            // With dim = 1 this is the scalar ½x² hand-run problem.
            let diag: Vec<f64> = (1..=dim).map(|i| i as f64).collect();
            let mut inst = make_quadratic(&diag, &vec![0.0; dim])?;
            inst.default_x0 = vec![1.0; dim];
            Ok(inst)
        }
        "illcond_quadratic" => {
            // Log-spaced spectrum over four decades: condition 1e4.
            let diag: Vec<f64> = (0..dim)
                .map(|i| {
                    if dim == 1 {
                        1.0
                    } else {
                        10f64.powf(4.0 * i as f64 / (dim - 1) as f64)
                    }
                })
                .collect();
            let b: Vec<f64> = diag.iter().map(|d| d.sqrt()).collect();
            let mut inst = make_quadratic(&diag, &b)?;
            inst.objective = CompositeObjective::new(
                dim,
                inst.objective.smooth_part().clone(),
                ProxOp::Zero,
                inst.objective.lipschitz(),
                "illcond_quadratic",
            )?;
            Ok(inst)
        }
        "lasso1d" => make_lasso(&[vec![1.0]], &[3.0], lambda_override.unwrap_or(1.0)),
        "lasso_rand" => {
            let m = (2 * dim).div_ceil(3).max(1);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let normal = rand_distr::StandardNormal;
            let rows: Vec<Vec<f64>> = (0..m)
                .map(|_| (0..dim).map(|_| normal.sample(&mut rng)).collect())
                .collect();
            // Sparse planted signal plus small noise.
            let mut x_true = vec![0.0; dim];
            for x in x_true.iter_mut().step_by(5) {
                *x = rng.random_range(-2.0..2.0);
            }
            let b: Vec<f64> = rows
                .iter()
                .map(|r| {
                    let noise: f64 = normal.sample(&mut rng);
                    dot(r, &x_true) + 0.01 * noise
                })
                .collect();
            let lambda = lambda_override.unwrap_or_else(|| {
                let mut atb = vec![0.0; dim];
                for (row, bi) in rows.iter().zip(&b) {
                    for (o, a) in atb.iter_mut().zip(row) {
                        *o += a * bi;
                    }
                }
                0.1 * atb.iter().map(|v| v.abs()).fold(0.0, f64::max)
            });
            make_lasso(&rows, &b, lambda)
        }
        "boxqp" => {
            // Unconstrained minimizers alternate inside/outside [0, 1].
            let diag: Vec<f64> = (1..=dim).map(|i| i as f64).collect();
            let targets: Vec<f64> = (0..dim)
                .map(|i| match i % 3 {
                    0 => 0.5,
                    1 => 1.5,
                    _ => -0.3,
                })
                .collect();
            let b: Vec<f64> = diag.iter().zip(&targets).map(|(d, t)| d * t).collect();
            make_box_qp(&diag, &b, &vec![0.0; dim], &vec![1.0; dim])
        }
        "even_quartic" => make_even(EvenKind::AbsPower4, dim),
        "empty_argmin" => Ok(make_empty_argmin()),
        other => Err(Error::usage(format!(
            "unknown problem '{other}'; available: {}",
            INSTANCE_NAMES.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::run_basic;

    #[test]
    fn quadratic_hand_cases() {
        let inst = make_quadratic(&[1.0], &[0.0]).unwrap();
        assert_eq!(inst.xstar.as_deref(), Some(&[0.0][..]));
        assert_eq!(inst.theta_star, Some(0.0));
        assert_eq!(inst.objective.lipschitz(), 1.0);

        let inst = make_quadratic(&[1.0, 100.0], &[0.0, 0.0]).unwrap();
        assert_eq!(inst.objective.lipschitz(), 100.0);

        assert!(make_quadratic(&[1.0, -2.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn quadratic_closed_form_matches_gradient_descent_oracle() {
        // diag = (1,4), shifted c = (1,1) means b = D^{1/2}c = (1,2).
        let inst = make_quadratic(&[1.0, 4.0], &[1.0, 2.0]).unwrap();
        let xs = inst.xstar.clone().unwrap();
        assert!((xs[0] - 1.0).abs() < 1e-15 && (xs[1] - 0.5).abs() < 1e-15);

        // Long-run gradient descent oracle.
        let mut x = vec![0.0, 0.0];
        let step = 1.0 / inst.objective.lipschitz();
        for _ in 0..1_000_000 {
            let (_, g) = inst.objective.eval_smooth(&x).unwrap();
            for (xi, gi) in x.iter_mut().zip(&g) {
                *xi -= step * gi;
            }
        }
        assert!(crate::linalg::dist(&x, &xs) < 1e-10);
    }

    #[test]
    fn lasso_1d_soft_threshold_reference() {
        // A = 1, b = 3, λ = 1: x* = 2 by the subgradient condition.
        let inst = make_lasso(&[vec![1.0]], &[3.0], 1.0).unwrap();
        let xs = inst.xstar.clone().unwrap();
        assert!((xs[0] - 2.0).abs() < 1e-9, "x* = {}", xs[0]);
        let oracle = crate::oracles::prox_1d_oracle(|t| t.abs(), 1.0, 3.0);
        assert!((xs[0] - oracle).abs() < 1e-6);
    }

    #[test]
    fn lasso_large_weight_gives_zero() {
        // λ ≥ ‖Aᵀb‖_∞ forces x* = 0; certify the subgradient condition at
        // the origin: every coordinate of ∇Ψ(0) = Aᵀ(A·0 − b) within λ.
        let lambda = 3.5;
        let inst = make_lasso(&[vec![1.0]], &[3.0], lambda).unwrap();
        let xs = inst.xstar.clone().unwrap();
        assert!(xs[0].abs() < 1e-10);
        let (_, grad0) = inst.objective.eval_smooth(&[0.0]).unwrap();
        assert!(grad0.iter().all(|g| g.abs() <= lambda));
    }

    #[test]
    fn lasso_vanishing_weight_approaches_least_squares() {
        let rows = vec![vec![2.0, 0.0], vec![0.0, 0.5]];
        let b = vec![2.0, 1.0]; // A⁻¹b = (1, 2)
        let inst = make_lasso(&rows, &b, 1e-8).unwrap();
        let xs = inst.xstar.clone().unwrap();
        assert!((xs[0] - 1.0).abs() < 1e-4 && (xs[1] - 2.0).abs() < 1e-4);
    }

    #[test]
    fn box_qp_clamping() {
        let inst = make_box_qp(&[1.0], &[0.5], &[0.0], &[1.0]).unwrap();
        assert_eq!(inst.xstar.as_deref(), Some(&[0.5][..]));
        assert!(inst.tags.contains(&RegimeTag::InteriorArgmin));

        let inst = make_box_qp(&[1.0], &[2.0], &[0.0], &[1.0]).unwrap();
        assert_eq!(inst.xstar.as_deref(), Some(&[1.0][..]));
        assert!(!inst.tags.contains(&RegimeTag::InteriorArgmin));

        assert!(make_box_qp(&[1.0], &[0.0], &[1.0], &[1.0]).is_err());
    }

    #[test]
    fn box_qp_matches_projected_gradient_oracle() {
        let diag = [2.0, 1.0];
        let b = [3.0, -1.0]; // unconstrained (1.5, −1): both clamp
        let inst = make_box_qp(&diag, &b, &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let xs = inst.xstar.clone().unwrap();
        // Projected-gradient oracle, 10⁵ steps.
        let mut x = vec![0.5, 0.5];
        let s = 1.0 / inst.objective.lipschitz();
        for _ in 0..100_000 {
            let (_, g) = inst.objective.eval_smooth(&x).unwrap();
            for (xi, gi) in x.iter_mut().zip(&g) {
                *xi = (*xi - s * gi).clamp(0.0, 1.0);
            }
        }
        assert!(crate::linalg::dist(&x, &xs) < 1e-8);
    }

    #[test]
    fn even_instance_properties() {
        let inst = make_even(EvenKind::AbsPower4, 2).unwrap();
        let obj = &inst.objective;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let x = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            let neg = [-x[0], -x[1]];
            let v1 = obj.eval_smooth(&x).unwrap().0;
            let v2 = obj.eval_smooth(&neg).unwrap().0;
            assert!((v1 - v2).abs() < 1e-14 * (1.0 + v1.abs()));
        }
        let (_, g0) = obj.eval_smooth(&[0.0, 0.0]).unwrap();
        assert_eq!(g0, vec![0.0, 0.0]);
        assert_eq!(inst.reference_residual().unwrap(), Some(0.0));
    }

    #[test]
    fn lasso_run_reduces_gap_by_six_orders() {
        let inst = by_name("lasso_rand", None, 7, None).unwrap();
        let (_, ts) = inst.reference().unwrap();
        let params = SolverParams::new(3.0, 1.0 / inst.objective.lipschitz(), 10_000);
        let sched = PerturbationSchedule::zero(inst.objective.dim());
        let history = run_basic(&inst.objective, &sched, &params, &inst.default_x0).unwrap();
        let gaps = history.gaps(ts);
        assert!(
            gaps[gaps.len() - 1] <= 1e-6 * gaps[0],
            "final gap {} vs initial {}",
            gaps[gaps.len() - 1],
            gaps[0]
        );
    }

    #[test]
    fn smoothed_abs_even_instance() {
        let inst = make_even(EvenKind::SmoothedAbs, 3).unwrap();
        assert!(inst.tags.contains(&RegimeTag::Even));
        assert_eq!(inst.objective.lipschitz(), 2.0);
        let (v, g) = inst.objective.eval_smooth(&[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(g, vec![0.0; 3]);
        let plus = inst.objective.eval_smooth(&[1.0, -2.0, 0.3]).unwrap().0;
        let minus = inst.objective.eval_smooth(&[-1.0, 2.0, -0.3]).unwrap().0;
        assert_eq!(plus, minus);
    }

    #[test]
    fn empty_argmin_shape() {
        let inst = make_empty_argmin();
        assert!(inst.xstar.is_none());
        assert_eq!(inst.theta_star, Some(0.0));
        let obj = &inst.objective;
        assert_eq!(obj.eval_smooth(&[0.0]).unwrap().0, 1.0);
        let v100 = obj.eval_smooth(&[100.0]).unwrap().0;
        assert!((v100 - 0.005).abs() < 0.0005);
    }

    #[test]
    fn every_reference_passes_fixed_point_residual() {
        for name in INSTANCE_NAMES {
            let inst = by_name(name, None, 7, None).unwrap();
            if let Some(r) = inst.reference_residual().unwrap() {
                assert!(r <= 1e-8, "{name}: residual {r}");
            }
        }
    }

    #[test]
    fn reference_values_certified_by_two_oracles() {
        // Closed form vs long-run solver, values agreeing within 1e-9.
        // The quartic has vanishing curvature at its minimizer, so only its
        // value (not the iterate distance) reaches reference accuracy.
        for (name, iters, dist_tol) in [
            ("quadratic", 200_000usize, Some(1e-6)),
            ("boxqp", 200_000, Some(1e-6)),
            ("even_quartic", 400_000, None),
        ] {
            let inst = by_name(name, None, 7, None).unwrap();
            let (xs, ts) = inst.reference().unwrap();
            let params = SolverParams::new(4.0, 1.0 / inst.objective.lipschitz(), iters);
            let sched = PerturbationSchedule::zero(inst.objective.dim());
            let history = run_basic(&inst.objective, &sched, &params, &inst.default_x0).unwrap();
            let final_theta = history.final_record().theta;
            assert!(
                (final_theta - ts).abs() <= 1e-9 * (1.0 + ts.abs()),
                "{name}: solver value {final_theta} vs reference {ts}"
            );
            if let Some(tol) = dist_tol {
                assert!(crate::linalg::dist(&history.final_record().x, xs) < tol);
            }
        }
    }

    #[test]
    fn registry_rejects_unknown_names()
    {
        assert!(by_name("mystery", None, 0, None).is_err());
    }

    #[test]
    fn lasso_rand_is_deterministic_per_seed() {
        let a = by_name("lasso_rand", Some(12), 3, None).unwrap();
        let b = by_name("lasso_rand", Some(12), 3, None).unwrap();
        assert_eq!(a.xstar, b.xstar);
        let c = by_name("lasso_rand", Some(12), 4, None).unwrap();
        assert!(a.xstar != c.xstar);
    }
}
