//! Composite objectives Θ = Φ + Ψ.
//!
//! Ψ is smooth convex with an L-Lipschitz gradient and is evaluated
//! explicitly; Φ is convex lower semicontinuous (possibly +∞-valued) and is
//! only ever touched through its proximal map. `+∞` is an ordinary value
//! here, never an exception: indicator functions are first-class.

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;

use crate::error::{Error, Result};
use crate::linalg::{dist, dot, ensure_dim, ensure_finite, norm};

/// Multiplicative safety factor applied to probe-based Lipschitz estimates.
pub const LIPSCHITZ_INFLATION: f64 = 1.01;
/// Returned when the sampled gradient is constant (linear Ψ).
pub const LIPSCHITZ_FLOOR: f64 = 1e-12;

type EvalFn = dyn Fn(&[f64]) -> (f64, Vec<f64>) + Send + Sync;
type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type ProxFn = dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync;

/// The smooth part Ψ: value and gradient evaluator.
#[derive(Clone)]
pub enum SmoothPart {
    /// Ψ ≡ 0.
    Zero,
    /// Ψ(x) = ½‖diag(scale)·x − shift‖².
    DiagQuadratic { scale: Vec<f64>, shift: Vec<f64> },
    /// Ψ(x) = ½‖Ax − b‖² with dense rows.
    DenseQuadratic { rows: Vec<Vec<f64>>, target: Vec<f64> },
    /// Radially even quartic: r⁴/4 inside `radius`, quadratic extension
    /// outside so the gradient stays globally 3·radius²-Lipschitz.
    RadialQuartic { radius: f64 },
    /// Σᵢ huber(xᵢ): u²/(2δ) for |u| ≤ δ, |u| − δ/2 beyond. Even, 1/δ-smooth.
    HuberAbs { delta: f64 },
    /// √(1+x²) − x in one dimension: infimum 0, never attained, 1-smooth.
    SqrtHyperbola,
    /// Arbitrary user evaluator returning (value, gradient).
    Custom(Arc<EvalFn>),
}

impl fmt::Debug for SmoothPart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SmoothPart::Zero => write!(f, "Zero"),
            SmoothPart::DiagQuadratic { scale, .. } => {
                write!(f, "DiagQuadratic(dim={})", scale.len())
            }
            SmoothPart::DenseQuadratic { rows, .. } => {
                write!(f, "DenseQuadratic({}x{})", rows.len(), rows.first().map_or(0, Vec::len))
            }
            SmoothPart::RadialQuartic { radius } => write!(f, "RadialQuartic(r={radius})"),
            SmoothPart::HuberAbs { delta } => write!(f, "HuberAbs(delta={delta})"),
            SmoothPart::SqrtHyperbola => write!(f, "SqrtHyperbola"),
            SmoothPart::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl SmoothPart {
    fn eval(&self, x: &[f64]) -> (f64, Vec<f64>) {
        match self {
            SmoothPart::Zero => (0.0, vec![0.0; x.len()]),
            SmoothPart::DiagQuadratic { scale, shift } => {
                let mut value = 0.0;
                let mut grad = vec![0.0; x.len()];
                for i in 0..x.len() {
                    let r = scale[i] * x[i] - shift[i];
                    value += 0.5 * r * r;
                    grad[i] = scale[i] * r;
                }
                (value, grad)
            }
            SmoothPart::DenseQuadratic { rows, target } => {
                let mut value = 0.0;
                let mut grad = vec![0.0; x.len()];
                for (row, b) in rows.iter().zip(target) {
                    let r = dot(row, x) - b;
                    value += 0.5 * r * r;
                    for (g, a) in grad.iter_mut().zip(row) {
                        *g += a * r;
                    }
                }
                (value, grad)
            }
            SmoothPart::RadialQuartic { radius } => {
                let big_r = *radius;
                let r = norm(x);
                if r <= big_r {
                    let slope_over_r = r * r; // φ'(r)/r with φ'(r) = r³
                    (0.25 * r.powi(4), x.iter().map(|v| slope_over_r * v).collect())
                } else {
                    let value = 0.25 * big_r.powi(4)
                        + big_r.powi(3) * (r - big_r)
                        + 1.5 * big_r * big_r * (r - big_r) * (r - big_r);
                    let slope = big_r.powi(3) + 3.0 * big_r * big_r * (r - big_r);
                    let slope_over_r = slope / r;
                    (value, x.iter().map(|v| slope_over_r * v).collect())
                }
            }
            SmoothPart::HuberAbs { delta } => {
                let d = *delta;
                let mut value = 0.0;
                let mut grad = vec![0.0; x.len()];
                for i in 0..x.len() {
                    let u = x[i];
                    if u.abs() <= d {
                        value += u * u / (2.0 * d);
                        grad[i] = u / d;
                    } else {
                        value += u.abs() - 0.5 * d;
                        grad[i] = u.signum();
                    }
                }
                (value, grad)
            }
            SmoothPart::SqrtHyperbola => {
                let u = x[0];
                let s = (1.0 + u * u).sqrt();
                (s - u, vec![u / s - 1.0])
            }
            SmoothPart::Custom(eval) => eval(x),
        }
    }

    /// True when the gradient is an affine map, so the sharp Lipschitz
    /// constant is a largest singular value reachable by power iteration.
    fn quadratic_structure(&self) -> bool {
        matches!(
            self,
            SmoothPart::DiagQuadratic { .. } | SmoothPart::DenseQuadratic { .. }
        )
    }
}

fn soft_threshold(u: f64, t: f64) -> f64 {
    if u > t {
        u - t
    } else if u < -t {
        u + t
    } else {
        0.0
    }
}

/// The nonsmooth part Φ, represented by its value and proximal map.
#[derive(Clone)]
pub enum ProxOp {
    /// Φ ≡ 0; the prox is the identity.
    Zero,
    /// Φ(x) = weight·‖x‖₁; the prox soft-thresholds componentwise.
    L1 { weight: f64 },
    /// Indicator of the box `[lower, upper]`; the prox projects (clamps).
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// Φ(x) = (weight/2)·‖x − center‖².
    Quadratic { weight: f64, center: Vec<f64> },
    /// User-supplied closed-form value and prox.
    Custom { value: Arc<ValueFn>, prox: Arc<ProxFn> },
}

impl fmt::Debug for ProxOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProxOp::Zero => write!(f, "Zero"),
            ProxOp::L1 { weight } => write!(f, "L1(weight={weight})"),
            ProxOp::Box { lower, .. } => write!(f, "Box(dim={})", lower.len()),
            ProxOp::Quadratic { weight, .. } => write!(f, "Quadratic(weight={weight})"),
            ProxOp::Custom { .. } => write!(f, "Custom"),
        }
    }
}

impl ProxOp {
    /// Φ(x). May return `+∞` (indicator outside its set), never panics on it.
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            ProxOp::Zero => 0.0,
            ProxOp::L1 { weight } => weight * x.iter().map(|v| v.abs()).sum::<f64>(),
            ProxOp::Box { lower, upper } => {
                let inside = x
                    .iter()
                    .zip(lower.iter().zip(upper))
                    .all(|(v, (lo, hi))| *lo <= *v && *v <= *hi);
                if inside {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            ProxOp::Quadratic { weight, center } => {
                let d = dist(x, center);
                0.5 * weight * d * d
            }
            ProxOp::Custom { value, .. } => value(x),
        }
    }

    /// prox_{γΦ}(x) = argmin_ξ { Φ(ξ) + ‖ξ−x‖²/(2γ) }.
    pub fn prox(&self, gamma: f64, x: &[f64]) -> Result<Vec<f64>> {
        if !(gamma > 0.0) {
            return Err(Error::usage(format!("prox step gamma must be positive, got {gamma}")));
        }
        let out = match self {
            ProxOp::Zero => x.to_vec(),
            ProxOp::L1 { weight } => {
                let t = gamma * weight;
                x.iter().map(|v| soft_threshold(*v, t)).collect()
            }
            ProxOp::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(v, (lo, hi))| v.clamp(*lo, *hi))
                .collect(),
            ProxOp::Quadratic { weight, center } => {
                let t = gamma * weight;
                x.iter()
                    .zip(center)
                    .map(|(v, c)| (v + t * c) / (1.0 + t))
                    .collect()
            }
            ProxOp::Custom { prox, .. } => {
                let out = prox(gamma, x);
                ensure_finite(&out, "custom prox output")?;
                out
            }
        };
        Ok(out)
    }
}

/// Composite objective Θ = Φ + Ψ with the constants the solver needs.
///
/// Immutable after construction and safe for concurrent read-only use.
#[derive(Clone, Debug)]
pub struct CompositeObjective {
    dim: usize,
    smooth: SmoothPart,
    nonsmooth: ProxOp,
    lipschitz: f64,
    label: String,
}

impl CompositeObjective {
    pub fn new(
        dim: usize,
        smooth: SmoothPart,
        nonsmooth: ProxOp,
        lipschitz: f64,
        label: impl Into<String>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::usage("objective dimension must be positive"));
        }
        if !(lipschitz > 0.0 && lipschitz.is_finite()) {
            return Err(Error::usage(format!(
                "Lipschitz constant must be a positive real, got {lipschitz}"
            )));
        }
        Ok(CompositeObjective {
            dim,
            smooth,
            nonsmooth,
            lipschitz,
            label: label.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn smooth_part(&self) -> &SmoothPart {
        &self.smooth
    }

    pub fn nonsmooth_part(&self) -> &ProxOp {
        &self.nonsmooth
    }

    /// Ψ(x) and ∇Ψ(x).
    pub fn eval_smooth(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        ensure_dim(x, self.dim, "point")?;
        let (value, grad) = self.smooth.eval(x);
        if !value.is_finite() {
            return Err(Error::numerical(format!("smooth value at point is not finite ({value})")));
        }
        ensure_finite(&grad, "smooth gradient")?;
        Ok((value, grad))
    }

    /// Θ(x) = Φ(x) + Ψ(x); `+∞` when x lies outside dom Φ.
    pub fn eval_composite(&self, x: &[f64]) -> Result<f64> {
        ensure_dim(x, self.dim, "point")?;
        ensure_finite(x, "point")?;
        let (psi, _) = self.eval_smooth(x)?;
        let phi = self.nonsmooth.value(x);
        if phi.is_nan() {
            return Err(Error::numerical("nonsmooth value is NaN"));
        }
        Ok(phi + psi)
    }

    /// prox_{γΦ}(x).
    pub fn prox(&self, gamma: f64, x: &[f64]) -> Result<Vec<f64>> {
        ensure_dim(x, self.dim, "point")?;
        self.nonsmooth.prox(gamma, x)
    }
}

/// Largest eigenvalue of the PSD operator `apply`, by power iteration to
/// relative tolerance 1e-10. Fails after 10⁴ sweeps without convergence.
fn power_iteration(apply: impl Fn(&[f64]) -> Vec<f64>, dim: usize) -> Result<f64> {
    // Deterministic start with all modes present for diagonal operators.
    let mut v: Vec<f64> = (0..dim).map(|i| 1.0 + 0.1 * (i % 7) as f64).collect();
    let n = norm(&v);
    v.iter_mut().for_each(|u| *u /= n);
    let mut lambda_prev = f64::INFINITY;
    for _ in 0..10_000 {
        let w = apply(&v);
        let lambda = dot(&v, &w);
        let wn = norm(&w);
        if wn == 0.0 {
            return Ok(0.0);
        }
        if (lambda - lambda_prev).abs() <= 1e-10 * lambda.abs().max(1e-300) {
            return Ok(lambda);
        }
        lambda_prev = lambda;
        v = w.iter().map(|u| u / wn).collect();
    }
    Err(Error::numerical(
        "power iteration did not converge within 10000 sweeps",
    ))
}

/// Sharp Lipschitz constant of ∇Ψ for quadratic smooth parts: the largest
/// eigenvalue of AᵀA, no inflation.
pub fn power_iteration_lipschitz(obj: &CompositeObjective) -> Result<f64> {
    match &obj.smooth {
        SmoothPart::DiagQuadratic { scale, .. } => {
            power_iteration(|v| v.iter().zip(scale).map(|(u, a)| a * a * u).collect(), obj.dim)
        }
        SmoothPart::DenseQuadratic { rows, .. } => {
            let dim = obj.dim;
            power_iteration(
                |v| {
                    let mut out = vec![0.0; dim];
                    for row in rows {
                        let r = dot(row, v);
                        for (o, a) in out.iter_mut().zip(row) {
                            *o += a * r;
                        }
                    }
                    out
                },
                dim,
            )
        }
        _ => Err(Error::usage(
            "power-iteration estimate requires a quadratic smooth part",
        )),
    }
}

/// Sampled Lipschitz estimate: max gradient-difference ratio over all probe
/// pairs, inflated by 1%. Constant gradients return the 1e-12 floor.
pub fn probe_lipschitz(obj: &CompositeObjective, probes: usize, seed: u64) -> Result<f64> {
    if probes < 2 {
        return Err(Error::usage("need at least 2 probe points"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = rand_distr::StandardNormal;
    let points: Vec<Vec<f64>> = (0..probes)
        .map(|_| {
            (0..obj.dim)
                .map(|_| {
                    let z: f64 = normal.sample(&mut rng);
                    2.0 * z
                })
                .collect()
        })
        .collect();
    let grads: Vec<Vec<f64>> = points
        .iter()
        .map(|p| obj.eval_smooth(p).map(|(_, g)| g))
        .collect::<Result<_>>()?;
    let mut best: Option<f64> = None;
    for i in 0..probes {
        for j in (i + 1)..probes {
            let dx = dist(&points[i], &points[j]);
            if dx < 1e-12 {
                continue; // degenerate pair
            }
            let dg = dist(&grads[i], &grads[j]);
            let ratio = dg / dx;
            best = Some(best.map_or(ratio, |b: f64| b.max(ratio)));
        }
    }
    match best {
        None => Err(Error::usage("all probe pairs were degenerate")),
        Some(r) => {
            if r == 0.0 {
                Ok(LIPSCHITZ_FLOOR)
            } else {
                Ok(LIPSCHITZ_INFLATION * r)
            }
        }
    }
}

/// Estimates the Lipschitz constant of ∇Ψ: power iteration on AᵀA for
/// quadratic smooth parts, sampled probe pairs otherwise.
pub fn estimate_lipschitz(obj: &CompositeObjective, probes: usize, seed: u64) -> Result<f64> {
    if obj.smooth.quadratic_structure() {
        power_iteration_lipschitz(obj)
    } else {
        probe_lipschitz(obj, probes, seed)
    }
}
