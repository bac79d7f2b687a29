//! Independent reference routines used by the verification suite and tests.
//!
//! Everything here deliberately avoids the main implementation paths: the
//! golden-section minimizer knows nothing about closed-form proximal maps,
//! and the finite-difference gradient never touches analytic gradients.
//! Keep it that way, or the cross-checks stop meaning anything.

/// Golden-section search for the minimizer of a unimodal scalar function
/// on `[lo, hi]`, to absolute abscissa tolerance `tol`.
pub fn golden_section_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Minimizes `ξ ↦ φ(ξ) + (ξ - x)² / (2γ)` by golden section.
///
/// The bracket `[x - r, x + r]` with `r = |x| + 10γ·(1 + slope)` is generous:
/// the proximal point can move at most `γ·sup|∂φ|` away from `x` for the
/// scalar functions exercised here.
pub fn prox_1d_oracle(phi: impl Fn(f64) -> f64, gamma: f64, x: f64) -> f64 {
    let r = x.abs() + 10.0 * gamma + 10.0;
    golden_section_min(|xi| phi(xi) + (xi - x) * (xi - x) / (2.0 * gamma), x - r, x + r, 1e-10)
}

/// Central finite-difference gradient of `f` at `x`.
pub fn central_diff_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let orig = xp[i];
        xp[i] = orig + h;
        let fp = f(&xp);
        xp[i] = orig - h;
        let fm = f(&xp);
        xp[i] = orig;
        g[i] = (fp - fm) / (2.0 * h);
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_section_finds_quadratic_min() {
        let x = golden_section_min(|t| (t - 2.5) * (t - 2.5), -10.0, 10.0, 1e-10);
        assert!((x - 2.5).abs() < 1e-8);
    }

    #[test]
    fn prox_oracle_soft_threshold() {
        // argmin |ξ| + (ξ-3)²/2 = 2, and |x| ≤ γλ collapses to 0.
        let p = prox_1d_oracle(|t| t.abs(), 1.0, 3.0);
        assert!((p - 2.0).abs() < 1e-7);
        let q = prox_1d_oracle(|t| t.abs(), 1.0, 0.5);
        assert!(q.abs() < 1e-7);
    }

    #[test]
    fn central_diff_matches_quadratic() {
        let f = |x: &[f64]| 0.5 * (x[0] * x[0] + 4.0 * x[1] * x[1]);
        let g = central_diff_gradient(f, &[1.0, -2.0], 1e-5);
        assert!((g[0] - 1.0).abs() < 1e-8);
        assert!((g[1] + 8.0).abs() < 1e-7);
    }
}
