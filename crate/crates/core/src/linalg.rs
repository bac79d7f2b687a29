//! Small dense-vector helpers.
//!
//! Problem dimensions here are tiny (a handful up to a few dozen
//! coordinates), so plain `Vec<f64>` slices beat any array library.

use crate::error::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `a + s * b` componentwise.
pub fn add_scaled(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

pub fn scale(s: f64, a: &[f64]) -> Vec<f64> {
    a.iter().map(|x| s * x).collect()
}

/// Ensures every coordinate is finite, naming the first offender.
pub fn ensure_finite(x: &[f64], what: &str) -> Result<()> {
    for (i, v) in x.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::numerical(format!(
                "{what} has non-finite coordinate {i} ({v})"
            )));
        }
    }
    Ok(())
}

pub fn ensure_dim(x: &[f64], dim: usize, what: &str) -> Result<()> {
    if x.len() != dim {
        return Err(Error::usage(format!(
            "{what} has dimension {}, expected {dim}",
            x.len()
        )));
    }
    Ok(())
}

/// Cumulative trapezoid integral of `f` over `grid`, anchored at zero.
///
/// Returns one value per grid node: `out[i] = ∫_{grid[0]}^{grid[i]} f`.
pub fn cumtrapz(grid: &[f64], f: &[f64]) -> Vec<f64> {
    debug_assert_eq!(grid.len(), f.len());
    let mut out = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..grid.len() {
        acc += 0.5 * (f[i] + f[i - 1]) * (grid[i] - grid[i - 1]);
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_norm_dist() {
        assert_eq!(dot(&[1.0, 2.0], &[3.0, -1.0]), 1.0);
        assert_eq!(norm(&[3.0, 4.0]), 5.0);
        assert_eq!(dist(&[1.0, 1.0], &[1.0, -1.0]), 2.0);
    }

    #[test]
    fn cumtrapz_linear_exact() {
        // ∫_0^t τ dτ = t²/2; trapezoid is exact for linear integrands.
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 * 0.3).collect();
        let f: Vec<f64> = grid.clone();
        let integral = cumtrapz(&grid, &f);
        for (t, v) in grid.iter().zip(&integral) {
            assert!((v - 0.5 * t * t).abs() < 1e-12);
        }
    }

    #[test]
    fn ensure_finite_names_coordinate() {
        let err = ensure_finite(&[0.0, f64::NAN], "gradient").unwrap_err();
        assert!(err.to_string().contains("coordinate 1"));
    }
}
