//! Perturbation schedules g_k / g(t) and their summability classification.
//!
//! Power-law decay c·k^(−p) is the canonical family: its weighted-sum
//! thresholds are analytic (norm-summable iff p > 1, k-weighted summable
//! iff p > 2), which makes the rate-preservation hypotheses checkable
//! exactly instead of by partial-sum heuristics.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::norm;

/// Unit direction attached to a schedule.
#[derive(Clone, Debug)]
pub enum Direction {
    /// One fixed unit vector for every index.
    Fixed(Vec<f64>),
    /// A fresh unit vector per index, derived from (seed, k) so histories
    /// are reproducible without storing the sequence.
    Seeded { seed: u64, dim: usize },
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Direction {
    /// Fixed direction, normalized here; the zero vector is rejected.
    pub fn fixed(v: Vec<f64>) -> Result<Self> {
        let n = norm(&v);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::usage("direction must be a nonzero finite vector"));
        }
        Ok(Direction::Fixed(v.into_iter().map(|u| u / n).collect()))
    }

    pub fn seeded(seed: u64, dim: usize) -> Self {
        Direction::Seeded { seed, dim }
    }

    pub fn dim(&self) -> usize {
        match self {
            Direction::Fixed(v) => v.len(),
            Direction::Seeded { dim, .. } => *dim,
        }
    }

    /// Unit vector for index `k` (‖·‖ = 1 within 1e-12).
    pub fn at(&self, k: u64) -> Vec<f64> {
        match self {
            Direction::Fixed(v) => v.clone(),
            Direction::Seeded { seed, dim } => {
                let mut salt = 0u64;
                loop {
                    let key = splitmix64(seed ^ splitmix64(k.wrapping_add(salt << 32)));
                    let mut rng = ChaCha8Rng::seed_from_u64(key);
                    let normal = rand_distr::StandardNormal;
                    let mut v: Vec<f64> =
                        (0..*dim).map(|_| normal.sample(&mut rng)).collect();
                    let n = norm(&v);
                    if n > 1e-9 {
                        v.iter_mut().for_each(|u| *u /= n);
                        return v;
                    }
                    salt += 1;
                }
            }
        }
    }
}

/// The decay family of a schedule.
#[derive(Clone, Debug)]
pub enum ScheduleKind {
    /// g ≡ 0.
    Zero,
    /// ‖g_k‖ = magnitude · k^(−exponent); g(t) analogous in t.
    PowerLaw { magnitude: f64, exponent: f64, direction: Direction },
    /// Explicit leading entries; zero past the end of the list.
    FiniteList(Vec<Vec<f64>>),
}

/// Summability classification against the rate-preservation hypotheses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SummabilityReport {
    /// ∑ ‖g_k‖ < ∞
    pub norm_summable: bool,
    /// ∑ k‖g_k‖ < ∞ (the discrete fast-rate hypothesis)
    pub k_weighted_summable: bool,
    /// ∫ t‖g(t)‖ dt < ∞ (the continuous fast-rate hypothesis)
    pub t_weighted_integrable: bool,
    /// true when decided by the exponent, false for partial-sum heuristics
    pub analytic: bool,
}

impl SummabilityReport {
    fn all(flag: bool) -> Self {
        SummabilityReport {
            norm_summable: flag,
            k_weighted_summable: flag,
            t_weighted_integrable: flag,
            analytic: true,
        }
    }
}

/// Generator of the perturbation terms, immutable and pure to sample.
#[derive(Clone, Debug)]
pub struct PerturbationSchedule {
    dim: usize,
    kind: ScheduleKind,
    /// Default α used when a weighted sum needs one and none is supplied.
    alpha_for_weights: f64,
}

impl PerturbationSchedule {
    pub fn zero(dim: usize) -> Self {
        PerturbationSchedule { dim, kind: ScheduleKind::Zero, alpha_for_weights: 3.0 }
    }

    pub fn power_law(magnitude: f64, exponent: f64, direction: Direction) -> Result<Self> {
        if !(magnitude >= 0.0) || !magnitude.is_finite() {
            return Err(Error::usage("power-law magnitude must be a nonnegative real"));
        }
        if !exponent.is_finite() {
            return Err(Error::usage("power-law exponent must be finite"));
        }
        Ok(PerturbationSchedule {
            dim: direction.dim(),
            kind: ScheduleKind::PowerLaw { magnitude, exponent, direction },
            alpha_for_weights: 3.0,
        })
    }

    pub fn finite_list(entries: Vec<Vec<f64>>, dim: usize) -> Result<Self> {
        for (i, e) in entries.iter().enumerate() {
            if e.len() != dim {
                return Err(Error::usage(format!(
                    "finite-list entry {i} has dimension {}, expected {dim}",
                    e.len()
                )));
            }
        }
        Ok(PerturbationSchedule { dim, kind: ScheduleKind::FiniteList(entries), alpha_for_weights: 3.0 })
    }

    pub fn with_weight_alpha(mut self, alpha: f64) -> Self {
        self.alpha_for_weights = alpha;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &ScheduleKind {
        &self.kind
    }

    pub fn weight_alpha(&self) -> f64 {
        self.alpha_for_weights
    }

    /// True when every emitted term is exactly zero.
    pub fn is_zero(&self) -> bool {
        match &self.kind {
            ScheduleKind::Zero => true,
            ScheduleKind::PowerLaw { magnitude, .. } => *magnitude == 0.0,
            ScheduleKind::FiniteList(entries) => {
                entries.iter().all(|e| e.iter().all(|v| *v == 0.0))
            }
        }
    }

    /// g_k for k ≥ 1; deterministic in (schedule, k).
    pub fn sample_discrete(&self, k: usize) -> Result<Vec<f64>> {
        if k == 0 {
            return Err(Error::usage("iteration count starts at 1; k = 0 is invalid"));
        }
        Ok(match &self.kind {
            ScheduleKind::Zero => vec![0.0; self.dim],
            ScheduleKind::PowerLaw { magnitude, exponent, direction } => {
                let m = magnitude * (k as f64).powf(-exponent);
                direction.at(k as u64).into_iter().map(|u| m * u).collect()
            }
            ScheduleKind::FiniteList(entries) => entries
                .get(k - 1)
                .cloned()
                .unwrap_or_else(|| vec![0.0; self.dim]),
        })
    }

    /// g(t) for t ≥ t0 > 0. Finite-list schedules are discrete-only.
    pub fn sample_continuous(&self, t: f64, t0: f64) -> Result<Vec<f64>> {
        if !(t >= t0) {
            return Err(Error::usage(format!("time {t} is below the initial time {t0}")));
        }
        match &self.kind {
            ScheduleKind::Zero => Ok(vec![0.0; self.dim]),
            ScheduleKind::PowerLaw { magnitude, exponent, direction } => {
                let m = magnitude * t.powf(-exponent);
                // Continuous time has no index; seeded directions fall back
                // to the index-0 draw as the fixed direction of g(t).
                Ok(direction.at(0).into_iter().map(|u| m * u).collect())
            }
            ScheduleKind::FiniteList(_) => Err(Error::usage(
                "finite-list schedules have no continuous-time analogue",
            )),
        }
    }

    /// ‖g_k‖ without building the vector.
    pub fn norm_at(&self, k: usize) -> f64 {
        match &self.kind {
            ScheduleKind::Zero => 0.0,
            ScheduleKind::PowerLaw { magnitude, exponent, .. } => {
                magnitude * (k as f64).powf(-exponent)
            }
            ScheduleKind::FiniteList(entries) => entries.get(k - 1).map_or(0.0, |e| norm(e)),
        }
    }

    /// ‖g(t)‖ for power-law and zero schedules.
    pub fn norm_continuous(&self, t: f64) -> f64 {
        match &self.kind {
            ScheduleKind::Zero => 0.0,
            ScheduleKind::PowerLaw { magnitude, exponent, .. } => magnitude * t.powf(-exponent),
            ScheduleKind::FiniteList(_) => 0.0,
        }
    }

    /// ∑_{j=k_from}^{k_to} (j + α − 1)·‖g_j‖, an exact finite sum.
    pub fn weighted_tail_sum(&self, alpha: f64, k_from: usize, k_to: usize) -> Result<f64> {
        if k_from == 0 || k_from > k_to {
            return Err(Error::usage(format!(
                "index range [{k_from}, {k_to}] must satisfy 1 <= k_from <= k_to"
            )));
        }
        match &self.kind {
            ScheduleKind::Zero => Ok(0.0),
            ScheduleKind::FiniteList(entries) => {
                let hi = k_to.min(entries.len());
                let mut total = 0.0;
                for j in k_from..=hi {
                    total += (j as f64 + alpha - 1.0) * norm(&entries[j - 1]);
                }
                Ok(total)
            }
            ScheduleKind::PowerLaw { magnitude, exponent, .. } => {
                if *magnitude == 0.0 {
                    return Ok(0.0);
                }
                let mut total = 0.0;
                for j in k_from..=k_to {
                    let jf = j as f64;
                    total += (jf + alpha - 1.0) * magnitude * jf.powf(-exponent);
                }
                Ok(total)
            }
        }
    }

    /// Upper bound on the full series ∑_{j≥1} (j+α−1)‖g_j‖: exact partial sum
    /// up to `truncate_at` plus the integral-comparison tail remainder.
    /// `None` when the series diverges.
    pub fn weighted_total_with_tail(&self, alpha: f64, truncate_at: usize) -> Option<f64> {
        match &self.kind {
            ScheduleKind::Zero => Some(0.0),
            ScheduleKind::FiniteList(entries) => {
                if entries.is_empty() {
                    return Some(0.0);
                }
                Some(self.weighted_tail_sum(alpha, 1, entries.len()).expect("valid range"))
            }
            ScheduleKind::PowerLaw { magnitude, exponent, .. } => {
                if *magnitude == 0.0 {
                    return Some(0.0);
                }
                let p = *exponent;
                if p <= 2.0 {
                    return None;
                }
                let n = truncate_at.max(1);
                let partial = self.weighted_tail_sum(alpha, 1, n).expect("valid range");
                // ∑_{j>N} j^{1−p} ≤ N^{2−p}/(p−2) and ∑_{j>N} j^{−p} ≤ N^{1−p}/(p−1)
                let nf = n as f64;
                let tail = magnitude
                    * (nf.powf(2.0 - p) / (p - 2.0)
                        + (alpha - 1.0) * nf.powf(1.0 - p) / (p - 1.0));
                Some(partial + tail)
            }
        }
    }

    /// ∫_{t0}^∞ τ‖g(τ)‖ dτ in closed form; `None` when divergent or when the
    /// schedule has no continuous-time analogue.
    pub fn t_weighted_integral(&self, t0: f64) -> Option<f64> {
        match &self.kind {
            ScheduleKind::Zero => Some(0.0),
            ScheduleKind::PowerLaw { magnitude, exponent, .. } => {
                if *magnitude == 0.0 {
                    Some(0.0)
                } else if *exponent > 2.0 {
                    Some(magnitude * t0.powf(2.0 - exponent) / (exponent - 2.0))
                } else {
                    None
                }
            }
            ScheduleKind::FiniteList(_) => None,
        }
    }

    /// ∫_{t0}^∞ ‖g(τ)‖ dτ in closed form where available.
    pub fn norm_integral(&self, t0: f64) -> Option<f64> {
        match &self.kind {
            ScheduleKind::Zero => Some(0.0),
            ScheduleKind::PowerLaw { magnitude, exponent, .. } => {
                if *magnitude == 0.0 {
                    Some(0.0)
                } else if *exponent > 1.0 {
                    Some(magnitude * t0.powf(1.0 - exponent) / (exponent - 1.0))
                } else {
                    None
                }
            }
            ScheduleKind::FiniteList(_) => None,
        }
    }

    /// Classifies the schedule against the summability hypotheses.
    pub fn classify_summability(&self) -> SummabilityReport {
        match &self.kind {
            ScheduleKind::Zero => SummabilityReport::all(true),
            ScheduleKind::FiniteList(_) => SummabilityReport::all(true),
            ScheduleKind::PowerLaw { magnitude, exponent, .. } => {
                if *magnitude == 0.0 {
                    return SummabilityReport::all(true);
                }
                let p = *exponent;
                SummabilityReport {
                    norm_summable: p > 1.0,
                    k_weighted_summable: p > 2.0,
                    t_weighted_integrable: p > 2.0,
                    analytic: true,
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn e1(dim: usize) -> Direction {
        let mut v = vec![0.0; dim];
        v[0] = 1.0;
        Direction::fixed(v).unwrap()
    }

    #[test]
    fn sample_discrete_examples() {
        let zero = PerturbationSchedule::zero(3);
        assert_eq!(zero.sample_discrete(7).unwrap(), vec![0.0; 3]);

        let pl = PerturbationSchedule::power_law(0.1, 3.0, e1(2)).unwrap();
        let g2 = pl.sample_discrete(2).unwrap();
        assert!((g2[0] - 0.0125).abs() < 1e-15);
        assert_eq!(g2[1], 0.0);

        let fl = PerturbationSchedule::finite_list(
            vec![vec![1.0], vec![2.0], vec![3.0]],
            1,
        )
        .unwrap();
        assert_eq!(fl.sample_discrete(5).unwrap(), vec![0.0]);
        assert_eq!(fl.sample_discrete(2).unwrap(), vec![2.0]);
    }

    #[test]
    fn sample_discrete_rejects_k_zero() {
        let zero = PerturbationSchedule::zero(1);
        assert!(matches!(zero.sample_discrete(0), Err(Error::Usage(_))));
    }

    #[test]
    fn sample_continuous_examples() {
        let zero = PerturbationSchedule::zero(2);
        assert_eq!(zero.sample_continuous(10.0, 1.0).unwrap(), vec![0.0; 2]);

        let pl = PerturbationSchedule::power_law(1.0, 3.0, e1(1)).unwrap();
        assert!((pl.sample_continuous(2.0, 1.0).unwrap()[0] - 0.125).abs() < 1e-15);

        let pl2 = PerturbationSchedule::power_law(2.0, 2.0, e1(1)).unwrap();
        assert!((pl2.sample_continuous(4.0, 1.0).unwrap()[0] - 0.125).abs() < 1e-15);

        assert!(matches!(pl.sample_continuous(0.5, 1.0), Err(Error::Usage(_))));
    }

    #[test]
    fn weighted_tail_sum_examples() {
        let zero = PerturbationSchedule::zero(1);
        assert_eq!(zero.weighted_tail_sum(3.0, 1, 100).unwrap(), 0.0);

        // ∑_{j=1}^{2} (j+2)·j⁻³ = 3·1 + 4·(1/8) = 3.5
        let pl = PerturbationSchedule::power_law(1.0, 3.0, e1(1)).unwrap();
        assert!((pl.weighted_tail_sum(3.0, 1, 2).unwrap() - 3.5).abs() < 1e-15);

        // p > 2 partial sums stabilize.
        let a = pl.weighted_tail_sum(3.0, 1, 1_000_000).unwrap();
        let b = pl.weighted_tail_sum(3.0, 1, 2_000_000).unwrap();
        assert!((b - a).abs() < 1e-5, "tail not converged: {}", b - a);
    }

    #[test]
    fn weighted_tail_sum_rejects_bad_range() {
        let zero = PerturbationSchedule::zero(1);
        assert!(zero.weighted_tail_sum(3.0, 2, 1).is_err());
        assert!(zero.weighted_tail_sum(3.0, 0, 1).is_err());
    }

    #[test]
    fn weighted_sums_grow_without_bound_below_threshold() {
        // For p ≤ 2 the weighted sum exceeds any fixed bound: the value at
        // N = 10⁶ is more than 10× the value at N = 10³ for p = 1.
        let pl = PerturbationSchedule::power_law(1.0, 1.0, e1(1)).unwrap();
        let small = pl.weighted_tail_sum(3.0, 1, 1_000).unwrap();
        let large = pl.weighted_tail_sum(3.0, 1, 1_000_000).unwrap();
        assert!(large > 10.0 * small);
        assert!(pl.weighted_total_with_tail(3.0, 1_000).is_none());
    }

    #[test]
    fn weighted_total_bounds_the_partial_sums() {
        let pl = PerturbationSchedule::power_law(0.5, 3.0, e1(1)).unwrap();
        let total = pl.weighted_total_with_tail(3.0, 100).unwrap();
        let partial = pl.weighted_tail_sum(3.0, 1, 1_000_000).unwrap();
        assert!(partial <= total);
        let mut prev = 0.0;
        for n in [10usize, 100, 1000, 10_000] {
            let s = pl.weighted_tail_sum(3.0, 1, n).unwrap();
            assert!(s >= prev);
            prev = s;
        }
    }

    #[test]
    fn classify_examples() {
        let p3 = PerturbationSchedule::power_law(1.0, 3.0, e1(1)).unwrap();
        assert!(p3.classify_summability().k_weighted_summable);

        let p15 = PerturbationSchedule::power_law(1.0, 1.5, e1(1)).unwrap();
        let rep = p15.classify_summability();
        assert!(rep.norm_summable && !rep.k_weighted_summable);

        let zero = PerturbationSchedule::zero(4);
        assert_eq!(zero.classify_summability(), SummabilityReport::all(true));
    }

    #[test]
    fn sampling_is_reproducible_and_unit_norm() {
        let sched = PerturbationSchedule::power_law(
            0.3,
            2.5,
            Direction::seeded(41, 5),
        )
        .unwrap();
        for k in [1usize, 2, 17, 1000] {
            let a = sched.sample_discrete(k).unwrap();
            let b = sched.sample_discrete(k).unwrap();
            assert_eq!(a, b, "sampling must be bit-identical");
            let dir = Direction::seeded(41, 5).at(k as u64);
            assert!((norm(&dir) - 1.0).abs() < 1e-12);
            assert!((norm(&a) - sched.norm_at(k)).abs() < 1e-12 * (1.0 + sched.norm_at(k)));
        }
        // Distinct indices give distinct directions.
        let d1 = Direction::seeded(41, 5).at(1);
        let d2 = Direction::seeded(41, 5).at(2);
        assert!(crate::linalg::dist(&d1, &d2) > 1e-6);
    }

    #[test]
    fn continuous_integrals_match_hand_values() {
        // ∫_1^∞ τ·0.01τ⁻³ dτ = 0.01
        let pl = PerturbationSchedule::power_law(0.01, 3.0, e1(1)).unwrap();
        assert!((pl.t_weighted_integral(1.0).unwrap() - 0.01).abs() < 1e-15);
        assert!((pl.norm_integral(1.0).unwrap() - 0.005).abs() < 1e-15);
        let p2 = PerturbationSchedule::power_law(1.0, 2.0, e1(1)).unwrap();
        assert!(p2.t_weighted_integral(1.0).is_none());
    }

    proptest! {
        #[test]
        fn k_weighted_implies_norm_summable(p in -1.0f64..5.0, c in 0.0f64..2.0) {
            let sched = PerturbationSchedule::power_law(c, p, e1(1)).unwrap();
            let rep = sched.classify_summability();
            prop_assert!(!rep.k_weighted_summable || rep.norm_summable);
        }
    }
}
