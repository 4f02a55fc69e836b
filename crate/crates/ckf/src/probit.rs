//! Ordered-probit partition machinery and truncated-normal moments.
//!
//! The real line is split into `m` right-closed cells `(b_{k-1}, b_k]`, one
//! per ordinal class. Variational updates need the mean (and for the
//! objective, variance and entropy) of a normal restricted to one cell;
//! those moments are evaluated with tail-stable formulas so that cells far
//! out in the tails never produce 0/0.

use std::f64::consts::PI;

use statrs::function::erf::{erf, erfc};

use crate::error::{CkfError, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;
const SQRT_2: f64 = std::f64::consts::SQRT_2;
/// Standardized-bound magnitude beyond which the scaled (Mills-ratio) path
/// is used for same-sign cells.
const TAIL_SWITCH: f64 = 6.0;

/// Ordinal class index, 1-based: `k` in `1..=m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ClassLabel(pub usize);

impl ClassLabel {
    /// Zero-based position of the class.
    pub fn index(self) -> usize {
        self.0 - 1
    }
}

/// Partition of the real line into `m` ordered, right-closed cells.
///
/// Cell `k` is `(b_{k-1}, b_k]` with `b_0 = -inf` and `b_m = +inf`; `labels`
/// carries the observable value of each class (e.g. star ratings) in
/// ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    boundaries: Vec<f64>,
    labels: Vec<f64>,
}

impl Partition {
    /// Equal-width partition centered at zero: interior boundaries at
    /// `width * (k - m/2)` for `k = 1..m-1`, labels `1..=m`.
    pub fn build(m: usize, width: f64) -> Result<Self> {
        if m < 2 {
            return Err(CkfError::Config(format!(
                "partition needs at least 2 classes, got {m}"
            )));
        }
        if !(width > 0.0) || !width.is_finite() {
            return Err(CkfError::Config(format!(
                "partition width must be positive and finite, got {width}"
            )));
        }
        let boundaries = (1..m)
            .map(|k| width * (k as f64 - m as f64 / 2.0))
            .collect();
        let labels = (1..=m).map(|k| k as f64).collect();
        Partition::from_parts(boundaries, labels)
    }

    /// Partition from explicit boundaries and labels. `m = 1` (no
    /// boundaries, a single cell covering the whole line) is allowed here.
    pub fn from_parts(boundaries: Vec<f64>, labels: Vec<f64>) -> Result<Self> {
        if labels.is_empty() || labels.len() != boundaries.len() + 1 {
            return Err(CkfError::Config(
                "labels must number exactly one more than boundaries".into(),
            ));
        }
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
        if !increasing(&boundaries) || boundaries.iter().any(|b| !b.is_finite()) {
            return Err(CkfError::Config(
                "boundaries must be finite and strictly increasing".into(),
            ));
        }
        if !increasing(&labels) || labels.iter().any(|l| !l.is_finite()) {
            return Err(CkfError::Config(
                "labels must be finite and strictly increasing".into(),
            ));
        }
        Ok(Partition { boundaries, labels })
    }

    /// Scale all labels, e.g. to turn `1..=m` into half-star values.
    pub fn with_labels(mut self, labels: Vec<f64>) -> Result<Self> {
        if labels.len() != self.labels.len() {
            return Err(CkfError::Config("label count must match class count".into()));
        }
        self.labels = labels;
        Partition::from_parts(self.boundaries, self.labels)
    }

    pub fn num_classes(&self) -> usize {
        self.labels.len()
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn label_value(&self, k: ClassLabel) -> f64 {
        self.labels[k.index()]
    }

    /// The unique class whose cell contains `y` (cells are right-closed).
    pub fn class_of(&self, y: f64) -> ClassLabel {
        let below = self.boundaries.partition_point(|&b| b < y);
        ClassLabel(below + 1)
    }

    /// `(l_k, r_k)` for class `k`, with infinite outer edges.
    pub fn cell(&self, k: ClassLabel) -> (f64, f64) {
        let i = k.index();
        let l = if i == 0 {
            f64::NEG_INFINITY
        } else {
            self.boundaries[i - 1]
        };
        let r = if i + 1 == self.labels.len() {
            f64::INFINITY
        } else {
            self.boundaries[i]
        };
        (l, r)
    }

    /// Class whose label is nearest to `value`, provided the gap is at most
    /// `tol`. Used to validate ordinal inputs against the label grid.
    pub fn nearest_label(&self, value: f64, tol: f64) -> Option<ClassLabel> {
        let mut best = 0usize;
        let mut best_gap = f64::INFINITY;
        for (i, &l) in self.labels.iter().enumerate() {
            let gap = (l - value).abs();
            if gap < best_gap {
                best = i;
                best_gap = gap;
            }
        }
        (best_gap <= tol).then_some(ClassLabel(best + 1))
    }
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal CDF, evaluated through erfc so both tails keep full
/// relative precision.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Scaled complementary error function e^{z^2} erfc(z) for z >= 0.
fn erfcx(z: f64) -> f64 {
    if z < 25.0 {
        erfc(z) * (z * z).exp()
    } else {
        // Asymptotic series; the first omitted term is far below f64 eps.
        let inv2z2 = 0.5 / (z * z);
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..=8u32 {
            term *= -((2 * k - 1) as f64) * inv2z2;
            sum += term;
        }
        sum / (z * PI.sqrt())
    }
}

/// Mills ratio (1 - Phi(x)) / phi(x) for x >= 0.
fn mills_ratio(x: f64) -> f64 {
    (PI / 2.0).sqrt() * erfcx(x / SQRT_2)
}

/// Moments of a normal `N(center, sigma^2)` truncated to `(l, r]`.
#[derive(Debug, Clone, Copy)]
pub struct CellMoments {
    /// Log of the cell mass `Phi(beta) - Phi(alpha)`.
    pub log_mass: f64,
    pub mean: f64,
    pub variance: f64,
    pub entropy: f64,
}

/// Mean of a normal truncated to `(l, r)`; `l < r`, bounds may be infinite.
pub fn trunc_norm_mean(center: f64, sigma: f64, l: f64, r: f64) -> f64 {
    cell_moments(center, sigma, l, r).mean
}

/// Full moment set of the truncated normal. Same-sign cells past the tail
/// switch go through Mills-ratio scaling so the ratios stay finite however
/// deep the cell sits.
pub fn cell_moments(center: f64, sigma: f64, l: f64, r: f64) -> CellMoments {
    debug_assert!(sigma > 0.0);
    debug_assert!(l < r);
    let alpha = if l == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        (l - center) / sigma
    };
    let beta = if r == f64::INFINITY {
        f64::INFINITY
    } else {
        (r - center) / sigma
    };

    if alpha == f64::NEG_INFINITY && beta == f64::INFINITY {
        return CellMoments {
            log_mass: 0.0,
            mean: center,
            variance: sigma * sigma,
            entropy: 0.5 * (LN_2PI + 1.0) + sigma.ln(),
        };
    }

    // Reflect so the working cell has a finite lower bound and positive
    // upper bound; `sign` restores the mean offset at the end.
    let (a, b, sign) = if beta <= 0.0 || alpha == f64::NEG_INFINITY {
        (-beta, -alpha, -1.0)
    } else {
        (alpha, beta, 1.0)
    };

    // ratio = (phi(a) - phi(b)) / Z, s_over_z = (a phi(a) - b phi(b)) / Z.
    let (ratio, s_over_z, log_mass) = if a >= TAIL_SWITCH {
        // Z underflows here if evaluated directly; divide everything by
        // phi(a) instead.
        let (q, qb, q_mills_b) = if b.is_infinite() {
            (0.0, 0.0, 0.0)
        } else {
            let q = (-0.5 * (b - a) * (b + a)).exp();
            (q, q * b, q * mills_ratio(b))
        };
        let denom = mills_ratio(a) - q_mills_b;
        let ratio = (1.0 - q) / denom;
        let s_over_z = (a - qb) / denom;
        let log_mass = -0.5 * a * a - 0.5 * LN_2PI + denom.ln();
        (ratio, s_over_z, log_mass)
    } else {
        let pdf_a = normal_pdf(a);
        let pdf_b = if b.is_infinite() { 0.0 } else { normal_pdf(b) };
        let mass = if a >= 0.0 {
            let upper = if b.is_infinite() { 0.0 } else { erfc(b / SQRT_2) };
            0.5 * (erfc(a / SQRT_2) - upper)
        } else {
            let upper = if b.is_infinite() { 1.0 } else { erf(b / SQRT_2) };
            0.5 * (upper - erf(a / SQRT_2))
        };
        let b_pdf_b = if b.is_infinite() { 0.0 } else { b * pdf_b };
        (
            (pdf_a - pdf_b) / mass,
            (a * pdf_a - b_pdf_b) / mass,
            mass.ln(),
        )
    };

    let mean = center + sign * sigma * ratio;
    let variance = sigma * sigma * (1.0 + s_over_z - ratio * ratio);
    let entropy = 0.5 * (LN_2PI + 1.0) + sigma.ln() + log_mass + 0.5 * s_over_z;
    CellMoments {
        log_mass,
        mean,
        variance,
        entropy,
    }
}

/// P(class = k) for a latent `N(mean_dot, sigma^2)` pushed through the
/// partition.
pub fn class_prob(mean_dot: f64, sigma: f64, partition: &Partition, k: ClassLabel) -> f64 {
    let (l, r) = partition.cell(k);
    let lower = if l == f64::NEG_INFINITY {
        0.0
    } else {
        normal_cdf((l - mean_dot) / sigma)
    };
    let upper = if r == f64::INFINITY {
        1.0
    } else {
        normal_cdf((r - mean_dot) / sigma)
    };
    upper - lower
}

/// Probabilities of all classes at once; telescopes so the vector sums to 1
/// up to rounding.
pub fn class_probs(mean_dot: f64, sigma: f64, partition: &Partition) -> Vec<f64> {
    let mut cdfs = Vec::with_capacity(partition.num_classes() + 1);
    cdfs.push(0.0);
    for &b in partition.boundaries() {
        cdfs.push(normal_cdf((b - mean_dot) / sigma));
    }
    cdfs.push(1.0);
    cdfs.windows(2).map(|w| w[1] - w[0]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn build_binary_partition() {
        let p = Partition::build(2, 1.0).unwrap();
        assert_eq!(p.boundaries(), &[0.0]);
        assert_eq!(p.labels(), &[1.0, 2.0]);
    }

    #[test]
    fn build_five_class_partition_cell_widths() {
        let sigma = 1.76;
        let p = Partition::build(5, sigma).unwrap();
        let expect = [-1.5 * sigma, -0.5 * sigma, 0.5 * sigma, 1.5 * sigma];
        for (b, e) in p.boundaries().iter().zip(expect) {
            assert_abs_diff_eq!(b, &e, epsilon = 1e-12);
        }
        for w in p.boundaries().windows(2) {
            assert_abs_diff_eq!(w[1] - w[0], sigma, epsilon = 1e-12);
        }
    }

    #[test]
    fn build_rejects_bad_args() {
        assert!(Partition::build(1, 1.0).is_err());
        assert!(Partition::build(5, 0.0).is_err());
        assert!(Partition::build(5, -1.0).is_err());
    }

    #[test]
    fn class_of_outer_and_inner_cells() {
        let p = Partition::build(5, 1.0).unwrap();
        assert_eq!(p.class_of(-1e12).0, 1);
        assert_eq!(p.class_of(1e12).0, 5);
        assert_eq!(p.class_of(0.4).0, 3);
    }

    #[test]
    fn class_of_boundary_is_right_closed() {
        let p = Partition::build(5, 1.0).unwrap();
        for (i, &b) in p.boundaries().iter().enumerate() {
            assert_eq!(p.class_of(b).0, i + 1);
        }
    }

    #[test]
    fn trunc_mean_symmetric_cell_is_center() {
        assert_abs_diff_eq!(trunc_norm_mean(0.0, 1.0, -1.0, 1.0), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(trunc_norm_mean(2.5, 0.7, 1.5, 3.5), 2.5, epsilon = 1e-12);
    }

    #[test]
    fn trunc_mean_untruncated_is_center() {
        let m = trunc_norm_mean(3.25, 2.0, f64::NEG_INFINITY, f64::INFINITY);
        assert_eq!(m, 3.25);
    }

    #[test]
    fn trunc_mean_half_line() {
        // E[y | y > 0] for a standard normal = sqrt(2/pi).
        let m = trunc_norm_mean(0.0, 1.0, 0.0, f64::INFINITY);
        assert_abs_diff_eq!(m, 0.7978845608028654, epsilon = 1e-12);
    }

    #[test]
    fn trunc_mean_deep_tail_stays_finite_and_inside() {
        for a in [6.5_f64, 8.0, 12.0, 30.0, 80.0, 300.0] {
            let m = trunc_norm_mean(0.0, 1.0, a, a + 0.5);
            assert!(m.is_finite());
            assert!(m > a && m < a + 0.5, "mean {m} outside ({a}, {})", a + 0.5);
            let lower = trunc_norm_mean(0.0, 1.0, -a - 0.5, -a);
            assert_abs_diff_eq!(lower, -m, epsilon = 1e-12 * a.max(1.0));
        }
    }

    #[test]
    fn trunc_mean_continuous_across_tail_switch() {
        // Same cell evaluated just below and just above the switch point.
        let below = trunc_norm_mean(0.0, 1.0, 5.999_999, 6.999_999);
        let above = trunc_norm_mean(0.0, 1.0, 6.000_001, 7.000_001);
        assert_abs_diff_eq!(below, above, epsilon = 1e-4);
    }

    #[test]
    fn cell_moments_match_closed_forms_on_half_line() {
        let m = cell_moments(0.0, 1.0, 0.0, f64::INFINITY);
        let mu = (2.0 / PI).sqrt();
        assert_abs_diff_eq!(m.mean, mu, epsilon = 1e-12);
        assert_abs_diff_eq!(m.variance, 1.0 - mu * mu, epsilon = 1e-12);
        assert_abs_diff_eq!(m.log_mass, 0.5_f64.ln(), epsilon = 1e-12);
        // Entropy of the standard half-normal.
        let h = 0.5 * (LN_2PI + 1.0) + 0.5_f64.ln();
        assert_abs_diff_eq!(m.entropy, h, epsilon = 1e-12);
    }

    #[test]
    fn class_prob_binary_centered() {
        let p = Partition::build(2, 1.0).unwrap();
        assert_abs_diff_eq!(class_prob(0.0, 1.0, &p, ClassLabel(1)), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(class_prob(0.0, 1.0, &p, ClassLabel(2)), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn class_prob_cumulative_at_boundary() {
        let sigma = 1.3;
        let p = Partition::build(5, sigma).unwrap();
        let b2 = p.boundaries()[1];
        let below: f64 = (1..=2)
            .map(|k| class_prob(b2, sigma, &p, ClassLabel(k)))
            .sum();
        assert_abs_diff_eq!(below, 0.5, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn class_probs_sum_to_one(mean in -20.0..20.0f64, sigma in 0.05..5.0f64) {
            let p = Partition::build(7, 0.9).unwrap();
            let probs = class_probs(mean, sigma, &p);
            let total: f64 = probs.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            prop_assert!(probs.iter().all(|&q| q >= 0.0));
        }

        #[test]
        fn trunc_mean_monotone_in_center(
            c1 in -6.0..6.0f64,
            delta in 1e-3..4.0f64,
            l in -4.0..3.0f64,
            width in 0.05..5.0f64,
            sigma in 0.2..3.0f64,
        ) {
            let r = l + width;
            let lo = trunc_norm_mean(c1, sigma, l, r);
            let hi = trunc_norm_mean(c1 + delta, sigma, l, r);
            prop_assert!(hi >= lo - 1e-10, "lo={lo} hi={hi}");
        }

        #[test]
        fn trunc_mean_inside_finite_cell(
            center in -8.0..8.0f64,
            l in -10.0..10.0f64,
            width in 0.01..6.0f64,
            sigma in 0.1..4.0f64,
        ) {
            let r = l + width;
            let m = trunc_norm_mean(center, sigma, l, r);
            prop_assert!(m > l && m < r, "m={m} not in ({l}, {r})");
        }

        #[test]
        fn partition_tiles_line(y in -50.0..50.0f64) {
            let p = Partition::build(9, 0.7).unwrap();
            let k = p.class_of(y);
            let (l, r) = p.cell(k);
            prop_assert!(y > l && y <= r);
        }
    }
}
