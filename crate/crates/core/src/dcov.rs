//! Empirical distance covariance, distance variances, and distance
//! correlation, plus a brute-force V-statistic cross-check.
//!
//! All estimators are plug-in V-statistics of the empirical measure (1/n^2
//! normalization, plain double centering, no small-sample corrections): with
//! pairwise distances `a_ij = d_X(x_i, x_j)`, `b_ij = d_Y(y_i, y_j)` and
//! doubly centered matrices `A_ij = a_ij - a_i. - a_.j + a_..`,
//!
//! ```text
//! dcov_n(X, Y) = (1/n^2) sum_ij A_ij B_ij
//!              = S1 - 2 S2 + S3,
//! S1 = (1/n^2) sum_ij a_ij b_ij,
//! S2 = (1/n^3) sum_i (sum_j a_ij)(sum_j b_ij),
//! S3 = (1/n^4) (sum_ij a_ij)(sum_ij b_ij).
//! ```
//!
//! This follows the squared convention (no square root of the whole
//! expression), so `dcov` here is the square of the classical `V(X, Y)`.
//! The expansion is O(n^2) time and O(n) memory; [`dcov_brute_force`]
//! evaluates the defining order-6 kernel directly in O(n^6) and exists to
//! validate the fast path.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::metric::{PairedSample, Side};
use crate::numeric::CompensatedSum;
use crate::{Error, Result};

/// Distance variances at or below this threshold are treated as coming from
/// an almost-surely-constant coordinate, and the distance correlation is set
/// to 0 by convention.
pub const DEGENERATE_VARIANCE_EPS: f64 = 1e-14;

/// Rounding slack permitted when clamping a distance correlation into
/// [0, 1]; larger excursions are reported as numeric errors.
pub const DCOR_CLAMP_SLACK: f64 = 1e-12;

/// Largest sample size accepted by [`dcov_brute_force`].
pub const BRUTE_FORCE_MAX_N: usize = 8;

/// Aggregates of one pairing of distance matrices (`a` from the X side, `b`
/// from the Y side, or one side paired with itself), sufficient to evaluate
/// the double-centered V-statistic without materializing the matrices.
#[derive(Debug, Clone)]
pub struct CenteredDistanceSummary {
    n: usize,
    /// sum_ij a_ij * b_ij
    cross_sum: f64,
    /// row i holds sum_j a_ij
    row_sums_a: Vec<f64>,
    row_sums_b: Vec<f64>,
    grand_a: f64,
    grand_b: f64,
}

impl CenteredDistanceSummary {
    /// Summary of the (X distances, Y distances) pairing.
    pub fn cross(sample: &PairedSample) -> Self {
        Self::build(sample.n(), |i, j| (sample.x_dist(i, j), sample.y_dist(i, j)))
    }

    /// Summary of one margin paired with itself, as used by the distance
    /// variances `dcov(X, X)` and `dcov(Y, Y)`.
    pub fn marginal(sample: &PairedSample, side: Side) -> Self {
        match side {
            Side::X => Self::build(sample.n(), |i, j| {
                let d = sample.x_dist(i, j);
                (d, d)
            }),
            Side::Y => Self::build(sample.n(), |i, j| {
                let d = sample.y_dist(i, j);
                (d, d)
            }),
        }
    }

    fn build(n: usize, dist: impl Fn(usize, usize) -> (f64, f64)) -> Self {
        let mut cross = CompensatedSum::new();
        let mut row_a = vec![0.0; n];
        let mut row_b = vec![0.0; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = dist(i, j);
                cross.add(2.0 * a * b);
                row_a[i] += a;
                row_a[j] += a;
                row_b[i] += b;
                row_b[j] += b;
            }
        }
        let mut grand_a = CompensatedSum::new();
        let mut grand_b = CompensatedSum::new();
        for i in 0..n {
            grand_a.add(row_a[i]);
            grand_b.add(row_b[i]);
        }
        Self {
            n,
            cross_sum: cross.value(),
            row_sums_a: row_a,
            row_sums_b: row_b,
            grand_a: grand_a.value(),
            grand_b: grand_b.value(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cross_sum(&self) -> f64 {
        self.cross_sum
    }

    pub fn row_sums_a(&self) -> &[f64] {
        &self.row_sums_a
    }

    pub fn row_sums_b(&self) -> &[f64] {
        &self.row_sums_b
    }

    pub fn grand_a(&self) -> f64 {
        self.grand_a
    }

    pub fn grand_b(&self) -> f64 {
        self.grand_b
    }

    /// The doubly centered V-statistic `S1 - 2 S2 + S3`.
    pub fn vstat(&self) -> f64 {
        vstat_from_parts(
            self.n,
            self.cross_sum,
            row_dot(&self.row_sums_a, &self.row_sums_b),
            self.grand_a,
            self.grand_b,
        )
    }
}

pub(crate) fn row_dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = CompensatedSum::new();
    for (x, y) in a.iter().zip(b) {
        acc.add(x * y);
    }
    acc.value()
}

pub(crate) fn vstat_from_parts(
    n: usize,
    cross_sum: f64,
    row_dot: f64,
    grand_a: f64,
    grand_b: f64,
) -> f64 {
    let nf = n as f64;
    cross_sum / (nf * nf) - 2.0 * row_dot / (nf * nf * nf) + grand_a * grand_b / (nf * nf * nf * nf)
}

/// Empirical distance covariance `dcov_n(X, Y)` of the full sample.
pub fn dcov_empirical(sample: &PairedSample) -> f64 {
    CenteredDistanceSummary::cross(sample).vstat()
}

/// Empirical distance variance `dcov(X, X)` or `dcov(Y, Y)`.
pub fn dcov_variance(sample: &PairedSample, side: Side) -> f64 {
    CenteredDistanceSummary::marginal(sample, side).vstat()
}

/// Distance correlation from the three V-statistics, applying the
/// degenerate-denominator convention and the bounded-range check.
pub(crate) fn dcor_from_parts(dcov_xy: f64, var_x: f64, var_y: f64) -> Result<f64> {
    if var_x <= DEGENERATE_VARIANCE_EPS || var_y <= DEGENERATE_VARIANCE_EPS {
        return Ok(0.0);
    }
    let r = dcov_xy / libm::sqrt(var_x * var_y);
    if !(-DCOR_CLAMP_SLACK..=1.0 + DCOR_CLAMP_SLACK).contains(&r) {
        return Err(Error::Numeric(format!(
            "distance correlation {r} outside [0, 1] beyond rounding slack"
        )));
    }
    Ok(r.clamp(0.0, 1.0))
}

/// Empirical distance correlation `dcor_n(X, Y)` in [0, 1].
///
/// Returns 0 when either distance variance is at the degeneracy threshold
/// (the almost-surely-constant convention).
pub fn dcor_empirical(sample: &PairedSample) -> Result<f64> {
    dcor_from_parts(
        dcov_empirical(sample),
        dcov_variance(sample, Side::X),
        dcov_variance(sample, Side::Y),
    )
}

/// Direct evaluation of the defining order-6 V-statistic:
///
/// ```text
/// (1/n^6) sum over all index 6-tuples of
///   [a(i1,i2) - a(i1,i3) - a(i2,i4) + a(i3,i4)]
/// * [b(i1,i2) - b(i1,i5) - b(i2,i6) + b(i5,i6)]
/// ```
///
/// O(n^6) cost; refuses n > [`BRUTE_FORCE_MAX_N`] so it cannot be used by
/// accident. This is the independent cross-check for [`dcov_empirical`] and
/// shares nothing with it beyond the pairwise distances.
pub fn dcov_brute_force(sample: &PairedSample) -> Result<f64> {
    let n = sample.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::BruteForceTooLarge {
            n,
            max: BRUTE_FORCE_MAX_N,
        });
    }
    let mut a = vec![0.0; n * n];
    let mut b = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = sample.x_dist(i, j);
            b[i * n + j] = sample.y_dist(i, j);
        }
    }
    let mut total = 0.0;
    for i1 in 0..n {
        for i2 in 0..n {
            for i3 in 0..n {
                for i4 in 0..n {
                    let fa = a[i1 * n + i2] - a[i1 * n + i3] - a[i2 * n + i4] + a[i3 * n + i4];
                    if fa == 0.0 {
                        continue;
                    }
                    for i5 in 0..n {
                        for i6 in 0..n {
                            let fb = b[i1 * n + i2] - b[i1 * n + i5] - b[i2 * n + i6]
                                + b[i5 * n + i6];
                            total += fa * fb;
                        }
                    }
                }
            }
        }
    }
    let nf = n as f64;
    Ok(total / libm::pow(nf, 6.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::MetricDescriptor;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sample(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> PairedSample {
        let xs: Vec<f64> = (0..n * dim).map(|_| rng.random_range(-3.0..3.0)).collect();
        let ys: Vec<f64> = (0..n * dim).map(|_| rng.random_range(-3.0..3.0)).collect();
        PairedSample::new(
            MetricDescriptor::euclidean(dim).unwrap(),
            MetricDescriptor::euclidean(dim).unwrap(),
            xs,
            ys,
        )
        .unwrap()
    }

    #[test]
    fn single_point_is_zero() {
        let s = PairedSample::scalar(&[3.5], &[-1.0]).unwrap();
        assert_eq!(dcov_empirical(&s), 0.0);
        assert_eq!(dcov_brute_force(&s).unwrap(), 0.0);
    }

    #[test]
    fn two_point_values() {
        // Both checked by hand double centering (A = B = +-0.5 resp. B = +-1)
        // and by the brute-force kernel below.
        let s = PairedSample::scalar(&[0.0, 1.0], &[0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(dcov_empirical(&s), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(dcov_brute_force(&s).unwrap(), 0.25, epsilon = 1e-15);

        let s = PairedSample::scalar(&[0.0, 1.0], &[0.0, 2.0]).unwrap();
        assert_abs_diff_eq!(dcov_empirical(&s), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(dcov_brute_force(&s).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn variance_examples() {
        let s = PairedSample::scalar(&[7.0, 7.0, 7.0], &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(dcov_variance(&s, Side::X), 0.0);

        let s = PairedSample::scalar(&[0.0, 1.0], &[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(dcov_variance(&s, Side::X), 0.25, epsilon = 1e-15);

        // Hand double centering gives 40/81; the order-6 kernel on the
        // (x, x) pairing agrees.
        let s = PairedSample::scalar(&[0.0, 1.0, 2.0], &[0.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(dcov_variance(&s, Side::X), 40.0 / 81.0, epsilon = 1e-14);
        let xx = PairedSample::scalar(&[0.0, 1.0, 2.0], &[0.0, 1.0, 2.0]).unwrap();
        assert_abs_diff_eq!(
            dcov_brute_force(&xx).unwrap(),
            40.0 / 81.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn dcor_examples() {
        let s = PairedSample::scalar(&[2.0, 2.0, 2.0], &[0.0, 5.0, 1.0]).unwrap();
        assert_eq!(dcor_empirical(&s).unwrap(), 0.0);

        let s = PairedSample::scalar(&[0.0, 1.0, 2.0], &[0.0, 1.0, 2.0]).unwrap();
        assert_abs_diff_eq!(dcor_empirical(&s).unwrap(), 1.0, epsilon = 1e-12);

        // 0.5 / sqrt(0.25 * 1.0) = 1: the isometry-up-to-scale case.
        let s = PairedSample::scalar(&[0.0, 1.0], &[0.0, 2.0]).unwrap();
        assert_abs_diff_eq!(dcor_empirical(&s).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn fast_path_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        for trial in 0..50 {
            let n = 2 + trial % 5; // 2..=6
            let dim = 1 + trial % 2;
            let s = random_sample(&mut rng, n, dim);
            let fast = dcov_empirical(&s);
            let brute = dcov_brute_force(&s).unwrap();
            let tol = 1e-10 * brute.abs().max(1.0);
            assert!(
                (fast - brute).abs() <= tol,
                "n={n} dim={dim}: fast {fast} vs brute {brute}"
            );
        }
    }

    #[test]
    fn brute_force_refuses_large_n() {
        let xs: Vec<f64> = (0..9).map(|i| i as f64).collect();
        let s = PairedSample::scalar(&xs, &xs).unwrap();
        assert_eq!(
            dcov_brute_force(&s).unwrap_err(),
            Error::BruteForceTooLarge { n: 9, max: 8 }
        );
    }

    #[test]
    fn double_centered_rows_sum_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(57);
        let s = random_sample(&mut rng, 25, 2);
        let n = s.n();
        let summary = CenteredDistanceSummary::cross(&s);
        let rows = summary.row_sums_a();
        let grand = summary.grand_a();
        for i in 0..n {
            let mut row_sum = 0.0;
            for j in 0..n {
                let centered = s.x_dist(i, j) - rows[i] / n as f64 - rows[j] / n as f64
                    + grand / (n as f64 * n as f64);
                row_sum += centered;
            }
            assert!(row_sum.abs() <= 1e-10, "row {i} sums to {row_sum}");
        }
    }

    #[test]
    fn summary_grand_is_row_total() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = random_sample(&mut rng, 17, 1);
        let summary = CenteredDistanceSummary::cross(&s);
        let total: f64 = summary.row_sums_a().iter().sum();
        assert_abs_diff_eq!(summary.grand_a(), total, epsilon = 1e-9);
        assert!(summary.grand_a() >= 0.0);
        assert!(summary.grand_b() >= 0.0);
    }

    #[test]
    fn nonnegativity_and_dcor_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..50 {
            let n = rng.random_range(2..30);
            let s = random_sample(&mut rng, n, 1);
            assert!(dcov_empirical(&s) >= -1e-12);
            let r = dcor_empirical(&s).unwrap();
            assert!((0.0..=1.0).contains(&r));
        }
    }

    #[test]
    fn scaling_by_power_of_two_is_exact() {
        // Scaling d_X by c multiplies dcov by exactly c and leaves dcor
        // unchanged; powers of two make this bit-exact.
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 15;
        let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let ys: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let base = PairedSample::scalar(&xs, &ys).unwrap();

        let c = 4.0;
        let scaled = PairedSample::new(
            MetricDescriptor::weighted_euclidean(alloc::vec![c * c]).unwrap(),
            MetricDescriptor::euclidean(1).unwrap(),
            xs.clone(),
            ys.clone(),
        )
        .unwrap();

        assert_eq!(dcov_empirical(&scaled), c * dcov_empirical(&base));
        assert_eq!(
            dcor_empirical(&scaled).unwrap(),
            dcor_empirical(&base).unwrap()
        );
    }

    #[test]
    fn general_scaling_within_tolerance() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let n = 12;
        let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let ys: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let base = PairedSample::scalar(&xs, &ys).unwrap();
        let c: f64 = 0.7;
        let scaled = PairedSample::new(
            MetricDescriptor::weighted_euclidean(alloc::vec![c * c]).unwrap(),
            MetricDescriptor::euclidean(1).unwrap(),
            xs.clone(),
            ys.clone(),
        )
        .unwrap();
        assert_abs_diff_eq!(
            dcov_empirical(&scaled),
            c * dcov_empirical(&base),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            dcor_empirical(&scaled).unwrap(),
            dcor_empirical(&base).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn permutation_leaves_dcov_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let n = 20;
        let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let ys: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let base = PairedSample::scalar(&xs, &ys).unwrap();

        let mut perm: Vec<usize> = (0..n).collect();
        // Fisher-Yates
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            perm.swap(i, j);
        }
        let pxs: Vec<f64> = perm.iter().map(|&i| xs[i]).collect();
        let pys: Vec<f64> = perm.iter().map(|&i| ys[i]).collect();
        let permuted = PairedSample::scalar(&pxs, &pys).unwrap();

        assert_abs_diff_eq!(
            dcov_empirical(&base),
            dcov_empirical(&permuted),
            epsilon = 1e-12
        );
    }
}
