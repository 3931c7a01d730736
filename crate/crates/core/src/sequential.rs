//! Sequential (prefix) estimator trajectories and the self-normalizers
//! built from them.
//!
//! For m = 1..n, the path holds the batch estimators evaluated on the first
//! m observations. Appending observation m updates the distance-sum
//! aggregates in O(m), for O(n^2) total time and O(n) working memory beyond
//! the stored points; the full distance matrices are never materialized.
//!
//! The normalizers integrate the squared deviation of the rescaled prefix
//! statistic from its endpoint against a finite weighting measure gamma on
//! (0, 1]:
//!
//! ```text
//! V_dcov = sqrt( sum_k w_k ( (lam_k floor(n lam_k) / n) dcov_{floor(n lam_k)}
//!                            - lam_k^2 dcov_n )^2 )
//! V_dcor = sqrt( sum_k w_k lam_k^2 ( (n lam_k^2 / floor(n lam_k)) dcor_{floor(n lam_k)}
//!                                    - lam_k dcor_n )^2 )
//! ```
//!
//! Both are calibrated so that `sqrt(n) V` converges to
//! `tau * sqrt( int lam^2 (B(lam) - lam B(1))^2 dgamma )`, the denominator
//! of the pivotal ratio whose quantiles the tests use. For the covariance
//! the prefix error of `(m/n) dcov_m` is Brownian in `lam` and the displayed
//! weights achieve this directly. The correlation is a scale-free ratio, so
//! its prefix error grows like `B(lam)/lam`; the inner factor
//! `n lam^2 / m` tames that to `B(lam)` and the extra `lam_k^2` weight
//! restores the `lam^2` profile of the limit. Without that weight the
//! statistic is asymptotically compared against quantiles of the wrong
//! functional and the test is badly over-conservative (see
//! `normalizer_limit_profile` in the tests).
//!
//! Prefixes of size 0 or 1 carry no distance information and their
//! statistics are defined as 0; in `V_dcor` a term with `floor(n lam) = 0`
//! contributes `lam^2 (0 - lam dcor_n)^2`, the whole prefix factor being
//! taken as zero rather than a limit.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::dcov::{dcor_from_parts, row_dot, vstat_from_parts};
use crate::metric::PairedSample;
use crate::numeric::{prefix_len, CompensatedSum};
use crate::{Error, Result};

/// Finite discrete probability measure on (0, 1] weighting the
/// self-normalizer integral.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaMeasure {
    support: Vec<f64>,
    weights: Vec<f64>,
}

impl GammaMeasure {
    pub fn new(support: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::BadGamma(format!("support must not be empty")));
        }
        if support.len() != weights.len() {
            return Err(Error::BadGamma(format!(
                "{} support points but {} weights",
                support.len(),
                weights.len()
            )));
        }
        let mut prev = 0.0;
        for (k, lam) in support.iter().enumerate() {
            if !lam.is_finite() || *lam <= prev || *lam > 1.0 {
                return Err(Error::BadGamma(format!(
                    "support must be strictly increasing inside (0, 1]; offending atom {k}: {lam}"
                )));
            }
            prev = *lam;
        }
        let mut total = 0.0;
        for (k, w) in weights.iter().enumerate() {
            if !w.is_finite() || *w <= 0.0 {
                return Err(Error::BadGamma(format!(
                    "weights must be strictly positive; offending weight {k}: {w}"
                )));
            }
            total += w;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::BadGamma(format!("weights sum to {total}, expected 1")));
        }
        Ok(Self { support, weights })
    }

    /// Discrete uniform measure on j/(atoms + 1), j = 1..=atoms.
    ///
    /// `uniform_atoms(19)` is the standard choice: uniform on j/20.
    pub fn uniform_atoms(atoms: usize) -> Result<Self> {
        if atoms == 0 {
            return Err(Error::BadGamma(format!("need at least one atom")));
        }
        let denom = (atoms + 1) as f64;
        let support = (1..=atoms).map(|j| j as f64 / denom).collect();
        let weights = vec![1.0 / atoms as f64; atoms];
        Self::new(support, weights)
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn atoms(&self) -> usize {
        self.support.len()
    }

    /// True when the smallest atom maps to an empty prefix (`lam < 1/n`),
    /// which deserves a warning: such atoms contribute no trajectory
    /// information at this sample size.
    pub fn undersampled_at(&self, n: usize) -> bool {
        self.support[0] * (n as f64) < 1.0 - 1e-12
    }
}

impl Default for GammaMeasure {
    fn default() -> Self {
        Self::uniform_atoms(19).expect("19-atom uniform measure is valid")
    }
}

/// Prefix trajectories of the four estimators for m = 1..n (index m - 1).
#[derive(Debug, Clone)]
pub struct SequentialPath {
    n: usize,
    dcov_xy: Vec<f64>,
    dcov_xx: Vec<f64>,
    dcov_yy: Vec<f64>,
    dcor: Vec<f64>,
}

impl SequentialPath {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dcov_xy(&self) -> &[f64] {
        &self.dcov_xy
    }

    pub fn dcov_xx(&self) -> &[f64] {
        &self.dcov_xx
    }

    pub fn dcov_yy(&self) -> &[f64] {
        &self.dcov_yy
    }

    pub fn dcor(&self) -> &[f64] {
        &self.dcor
    }

    /// Statistic of the first `m` observations; `m = 0` and `m = 1` are 0.
    fn at(&self, values: &[f64], m: usize) -> f64 {
        if m == 0 {
            0.0
        } else {
            values[m - 1]
        }
    }

    pub fn dcov_xy_at(&self, m: usize) -> f64 {
        self.at(&self.dcov_xy, m)
    }

    pub fn dcor_at(&self, m: usize) -> f64 {
        self.at(&self.dcor, m)
    }

    /// Full-sample estimates (the path endpoints).
    pub fn dcov_full(&self) -> f64 {
        self.dcov_xy[self.n - 1]
    }

    pub fn dcor_full(&self) -> f64 {
        self.dcor[self.n - 1]
    }
}

/// Streaming aggregates: row sums of both distance matrices plus the
/// compensated scalar sums needed for the three V-statistics.
struct StreamState {
    rows_a: Vec<f64>,
    rows_b: Vec<f64>,
    cross_ab: CompensatedSum,
    cross_aa: CompensatedSum,
    cross_bb: CompensatedSum,
    grand_a: CompensatedSum,
    grand_b: CompensatedSum,
    scratch_a: Vec<f64>,
    scratch_b: Vec<f64>,
}

impl StreamState {
    fn with_capacity(n: usize) -> Self {
        Self {
            rows_a: Vec::with_capacity(n),
            rows_b: Vec::with_capacity(n),
            cross_ab: CompensatedSum::new(),
            cross_aa: CompensatedSum::new(),
            cross_bb: CompensatedSum::new(),
            grand_a: CompensatedSum::new(),
            grand_b: CompensatedSum::new(),
            scratch_a: Vec::with_capacity(n),
            scratch_b: Vec::with_capacity(n),
        }
    }

    /// Appends observation `idx`, updating all aggregates in O(idx).
    fn append(&mut self, sample: &PairedSample, idx: usize) {
        self.scratch_a.clear();
        self.scratch_b.clear();
        let mut new_row_a = 0.0;
        let mut new_row_b = 0.0;
        let mut dot_ab = 0.0;
        let mut dot_aa = 0.0;
        let mut dot_bb = 0.0;
        for i in 0..idx {
            let a = sample.x_dist(i, idx);
            let b = sample.y_dist(i, idx);
            self.scratch_a.push(a);
            self.scratch_b.push(b);
            new_row_a += a;
            new_row_b += b;
            dot_ab += a * b;
            dot_aa += a * a;
            dot_bb += b * b;
        }
        for i in 0..idx {
            self.rows_a[i] += self.scratch_a[i];
            self.rows_b[i] += self.scratch_b[i];
        }
        self.rows_a.push(new_row_a);
        self.rows_b.push(new_row_b);
        // every new distance appears twice in the symmetric matrix
        self.grand_a.add(2.0 * new_row_a);
        self.grand_b.add(2.0 * new_row_b);
        self.cross_ab.add(2.0 * dot_ab);
        self.cross_aa.add(2.0 * dot_aa);
        self.cross_bb.add(2.0 * dot_bb);
    }

    fn dcov_xy(&self) -> f64 {
        let m = self.rows_a.len();
        vstat_from_parts(
            m,
            self.cross_ab.value(),
            row_dot(&self.rows_a, &self.rows_b),
            self.grand_a.value(),
            self.grand_b.value(),
        )
    }

    fn dcov_xx(&self) -> f64 {
        let m = self.rows_a.len();
        vstat_from_parts(
            m,
            self.cross_aa.value(),
            row_dot(&self.rows_a, &self.rows_a),
            self.grand_a.value(),
            self.grand_a.value(),
        )
    }

    fn dcov_yy(&self) -> f64 {
        let m = self.rows_b.len();
        vstat_from_parts(
            m,
            self.cross_bb.value(),
            row_dot(&self.rows_b, &self.rows_b),
            self.grand_b.value(),
            self.grand_b.value(),
        )
    }
}

/// Streams the prefix processes over m = 1..n.
pub fn prefix_processes(sample: &PairedSample) -> Result<SequentialPath> {
    let n = sample.n();
    let mut state = StreamState::with_capacity(n);
    let mut path = SequentialPath {
        n,
        dcov_xy: Vec::with_capacity(n),
        dcov_xx: Vec::with_capacity(n),
        dcov_yy: Vec::with_capacity(n),
        dcor: Vec::with_capacity(n),
    };
    for idx in 0..n {
        state.append(sample, idx);
        let xy = state.dcov_xy();
        let xx = state.dcov_xx();
        let yy = state.dcov_yy();
        path.dcov_xy.push(xy);
        path.dcov_xx.push(xx);
        path.dcov_yy.push(yy);
        path.dcor.push(dcor_from_parts(xy, xx, yy)?);
    }
    Ok(path)
}

/// Self-normalizer for the distance covariance statistic.
///
/// The integrand is evaluated as `lam * (r * dcov_m - lam * dcov_n)` with
/// `r = floor(n lam) / n`, so that whenever `r` rounds to `lam` itself (n a
/// multiple of every atom denominator) a constant path cancels exactly.
pub fn normalizer_dcov(path: &SequentialPath, gamma: &GammaMeasure) -> f64 {
    let n = path.n();
    let nf = n as f64;
    let endpoint = path.dcov_full();
    let mut acc = 0.0;
    for (lam, w) in gamma.support().iter().zip(gamma.weights()) {
        let m = prefix_len(n, *lam);
        let r = m as f64 / nf;
        let term = lam * (r * path.dcov_xy_at(m) - lam * endpoint);
        acc += w * term * term;
    }
    libm::sqrt(acc)
}

/// Self-normalizer for the distance correlation statistic.
///
/// The integrand `lam * ((n lam^2 / m) dcor_m - lam dcor_n)` is evaluated
/// as `lam^2 * ((lam / r) * dcor_m - dcor_n)` with `r = m / n`, for the
/// same exact-cancellation reason as in [`normalizer_dcov`].
pub fn normalizer_dcor(path: &SequentialPath, gamma: &GammaMeasure) -> f64 {
    let n = path.n();
    let nf = n as f64;
    let endpoint = path.dcor_full();
    let mut acc = 0.0;
    for (lam, w) in gamma.support().iter().zip(gamma.weights()) {
        let m = prefix_len(n, *lam);
        let prefix_part = if m == 0 {
            0.0
        } else {
            let r = m as f64 / nf;
            (lam / r) * path.dcor_at(m)
        };
        let term = lam * lam * (prefix_part - endpoint);
        acc += w * term * term;
    }
    libm::sqrt(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dcov::{dcov_empirical, dcov_variance, dcor_empirical};
    use crate::metric::{MetricDescriptor, PairedSample, Side};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn prefix_sample(sample: &PairedSample, m: usize) -> PairedSample {
        let xd = sample.x_metric().dimension();
        let yd = sample.y_metric().dimension();
        let mut xs = Vec::with_capacity(m * xd);
        let mut ys = Vec::with_capacity(m * yd);
        for i in 0..m {
            xs.extend_from_slice(sample.x_row(i));
            ys.extend_from_slice(sample.y_row(i));
        }
        PairedSample::new(sample.x_metric().clone(), sample.y_metric().clone(), xs, ys).unwrap()
    }

    #[test]
    fn single_observation_path_is_zero() {
        let s = PairedSample::scalar(&[1.0], &[2.0]).unwrap();
        let p = prefix_processes(&s).unwrap();
        assert_eq!(p.dcov_xy(), &[0.0]);
        assert_eq!(p.dcov_xx(), &[0.0]);
        assert_eq!(p.dcov_yy(), &[0.0]);
        assert_eq!(p.dcor(), &[0.0]);
    }

    #[test]
    fn identical_series_dcor_path() {
        let s = PairedSample::scalar(&[0.0, 1.0, 2.0], &[0.0, 1.0, 2.0]).unwrap();
        let p = prefix_processes(&s).unwrap();
        assert_eq!(p.dcor()[0], 0.0);
        assert_abs_diff_eq!(p.dcor()[1], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.dcor()[2], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn streaming_matches_batch_on_prefixes() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for trial in 0..20 {
            let n = rng.random_range(2..=50);
            let dim = 1 + trial % 2;
            let xs: Vec<f64> = (0..n * dim).map(|_| rng.random_range(-4.0..4.0)).collect();
            let ys: Vec<f64> = (0..n * dim).map(|_| rng.random_range(-4.0..4.0)).collect();
            let s = PairedSample::new(
                MetricDescriptor::euclidean(dim).unwrap(),
                MetricDescriptor::euclidean(dim).unwrap(),
                xs,
                ys,
            )
            .unwrap();
            let path = prefix_processes(&s).unwrap();
            for m in 1..=n {
                let prefix = prefix_sample(&s, m);
                assert_abs_diff_eq!(
                    path.dcov_xy()[m - 1],
                    dcov_empirical(&prefix),
                    epsilon = 1e-10
                );
                assert_abs_diff_eq!(
                    path.dcov_xx()[m - 1],
                    dcov_variance(&prefix, Side::X),
                    epsilon = 1e-10
                );
                assert_abs_diff_eq!(
                    path.dcov_yy()[m - 1],
                    dcov_variance(&prefix, Side::Y),
                    epsilon = 1e-10
                );
                assert_abs_diff_eq!(
                    path.dcor()[m - 1],
                    dcor_empirical(&prefix).unwrap(),
                    epsilon = 1e-10
                );
            }
        }
    }

    #[test]
    fn path_entries_stay_in_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xs: Vec<f64> = (0..40).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ys: Vec<f64> = (0..40).map(|_| rng.random_range(-1.0..1.0)).collect();
        let s = PairedSample::scalar(&xs, &ys).unwrap();
        let p = prefix_processes(&s).unwrap();
        for m in 0..40 {
            assert!((0.0..=1.0 + 1e-12).contains(&p.dcor()[m]));
            assert!(p.dcov_xx()[m] >= -1e-12);
            assert!(p.dcov_yy()[m] >= -1e-12);
        }
    }

    fn synthetic_path(n: usize, dcov: impl Fn(usize) -> f64, dcor: impl Fn(usize) -> f64) -> SequentialPath {
        SequentialPath {
            n,
            dcov_xy: (1..=n).map(&dcov).collect(),
            dcov_xx: alloc::vec![1.0; n],
            dcov_yy: alloc::vec![1.0; n],
            dcor: (1..=n).map(&dcor).collect(),
        }
    }

    #[test]
    fn normalizer_dcov_constant_path_vanishes() {
        // n divisible by 20 makes floor(n lam) / n = lam exact on the
        // default support, so a constant path gives exactly zero.
        let gamma = GammaMeasure::default();
        let path = synthetic_path(40, |_| 0.37, |_| 0.5);
        assert_eq!(normalizer_dcov(&path, &gamma), 0.0);
        assert_eq!(normalizer_dcor(&path, &gamma), 0.0);
    }

    #[test]
    fn normalizer_single_atom_at_one_vanishes() {
        let gamma = GammaMeasure::new(alloc::vec![1.0], alloc::vec![1.0]).unwrap();
        let path = synthetic_path(17, |m| 0.3 + 0.07 * m as f64, |m| 1.0 / m as f64);
        assert_eq!(normalizer_dcov(&path, &gamma), 0.0);
        assert_eq!(normalizer_dcor(&path, &gamma), 0.0);
    }

    #[test]
    fn normalizer_dcov_against_direct_sum() {
        // n = 20, dcov_m = m / 20: independent 19-term summation with exact
        // integer prefix lengths.
        let n = 20usize;
        let gamma = GammaMeasure::default();
        let path = synthetic_path(n, |m| m as f64 / 20.0, |_| 0.3);
        let mut expected = 0.0;
        for j in 1..=19usize {
            let lam = j as f64 / 20.0;
            let m = j; // floor(20 j / 20)
            let dcov_m = m as f64 / 20.0;
            let term = lam * (m as f64) / (n as f64) * dcov_m - lam * lam * 1.0;
            expected += (1.0 / 19.0) * term * term;
        }
        let expected = expected.sqrt();
        assert_abs_diff_eq!(normalizer_dcov(&path, &gamma), expected, epsilon = 1e-15);
    }

    #[test]
    fn normalizer_dcor_against_direct_sum() {
        // n = 40, dcor_m = 1 for all m.
        let n = 40usize;
        let gamma = GammaMeasure::default();
        let path = synthetic_path(n, |_| 0.1, |_| 1.0);
        let mut expected = 0.0;
        for j in 1..=19usize {
            let lam = j as f64 / 20.0;
            let m = 2 * j; // floor(40 j / 20)
            let term = (n as f64) * lam * lam / (m as f64) - lam;
            expected += (1.0 / 19.0) * term * term;
        }
        let expected = expected.sqrt();
        assert_abs_diff_eq!(normalizer_dcor(&path, &gamma), expected, epsilon = 1e-15);
        // and for this particular n the sum is exactly zero
        assert_eq!(normalizer_dcor(&path, &gamma), 0.0);
    }

    #[test]
    fn normalizer_dcor_empty_prefix_convention() {
        // n < 20: the first atoms map to prefixes of size 0 and contribute
        // (0 - lam dcor_n)^2.
        let n = 7usize;
        let gamma = GammaMeasure::default();
        let endpoint = 0.42;
        let path = synthetic_path(n, |_| 0.1, move |m| if m == 7 { endpoint } else { 0.2 });
        let mut expected = 0.0;
        for j in 1..=19usize {
            let lam = j as f64 / 20.0;
            let m = 7 * j / 20;
            let prefix_part = if m == 0 {
                0.0
            } else {
                let dcor_m = if m == 7 { endpoint } else { 0.2 };
                (n as f64) * lam * lam / (m as f64) * dcor_m
            };
            let term = prefix_part - lam * endpoint;
            expected += (1.0 / 19.0) * term * term;
        }
        assert_abs_diff_eq!(
            normalizer_dcor(&path, &gamma),
            expected.sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn normalizers_scale_exactly_under_metric_rescaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 30;
        let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let ys: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let base = PairedSample::scalar(&xs, &ys).unwrap();
        let c = 8.0; // power of two: exact scaling
        let scaled = PairedSample::new(
            MetricDescriptor::weighted_euclidean(alloc::vec![c * c]).unwrap(),
            MetricDescriptor::euclidean(1).unwrap(),
            xs.clone(),
            ys.clone(),
        )
        .unwrap();
        let gamma = GammaMeasure::default();
        let pb = prefix_processes(&base).unwrap();
        let ps = prefix_processes(&scaled).unwrap();
        assert_eq!(normalizer_dcov(&ps, &gamma), c * normalizer_dcov(&pb, &gamma));
        assert_eq!(normalizer_dcor(&ps, &gamma), normalizer_dcor(&pb, &gamma));
    }

    #[test]
    fn gamma_measure_validation() {
        assert!(GammaMeasure::new(alloc::vec![0.5, 0.5], alloc::vec![0.5, 0.5]).is_err());
        assert!(GammaMeasure::new(alloc::vec![0.0, 0.5], alloc::vec![0.5, 0.5]).is_err());
        assert!(GammaMeasure::new(alloc::vec![0.5, 1.1], alloc::vec![0.5, 0.5]).is_err());
        assert!(GammaMeasure::new(alloc::vec![0.5], alloc::vec![0.9]).is_err());
        assert!(GammaMeasure::new(alloc::vec![0.5], alloc::vec![-1.0]).is_err());
        assert!(GammaMeasure::uniform_atoms(0).is_err());

        let g = GammaMeasure::default();
        assert_eq!(g.atoms(), 19);
        assert_abs_diff_eq!(g.support()[0], 0.05, epsilon = 1e-15);
        assert_abs_diff_eq!(g.support()[18], 0.95, epsilon = 1e-15);
        assert!(g.undersampled_at(19));
        assert!(!g.undersampled_at(20));
    }
}
