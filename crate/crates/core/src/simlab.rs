//! Data generators and experiment drivers for calibration studies:
//! a bivariate VAR(1) process, a functional-data process built from a
//! 10-dimensional AR(1) in a Fourier basis, population-level distance
//! correlation estimation, and seeded rejection-rate experiments.
//!
//! Everything is a pure function of `(config, seed)`. Replicated
//! experiments derive one seed per replicate from a master seed with a
//! SplitMix64 mix, so results do not depend on evaluation order and stay
//! reproducible if replicates are ever run in parallel.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dcov::dcor_empirical;
use crate::inference::{equivalence_test, relevant_test, Decision, Direction, Measure};
use crate::metric::{MetricDescriptor, PairedSample};
use crate::pivotal::QuantileTable;
use crate::{Error, Result};

/// SplitMix64-mixed replicate seed: statistically independent streams from
/// `(master, index)` without any shared state between replicates.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Anything that can produce a paired sample of a requested length from a
/// seed. Implemented by the model configs below; test code adds coupled or
/// otherwise synthetic generators.
pub trait SampleGenerator {
    fn generate(&self, n: usize, seed: u64) -> Result<PairedSample>;
}

/// How the VAR recursion is started.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarInit {
    /// Draw the initial state from the exact stationary Gaussian law
    /// (Lyapunov equation). The default: the theory assumes strict
    /// stationarity.
    Stationary,
    /// Start at zero and discard this many steps.
    BurnIn(usize),
}

/// Bivariate VAR(1): `(X_t, Y_t)' = A (X_{t-1}, Y_{t-1})' + eps_t` with
/// centred Gaussian innovations of covariance `[[1, rho], [rho, 1]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct VarConfig {
    pub a: [[f64; 2]; 2],
    pub rho: f64,
    pub n: usize,
    pub init: VarInit,
}

impl Default for VarConfig {
    fn default() -> Self {
        Self {
            a: [[0.5, 0.2], [0.2, 0.5]],
            rho: 0.5,
            n: 400,
            init: VarInit::Stationary,
        }
    }
}

impl VarConfig {
    /// Independent coordinates: zero transition matrix, uncorrelated
    /// innovations.
    pub fn independent(n: usize) -> Self {
        Self {
            a: [[0.0, 0.0], [0.0, 0.0]],
            rho: 0.0,
            n,
            init: VarInit::Stationary,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let r = spectral_radius_2x2(&self.a);
        if !(r < 1.0) {
            return Err(Error::UnstableVar { radius: r });
        }
        if !(self.rho > -1.0 && self.rho < 1.0) {
            return Err(Error::BadParam(format!(
                "innovation correlation must lie in (-1, 1), got {}",
                self.rho
            )));
        }
        if self.n == 0 {
            return Err(Error::BadParam(format!("sample length must be >= 1")));
        }
        Ok(())
    }
}

impl SampleGenerator for VarConfig {
    fn generate(&self, n: usize, seed: u64) -> Result<PairedSample> {
        let mut config = self.clone();
        config.n = n;
        gen_var(&config, seed)
    }
}

fn spectral_radius_2x2(a: &[[f64; 2]; 2]) -> f64 {
    let tr = a[0][0] + a[1][1];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let disc = tr * tr - 4.0 * det;
    if disc >= 0.0 {
        let s = libm::sqrt(disc);
        ((tr + s) / 2.0).abs().max(((tr - s) / 2.0).abs())
    } else {
        // complex conjugate pair: |lambda|^2 = det
        libm::sqrt(det)
    }
}

/// Lower Cholesky factor of a symmetric matrix given in row-major order.
fn cholesky(matrix: &[f64], dim: usize) -> Result<Vec<f64>> {
    let mut l = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let mut sum = matrix[i * dim + j];
            for k in 0..j {
                sum -= l[i * dim + k] * l[j * dim + k];
            }
            if i == j {
                if sum <= 0.0 {
                    return Err(Error::NotPositiveDefinite);
                }
                l[i * dim + j] = libm::sqrt(sum);
            } else {
                l[i * dim + j] = sum / l[j * dim + j];
            }
        }
    }
    Ok(l)
}

/// Gaussian elimination with partial pivoting; `a` is row-major `dim x dim`
/// and is consumed as scratch.
fn solve_linear(mut a: Vec<f64>, mut b: Vec<f64>, dim: usize) -> Result<Vec<f64>> {
    for col in 0..dim {
        let mut pivot = col;
        for row in (col + 1)..dim {
            if a[row * dim + col].abs() > a[pivot * dim + col].abs() {
                pivot = row;
            }
        }
        if a[pivot * dim + col].abs() < 1e-300 {
            return Err(Error::Numeric(format!("singular linear system")));
        }
        if pivot != col {
            for k in 0..dim {
                a.swap(col * dim + k, pivot * dim + k);
            }
            b.swap(col, pivot);
        }
        for row in (col + 1)..dim {
            let factor = a[row * dim + col] / a[col * dim + col];
            if factor == 0.0 {
                continue;
            }
            for k in col..dim {
                a[row * dim + k] -= factor * a[col * dim + k];
            }
            b[row] -= factor * b[col];
        }
    }
    for col in (0..dim).rev() {
        let mut sum = b[col];
        for k in (col + 1)..dim {
            sum -= a[col * dim + k] * b[k];
        }
        b[col] = sum / a[col * dim + col];
    }
    Ok(b)
}

/// Stationary lag-0 covariance of the VAR(1): solves
/// `vec(G) = (I - A (x) A)^{-1} vec(Sigma)`.
pub fn var_stationary_covariance(a: &[[f64; 2]; 2], sigma: &[[f64; 2]; 2]) -> Result<[[f64; 2]; 2]> {
    let mut m = vec![0.0; 16];
    let mut rhs = vec![0.0; 4];
    for i in 0..2 {
        for j in 0..2 {
            let row = 2 * i + j;
            rhs[row] = sigma[i][j];
            for k in 0..2 {
                for l in 0..2 {
                    let col = 2 * k + l;
                    let kron = a[i][k] * a[j][l];
                    m[row * 4 + col] = if row == col { 1.0 - kron } else { -kron };
                }
            }
        }
    }
    let g = solve_linear(m, rhs, 4)?;
    // symmetrize against elimination roundoff
    let off = (g[1] + g[2]) / 2.0;
    Ok([[g[0], off], [off, g[3]]])
}

fn innovation_cholesky_2x2(rho: f64) -> [[f64; 2]; 2] {
    [[1.0, 0.0], [rho, libm::sqrt(1.0 - rho * rho)]]
}

/// Simulates the VAR model; `(X, Y)` are the two scalar coordinates.
pub fn gen_var(config: &VarConfig, seed: u64) -> Result<PairedSample> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l_eps = innovation_cholesky_2x2(config.rho);
    let a = &config.a;

    let mut state = match config.init {
        VarInit::Stationary => {
            let sigma = [[1.0, config.rho], [config.rho, 1.0]];
            let g = var_stationary_covariance(a, &sigma)?;
            let flat = [g[0][0], g[0][1], g[1][0], g[1][1]];
            let l0 = cholesky(&flat, 2)?;
            let z0: f64 = rng.sample(StandardNormal);
            let z1: f64 = rng.sample(StandardNormal);
            [l0[0] * z0, l0[2] * z0 + l0[3] * z1]
        }
        VarInit::BurnIn(_) => [0.0, 0.0],
    };

    let burn = match config.init {
        VarInit::Stationary => 0,
        VarInit::BurnIn(k) => k,
    };

    let mut xs = Vec::with_capacity(config.n);
    let mut ys = Vec::with_capacity(config.n);
    for step in 0..burn + config.n {
        let z0: f64 = rng.sample(StandardNormal);
        let z1: f64 = rng.sample(StandardNormal);
        let eps = [l_eps[0][0] * z0, l_eps[1][0] * z0 + l_eps[1][1] * z1];
        state = [
            a[0][0] * state[0] + a[0][1] * state[1] + eps[0],
            a[1][0] * state[0] + a[1][1] * state[1] + eps[1],
        ];
        if step >= burn {
            xs.push(state[0]);
            ys.push(state[1]);
        }
    }
    PairedSample::scalar(&xs, &ys)
}

/// Innovation covariance structure of the coefficient process.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovKind {
    /// 1 on the diagonal, `rho` at |i - j| = 5, 0 elsewhere: couples the
    /// X block to the Y block coefficient by coefficient.
    Sparse,
    /// `rho^|i - j|`: geometric decay across all coefficients.
    Full,
}

impl core::fmt::Display for CovKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CovKind::Sparse => f.write_str("sparse"),
            CovKind::Full => f.write_str("full"),
        }
    }
}

/// How functional observations are materialized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FourierRepresentation {
    /// 5-dimensional coefficient vectors with the unit-weight Euclidean
    /// metric; exact for the L2 metric because the basis is orthonormal.
    Coefficients,
    /// Function values at this many uniform grid points on [0, 1], with
    /// trapezoidal quadrature weights.
    Grid(usize),
}

/// Functional model: a 10-dimensional AR(1) `C_k = C_{k-1}/2 + eta_k`
/// drives two random functions per time step, X from coefficients 1..=5 and
/// Y from coefficients 6..=10, in the orthonormal Fourier basis
/// `1, sqrt(2) cos(2 pi s), sqrt(2) sin(2 pi s), sqrt(2) cos(4 pi s),
/// sqrt(2) sin(4 pi s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierConfig {
    pub cov_kind: CovKind,
    pub rho: f64,
    pub n: usize,
    pub representation: FourierRepresentation,
}

impl Default for FourierConfig {
    fn default() -> Self {
        Self {
            cov_kind: CovKind::Sparse,
            rho: 0.5,
            n: 400,
            representation: FourierRepresentation::Coefficients,
        }
    }
}

const FOURIER_DIM: usize = 10;
const FOURIER_BLOCK: usize = 5;

impl FourierConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > -1.0 && self.rho < 1.0) {
            return Err(Error::BadParam(format!(
                "coefficient correlation must lie in (-1, 1), got {}",
                self.rho
            )));
        }
        if self.n == 0 {
            return Err(Error::BadParam(format!("sample length must be >= 1")));
        }
        if let FourierRepresentation::Grid(points) = self.representation {
            if points < 2 {
                return Err(Error::BadParam(format!(
                    "grid representation needs at least 2 points, got {points}"
                )));
            }
        }
        Ok(())
    }

    fn innovation_covariance(&self) -> Vec<f64> {
        let mut cov = vec![0.0; FOURIER_DIM * FOURIER_DIM];
        for i in 0..FOURIER_DIM {
            for j in 0..FOURIER_DIM {
                let d = i.abs_diff(j);
                cov[i * FOURIER_DIM + j] = match self.cov_kind {
                    CovKind::Sparse => {
                        if d == 0 {
                            1.0
                        } else if d == 5 {
                            self.rho
                        } else {
                            0.0
                        }
                    }
                    CovKind::Full => libm::pow(self.rho, d as f64),
                };
            }
        }
        cov
    }
}

impl SampleGenerator for FourierConfig {
    fn generate(&self, n: usize, seed: u64) -> Result<PairedSample> {
        let mut config = self.clone();
        config.n = n;
        gen_fourier(&config, seed)
    }
}

fn fourier_basis_row(s: f64) -> [f64; FOURIER_BLOCK] {
    let sqrt2 = libm::sqrt(2.0);
    let two_pi_s = 2.0 * core::f64::consts::PI * s;
    [
        1.0,
        sqrt2 * libm::cos(two_pi_s),
        sqrt2 * libm::sin(two_pi_s),
        sqrt2 * libm::cos(2.0 * two_pi_s),
        sqrt2 * libm::sin(2.0 * two_pi_s),
    ]
}

/// Simulates the functional model in the requested representation.
pub fn gen_fourier(config: &FourierConfig, seed: u64) -> Result<PairedSample> {
    config.validate()?;
    let cov = config.innovation_covariance();
    let l = cholesky(&cov, FOURIER_DIM)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let draw = |rng: &mut ChaCha8Rng, scale: f64| -> [f64; FOURIER_DIM] {
        let mut z = [0.0; FOURIER_DIM];
        for zi in z.iter_mut() {
            *zi = rng.sample(StandardNormal);
        }
        let mut out = [0.0; FOURIER_DIM];
        for i in 0..FOURIER_DIM {
            let mut acc = 0.0;
            for k in 0..=i {
                acc += l[i * FOURIER_DIM + k] * z[k];
            }
            out[i] = scale * acc;
        }
        out
    };

    // stationary law of C_k = C_{k-1}/2 + eta: covariance (4/3) Sigma
    let mut coeff = draw(&mut rng, libm::sqrt(4.0 / 3.0));

    let mut coeff_rows: Vec<[f64; FOURIER_DIM]> = Vec::with_capacity(config.n);
    for _ in 0..config.n {
        let eta = draw(&mut rng, 1.0);
        for i in 0..FOURIER_DIM {
            coeff[i] = coeff[i] / 2.0 + eta[i];
        }
        coeff_rows.push(coeff);
    }

    match config.representation {
        FourierRepresentation::Coefficients => {
            let mut xs = Vec::with_capacity(config.n * FOURIER_BLOCK);
            let mut ys = Vec::with_capacity(config.n * FOURIER_BLOCK);
            for row in &coeff_rows {
                xs.extend_from_slice(&row[..FOURIER_BLOCK]);
                ys.extend_from_slice(&row[FOURIER_BLOCK..]);
            }
            PairedSample::new(
                MetricDescriptor::euclidean(FOURIER_BLOCK)?,
                MetricDescriptor::euclidean(FOURIER_BLOCK)?,
                xs,
                ys,
            )
        }
        FourierRepresentation::Grid(points) => {
            let basis: Vec<[f64; FOURIER_BLOCK]> = (0..points)
                .map(|i| fourier_basis_row(i as f64 / (points - 1) as f64))
                .collect();
            let mut xs = Vec::with_capacity(config.n * points);
            let mut ys = Vec::with_capacity(config.n * points);
            for row in &coeff_rows {
                for b in &basis {
                    let mut x = 0.0;
                    let mut y = 0.0;
                    for j in 0..FOURIER_BLOCK {
                        x += row[j] * b[j];
                        y += row[j + FOURIER_BLOCK] * b[j];
                    }
                    xs.push(x);
                    ys.push(y);
                }
            }
            PairedSample::new(
                MetricDescriptor::trapezoid_grid(points)?,
                MetricDescriptor::trapezoid_grid(points)?,
                xs,
                ys,
            )
        }
    }
}

/// Mean of `reps` independent full-sample distance correlations, with its
/// Monte Carlo standard error. This is how population-level values for
/// experiment axes are produced; they are estimates and are always reported
/// with their seeds rather than hard-coded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationDcor {
    pub mean: f64,
    pub se: f64,
    pub reps: usize,
    pub n: usize,
}

pub fn estimate_population_dcor<G: SampleGenerator + ?Sized>(
    generator: &G,
    reps: usize,
    n: usize,
    master_seed: u64,
) -> Result<PopulationDcor> {
    if reps == 0 {
        return Err(Error::BadParam(format!("need at least one replicate")));
    }
    let mut values = Vec::with_capacity(reps);
    for rep in 0..reps {
        let sample = generator.generate(n, derive_seed(master_seed, rep as u64))?;
        values.push(dcor_empirical(&sample)?);
    }
    let mean = values.iter().sum::<f64>() / reps as f64;
    let se = if reps > 1 {
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (reps - 1) as f64;
        libm::sqrt(var / reps as f64)
    } else {
        0.0
    };
    Ok(PopulationDcor {
        mean,
        se,
        reps,
        n,
    })
}

/// Empirical rejection rate over seeded replicates, with a binomial
/// standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RejectionRate {
    pub rate: f64,
    pub se: f64,
    pub rejections: usize,
    pub reps: usize,
}

/// Runs the chosen test on `reps` freshly generated samples; replicate `r`
/// uses the derived seed `derive_seed(master_seed, r)`, so a fixed master
/// seed pins the whole replicate set (and makes the rejection count exactly
/// nonincreasing in `delta`).
pub fn rejection_rate<G: SampleGenerator + ?Sized>(
    generator: &G,
    direction: Direction,
    delta: f64,
    alpha: f64,
    n: usize,
    reps: usize,
    table: &QuantileTable,
    master_seed: u64,
) -> Result<RejectionRate> {
    if reps == 0 {
        return Err(Error::BadParam(format!("need at least one replicate")));
    }
    let mut rejections = 0usize;
    for rep in 0..reps {
        let sample = generator.generate(n, derive_seed(master_seed, rep as u64))?;
        let report = match direction {
            Direction::Relevant => relevant_test(&sample, delta, alpha, table, Measure::Dcor)?,
            Direction::Equivalence => equivalence_test(&sample, delta, alpha, table)?,
        };
        if report.decision == Decision::Reject {
            rejections += 1;
        }
    }
    let rate = rejections as f64 / reps as f64;
    Ok(RejectionRate {
        rate,
        se: libm::sqrt(rate * (1.0 - rate) / reps as f64),
        rejections,
        reps,
    })
}
