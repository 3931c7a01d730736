//! Monte Carlo simulation of the pivotal ratio and reusable quantile
//! tables.
//!
//! The limiting statistic of the self-normalized tests is
//!
//! ```text
//! W = B(1) / sqrt( sum_k w_k lam_k^2 (B(lam_k) - lam_k B(1))^2 )
//! ```
//!
//! for a standard Brownian motion B and a finite weighting measure gamma.
//! Because gamma is discrete, sampling B exactly on the grid
//! `{0} U support(gamma) U {1}` samples W exactly in distribution: there is
//! no path-discretization error to control.
//!
//! Table construction is deterministic for a fixed `(gamma, runs, seed)`:
//! replicate r draws from an independent ChaCha stream `r` of the master
//! seed, so the output does not depend on evaluation order and stays
//! bit-identical if replicates are ever farmed out in parallel.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::sequential::GammaMeasure;
use crate::{Error, Result};

/// Smallest accepted number of Monte Carlo runs for a quantile table.
pub const MIN_QUANTILE_RUNS: u64 = 10_000;

/// A Brownian motion sampled exactly on a finite grid.
///
/// `times` starts at 0 and ends at 1; `values[0] = B(0) = 0` and the
/// increments over consecutive grid intervals are the only randomness.
#[derive(Debug, Clone)]
pub struct BrownianGridPath {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl BrownianGridPath {
    /// Wraps precomputed values after validating the grid; meant for
    /// injecting synthetic paths. Simulation goes through
    /// [`simulate_brownian_grid`].
    pub fn from_values(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        validate_times(&times)?;
        if values.len() != times.len() {
            return Err(Error::BadParam(format!(
                "{} path values for {} grid times",
                values.len(),
                times.len()
            )));
        }
        if values[0] != 0.0 {
            return Err(Error::BadParam(format!("B(0) must be 0")));
        }
        Ok(Self { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn terminal(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    fn value_at(&self, t: f64) -> Option<f64> {
        self.times
            .binary_search_by(|probe| probe.total_cmp(&t))
            .ok()
            .map(|i| self.values[i])
    }
}

fn validate_times(times: &[f64]) -> Result<()> {
    if times.is_empty() || times[0] != 0.0 {
        return Err(Error::BadTimeGrid { index: 0 });
    }
    for i in 1..times.len() {
        if !(times[i] > times[i - 1]) || !times[i].is_finite() {
            return Err(Error::BadTimeGrid { index: i });
        }
    }
    if times[times.len() - 1] != 1.0 {
        return Err(Error::BadTimeGrid {
            index: times.len() - 1,
        });
    }
    Ok(())
}

/// The simulation grid for a weighting measure: `{0} U support U {1}`.
pub fn brownian_grid(gamma: &GammaMeasure) -> Vec<f64> {
    let support = gamma.support();
    let mut times = Vec::with_capacity(support.len() + 2);
    times.push(0.0);
    times.extend_from_slice(support);
    if *times.last().expect("nonempty") != 1.0 {
        times.push(1.0);
    }
    times
}

/// Samples B on `times` by cumulative independent Gaussian increments with
/// variance `t_{i+1} - t_i`; exact in distribution at the grid points.
pub fn simulate_brownian_grid<R: Rng + ?Sized>(
    times: &[f64],
    rng: &mut R,
) -> Result<BrownianGridPath> {
    validate_times(times)?;
    Ok(simulate_on_valid_grid(times, rng))
}

fn simulate_on_valid_grid<R: Rng + ?Sized>(times: &[f64], rng: &mut R) -> BrownianGridPath {
    let mut values = Vec::with_capacity(times.len());
    values.push(0.0);
    let mut level = 0.0;
    for i in 1..times.len() {
        let dt = times[i] - times[i - 1];
        let z: f64 = rng.sample(StandardNormal);
        level += libm::sqrt(dt) * z;
        values.push(level);
    }
    BrownianGridPath {
        times: times.to_vec(),
        values,
    }
}

/// One evaluation of the pivotal ratio.
///
/// `degenerate` marks a zero denominator (a probability-zero event under
/// the true law, reachable only through injected paths); the value then
/// carries the sign of B(1) as a signed infinity, or 0 if B(1) is also 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WDraw {
    pub value: f64,
    pub degenerate: bool,
}

/// Evaluates W for a path whose grid contains every atom of `gamma`.
pub fn evaluate_w(path: &BrownianGridPath, gamma: &GammaMeasure) -> Result<WDraw> {
    let b1 = path.terminal();
    let mut denom_sq = 0.0;
    for (lam, w) in gamma.support().iter().zip(gamma.weights()) {
        let b_lam = path
            .value_at(*lam)
            .ok_or(Error::GridMismatch { lambda: *lam })?;
        let centered = b_lam - lam * b1;
        denom_sq += w * lam * lam * centered * centered;
    }
    if denom_sq == 0.0 {
        let value = if b1 > 0.0 {
            f64::INFINITY
        } else if b1 < 0.0 {
            f64::NEG_INFINITY
        } else {
            0.0
        };
        return Ok(WDraw {
            value,
            degenerate: true,
        });
    }
    Ok(WDraw {
        value: b1 / libm::sqrt(denom_sq),
        degenerate: false,
    })
}

/// One table row: probability, estimated quantile, and a density-free
/// Woodruff standard error (half the spread between the empirical quantiles
/// at `p +- sqrt(p(1-p)/runs)`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileEntry {
    pub p: f64,
    pub value: f64,
    pub se: f64,
}

/// Monte Carlo quantiles of W for a fixed weighting measure, keyed by the
/// measure, the number of runs, and the master seed.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileTable {
    gamma: GammaMeasure,
    runs: u64,
    seed: u64,
    entries: Vec<QuantileEntry>,
    excluded: u64,
}

impl QuantileTable {
    /// Reassembles a table (typically from a parsed file) and revalidates
    /// its invariants.
    pub fn from_parts(
        gamma: GammaMeasure,
        runs: u64,
        seed: u64,
        entries: Vec<QuantileEntry>,
        excluded: u64,
    ) -> Result<Self> {
        let table = Self {
            gamma,
            runs,
            seed,
            entries,
            excluded,
        };
        table.validate()?;
        Ok(table)
    }

    pub fn gamma(&self) -> &GammaMeasure {
        &self.gamma
    }

    pub fn runs(&self) -> u64 {
        self.runs
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn entries(&self) -> &[QuantileEntry] {
        &self.entries
    }

    /// Number of degenerate draws that were excluded from the pool.
    pub fn excluded(&self) -> u64 {
        self.excluded
    }

    /// Short identifier used to stamp test reports.
    pub fn id(&self) -> String {
        format!(
            "gamma{}-runs{}-seed{}",
            self.gamma.atoms(),
            self.runs,
            self.seed
        )
    }

    /// Quantile for an exactly matching probability. No interpolation
    /// between rows is performed: a missing probability is an error, not a
    /// silently interpolated tail value.
    pub fn lookup(&self, p: f64) -> Result<f64> {
        self.entries
            .iter()
            .find(|e| (e.p - p).abs() <= 1e-12)
            .map(|e| e.value)
            .ok_or(Error::MissingQuantile { p })
    }

    pub fn validate(&self) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::BadTable(format!("no quantile entries")));
        }
        let mut prev_p = 0.0;
        let mut prev_v = f64::NEG_INFINITY;
        for e in &self.entries {
            if !(e.p > prev_p) || e.p >= 1.0 {
                return Err(Error::BadTable(format!(
                    "probabilities must be strictly increasing inside (0, 1), got {}",
                    e.p
                )));
            }
            if e.value < prev_v {
                return Err(Error::BadTable(format!(
                    "quantiles must be nondecreasing in p, got {} after {}",
                    e.value, prev_v
                )));
            }
            if !e.se.is_finite() || e.se < 0.0 {
                return Err(Error::BadTable(format!("invalid standard error {}", e.se)));
            }
            prev_p = e.p;
            prev_v = e.value;
        }
        // Symmetry of the W law: mirrored probabilities must agree up to
        // Monte Carlo noise whenever both are tabulated.
        for e in &self.entries {
            let mirror = 1.0 - e.p;
            if let Some(m) = self.entries.iter().find(|o| (o.p - mirror).abs() <= 1e-12) {
                let bound = 3.0 * (e.se + m.se);
                if (e.value + m.value).abs() > bound {
                    return Err(Error::BadTable(format!(
                        "w_{} + w_{} = {} exceeds the symmetry bound {}",
                        e.p,
                        m.p,
                        e.value + m.value,
                        bound
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Type-7 empirical quantile (linear interpolation of order statistics) of
/// a sorted sample; `p` outside (0, 1) clamps to the extremes.
fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    debug_assert!(n > 0);
    let h = (n - 1) as f64 * p;
    if h <= 0.0 {
        return sorted[0];
    }
    if h >= (n - 1) as f64 {
        return sorted[n - 1];
    }
    let lo = libm::floor(h);
    let idx = lo as usize;
    let frac = h - lo;
    sorted[idx] + frac * (sorted[idx + 1] - sorted[idx])
}

fn woodruff_se(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len() as f64;
    let half_width = libm::sqrt(p * (1.0 - p) / n);
    let hi = quantile_type7(sorted, p + half_width);
    let lo = quantile_type7(sorted, p - half_width);
    (hi - lo) / 2.0
}

/// Builds a quantile table from `runs` independent draws of W.
///
/// `probabilities` must be strictly increasing inside (0, 1). Degenerate
/// draws (zero denominator) are excluded from the pool and counted; under
/// the true law they have probability zero.
pub fn quantile_table(
    gamma: &GammaMeasure,
    runs: u64,
    probabilities: &[f64],
    seed: u64,
) -> Result<QuantileTable> {
    if runs < MIN_QUANTILE_RUNS {
        return Err(Error::TooFewRuns {
            runs,
            min: MIN_QUANTILE_RUNS,
        });
    }
    if probabilities.is_empty() {
        return Err(Error::BadParam(format!("no probabilities requested")));
    }
    let mut prev = 0.0;
    for p in probabilities {
        if !(*p > prev) || *p >= 1.0 {
            return Err(Error::BadParam(format!(
                "probabilities must be strictly increasing inside (0, 1), got {p}"
            )));
        }
        prev = *p;
    }

    let times = brownian_grid(gamma);
    let mut draws: Vec<f64> = Vec::with_capacity(runs as usize);
    let mut excluded = 0u64;
    // One ChaCha stream per replicate: the draw for replicate r does not
    // depend on any other replicate, so the table is reproducible for a
    // fixed (seed, runs) under any evaluation order.
    let base = ChaCha8Rng::seed_from_u64(seed);
    for replicate in 0..runs {
        let mut rng = base.clone();
        rng.set_stream(replicate);
        let path = simulate_on_valid_grid(&times, &mut rng);
        let w = evaluate_w(&path, gamma)?;
        if w.degenerate {
            excluded += 1;
        } else {
            draws.push(w.value);
        }
    }
    draws.sort_unstable_by(f64::total_cmp);

    let entries = probabilities
        .iter()
        .map(|&p| QuantileEntry {
            p,
            value: quantile_type7(&draws, p),
            se: woodruff_se(&draws, p),
        })
        .collect();

    QuantileTable::from_parts(gamma.clone(), runs, seed, entries, excluded)
}

/// The probability set shipped in generated tables: both tails for the
/// usual test levels plus the central quartiles.
pub fn default_probabilities() -> &'static [f64] {
    &[
        0.005, 0.01, 0.025, 0.05, 0.10, 0.25, 0.50, 0.75, 0.90, 0.95, 0.975, 0.99, 0.995,
    ]
}
