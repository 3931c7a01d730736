//! Decision procedures: the relevant-hypothesis test, the reversed
//! equivalence test, the minimum relevant threshold, and the confidence
//! interval.
//!
//! The relevant test rejects `H0: dcor(X, Y) <= delta` when
//!
//! ```text
//! (dcor_n - delta) / V_dcor > w_{1-alpha},
//! ```
//!
//! where `w_{1-alpha}` comes from a Monte Carlo quantile table of the
//! pivotal ratio, simulated under the same weighting measure gamma that the
//! normalizer uses. The equivalence test rejects `H0: dcor(X, Y) >= delta`
//! when the statistic falls below `w_alpha = -w_{1-alpha}` (the pivotal law
//! is symmetric). Everything scales with the estimator and its normalizer,
//! so no variance estimation is involved anywhere.
//!
//! The hypotheses are nested in `delta`: with the statistic strictly
//! decreasing in `delta` (for a positive normalizer) the rejection region is
//! always `delta < delta_hat` with
//! `delta_hat = max(0, estimate - w_{1-alpha} * normalizer)`, which makes
//! `delta_hat` a measure of evidence against independence at controlled
//! type I error.

use alloc::format;
use alloc::string::String;

use crate::metric::PairedSample;
use crate::pivotal::QuantileTable;
use crate::sequential::{normalizer_dcov, normalizer_dcor, prefix_processes, SequentialPath};
use crate::{Error, Result};

/// Which dependence measure a test is run on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    Dcor,
    Dcov,
}

impl core::fmt::Display for Measure {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Measure::Dcor => f.write_str("dcor"),
            Measure::Dcov => f.write_str("dcov"),
        }
    }
}

/// Test direction: relevant (`H0: measure <= delta`) or equivalence
/// (`H0: measure >= delta`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Relevant,
    Equivalence,
}

impl core::fmt::Display for Direction {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Direction::Relevant => f.write_str("relevant"),
            Direction::Equivalence => f.write_str("equivalence"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Reject,
    Retain,
}

impl core::fmt::Display for Decision {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Decision::Reject => f.write_str("reject"),
            Decision::Retain => f.write_str("retain"),
        }
    }
}

/// Full decision record of one test run.
#[derive(Debug, Clone, PartialEq)]
pub struct TestReport {
    pub n: usize,
    pub measure: Measure,
    pub direction: Direction,
    pub delta: f64,
    pub alpha: f64,
    /// `dcor_n` or `dcov_n`, depending on `measure`.
    pub estimate: f64,
    /// The matching self-normalizer.
    pub normalizer: f64,
    /// `(estimate - delta) / normalizer`; signed infinity when the
    /// normalizer is zero and the estimate differs from `delta`.
    pub statistic: f64,
    /// The critical value the statistic was compared against
    /// (`w_{1-alpha}` for relevant, `-w_{1-alpha}` for equivalence).
    pub quantile_used: f64,
    pub decision: Decision,
    /// Minimum threshold at which the relevant test retains its null:
    /// `max(0, estimate - w_{1-alpha} * normalizer)`.
    pub delta_hat: f64,
    /// Equivalence-direction counterpart: `estimate + w_{1-alpha} *
    /// normalizer`; the equivalence null is rejected for all thresholds
    /// above it.
    pub delta_hat_sim: f64,
    /// Raw confidence interval `[estimate + w_{alpha/2} V, estimate +
    /// w_{1-alpha/2} V]`; `None` when the table lacks the alpha/2 rows.
    pub ci: Option<(f64, f64)>,
    /// The same interval intersected with the measure's range.
    pub ci_clamped: Option<(f64, f64)>,
    /// A zero normalizer means the scale assumption behind the pivotal
    /// limit is suspect on this sample; the decision then follows the sign
    /// of the statistic and deserves scrutiny.
    pub degenerate_normalizer: bool,
    /// `delta = 0` reproduces the classical point null of independence,
    /// which the pivotal limit theory is not built for; allowed, flagged.
    pub delta_zero_flagged: bool,
    pub quantile_table_id: String,
}

fn check_common(sample: &PairedSample, delta: f64, alpha: f64) -> Result<()> {
    if sample.n() < 2 {
        return Err(Error::BadParam(format!(
            "tests need n >= 2 observations, got {}",
            sample.n()
        )));
    }
    if !delta.is_finite() || delta < 0.0 {
        return Err(Error::BadParam(format!("delta must be >= 0, got {delta}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::BadParam(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    Ok(())
}

/// `(estimate - delta) / v` with the zero-normalizer convention: an exact
/// tie is 0, otherwise a signed infinity in the direction of the deviation.
fn self_normalized_statistic(estimate: f64, delta: f64, v: f64) -> f64 {
    if v == 0.0 {
        if estimate == delta {
            0.0
        } else if estimate > delta {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    } else {
        (estimate - delta) / v
    }
}

fn measure_stats(path: &SequentialPath, table: &QuantileTable, measure: Measure) -> (f64, f64) {
    match measure {
        Measure::Dcor => (path.dcor_full(), normalizer_dcor(path, table.gamma())),
        Measure::Dcov => (path.dcov_full(), normalizer_dcov(path, table.gamma())),
    }
}

fn clamp_to_range(value: f64, measure: Measure) -> f64 {
    match measure {
        Measure::Dcor => value.clamp(0.0, 1.0),
        Measure::Dcov => value.max(0.0),
    }
}

fn run_test(
    sample: &PairedSample,
    delta: f64,
    alpha: f64,
    table: &QuantileTable,
    measure: Measure,
    direction: Direction,
) -> Result<TestReport> {
    check_common(sample, delta, alpha)?;
    let w_upper = table.lookup(1.0 - alpha)?;
    let path = prefix_processes(sample)?;
    let (estimate, normalizer) = measure_stats(&path, table, measure);
    let statistic = self_normalized_statistic(estimate, delta, normalizer);
    let (quantile_used, decision) = match direction {
        Direction::Relevant => (
            w_upper,
            if statistic > w_upper {
                Decision::Reject
            } else {
                Decision::Retain
            },
        ),
        Direction::Equivalence => {
            // symmetry of the pivotal law: w_alpha = -w_{1-alpha}
            let w_lower = -w_upper;
            (
                w_lower,
                if statistic < w_lower {
                    Decision::Reject
                } else {
                    Decision::Retain
                },
            )
        }
    };

    let delta_hat = (estimate - w_upper * normalizer).max(0.0);
    let delta_hat_sim = estimate + w_upper * normalizer;

    let ci = match (
        table.lookup(alpha / 2.0),
        table.lookup(1.0 - alpha / 2.0),
    ) {
        (Ok(w_lo), Ok(w_hi)) => Some((
            estimate + w_lo * normalizer,
            estimate + w_hi * normalizer,
        )),
        _ => None,
    };
    let ci_clamped = ci.map(|(lo, hi)| {
        (
            clamp_to_range(lo, measure),
            clamp_to_range(hi, measure),
        )
    });

    Ok(TestReport {
        n: sample.n(),
        measure,
        direction,
        delta,
        alpha,
        estimate,
        normalizer,
        statistic,
        quantile_used,
        decision,
        delta_hat,
        delta_hat_sim,
        ci,
        ci_clamped,
        degenerate_normalizer: normalizer == 0.0,
        delta_zero_flagged: delta == 0.0,
        quantile_table_id: table.id(),
    })
}

/// Tests `H0: measure(X, Y) <= delta` against `H1: measure(X, Y) > delta`,
/// rejecting when the self-normalized statistic exceeds `w_{1-alpha}`.
pub fn relevant_test(
    sample: &PairedSample,
    delta: f64,
    alpha: f64,
    table: &QuantileTable,
    measure: Measure,
) -> Result<TestReport> {
    run_test(sample, delta, alpha, table, measure, Direction::Relevant)
}

/// Tests `H0: dcor(X, Y) >= delta` against `H1: dcor(X, Y) < delta`;
/// rejecting certifies approximate independence at level alpha.
pub fn equivalence_test(
    sample: &PairedSample,
    delta: f64,
    alpha: f64,
    table: &QuantileTable,
) -> Result<TestReport> {
    run_test(
        sample,
        delta,
        alpha,
        table,
        Measure::Dcor,
        Direction::Equivalence,
    )
}

/// The pair of data-driven thresholds for the distance correlation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimumRelevantDelta {
    /// `max(0, dcor_n - w_{1-alpha} V_dcor)`: the relevant test rejects
    /// exactly for thresholds below this value.
    pub delta_hat: f64,
    /// `dcor_n + w_{1-alpha} V_dcor`: the equivalence test rejects exactly
    /// for thresholds above this value.
    pub delta_hat_sim: f64,
}

/// Minimum relevant threshold `delta_hat` (and its equivalence-direction
/// counterpart) at level alpha.
pub fn min_relevant_delta(
    sample: &PairedSample,
    alpha: f64,
    table: &QuantileTable,
) -> Result<MinimumRelevantDelta> {
    check_common(sample, 0.0, alpha)?;
    let w_upper = table.lookup(1.0 - alpha)?;
    let path = prefix_processes(sample)?;
    let estimate = path.dcor_full();
    let v = normalizer_dcor(&path, table.gamma());
    Ok(MinimumRelevantDelta {
        delta_hat: (estimate - w_upper * v).max(0.0),
        delta_hat_sim: estimate + w_upper * v,
    })
}

/// Asymptotic `(1-alpha)` confidence interval for the distance correlation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    /// Raw endpoints `dcor_n + w_{alpha/2} V` and `dcor_n + w_{1-alpha/2} V`.
    pub lo: f64,
    pub hi: f64,
    /// The same interval intersected with [0, 1].
    pub lo_clamped: f64,
    pub hi_clamped: f64,
}

impl ConfidenceInterval {
    pub fn contains(&self, value: f64) -> bool {
        self.lo <= value && value <= self.hi
    }
}

pub fn confidence_interval(
    sample: &PairedSample,
    alpha: f64,
    table: &QuantileTable,
) -> Result<ConfidenceInterval> {
    check_common(sample, 0.0, alpha)?;
    let w_lo = table.lookup(alpha / 2.0)?;
    let w_hi = table.lookup(1.0 - alpha / 2.0)?;
    let path = prefix_processes(sample)?;
    let estimate = path.dcor_full();
    let v = normalizer_dcor(&path, table.gamma());
    let lo = estimate + w_lo * v;
    let hi = estimate + w_hi * v;
    Ok(ConfidenceInterval {
        lo,
        hi,
        lo_clamped: lo.clamp(0.0, 1.0),
        hi_clamped: hi.clamp(0.0, 1.0),
    })
}
