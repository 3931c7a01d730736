//! Small numeric helpers shared across the estimator modules.

/// Neumaier-compensated accumulator.
///
/// The O(n^2) distance sums feed up to 10^8 terms into a single scalar; a
/// running compensation term keeps the accumulated rounding error at the
/// level of a single addition.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    pub(crate) fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// `floor(n * lambda)` where `lambda` stands in for a rational number that
/// the caller could only provide in rounded form.
///
/// A support point such as 3/20 rounds to a float slightly below the exact
/// value, so the plain product `n * lambda` can land one ulp under an
/// integer and floor to the wrong prefix length. The relative nudge is far
/// larger than the accumulated rounding of the product and far smaller than
/// the gap to the next representable prefix boundary.
pub(crate) fn prefix_len(n: usize, lambda: f64) -> usize {
    let t = n as f64 * lambda;
    let nudge = 1e-12 * if t > 1.0 { t } else { 1.0 };
    let m = libm::floor(t + nudge) as usize;
    m.min(n)
}
