//! Supported metric spaces and validated paired samples.
//!
//! Only metrics of negative type are offered (they embed isometrically into
//! Hilbert space, which is what makes distance covariance characterize
//! independence): Euclidean metrics on R^d and weighted Euclidean metrics,
//! the latter covering L2 metrics for functional data observed on a fixed
//! grid with quadrature weights. Arbitrary user-supplied metrics are
//! rejected rather than trusted.

use alloc::format;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Which half of a paired observation a value belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    X,
    Y,
}

impl core::fmt::Display for Side {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Side::X => f.write_str("x"),
            Side::Y => f.write_str("y"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    Euclidean,
    WeightedEuclidean,
}

/// A metric on points of a fixed dimension.
///
/// `Euclidean` is the plain L2 norm of the coordinate difference. The
/// weighted variant computes `sqrt(sum_i w_i (p_i - q_i)^2)` with strictly
/// positive weights; with unit weights it coincides with the Euclidean
/// metric exactly. Points on a quadrature grid with trapezoidal weights turn
/// this into the L2 metric between the underlying functions, and orthonormal
/// basis coefficients use unit weights (exact by Parseval).
#[derive(Debug, Clone, PartialEq)]
pub struct MetricDescriptor {
    kind: MetricKind,
    dimension: usize,
    weights: Option<Vec<f64>>,
}

impl MetricDescriptor {
    pub fn euclidean(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::BadMetric(format!("dimension must be >= 1")));
        }
        Ok(Self {
            kind: MetricKind::Euclidean,
            dimension,
            weights: None,
        })
    }

    pub fn weighted_euclidean(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::BadMetric(format!("dimension must be >= 1")));
        }
        for (i, w) in weights.iter().enumerate() {
            if !w.is_finite() || *w <= 0.0 {
                return Err(Error::BadMetric(format!(
                    "weight {i} is {w}, weights must be finite and strictly positive"
                )));
            }
        }
        Ok(Self {
            kind: MetricKind::WeightedEuclidean,
            dimension: weights.len(),
            weights: Some(weights),
        })
    }

    /// L2 metric for functions observed at `points` uniform grid points on
    /// [0, 1]: weighted Euclidean with trapezoidal quadrature weights.
    pub fn trapezoid_grid(points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::BadMetric(format!(
                "a quadrature grid needs at least 2 points, got {points}"
            )));
        }
        let h = 1.0 / (points - 1) as f64;
        let mut weights = alloc::vec![h; points];
        weights[0] = h / 2.0;
        weights[points - 1] = h / 2.0;
        Self::weighted_euclidean(weights)
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    /// Distance between two conforming points.
    pub fn distance(&self, p: &[f64], q: &[f64]) -> Result<f64> {
        if p.len() != self.dimension {
            return Err(Error::BadMetric(format!(
                "point has dimension {}, metric expects {}",
                p.len(),
                self.dimension
            )));
        }
        if q.len() != self.dimension {
            return Err(Error::BadMetric(format!(
                "point has dimension {}, metric expects {}",
                q.len(),
                self.dimension
            )));
        }
        Ok(self.distance_unchecked(p, q))
    }

    /// Hot-path distance; dimensions must already conform.
    pub(crate) fn distance_unchecked(&self, p: &[f64], q: &[f64]) -> f64 {
        let mut acc = 0.0;
        match &self.weights {
            None => {
                for (a, b) in p.iter().zip(q) {
                    let d = a - b;
                    acc += d * d;
                }
            }
            Some(w) => {
                for ((a, b), wi) in p.iter().zip(q).zip(w) {
                    let d = a - b;
                    acc += wi * d * d;
                }
            }
        }
        libm::sqrt(acc)
    }
}

/// `n` aligned observations in two metric spaces; the universal input of
/// every estimator in this crate. Row order is meaningful: the inference
/// machinery is built for (possibly dependent) time series.
///
/// Construction validates everything once, so downstream code can use the
/// unchecked accessors freely.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSample {
    x_metric: MetricDescriptor,
    y_metric: MetricDescriptor,
    /// Row-major, n * x_dim.
    xs: Vec<f64>,
    /// Row-major, n * y_dim.
    ys: Vec<f64>,
    n: usize,
}

impl PairedSample {
    /// Validates and assembles a paired sample from row-major coordinate
    /// buffers. Errors name the offending row.
    pub fn new(
        x_metric: MetricDescriptor,
        y_metric: MetricDescriptor,
        xs: Vec<f64>,
        ys: Vec<f64>,
    ) -> Result<Self> {
        let xd = x_metric.dimension();
        let yd = y_metric.dimension();
        if xs.len() % xd != 0 {
            return Err(Error::DimensionMismatch {
                side: Side::X,
                row: xs.len() / xd,
                expected: xd,
                found: xs.len() % xd,
            });
        }
        if ys.len() % yd != 0 {
            return Err(Error::DimensionMismatch {
                side: Side::Y,
                row: ys.len() / yd,
                expected: yd,
                found: ys.len() % yd,
            });
        }
        let nx = xs.len() / xd;
        let ny = ys.len() / yd;
        if nx != ny {
            return Err(Error::LengthMismatch { xs: nx, ys: ny });
        }
        if nx == 0 {
            return Err(Error::EmptySample);
        }
        for (side, data, dim) in [(Side::X, &xs, xd), (Side::Y, &ys, yd)] {
            for (idx, v) in data.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        side,
                        row: idx / dim,
                        col: idx % dim,
                    });
                }
            }
        }
        Ok(Self {
            x_metric,
            y_metric,
            xs,
            ys,
            n: nx,
        })
    }

    /// Scalar time series convenience constructor.
    pub fn scalar(xs: &[f64], ys: &[f64]) -> Result<Self> {
        Self::new(
            MetricDescriptor::euclidean(1)?,
            MetricDescriptor::euclidean(1)?,
            xs.to_vec(),
            ys.to_vec(),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_metric(&self) -> &MetricDescriptor {
        &self.x_metric
    }

    pub fn y_metric(&self) -> &MetricDescriptor {
        &self.y_metric
    }

    pub fn x_row(&self, i: usize) -> &[f64] {
        let d = self.x_metric.dimension();
        &self.xs[i * d..(i + 1) * d]
    }

    pub fn y_row(&self, i: usize) -> &[f64] {
        let d = self.y_metric.dimension();
        &self.ys[i * d..(i + 1) * d]
    }

    pub fn x_dist(&self, i: usize, j: usize) -> f64 {
        self.x_metric.distance_unchecked(self.x_row(i), self.x_row(j))
    }

    pub fn y_dist(&self, i: usize, j: usize) -> f64 {
        self.y_metric.distance_unchecked(self.y_row(i), self.y_row(j))
    }
}
