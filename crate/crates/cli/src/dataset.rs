//! Delimited-text datasets.
//!
//! Format: a comma-separated header `x1,...,xp,y1,...,yq` (every x column
//! before every y column), one observation per line in chronological order
//! (order matters: the tests are built for time series). An optional
//! comment line
//!
//! ```text
//! #weights: w1,...,w{p+q}
//! ```
//!
//! supplies strictly positive quadrature weights per column, turning both
//! metrics into weighted Euclidean ones (functional data on a grid). Other
//! `#` lines are ignored.

use std::fs;
use std::io::Write;
use std::path::Path;

use relcor_core::metric::{MetricDescriptor, PairedSample};

use crate::{fmt_f64, CliError, Result};

/// Metric construction options resolved from CLI flags.
#[derive(Debug, Clone, Copy, Default)]
pub struct MetricOptions {
    /// Treat the x block as function values on a uniform grid over [0, 1]
    /// (trapezoidal quadrature weights).
    pub x_grid: bool,
    pub y_grid: bool,
}

pub fn read_dataset(path: &Path, options: MetricOptions) -> Result<PairedSample> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_dataset(&text, path, options)
}

pub fn parse_dataset(text: &str, path: &Path, options: MetricOptions) -> Result<PairedSample> {
    let err = |line: usize, message: String| CliError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut header: Option<(usize, usize)> = None; // (p, q)
    let mut weights: Option<(usize, Vec<f64>)> = None; // (line, values)
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    let mut rows = 0usize;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("#weights:") {
            if weights.is_some() {
                return Err(err(lineno, "duplicate #weights: line".into()));
            }
            let mut values = Vec::new();
            for (col, field) in rest.split(',').enumerate() {
                let w: f64 = field.trim().parse().map_err(|_| {
                    err(lineno, format!("weight {} is not a number: {field:?}", col + 1))
                })?;
                if !w.is_finite() || w <= 0.0 {
                    return Err(err(
                        lineno,
                        format!("weight {} must be finite and positive, got {w}", col + 1),
                    ));
                }
                values.push(w);
            }
            weights = Some((lineno, values));
            continue;
        }
        if line.starts_with('#') {
            continue;
        }

        match header {
            None => {
                let mut p = 0usize;
                let mut q = 0usize;
                for (col, name) in line.split(',').enumerate() {
                    let name = name.trim();
                    if name.starts_with('x') {
                        if q > 0 {
                            return Err(err(
                                lineno,
                                format!("x column {name:?} appears after the y block"),
                            ));
                        }
                        p += 1;
                    } else if name.starts_with('y') {
                        q += 1;
                    } else {
                        return Err(err(
                            lineno,
                            format!(
                                "column {} name {name:?} must start with 'x' or 'y'",
                                col + 1
                            ),
                        ));
                    }
                }
                if p == 0 || q == 0 {
                    return Err(err(
                        lineno,
                        format!("need at least one x and one y column, got {p} x / {q} y"),
                    ));
                }
                header = Some((p, q));
            }
            Some((p, q)) => {
                let fields: Vec<&str> = line.split(',').collect();
                if fields.len() != p + q {
                    return Err(err(
                        lineno,
                        format!("expected {} fields, found {}", p + q, fields.len()),
                    ));
                }
                for (col, field) in fields.iter().enumerate() {
                    let v: f64 = field.trim().parse().map_err(|_| {
                        err(
                            lineno,
                            format!("field {} is not a number: {field:?}", col + 1),
                        )
                    })?;
                    if !v.is_finite() {
                        return Err(err(
                            lineno,
                            format!("field {} must be finite, got {v}", col + 1),
                        ));
                    }
                    if col < p {
                        xs.push(v);
                    } else {
                        ys.push(v);
                    }
                }
                rows += 1;
            }
        }
    }

    let (p, q) = header.ok_or_else(|| err(0, "empty dataset: missing header line".into()))?;
    if rows == 0 {
        return Err(err(0, "dataset has a header but no observations".into()));
    }

    let (x_metric, y_metric) = build_metrics(p, q, weights, options, path)?;
    PairedSample::new(x_metric, y_metric, xs, ys).map_err(CliError::Core)
}

fn build_metrics(
    p: usize,
    q: usize,
    weights: Option<(usize, Vec<f64>)>,
    options: MetricOptions,
    path: &Path,
) -> Result<(MetricDescriptor, MetricDescriptor)> {
    match weights {
        Some((lineno, values)) => {
            if options.x_grid || options.y_grid {
                return Err(CliError::Usage(
                    "grid flags conflict with an explicit #weights: line".into(),
                ));
            }
            if values.len() != p + q {
                return Err(CliError::Parse {
                    path: path.to_path_buf(),
                    line: lineno,
                    message: format!(
                        "#weights: line has {} values for {} columns",
                        values.len(),
                        p + q
                    ),
                });
            }
            Ok((
                MetricDescriptor::weighted_euclidean(values[..p].to_vec())?,
                MetricDescriptor::weighted_euclidean(values[p..].to_vec())?,
            ))
        }
        None => {
            let x_metric = if options.x_grid {
                MetricDescriptor::trapezoid_grid(p)?
            } else {
                MetricDescriptor::euclidean(p)?
            };
            let y_metric = if options.y_grid {
                MetricDescriptor::trapezoid_grid(q)?
            } else {
                MetricDescriptor::euclidean(q)?
            };
            Ok((x_metric, y_metric))
        }
    }
}

/// Writes a sample in the dataset format with 17-significant-digit fields;
/// reading it back reproduces every coordinate bit-exactly.
pub fn write_dataset<W: Write>(sample: &PairedSample, mut out: W) -> std::io::Result<()> {
    let p = sample.x_metric().dimension();
    let q = sample.y_metric().dimension();
    let mut names = Vec::with_capacity(p + q);
    for i in 1..=p {
        names.push(format!("x{i}"));
    }
    for i in 1..=q {
        names.push(format!("y{i}"));
    }
    writeln!(out, "{}", names.join(","))?;

    let x_weights = sample.x_metric().weights();
    let y_weights = sample.y_metric().weights();
    if x_weights.is_some() || y_weights.is_some() {
        let mut fields = Vec::with_capacity(p + q);
        match x_weights {
            Some(w) => fields.extend(w.iter().map(|v| fmt_f64(*v))),
            None => fields.extend(std::iter::repeat_n("1".to_string(), p)),
        }
        match y_weights {
            Some(w) => fields.extend(w.iter().map(|v| fmt_f64(*v))),
            None => fields.extend(std::iter::repeat_n("1".to_string(), q)),
        }
        writeln!(out, "#weights: {}", fields.join(","))?;
    }

    for i in 0..sample.n() {
        let mut fields = Vec::with_capacity(p + q);
        fields.extend(sample.x_row(i).iter().map(|v| fmt_f64(*v)));
        fields.extend(sample.y_row(i).iter().map(|v| fmt_f64(*v)));
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

pub fn write_dataset_file(sample: &PairedSample, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_dataset(sample, &mut buf).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    fs::write(path, buf).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}
