//! IO companion to `relcor-core`: dataset files, quantile table files,
//! report rendering, and experiment tables. The binary in this package
//! wires these into the `relcor` command-line tool.

pub mod dataset;
pub mod report;
pub mod simfmt;
pub mod tableio;

use std::path::PathBuf;

/// Errors from file parsing and IO; estimation errors pass through from the
/// core crate.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] relcor_core::Error),

    #[error("{0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

/// All numbers in file formats are serialized with 17 significant digits,
/// which round-trips every f64 bit-exactly.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
