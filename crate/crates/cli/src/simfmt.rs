//! Plot-ready experiment tables emitted by the `simulate` subcommand.

use std::io::Write;

use crate::fmt_f64;

/// One experiment point: a model configuration crossed with a threshold and
/// a sample size.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub delta: f64,
    pub n: usize,
    pub rho: f64,
    /// "var" for the VAR model, "sparse" / "full" for the functional model.
    pub cov_kind: String,
    pub population_dcor: f64,
    pub rate: f64,
    pub se: f64,
    pub reps: usize,
    pub master_seed: u64,
}

pub const EXPERIMENT_HEADER: &str =
    "delta\tn\trho\tcov_kind\tpopulation_dcor\trate\tse\treps\tmaster_seed";

pub fn write_experiment_table<W: Write>(
    rows: &[ExperimentRow],
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "{EXPERIMENT_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            fmt_f64(r.delta),
            r.n,
            fmt_f64(r.rho),
            r.cov_kind,
            fmt_f64(r.population_dcor),
            fmt_f64(r.rate),
            fmt_f64(r.se),
            r.reps,
            r.master_seed
        )?;
    }
    Ok(())
}
