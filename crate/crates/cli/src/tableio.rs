//! Quantile table files: a versioned plain-text key-value format.
//!
//! ```text
//! relcor-quantile-table-v1
//! gamma_support<TAB>v1 v2 ...
//! gamma_weights<TAB>w1 w2 ...
//! runs<TAB>1000000
//! seed<TAB>42
//! excluded<TAB>0
//! p<TAB>w_p<TAB>se_p        (one row per tabulated probability)
//! ```
//!
//! All reals carry 17 significant digits, so write -> parse -> write is
//! byte-identical and the parsed table compares equal bit for bit.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::OnceLock;

use relcor_core::pivotal::{QuantileEntry, QuantileTable};
use relcor_core::sequential::GammaMeasure;

use crate::{fmt_f64, CliError, Result};

const MAGIC: &str = "relcor-quantile-table-v1";

/// Master seed of the table bundled with the binary (`data/default_table.tsv`,
/// default gamma, 10^6 runs).
pub const DEFAULT_TABLE_SEED: u64 = 42;
pub const DEFAULT_TABLE_RUNS: u64 = 1_000_000;

pub fn write_table<W: Write>(table: &QuantileTable, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{MAGIC}")?;
    let support: Vec<String> = table.gamma().support().iter().map(|v| fmt_f64(*v)).collect();
    let weights: Vec<String> = table.gamma().weights().iter().map(|v| fmt_f64(*v)).collect();
    writeln!(out, "gamma_support\t{}", support.join(" "))?;
    writeln!(out, "gamma_weights\t{}", weights.join(" "))?;
    writeln!(out, "runs\t{}", table.runs())?;
    writeln!(out, "seed\t{}", table.seed())?;
    writeln!(out, "excluded\t{}", table.excluded())?;
    for e in table.entries() {
        writeln!(out, "{}\t{}\t{}", fmt_f64(e.p), fmt_f64(e.value), fmt_f64(e.se))?;
    }
    Ok(())
}

pub fn write_table_file(table: &QuantileTable, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_table(table, &mut buf).expect("writing to a Vec cannot fail");
    fs::write(path, buf).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_table_file(path: &Path) -> Result<QuantileTable> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_table(&text, path)
}

pub fn parse_table(text: &str, path: &Path) -> Result<QuantileTable> {
    let err = |line: usize, message: String| CliError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, first)) if first.trim_end() == MAGIC => {}
        Some((_, first)) => {
            return Err(err(1, format!("expected header {MAGIC:?}, found {first:?}")))
        }
        None => return Err(err(0, "empty table file".into())),
    }

    let mut support: Option<Vec<f64>> = None;
    let mut weights: Option<Vec<f64>> = None;
    let mut runs: Option<u64> = None;
    let mut seed: Option<u64> = None;
    let mut excluded: u64 = 0;
    let mut entries: Vec<QuantileEntry> = Vec::new();

    let parse_reals = |lineno: usize, value: &str| -> Result<Vec<f64>> {
        value
            .split_whitespace()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| err(lineno, format!("not a number: {f:?}")))
            })
            .collect()
    };

    for (idx, raw) in lines {
        let lineno = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        match fields.as_slice() {
            ["gamma_support", value] => support = Some(parse_reals(lineno, value)?),
            ["gamma_weights", value] => weights = Some(parse_reals(lineno, value)?),
            ["runs", value] => {
                runs = Some(value.trim().parse().map_err(|_| {
                    err(lineno, format!("runs must be an integer, got {value:?}"))
                })?)
            }
            ["seed", value] => {
                seed = Some(value.trim().parse().map_err(|_| {
                    err(lineno, format!("seed must be an integer, got {value:?}"))
                })?)
            }
            ["excluded", value] => {
                excluded = value.trim().parse().map_err(|_| {
                    err(lineno, format!("excluded must be an integer, got {value:?}"))
                })?
            }
            [p, w, se] => {
                let parse = |f: &str| -> Result<f64> {
                    f.trim()
                        .parse::<f64>()
                        .map_err(|_| err(lineno, format!("not a number: {f:?}")))
                };
                entries.push(QuantileEntry {
                    p: parse(p)?,
                    value: parse(w)?,
                    se: parse(se)?,
                });
            }
            _ => return Err(err(lineno, format!("unrecognized line: {line:?}"))),
        }
    }

    let support = support.ok_or_else(|| err(0, "missing gamma_support header".into()))?;
    let weights = weights.ok_or_else(|| err(0, "missing gamma_weights header".into()))?;
    let runs = runs.ok_or_else(|| err(0, "missing runs header".into()))?;
    let seed = seed.ok_or_else(|| err(0, "missing seed header".into()))?;

    let gamma = GammaMeasure::new(support, weights)?;
    QuantileTable::from_parts(gamma, runs, seed, entries, excluded).map_err(CliError::Core)
}

static DEFAULT_TABLE: OnceLock<QuantileTable> = OnceLock::new();

/// The bundled table for the default 19-atom measure: 10^6 runs from master
/// seed 42, regenerable with
/// `relcor quantiles --runs 1000000 --seed 42 --out <file>`.
pub fn default_table() -> &'static QuantileTable {
    DEFAULT_TABLE.get_or_init(|| {
        parse_table(
            include_str!("../data/default_table.tsv"),
            Path::new("data/default_table.tsv"),
        )
        .expect("bundled quantile table is valid")
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use relcor_core::pivotal::quantile_table;

    #[test]
    fn round_trip_is_byte_identical() {
        let gamma = GammaMeasure::default();
        let table = quantile_table(&gamma, 10_000, &[0.05, 0.5, 0.95], 3).unwrap();
        let mut first = Vec::new();
        write_table(&table, &mut first).unwrap();
        let text = String::from_utf8(first.clone()).unwrap();
        let parsed = parse_table(&text, Path::new("t")).unwrap();
        assert_eq!(parsed, table);
        let mut second = Vec::new();
        write_table(&parsed, &mut second).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn rejects_malformed_files() {
        let p = Path::new("t");
        assert!(parse_table("", p).is_err());
        assert!(parse_table("bogus\n", p).is_err());
        assert!(parse_table(&format!("{MAGIC}\nruns\t10\n"), p).is_err());
        // entries violating monotonicity fail table validation
        let text = format!(
            "{MAGIC}\ngamma_support\t0.5\ngamma_weights\t1\nruns\t10000\nseed\t1\n0.9\t5\t0.1\n0.95\t4\t0.1\n"
        );
        assert!(parse_table(&text, p).is_err());
    }

    #[test]
    fn bundled_table_is_valid() {
        let t = default_table();
        assert_eq!(t.runs(), DEFAULT_TABLE_RUNS);
        assert_eq!(t.seed(), DEFAULT_TABLE_SEED);
        assert_eq!(t.gamma().atoms(), 19);
        // covers the shipped levels and both alpha/2 rows
        for p in [0.005, 0.01, 0.025, 0.05, 0.10, 0.90, 0.95, 0.975, 0.99, 0.995] {
            assert!(t.lookup(p).is_ok(), "missing p = {p}");
        }
    }
}
