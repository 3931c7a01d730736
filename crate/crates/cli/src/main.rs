use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use relcor::dataset::{read_dataset, MetricOptions};
use relcor::report::{render_json, render_text};
use relcor::simfmt::{write_experiment_table, ExperimentRow};
use relcor::tableio::{default_table, read_table_file, write_table_file};
use relcor::{CliError, Result};
use relcor_core::dcov::{dcov_empirical, dcov_variance, dcor_empirical};
use relcor_core::inference::{
    equivalence_test, relevant_test, Decision, Direction, Measure, TestReport,
};
use relcor_core::metric::Side;
use relcor_core::pivotal::{default_probabilities, quantile_table, QuantileTable};
use relcor_core::sequential::{normalizer_dcov, normalizer_dcor, prefix_processes, GammaMeasure};
use relcor_core::simlab::{
    derive_seed, estimate_population_dcor, rejection_rate, CovKind, FourierConfig,
    FourierRepresentation, SampleGenerator, VarConfig, VarInit,
};

/// Exit code signalling a rejected null hypothesis (0 means retained).
const EXIT_REJECT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "relcor",
    version,
    about = "Self-normalized tests for relevant hypotheses about distance correlation",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate dcov, dcor, and the self-normalizers for a dataset
    Dcor(DcorArgs),
    /// Test H0: measure <= delta (relevant) or H0: dcor >= delta (equivalence)
    Test(TestArgs),
    /// Simulate the pivotal ratio and write a reusable quantile table
    Quantiles(QuantilesArgs),
    /// Rejection-rate experiments on the bundled synthetic models
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct DatasetArgs {
    /// Dataset file: header `x1,...,xp,y1,...,yq`, one observation per line
    dataset: PathBuf,
    /// Treat x columns as function values on a uniform grid over [0, 1]
    #[arg(long)]
    x_grid: bool,
    /// Treat y columns as function values on a uniform grid over [0, 1]
    #[arg(long)]
    y_grid: bool,
}

impl DatasetArgs {
    fn read(&self) -> Result<relcor_core::metric::PairedSample> {
        read_dataset(
            &self.dataset,
            MetricOptions {
                x_grid: self.x_grid,
                y_grid: self.y_grid,
            },
        )
    }
}

#[derive(Args)]
struct DcorArgs {
    #[command(flatten)]
    data: DatasetArgs,
    /// Atoms of the uniform weighting measure on j/(atoms+1)
    #[arg(long, default_value_t = 19)]
    gamma_atoms: usize,
    /// Write the full prefix trajectories to this file
    #[arg(long)]
    path_out: Option<PathBuf>,
}

#[derive(Copy, Clone, ValueEnum)]
enum MeasureArg {
    Dcor,
    Dcov,
}

#[derive(Copy, Clone, ValueEnum)]
enum DirectionArg {
    Relevant,
    Equivalence,
}

#[derive(Args)]
struct TestArgs {
    #[command(flatten)]
    data: DatasetArgs,
    /// Threshold delta of the null hypothesis
    #[arg(long)]
    delta: f64,
    /// Nominal level
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t = MeasureArg::Dcor)]
    measure: MeasureArg,
    #[arg(long, value_enum, default_value_t = DirectionArg::Relevant)]
    direction: DirectionArg,
    /// Quantile table file; defaults to the bundled table (default gamma,
    /// 10^6 runs). Any non-default gamma needs an explicit table.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Also write the machine-readable JSON report here
    #[arg(long)]
    report_out: Option<PathBuf>,
}

#[derive(Args)]
struct QuantilesArgs {
    /// Monte Carlo runs (floor 10^4)
    #[arg(long, default_value_t = 1_000_000)]
    runs: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 19)]
    gamma_atoms: usize,
    /// Output table file
    #[arg(long)]
    out: PathBuf,
}

#[derive(Copy, Clone, ValueEnum)]
enum ModelArg {
    Var,
    Fourier,
}

#[derive(Copy, Clone, ValueEnum)]
enum CovArg {
    Sparse,
    Full,
}

#[derive(Copy, Clone, ValueEnum)]
enum ReprArg {
    Coefficients,
    Grid,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    model: ModelArg,
    /// Innovation correlation (VAR) or coefficient correlation (fourier)
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    /// VAR transition matrix: `default`, `zero`, or `a11,a12,a21,a22`
    #[arg(long, default_value = "default")]
    a: String,
    /// Covariance structure of the functional model
    #[arg(long, value_enum, default_value_t = CovArg::Sparse)]
    cov: CovArg,
    #[arg(long, value_enum, default_value_t = ReprArg::Coefficients)]
    representation: ReprArg,
    /// Grid points when --representation grid
    #[arg(long, default_value_t = 256)]
    grid_points: usize,
    /// Comma-separated thresholds
    #[arg(long)]
    delta_grid: String,
    /// Comma-separated sample sizes
    #[arg(long, default_value = "400")]
    n_grid: String,
    /// Test replicates per experiment point
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t = DirectionArg::Relevant)]
    direction: DirectionArg,
    /// Master seed; replicate seeds are derived per (n, replicate)
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    table: Option<PathBuf>,
    /// Replicates for the population-dcor estimate
    #[arg(long, default_value_t = 100)]
    pop_reps: usize,
    /// Sample size for the population-dcor estimate
    #[arg(long, default_value_t = 1000)]
    pop_n: usize,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Dcor(args) => cmd_dcor(args),
        Command::Test(args) => cmd_test(args),
        Command::Quantiles(args) => cmd_quantiles(args),
        Command::Simulate(args) => cmd_simulate(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn load_table(path: Option<&Path>) -> Result<QuantileTable> {
    match path {
        Some(p) => read_table_file(p),
        None => Ok(default_table().clone()),
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn cmd_dcor(args: DcorArgs) -> Result<ExitCode> {
    let sample = args.data.read()?;
    let gamma = GammaMeasure::uniform_atoms(args.gamma_atoms)?;
    if gamma.undersampled_at(sample.n()) {
        eprintln!(
            "warning: smallest gamma atom {} resolves to an empty prefix at n = {}",
            gamma.support()[0],
            sample.n()
        );
    }

    let path = prefix_processes(&sample)?;
    println!("{:<12}{}", "n", sample.n());
    println!("{:<12}{}", "dcov", fmt(dcov_empirical(&sample)));
    println!("{:<12}{}", "dcov_xx", fmt(dcov_variance(&sample, Side::X)));
    println!("{:<12}{}", "dcov_yy", fmt(dcov_variance(&sample, Side::Y)));
    println!("{:<12}{}", "dcor", fmt(dcor_empirical(&sample)?));
    println!("{:<12}{}", "v_dcov", fmt(normalizer_dcov(&path, &gamma)));
    println!("{:<12}{}", "v_dcor", fmt(normalizer_dcor(&path, &gamma)));

    if let Some(out) = &args.path_out {
        let mut buf = String::from("m\tdcov_xy\tdcov_xx\tdcov_yy\tdcor\n");
        for m in 1..=sample.n() {
            buf.push_str(&format!(
                "{m}\t{}\t{}\t{}\t{}\n",
                fmt(path.dcov_xy()[m - 1]),
                fmt(path.dcov_xx()[m - 1]),
                fmt(path.dcov_yy()[m - 1]),
                fmt(path.dcor()[m - 1]),
            ));
        }
        fs::write(out, buf).map_err(|source| CliError::Io {
            path: out.clone(),
            source,
        })?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_test(args: TestArgs) -> Result<ExitCode> {
    let sample = args.data.read()?;
    let table = load_table(args.table.as_deref())?;
    if table.gamma().undersampled_at(sample.n()) {
        eprintln!(
            "warning: smallest gamma atom {} resolves to an empty prefix at n = {}",
            table.gamma().support()[0],
            sample.n()
        );
    }

    let report: TestReport = match args.direction {
        DirectionArg::Relevant => {
            let measure = match args.measure {
                MeasureArg::Dcor => Measure::Dcor,
                MeasureArg::Dcov => Measure::Dcov,
            };
            relevant_test(&sample, args.delta, args.alpha, &table, measure)?
        }
        DirectionArg::Equivalence => {
            if matches!(args.measure, MeasureArg::Dcov) {
                return Err(CliError::Usage(
                    "the equivalence direction is defined for --measure dcor".into(),
                ));
            }
            equivalence_test(&sample, args.delta, args.alpha, &table)?
        }
    };

    print!("{}", render_text(&report));
    if let Some(out) = &args.report_out {
        let doc = serde_json::to_string_pretty(&render_json(&report)).expect("valid JSON");
        fs::write(out, doc).map_err(|source| CliError::Io {
            path: out.clone(),
            source,
        })?;
    }

    Ok(match report.decision {
        Decision::Reject => ExitCode::from(EXIT_REJECT),
        Decision::Retain => ExitCode::SUCCESS,
    })
}

fn cmd_quantiles(args: QuantilesArgs) -> Result<ExitCode> {
    let gamma = GammaMeasure::uniform_atoms(args.gamma_atoms)?;
    let table = quantile_table(&gamma, args.runs, default_probabilities(), args.seed)?;
    write_table_file(&table, &args.out)?;
    if table.excluded() > 0 {
        eprintln!(
            "warning: {} degenerate draws were excluded from the quantile pool",
            table.excluded()
        );
    }
    for p in [0.90, 0.95, 0.99] {
        println!("w_{p:<5} {}", fmt(table.lookup(p)?));
    }
    println!("table written to {}", args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn parse_grid(name: &str, text: &str) -> Result<Vec<f64>> {
    let values: std::result::Result<Vec<f64>, _> =
        text.split(',').map(|f| f.trim().parse::<f64>()).collect();
    match values {
        Ok(v) if !v.is_empty() => Ok(v),
        _ => Err(CliError::Usage(format!(
            "--{name} must be a comma-separated list of numbers, got {text:?}"
        ))),
    }
}

fn parse_a_matrix(text: &str) -> Result<[[f64; 2]; 2]> {
    match text {
        "default" => Ok([[0.5, 0.2], [0.2, 0.5]]),
        "zero" => Ok([[0.0, 0.0], [0.0, 0.0]]),
        other => {
            let v = parse_grid("a", other)?;
            if v.len() != 4 {
                return Err(CliError::Usage(format!(
                    "--a needs 4 entries a11,a12,a21,a22, got {}",
                    v.len()
                )));
            }
            Ok([[v[0], v[1]], [v[2], v[3]]])
        }
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<ExitCode> {
    let table = load_table(args.table.as_deref())?;
    let deltas = parse_grid("delta-grid", &args.delta_grid)?;
    let ns: Vec<usize> = parse_grid("n-grid", &args.n_grid)?
        .into_iter()
        .map(|v| v as usize)
        .collect();
    let direction = match args.direction {
        DirectionArg::Relevant => Direction::Relevant,
        DirectionArg::Equivalence => Direction::Equivalence,
    };

    let (generator, cov_kind): (Box<dyn SampleGenerator>, String) = match args.model {
        ModelArg::Var => {
            let config = VarConfig {
                a: parse_a_matrix(&args.a)?,
                rho: args.rho,
                n: 1,
                init: VarInit::Stationary,
            };
            (Box::new(config), "var".into())
        }
        ModelArg::Fourier => {
            let cov_kind = match args.cov {
                CovArg::Sparse => CovKind::Sparse,
                CovArg::Full => CovKind::Full,
            };
            let config = FourierConfig {
                cov_kind,
                rho: args.rho,
                n: 1,
                representation: match args.representation {
                    ReprArg::Coefficients => FourierRepresentation::Coefficients,
                    ReprArg::Grid => FourierRepresentation::Grid(args.grid_points),
                },
            };
            (Box::new(config), cov_kind.to_string())
        }
    };

    // population value on its own seed channel, away from any n
    let pop = estimate_population_dcor(
        generator.as_ref(),
        args.pop_reps,
        args.pop_n,
        derive_seed(args.seed, u64::MAX),
    )?;
    eprintln!(
        "population dcor ~ {:.4} (se {:.4}, {} reps of n = {})",
        pop.mean, pop.se, pop.reps, pop.n
    );

    let mut rows = Vec::new();
    for &n in &ns {
        // one replicate set per n, shared across deltas: the rejection
        // count is then exactly nonincreasing in delta
        let master = derive_seed(args.seed, n as u64);
        for &delta in &deltas {
            let r = rejection_rate(
                generator.as_ref(),
                direction,
                delta,
                args.alpha,
                n,
                args.reps,
                &table,
                master,
            )?;
            rows.push(ExperimentRow {
                delta,
                n,
                rho: args.rho,
                cov_kind: cov_kind.clone(),
                population_dcor: pop.mean,
                rate: r.rate,
                se: r.se,
                reps: r.reps,
                master_seed: master,
            });
        }
    }

    match &args.out {
        Some(path) => {
            let mut buf = Vec::new();
            write_experiment_table(&rows, &mut buf).expect("writing to a Vec cannot fail");
            fs::write(path, buf).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
        }
        None => {
            write_experiment_table(&rows, std::io::stdout().lock()).map_err(|source| {
                CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                }
            })?;
        }
    }
    Ok(ExitCode::SUCCESS)
}
