use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kanon_cli::config::{IlChoice, Method, Overrides, RunConfig};
use kanon_cli::run::{self, Failure, RunResult, Stage, EXIT_INFEASIBLE};

/// k-anonymization by sensitive-attribute clustering.
#[derive(Parser)]
#[command(name = "kanon", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster, generalize and write the released table plus metrics.
    Anonymize(RunArgs),
    /// Run both methods on the same input and report them side by side.
    Compare(RunArgs),
    /// Exhaustive optimum for small inputs, with heuristic-to-optimal ratios.
    Oracle {
        #[command(flatten)]
        run: RunArgs,
        /// Minimum cluster size for the exhaustive search.
        #[arg(long, default_value_t = 1)]
        min_size: usize,
    },
    /// Check an already released CSV for k-anonymity.
    Validate(RunArgs),
    /// Sweep several k values with both methods and emit a plot-ready CSV.
    Experiment {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated k values; defaults to the configured k.
        #[arg(long, value_delimiter = ',')]
        k_values: Vec<usize>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    metrics: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: Option<Method>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long = "il", value_enum)]
    il_variant: Option<IlChoice>,
    /// Aggregated output (one row per class with a Count column); `--aggregate=false` for one row per record.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    aggregate: Option<bool>,
    /// Merge clusters smaller than k into their nearest neighbour.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    merge_small: Option<bool>,
}

impl RunArgs {
    fn load(&self) -> RunResult<RunConfig> {
        let overrides = Overrides {
            input: self.input.clone(),
            output: self.output.clone(),
            metrics: self.metrics.clone(),
            method: self.method,
            k: self.k,
            il_variant: self.il_variant,
            aggregate: self.aggregate,
            merge_small: self.merge_small,
        };
        RunConfig::load(&self.config, overrides).map_err(|e| Failure::new(Stage::Config, e))
    }
}

/// Write to the given path, or to stdout when there is none.
fn emit(path: Option<&PathBuf>, bytes: &[u8]) -> RunResult<()> {
    match path {
        Some(p) => run::write_atomically(&[(p, bytes)]),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| Failure::new(Stage::Write, e)),
    }
}

fn execute(cli: Cli) -> RunResult<u8> {
    match cli.command {
        Command::Anonymize(args) => {
            let cfg = args.load()?;
            let output = cfg.output_path.clone().ok_or_else(|| {
                Failure::new(Stage::Config, anyhow::anyhow!("no output path given"))
            })?;
            let out = run::run_anonymize(&cfg)?;
            match &cfg.metrics_path {
                Some(metrics) => {
                    run::write_atomically(&[(&output, &out.csv), (metrics, &out.metrics)])?
                }
                None => {
                    run::write_atomically(&[(&output, &out.csv)])?;
                    emit(None, &out.metrics)?;
                }
            }
        }
        Command::Compare(args) => {
            let cfg = args.load()?;
            let cmp = run::run_compare(&cfg)?;
            emit(cfg.metrics_path.as_ref(), &run::to_json(&cmp)?)?;
        }
        Command::Oracle {
            run: args,
            min_size,
        } => {
            let cfg = args.load()?;
            let report = run::run_oracle(&cfg, min_size)?;
            emit(cfg.metrics_path.as_ref(), &run::to_json(&report)?)?;
        }
        Command::Validate(args) => {
            let cfg = args.load()?;
            let report = run::run_validate(&cfg)?;
            emit(cfg.metrics_path.as_ref(), &run::to_json(&report)?)?;
            if !report.k_anonymous {
                return Ok(EXIT_INFEASIBLE);
            }
        }
        Command::Experiment {
            run: args,
            k_values,
        } => {
            let cfg = args.load()?;
            let ks = if k_values.is_empty() {
                vec![cfg.k]
            } else {
                k_values
            };
            let csv = run::run_experiment(&cfg, &ks)?;
            emit(cfg.output_path.as_ref(), &csv)?;
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("kanon: {failure}");
            ExitCode::from(failure.code)
        }
    }
}
