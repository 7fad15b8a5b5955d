//! `rhlearn`: regression-based hypergraph learning experiments.

mod config;
mod report;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ConfigFile, Resolved, Task};
use report::Metrics;
use runner::{report_path, run, CliError, RunContext};

#[derive(Parser)]
#[command(name = "rhlearn", version, about = "Regression-based hypergraph learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Thread budget for sweep points and inner parallelism.
    #[arg(long)]
    jobs: Option<usize>,
    /// Apply the literal similarity scaling instead of the inverse
    /// normalization (comparison mode).
    #[arg(long)]
    literal_eq3: bool,
    /// Average both complementary transduction folds.
    #[arg(long)]
    two_fold: bool,
    /// Dump similarity/incidence/weights/Laplacian matrices as CSV here.
    #[arg(long, value_name = "DIR")]
    dump_matrices: Option<PathBuf>,
    /// Exit with code 1 when a solver fails to converge.
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset and persist it as CSV.
    Synth(CommonArgs),
    /// Hypergraph spectral clustering with full metrics.
    Cluster(CommonArgs),
    /// Semi-supervised hypergraph transduction.
    Transduce(CommonArgs),
    /// Corrupt the dataset at several noise levels and compare methods.
    NoiseSweep(CommonArgs),
}

impl Command {
    fn task(&self) -> Task {
        match self {
            Command::Synth(_) => Task::Synth,
            Command::Cluster(_) => Task::Cluster,
            Command::Transduce(_) => Task::Transduce,
            Command::NoiseSweep(_) => Task::NoiseSweep,
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::Synth(a) | Command::Cluster(a) | Command::Transduce(a)
            | Command::NoiseSweep(a) => a,
        }
    }
}

fn summarize(metrics: &Metrics) -> Vec<String> {
    match metrics {
        Metrics::Cluster { k, accuracy, nmi } => {
            vec![format!("k={k} accuracy={accuracy:.4} nmi={nmi:.4}")]
        }
        Metrics::Transduce {
            error_rate,
            n_test,
            fold_error_rates,
        } => {
            let mut lines = match error_rate {
                Some(e) => vec![format!("error_rate={e:.4} n_test={n_test}")],
                None => vec![format!("no test vertices (n_test={n_test})")],
            };
            if let Some(folds) = fold_error_rates {
                lines.push(format!(
                    "fold errors: {}",
                    folds
                        .iter()
                        .map(|e| format!("{e:.4}"))
                        .collect::<Vec<_>>()
                        .join(", ")
                ));
            }
            lines
        }
        Metrics::Sweep { rows } => rows
            .iter()
            .map(|r| {
                let mut line = format!("level={:<4} method={:<4}", r.level, r.method);
                if let Some(a) = r.accuracy {
                    line.push_str(&format!(" accuracy={a:.4}"));
                }
                if let Some(n) = r.nmi {
                    line.push_str(&format!(" nmi={n:.4}"));
                }
                if let Some(e) = r.error_rate {
                    line.push_str(&format!(" error_rate={e:.4}"));
                }
                line
            })
            .collect(),
        Metrics::Synth {
            n,
            d,
            classes,
            data_path,
        } => vec![format!("wrote {n} samples ({d} features, {classes} classes) to {data_path}")],
    }
}

fn execute(command: &Command) -> Result<(), CliError> {
    let args = command.args();
    if let Some(jobs) = args.jobs {
        // build_global fails if a pool already exists; that only happens in
        // tests driving execute() twice, where the first pool wins
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }

    let file = ConfigFile::load(&args.config).map_err(CliError::Config)?;
    let resolved = Resolved::new(
        file,
        command.task(),
        args.seed,
        args.literal_eq3,
        args.two_fold,
    )
    .map_err(CliError::Config)?;

    let ctx = RunContext {
        resolved,
        dump_dir: args.dump_matrices.clone(),
    };
    let report = run(&ctx)?;

    let path = report_path(&ctx.resolved);
    report
        .write(&path)
        .map_err(CliError::Config)?;

    for line in summarize(&report.metrics) {
        println!("{line}");
    }
    println!("report: {}", path.display());

    if args.strict {
        if let Some(false) = report.flags.get("regression_converged") {
            return Err(CliError::Compute(anyhow::anyhow!(
                "regression did not converge (strict mode)"
            )));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
