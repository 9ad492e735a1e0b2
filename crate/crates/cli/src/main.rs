use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fedlap_cli::verify::{format_table, run_checks, DEFAULT_TOL};
use fedlap_cli::{apply_env_seed, cmd_gen_data, cmd_run, cmd_sweep, CliError, RunSpec};

#[derive(Parser)]
#[command(name = "fedlap", version, about = "Graph-regularized federated learning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment; writes history.csv and summary.json.
    Run {
        config: PathBuf,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for local updates.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Sweep eta plus Local and Global baselines; writes sweep.csv.
    SweepEta {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        etas: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        repeats: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Materialize the dataset and graph; writes data.csv and graph.json.
    GenData {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the oracle suite.
    Verify {
        /// Tolerance of the matrix-form check.
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
}

fn load(path: &Path, out: Option<PathBuf>) -> Result<RunSpec, CliError> {
    let mut spec = RunSpec::load(path)?;
    apply_env_seed(&mut spec)?;
    if let Some(out) = out {
        spec.output_dir = out;
    }
    Ok(spec)
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, out, threads } => {
            let mut spec = load(&config, out)?;
            if threads.is_some() {
                spec.train.threads = threads;
            }
            let summary = cmd_run(&spec)?;
            println!("final objective {}", summary.final_objective);
        }
        Command::SweepEta {
            config,
            etas,
            repeats,
            out,
        } => {
            let spec = load(&config, out)?;
            let rows = cmd_sweep(&spec, &etas, repeats)?;
            println!("{} rows written to {}", rows.len(), spec.output_dir.join("sweep.csv").display());
        }
        Command::GenData { config, out } => cmd_gen_data(&load(&config, out)?)?,
        Command::Verify { tol } => {
            let results = run_checks(tol);
            print!("{}", format_table(&results));
            let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.name).collect();
            if !failed.is_empty() {
                return Err(CliError::Verify(failed.join(", ")));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
