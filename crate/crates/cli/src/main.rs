use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cvqkd_cli::run::{self, ConfigError, Overrides};
use cvqkd_core::Execution;

/// Multi-mode CV-QKD key rates over satellite-to-ground channels.
#[derive(Parser)]
#[command(name = "cvqkd-sat", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a configuration and write its CSV outputs.
    Run {
        config: PathBuf,
        /// Seed of the transmissivity samples (overrides the file).
        #[arg(long)]
        seed: Option<u64>,
        /// Monte Carlo sample count (overrides the file).
        #[arg(long)]
        samples: Option<usize>,
        /// Output directory (overrides the file).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; 1 runs everything on the calling thread.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Check a configuration without executing it.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Validate { config } => match run::validate(&config) {
            Ok(report) => {
                for n in &report.notices {
                    println!("notice: {n}");
                }
                for w in &report.warnings {
                    println!("warning: {w}");
                }
                for v in &report.violations {
                    println!("violation: {v}");
                }
                println!("{} violation(s), {} warning(s)", report.violations.len(), report.warnings.len());
                if report.is_valid() {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::FAILURE
                }
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(2)
            }
        },
        Command::Run {
            config,
            seed,
            samples,
            out,
            threads,
        } => {
            let execution = match threads {
                Some(0) => {
                    eprintln!("error: --threads must be at least 1");
                    return ExitCode::from(2);
                }
                Some(1) => Execution::Sequential,
                Some(n) => {
                    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                        eprintln!("error: cannot start {n} worker threads: {e}");
                        return ExitCode::FAILURE;
                    }
                    Execution::Parallel
                }
                None => Execution::Parallel,
            };
            let overrides = Overrides { seed, samples, out };
            match run::run(&config, &overrides, execution) {
                Ok((tables, written)) => {
                    println!("{}", tables[0].summary());
                    for path in written {
                        println!("wrote {}", path.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    if e.is::<ConfigError>() {
                        ExitCode::from(2)
                    } else {
                        ExitCode::FAILURE
                    }
                }
            }
        }
    }
}
