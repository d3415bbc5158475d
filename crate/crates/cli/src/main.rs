//! Benchmark command-line harness for the extragradient solver library.
//!
//! Exit codes: 0 success, 2 configuration error, 3 certificate failure,
//! 4 all stepsize candidates diverged, 1 other errors.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use exgrad_cli::config::{ExperimentConfig, ProblemSpec};
use exgrad_cli::presets;
use exgrad_cli::runner::{self, AllDiverged};

#[derive(Parser)]
#[command(
    name = "exgrad",
    about = "Extragradient-family benchmark harness",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigSource {
    /// Path to a JSON experiment configuration.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Name of a bundled preset (see `exgrad presets`).
    #[arg(long)]
    preset: Option<String>,
    /// Base seed; instance i uses seed_base + i.
    #[arg(long)]
    seed_base: Option<u64>,
    /// Scale preset problem dimensions up to the full benchmark sizes.
    #[arg(long, default_value_t = false)]
    full_scale: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (algorithm, instance) pair and write trace + aggregate CSVs.
    Solve {
        #[command(flatten)]
        source: ConfigSource,
        /// Output directory for the CSV files.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Grid-tune each algorithm's stepsize before the full runs.
        #[arg(long, default_value_t = false)]
        tune: bool,
    },
    /// Stepsize grid search: one reduced-budget run per candidate.
    Grid {
        #[command(flatten)]
        source: ConfigSource,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Comma-separated stepsize candidates overriding the config grid.
        #[arg(long, value_delimiter = ',')]
        etas: Option<Vec<f64>>,
    },
    /// Run the Lyapunov certificates and interval lemma checks.
    Certify {
        #[command(flatten)]
        source: ConfigSource,
        /// Iterations per certified run.
        #[arg(long, default_value_t = 1000)]
        iters: usize,
    },
    /// Emit the first problem instance as CSV matrices.
    Gen {
        #[command(flatten)]
        source: ConfigSource,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// List the bundled presets.
    Presets,
}

fn load_config(source: &ConfigSource) -> Result<ExperimentConfig> {
    let text = match (&source.config, &source.preset) {
        (Some(path), None) => std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?,
        (None, Some(name)) => presets::load(name)
            .with_context(|| {
                format!("unknown preset {name:?}; available: {}", presets::NAMES.join(", "))
            })?
            .to_string(),
        (None, None) => bail!("provide --config FILE or --preset NAME"),
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };
    let mut cfg = ExperimentConfig::from_json(&text)?;
    if let Some(seed) = source.seed_base {
        cfg.seed_base = seed;
    }
    if source.full_scale {
        scale_up(&mut cfg.problem);
    }
    Ok(cfg)
}

/// Paper-scale dimensions for the presets (desk-scale is the default).
fn scale_up(problem: &mut ProblemSpec) {
    match problem {
        ProblemSpec::QuadMinimax { p1, p2, .. } | ProblemSpec::KnownSolution { p1, p2 } => {
            *p1 = 1000;
            *p2 = 1000;
        }
        ProblemSpec::MatrixGame { q, .. } => *q = 500,
        ProblemSpec::Logit {
            samples,
            features,
            copies,
            ..
        } => {
            *samples = 1000;
            *features = 300;
            *copies = 5;
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.downcast_ref::<AllDiverged>().is_some() {
                ExitCode::from(4)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Solve { source, out, tune } => {
            let cfg = match load_config(&source) {
                Ok(cfg) => cfg,
                Err(e) => return config_error(e),
            };
            let outcomes = if tune {
                runner::cmd_solve_tuned(&cfg, &out)?
            } else {
                runner::cmd_solve(&cfg, &out)?
            };
            for o in &outcomes {
                let diverged = o
                    .statuses
                    .iter()
                    .filter(|s| **s == exgrad::solvers::StopStatus::Diverged)
                    .count();
                println!(
                    "{}: mean final relative residual {:.3e} over {} instance(s){}",
                    o.label,
                    o.mean_final_rel,
                    o.statuses.len(),
                    if diverged > 0 {
                        format!(" ({diverged} diverged)")
                    } else {
                        String::new()
                    }
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Grid { source, out, etas } => {
            let cfg = match load_config(&source) {
                Ok(cfg) => cfg,
                Err(e) => return config_error(e),
            };
            let tables = runner::cmd_grid(&cfg, etas.as_deref(), &out)?;
            for table in &tables {
                match table.winner() {
                    Some(eta) => {
                        let row = table
                            .rows
                            .iter()
                            .find(|r| r.eta == eta)
                            .expect("winner comes from the table");
                        println!(
                            "{}: best eta {:.6e} (final relative residual {:.3e})",
                            table.label, eta, row.final_rel
                        );
                    }
                    None => println!("{}: all candidates diverged", table.label),
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Certify { source, iters } => {
            let cfg = match load_config(&source) {
                Ok(cfg) => cfg,
                Err(e) => return config_error(e),
            };
            let (_, passed) = runner::cmd_certify(&cfg, iters)?;
            if passed {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(3))
            }
        }
        Command::Gen { source, out } => {
            let cfg = match load_config(&source) {
                Ok(cfg) => cfg,
                Err(e) => return config_error(e),
            };
            let files = runner::cmd_gen(&cfg, &out)?;
            for f in files {
                println!("wrote {}", f.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Presets => {
            for name in presets::NAMES {
                println!("{name}");
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn config_error(err: anyhow::Error) -> Result<ExitCode> {
    eprintln!("configuration error: {err:#}");
    Ok(ExitCode::from(2))
}
