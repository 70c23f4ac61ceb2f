use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fastdiff_cli::config::{parse_config_with, parse_window, ConfigError, Overrides};
use fastdiff_cli::experiment::{
    run_experiment, ExperimentError, RunSummary, EXIT_CONFIG, EXIT_PASS, EXIT_VERDICT,
};
use fastdiff_cli::{offline, sweep};
use fastdiff_core::io::{self as csvio, fmt_f64};
use fastdiff_core::ratefit::{DEFAULT_TOLERANCE, DEFAULT_WINDOW};
use fastdiff_core::Params;

/// Extinction experiments for fast diffusion with strong absorption.
#[derive(Debug, Parser)]
#[command(name = "fastdiff", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one experiment and write its outputs.
    Simulate {
        config: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Run every point of the configured sweep axes.
    Sweep {
        config: PathBuf,
        #[command(flatten)]
        flags: Flags,
        /// Concurrent runs; defaults to the available parallelism.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Fit decay rates to a written trajectory.
    Ratefit {
        trajectory: PathBuf,
        #[arg(long, value_parser = parse_window)]
        window: Option<(f64, f64)>,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
    },
    /// Replay the snapshot checks on an output directory.
    Check { dir: PathBuf },
    /// Print the derived exponents of `(N, m, q)`.
    Exponents {
        #[arg(long = "N")]
        n: f64,
        #[arg(long)]
        m: f64,
        #[arg(long)]
        q: f64,
    },
}

#[derive(Debug, Args)]
struct Flags {
    #[arg(long = "Rmax")]
    r_max: Option<f64>,
    #[arg(long = "M")]
    cells: Option<usize>,
    #[arg(long)]
    dt_init: Option<f64>,
    #[arg(long)]
    eps_ext: Option<f64>,
    /// Fit window as a fraction of the extinction time, e.g. `0.7,0.99`.
    #[arg(long, value_parser = parse_window)]
    window: Option<(f64, f64)>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl From<Flags> for Overrides {
    fn from(f: Flags) -> Self {
        Overrides {
            r_max: f.r_max,
            cells: f.cells,
            dt_init: f.dt_init,
            eps_ext: f.eps_ext,
            window: f.window,
            out: f.out,
        }
    }
}

fn load(path: &Path, flags: Flags) -> Result<fastdiff_cli::config::ExperimentConfig, i32> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        EXIT_CONFIG
    })?;
    parse_config_with(&text, &flags.into()).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_CONFIG
    })
}

fn report(summary: &RunSummary) {
    println!("config_hash {}", summary.config_hash);
    println!("steps {}", summary.steps);
    println!(
        "T_e_est {}",
        summary.t_e_est.map_or_else(|| "none".into(), fmt_f64)
    );
    println!("clipped_mass {}", fmt_f64(summary.clipped_mass));
    for c in &summary.checks {
        println!(
            "check {} {} margin={}",
            c.name,
            verdict(c.pass),
            fmt_f64(c.worst_margin)
        );
    }
    for f in &summary.ratefits {
        println!(
            "ratefit r={} slope={} expected={} rel_dev={} {}",
            f.order,
            fmt_f64(f.slope),
            fmt_f64(f.expected),
            fmt_f64(f.rel_dev),
            verdict(f.pass)
        );
    }
    for e in &summary.ratefit_errors {
        println!("ratefit error: {e}");
    }
    if let Some(ok) = summary.refinement_monotone {
        println!(
            "refinement {}",
            if ok { "monotone" } else { "not monotone" }
        );
    }
    println!("verdict {}", verdict(summary.pass));
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}

fn failure(e: ExperimentError) -> i32 {
    eprintln!("error: {e}");
    if let ExperimentError::Solver { summary, .. } = &e {
        eprintln!("partial outputs written ({} steps)", summary.steps);
    }
    e.exit_code()
}

fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Simulate { config, flags } => {
            let cfg = match load(&config, flags) {
                Ok(c) => c,
                Err(code) => return code,
            };
            match run_experiment(&cfg) {
                Ok(s) => {
                    report(&s);
                    s.exit_code()
                }
                Err(e) => failure(e),
            }
        }
        Command::Sweep {
            config,
            flags,
            workers,
        } => {
            let cfg = match load(&config, flags) {
                Ok(c) => c,
                Err(code) => return code,
            };
            let workers = workers
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            match sweep::run_sweep(&cfg, workers) {
                Ok(r) => {
                    for row in &r.rows {
                        let p = row.params;
                        println!(
                            "N={} m={} q={} {}",
                            fmt_f64(p.n),
                            fmt_f64(p.m),
                            fmt_f64(p.q),
                            row.status
                        );
                    }
                    r.exit_code()
                }
                Err(e) => failure(e),
            }
        }
        Command::Ratefit {
            trajectory,
            window,
            tolerance,
        } => {
            let window = window.unwrap_or(DEFAULT_WINDOW);
            match offline::ratefit_file(&trajectory, window, tolerance) {
                Ok((hash, fits, errors)) => {
                    let stdout = std::io::stdout().lock();
                    if let Err(e) = csvio::write_ratefits(stdout, &fits, &hash) {
                        return failure(e.into());
                    }
                    for e in &errors {
                        eprintln!("{e}");
                    }
                    if errors.is_empty() && fits.iter().all(|f| f.pass) {
                        EXIT_PASS
                    } else {
                        EXIT_VERDICT
                    }
                }
                Err(e) => failure(e),
            }
        }
        Command::Check { dir } => match offline::check_dir(&dir) {
            Ok((hash, checks)) => {
                let stdout = std::io::stdout().lock();
                if let Err(e) = csvio::write_checks(stdout, &checks, &hash) {
                    return failure(e.into());
                }
                if checks.iter().all(|c| c.pass) {
                    EXIT_PASS
                } else {
                    EXIT_VERDICT
                }
            }
            Err(e) => failure(e),
        },
        Command::Exponents { n, m, q } => {
            let exps = Params::validate(n, m, q).and_then(|p| p.derive());
            match exps {
                Ok(e) => {
                    for (name, value) in e.table() {
                        println!("{name:<16} {}", fmt_f64(value));
                    }
                    EXIT_PASS
                }
                Err(e) => {
                    eprintln!("error: {}", ConfigError::Validation(e));
                    EXIT_CONFIG
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let code = run(Cli::parse());
    ExitCode::from(code as u8)
}
