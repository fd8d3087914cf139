use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use l0pen_cli::commands;
use l0pen_cli::config::{Config, Dims, Kind, Method};
use l0pen_cli::CliResult;

#[derive(Parser)]
#[command(name = "l0pen", version, about = "l0-regularized optimization by exact penalty")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance file.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Solve one instance and write a JSON report.
    Solve {
        instance: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// portfolio-paper or dictionary-paper.
        #[arg(long)]
        profile: Option<String>,
        /// quadratic, shifted, huber or huber(<delta>).
        #[arg(long)]
        family: Option<String>,
        /// pen-spg, pen-prox, l0-prox or l1-prox.
        #[arg(long)]
        method: Option<Method>,
        /// Report path (default: <instance stem>.report.json next to the instance).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a saved report against its instance.
    Verify {
        instance: PathBuf,
        report: PathBuf,
        /// Compare with the brute-force global minimum (portfolio, n <= 16).
        #[arg(long)]
        oracle: bool,
        /// Allowed gap, relative to max(1, |global minimum|).
        #[arg(long, default_value_t = 1e-6)]
        gap_tol: f64,
    },
    /// Run every instance and method of a config and write CSV tables.
    Bench {
        config: PathBuf,
        /// Overrides output_dir from the config.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GenKind {
    Portfolio {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        force: bool,
    },
    Dictionary {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        force: bool,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    let mut out = io::stdout();
    match cli.command {
        Command::Gen { kind } => {
            let (kind, dims, seed, path, force) = match kind {
                GenKind::Portfolio { n, seed, out, force } => (Kind::Portfolio, Dims::Assets(n), seed, out, force),
                GenKind::Dictionary { n, l, m, seed, out, force } => {
                    (Kind::Dictionary, Dims::Dictionary { n, l, m }, seed, out, force)
                }
            };
            let inst = commands::gen_instance(kind, dims, seed)?;
            let hash = commands::gen(&inst, &path, force)?;
            println!("{} {hash}", path.display());
        }
        Command::Solve {
            instance,
            config,
            profile,
            family,
            method,
            out: report_path,
        } => {
            let inst = commands::load(&instance)?;
            let mut cfg = commands::config_for(&inst, config.as_deref(), profile.as_deref())?;
            if let Some(f) = family {
                cfg.family = f;
                cfg.validate()?;
            }
            let method = method.unwrap_or(match cfg.inner {
                l0pen::InnerSolver::Spg => Method::PenSpg,
                l0pen::InnerSolver::Prox => Method::PenProx,
            });
            let path = report_path.unwrap_or_else(|| commands::default_report_path(&instance));
            commands::solve(&inst, &cfg, method, &path, &mut out)?;
        }
        Command::Verify {
            instance,
            report,
            oracle,
            gap_tol,
        } => {
            let inst = commands::load(&instance)?;
            commands::verify(&inst, &report, oracle, gap_tol, &mut out)?;
        }
        Command::Bench { config, output_dir } => {
            let cfg = Config::load(&config, None)?;
            let dir = output_dir.unwrap_or_else(|| cfg.output_dir.clone());
            commands::bench(&cfg, &dir, &mut out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
