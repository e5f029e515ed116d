//! `workmoments`: work statistics of a driven, dissipative two-level
//! system, computed by master-equation correlation functions, quantum-jump
//! sampling, and an exact composite-system reference, with CSV and SVG
//! artifacts.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod config;
mod runner;
mod svg;

use config::{Overrides, RunConfig};

#[derive(Parser)]
#[command(
    name = "workmoments",
    version,
    about = "Work moments of a driven two-level system under repeated energy measurements"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Flat `key = value` configuration file; `#` starts a comment
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for tables and figures
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand)]
enum Command {
    /// Master-equation and rotating-frame moments with running time series
    Moments(CommonArgs),
    /// Quantum-jump ensemble statistics of the work distribution
    Qjump(CommonArgs),
    /// Exact composite-system measurement tables and moment cross-checks
    Oracle(CommonArgs),
    /// Fluctuation-dissipation ratio over a (lambda0, gamma_down) grid
    FdtScan(CommonArgs),
    /// Jump ensemble against the master equation, with a PASS/FAIL verdict
    Compare(CommonArgs),
    /// Render SVG figures from previously written tables (no recomputation)
    Figures(CommonArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Moments(_) => "moments",
            Command::Qjump(_) => "qjump",
            Command::Oracle(_) => "oracle",
            Command::FdtScan(_) => "fdt-scan",
            Command::Compare(_) => "compare",
            Command::Figures(_) => "figures",
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::Moments(a)
            | Command::Qjump(a)
            | Command::Oracle(a)
            | Command::FdtScan(a)
            | Command::Compare(a)
            | Command::Figures(a) => a,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    // Worker-count override; affects throughput only, never results.
    match std::env::var("WORKMOMENTS_THREADS") {
        Ok(v) if !v.is_empty() => match v.parse::<usize>() {
            Ok(n) if n >= 1 => workmoments::parallel::configure_threads(Some(n)),
            _ => {
                eprintln!("configuration error: WORKMOMENTS_THREADS: cannot parse `{v}`");
                return ExitCode::from(1);
            }
        },
        _ => {}
    }

    let args = cli.command.args();
    let cfg = match RunConfig::load(args.config.as_deref(), &args.overrides) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(1);
        }
    };

    let name = cli.command.name();
    if name != "figures" {
        print!("{}", cfg.summary());
    }
    match runner::dispatch(name, &cfg, &args.out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
