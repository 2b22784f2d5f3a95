mod config;
mod error;
mod index;
mod linear;
mod output;
mod simulate;
mod symbol;

use clap::{Parser, Subcommand};
use config::RawConfig;
use error::{CliError, CliResult};
use fsi_core::Execution;
use num_complex::Complex64;
use output::Output;
use std::path::PathBuf;
use std::process::ExitCode;

/// Symbol analysis, frequency-domain solves and nonlinear simulation for a
/// Stokes flow coupled to a damped plate.
///
/// Exit codes: 0 ok, 1 configuration, 2 sector condition, 3 residual or
/// invariant failure, 4 no contraction.
#[derive(Parser, Debug)]
#[command(name = "plate-fsi", version)]
struct Cli {
    /// Configuration file with `key = value` lines.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    /// Override a configuration key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    /// Run the invariant checks of the subcommand only.
    #[arg(long, global = true)]
    check: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Newton polygon and sector check of the boundary symbol.
    AnalyzeSymbol,
    /// Newton polygon and principal parts.
    Polygon {
        /// `nl` for the coupled boundary symbol, `m` for the plate symbol.
        #[arg(long, default_value = "nl")]
        symbol: String,
    },
    /// Linear solve and residual check over a frequency grid, as CSV.
    SolveLinear {
        /// Grid size `AxB`: A values of |λ|, B values of z.
        #[arg(long, default_value = "8x8", value_parser = linear::parse_grid)]
        grid: (usize, usize),
        /// Single frequency, e.g. `1+0.5i`; requires --z.
        #[arg(long, value_parser = linear::parse_complex, allow_hyphen_values = true)]
        lambda: Option<Complex64>,
        #[arg(long)]
        z: Option<f64>,
        /// Perturb every profile before checking it.
        #[arg(long, hide = true)]
        corrupt_mode: bool,
    },
    /// Fixed-point iteration for the nonlinear problem.
    Simulate {
        /// Directory for steps.csv, field.csv and summary.json.
        #[arg(long, default_value = "plate-fsi-out")]
        out: PathBuf,
    },
    /// Compatibility conditions of the configured initial data.
    CheckCompat,
    /// Sobolev indices, thresholds and product checks.
    Index,
}

fn execution() -> CliResult<Execution> {
    let threads = match std::env::var("PLATE_FSI_THREADS") {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .ok()
                .filter(|&k| k > 0)
                .ok_or_else(|| CliError::config(format!("invalid PLATE_FSI_THREADS = {v:?}")))?,
        ),
        Err(_) => None,
    };
    if threads == Some(1) {
        return Ok(Execution::Sequential);
    }
    #[cfg(feature = "parallel")]
    if let Some(k) = threads {
        // fails only if a pool exists already, which then stays in use
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
    Ok(Execution::available())
}

fn run(cli: Cli) -> CliResult<()> {
    let overrides = cli
        .set
        .iter()
        .map(|s| config::parse_assignment(s))
        .collect::<CliResult<Vec<_>>>()?;
    let cfg = RawConfig::new(cli.config.as_deref(), &overrides)?.resolve()?;
    let out = Output { json: cli.json, check: cli.check };
    let exec = execution()?;
    match cli.command {
        Command::AnalyzeSymbol => symbol::analyze_symbol(&cfg, &out, exec),
        Command::Polygon { symbol } => symbol::polygon(&cfg, &out, &symbol),
        Command::SolveLinear { grid, lambda, z, corrupt_mode } => {
            let args = linear::LinearArgs { grid, lambda, z, corrupt: corrupt_mode };
            linear::solve_linear(&cfg, &out, &args, exec)
        }
        Command::Simulate { out: dir } => simulate::simulate(&cfg, &out, &dir, exec),
        Command::CheckCompat => simulate::check_compat(&cfg, &out, exec),
        Command::Index => index::run(&cfg, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
