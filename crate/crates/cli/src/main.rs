//! `efimov`: batch driver for the lattice three-body computations.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::Report;

#[derive(Debug, Parser)]
#[command(name = "efimov", version, about = "Eigenvalue counts for three lattice bosons with a resonant pair interaction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration; defaults are used when absent.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Directory for the CSV table and JSON summary.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Print the JSON summary instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for sweeps.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Root λ₀ of the s-wave equation and the derived slopes.
    Lambda0,
    /// Coupling μ* at which the pair has a zero-energy resonance.
    Resonance,
    /// Pair bound-state energy z(k) along `k_list`.
    Dispersion,
    /// Bottom of the three-body essential spectrum along `big_k_list`.
    Tau,
    /// Eigenvalue counts of the reduced model operator along `rho_list`.
    CountModel,
    /// Exact three-body counts on a tiny grid, directly and by Birman–Schwinger.
    CountTiny,
    /// Eigenvalue counts of the truncated convolution operator along `r_list`.
    SlopeSr,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let hash = config.hash();
    let report: Report = match cli.command {
        Command::Lambda0 => commands::cmd_lambda0()?,
        Command::Resonance => commands::cmd_resonance(&config)?,
        Command::Dispersion => commands::cmd_dispersion(&config)?,
        Command::Tau => commands::cmd_tau(&config)?,
        Command::CountModel => commands::cmd_count_model(&config)?,
        Command::CountTiny => commands::cmd_count_tiny(&config)?,
        Command::SlopeSr => commands::cmd_slope_sr(&config)?,
    };
    if let Some(dir) = &cli.out {
        report.write(dir, &hash)?;
    }
    if cli.json {
        let summary = serde_json::to_string_pretty(&report.summary_json(&hash)).expect("summary serializes");
        println!("{summary}");
    } else {
        print!("{}", report.render_text(&hash));
    }
    match report.summary.get("mismatches").and_then(|v| v.as_u64()) {
        Some(m) if m > 0 => Err(CliError::Numerical(format!("{m} Birman-Schwinger count mismatches"))),
        _ => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("efimov: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
