use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use dynkin_lab::config::Overrides;
use dynkin_lab::{parse_config, run, Command, LabError, Provenance, Status};

/// Experiments and property checks for Lévy-driven heat and cable equations.
#[derive(Debug, Parser)]
#[command(name = "dynkin-lab", version)]
struct Cli {
    /// What to run.
    #[arg(value_enum)]
    command: Command,
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Root seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Monte Carlo replications or paths (overrides the config).
    #[arg(long)]
    paths: Option<u64>,
    /// Absolute quadrature tolerance (overrides the config).
    #[arg(long)]
    tol: Option<f64>,
    /// Verification suite; repeat for several (default: the config's list).
    #[arg(long = "suite")]
    suites: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok((status, summary)) => {
            print!("{summary}");
            ExitCode::from(status.code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.status().code() as u8)
        }
    }
}

fn execute(cli: &Cli) -> Result<(Status, String), LabError> {
    let path = cli.config.display().to_string();
    let text = fs::read_to_string(&cli.config)
        .map_err(|source| LabError::Io { context: format!("reading {path}"), source })?;
    let mut cfg = parse_config(&text).map_err(|source| LabError::Config { path: path.clone(), source })?;
    let overrides = Overrides { seed: cli.seed, paths: cli.paths, tol: cli.tol, suites: cli.suites.clone() };
    overrides.apply(&mut cfg).map_err(|source| LabError::Config { path: path.clone(), source })?;
    let prov = Provenance {
        command: cli.command.name().to_string(),
        config_path: path,
        config: text.split_whitespace().collect::<Vec<_>>().join(" "),
        overrides: overrides.describe(),
        seed: cfg.seed,
    };
    let report = run(cli.command, &cfg, &prov, &cli.out)?;
    Ok((report.status, report.summary))
}
