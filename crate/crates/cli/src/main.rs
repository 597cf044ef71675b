//! `symineq`: runs verification scenarios described by JSON configs.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Overrides, ScenarioConfig};

#[derive(Parser)]
#[command(name = "symineq", version, about = "Numerical checks of symmetrization inequalities")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    /// Override the sampling resolution.
    #[arg(long, global = true)]
    resolution: Option<usize>,
    /// Override the verification tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Override the seed of every generated family.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Verb {
    /// Run the configured inequalities over the function family.
    Verify { config: PathBuf },
    /// Tabulate the profile, its weights and `cap1(t, 1/2)`.
    Profile { config: PathBuf },
    /// Write K-functional curves of the function family.
    Kfunc { config: PathBuf },
    /// Herz endpoint and stopped square functions over random martingales.
    Martingale { config: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let overrides = Overrides { resolution: cli.resolution, tol: cli.tol, seed: cli.seed, out: cli.out };
    let (path, action): (&PathBuf, fn(&ScenarioConfig) -> Result<i32, run::RunError>) = match &cli.verb {
        Verb::Verify { config } => (config, run::verify),
        Verb::Profile { config } => (config, run::profile),
        Verb::Kfunc { config } => (config, run::kfunc),
        Verb::Martingale { config } => (config, run::martingale),
    };
    let code = ScenarioConfig::load(path)
        .map_err(run::RunError::from)
        .and_then(|mut c| {
            c.apply(&overrides);
            action(&c)
        })
        .unwrap_or_else(|e| {
            eprintln!("error: {e}");
            e.exit_code()
        });
    ExitCode::from(code as u8)
}
