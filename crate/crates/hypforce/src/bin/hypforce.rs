//! Command-line front end over the experiment runners.
//!
//! Exit codes: 0 when the run's claim holds, 1 when it ran but did not
//! certify, 2 for configuration or constraint problems, 3 for internal
//! failures (integration, chart construction, filesystem).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hypforce::config::Config;
use hypforce::error::Error;
use hypforce::experiment::{
    run_bounds, run_curvature, run_family, run_force, run_sweep, run_verify, RunOutcome,
};

#[derive(Parser)]
#[command(name = "hypforce", version, about = "Deform near-hyperbolic radial metrics and verify the result")]
struct Cli {
    /// Configuration file (TOML). Defaults are used when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory for reports (overrides the configured one).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Scale every measurement lattice by this factor (> 0).
    #[arg(long, global = true, value_name = "FACTOR")]
    grid_scale: Option<f64>,

    /// Seed for all randomized sampling.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply the hyperbolic forcing operator and report its structure.
    Force,
    /// Certify chart closeness (or ball closeness) of the configured metric.
    Verify,
    /// Sample sectional curvatures against the constant-curvature model.
    Curvature,
    /// Estimate deformed cut limits of a parameter family.
    Family,
    /// Sweep forcing parameters and tabulate measured vs bounded closeness.
    Sweep,
    /// Evaluate the closed-form deformation bounds.
    Bounds,
}

fn load_config(cli: &Cli) -> Result<Config, Error> {
    let mut config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(out) = &cli.out {
        config.output.dir = out.to_string_lossy().into_owned();
    }
    if let Some(scale) = cli.grid_scale {
        if !(scale > 0.0) {
            return Err(Error::Config(format!("--grid-scale must be positive, got {scale}")));
        }
        config.sampling.grid_scale = scale;
    }
    if let Some(seed) = cli.seed {
        config.sampling.seed = seed;
    }
    Ok(config)
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_)
        | Error::Constraint(_)
        | Error::Domain(_)
        | Error::Argument(_)
        | Error::Precondition(_)
        | Error::Dimension { .. }
        | Error::NotWarped { .. }
        | Error::InvalidMetric(_) => 2,
        Error::Io(_)
        | Error::IntegrationFailure(_)
        | Error::GeodesicEscape { .. }
        | Error::ChartConstruction(_) => 3,
    }
}

fn run(cli: &Cli) -> Result<RunOutcome, Error> {
    let config = load_config(cli)?;
    let out_dir = PathBuf::from(&config.output.dir);
    match cli.command {
        Command::Force => run_force(&config, &out_dir),
        Command::Verify => run_verify(&config, &out_dir),
        Command::Curvature => run_curvature(&config, &out_dir),
        Command::Family => run_family(&config, &out_dir),
        Command::Sweep => run_sweep(&config, &out_dir),
        Command::Bounds => run_bounds(&config, &out_dir),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            for file in &outcome.files {
                println!("wrote {}", file.display());
            }
            if outcome.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
