//! Command-line front end: one JSON configuration per run, results written
//! to an output directory as CSV tables and a `summary.json`.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::Parser;
use serde_json::json;

pub use config::{parse_config, Command, RunConfig, Settings};
pub use error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "biharm", version, about = "Radial solutions of Δ(|x|^α Δu) = |x|^l u^p")]
pub struct Args {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = "biharm-out")]
    pub out: PathBuf,
    /// Worker threads for parallel commands.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Overrides the tolerance of shoot, scan and minimize.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Suppress the summary line on stdout.
    #[arg(long)]
    pub quiet: bool,
}

pub struct RunOutcome {
    pub summary: serde_json::Value,
    pub files: Vec<PathBuf>,
    pub headline: String,
}

pub fn load(args: &Args) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", args.config.display())))?;
    let base = args
        .config
        .parent()
        .map(PathBuf::from)
        .unwrap_or_default();
    let mut cfg = parse_config(&text, &base)?;
    if let Some(t) = args.tol {
        config::override_tol(&mut cfg, t)?;
    }
    if args.jobs == Some(0) {
        return Err(CliError::Validation("--jobs must be at least 1".into()));
    }
    Ok(cfg)
}

/// Exponents of the configured tuple; p-dependent ones only when p is given.
fn derived(cfg: &RunConfig) -> Result<serde_json::Value, CliError> {
    let params = &cfg.params;
    if cfg.p_given {
        return Ok(serde_json::to_value(biharm_core::derive_exponents(params)?).expect("exponents serialize"));
    }
    Ok(json!({
        "nprime": params.nprime(),
        "tau": params.tau(),
        "p_s": params.p_s(),
        "gamma_alpha": params.gamma_alpha(),
        "sobolev_exp": (params.dim() + 4.0) / (params.dim() - 4.0),
    }))
}

pub fn run(args: &Args) -> Result<RunOutcome, CliError> {
    let cfg = load(args)?;
    let mut out = output::OutDir::create(&args.out)?;
    let result = commands::execute(&cfg, &mut out, args.jobs)?;
    let summary = json!({
        "schema_version": SCHEMA_VERSION,
        "command": cfg.command.name(),
        "inputs": cfg.echo(),
        "derived": derived(&cfg)?,
        "results": result.results,
    });
    out.write_json("summary.json", &summary)?;
    Ok(RunOutcome {
        summary,
        files: out.written().to_vec(),
        headline: result.headline,
    })
}
