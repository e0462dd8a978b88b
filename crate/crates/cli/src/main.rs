mod artifacts;
mod commands;
mod config;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::commands::CommandOutput;
use crate::config::RunConfig;

#[derive(Parser)]
#[command(name = "revival", about = "Spectral solver and revival analyzer for -u'' + V u on [0, 2pi]")]
struct Cli {
    /// JSON run configuration; defaults describe the piecewise-constant
    /// step-potential scenario
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// output directory (overrides the config)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// truncation: number of eigenvalues (overrides the config)
    #[arg(long, global = true)]
    n_eigs: Option<usize>,

    /// number of spatial grid points (overrides the config)
    #[arg(long, global = true)]
    grid_points: Option<usize>,

    /// full-scale run: N = 1000 eigenvalues, dx = 0.0005 pi
    #[arg(long, global = true)]
    paper_scale: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Eigenvalues, multiplicities, and root counts for all three boundary
    /// conditions
    Spectrum,
    /// Time evolution of the initial datum at the configured rational times
    Evolve,
    /// Revival decomposition u = psi_rev + w with jump diagnostics
    Revival,
    /// Eigenvalue residuals against the sqrt(lambda) ~ m + A1/m model plus
    /// Fourier-coefficient fits
    Asymptotics,
    /// Full verification sweep: interlacing, root counts, orthonormality,
    /// asymptotics, revival ratios
    Verify,
}

impl Command {
    fn label(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Evolve => "evolve",
            Command::Revival => "revival",
            Command::Asymptotics => "asymptotics",
            Command::Verify => "verify",
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    config: &'a RunConfig,
    wall_time_seconds: f64,
    verdicts: &'a BTreeMap<String, bool>,
    all_pass: bool,
    artifacts: Vec<String>,
}

fn run() -> Result<bool> {
    let cli = Cli::parse();
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if cli.paper_scale {
        cfg.n_eigs = 1000;
        cfg.grid_points = 4000; // dx = 2pi/4000 = 0.0005 pi
    }
    if let Some(n) = cli.n_eigs {
        cfg.n_eigs = n;
    }
    if let Some(g) = cli.grid_points {
        cfg.grid_points = g;
    }
    if let Some(out) = cli.out {
        cfg.out_dir = out;
    }
    cfg.validate()?;

    let out_dir = cfg.out_dir.clone();
    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("cannot create output directory {}", out_dir.display()))?;

    let start = Instant::now();
    let result: CommandOutput = match cli.command {
        Command::Spectrum => commands::run_spectrum(&cfg, &out_dir)?,
        Command::Evolve => commands::run_evolve(&cfg, &out_dir)?,
        Command::Revival => commands::run_revival(&cfg, &out_dir)?,
        Command::Asymptotics => commands::run_asymptotics(&cfg, &out_dir)?,
        Command::Verify => commands::run_verify(&cfg, &out_dir)?,
    };
    let wall = start.elapsed().as_secs_f64();

    let manifest = Manifest {
        command: cli.command.label(),
        version: env!("CARGO_PKG_VERSION"),
        config: &cfg,
        wall_time_seconds: wall,
        verdicts: &result.verdicts,
        all_pass: result.all_pass(),
        artifacts: result
            .artifacts
            .iter()
            .map(|p| p.display().to_string())
            .collect(),
    };
    let manifest_path = out_dir.join("manifest.json");
    std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)
        .with_context(|| format!("cannot write {}", manifest_path.display()))?;

    for (name, ok) in result.verdicts.iter() {
        println!("{}: {}", name, if *ok { "pass" } else { "FAIL" });
    }
    println!("manifest: {}", manifest_path.display());
    Ok(result.all_pass())
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
