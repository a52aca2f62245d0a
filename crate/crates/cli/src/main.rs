//! `sphereflow` command-line runner.
//!
//! Exit codes: 0 when every asserted check passes, 1 when a check fails,
//! 2 for usage, configuration or solver errors.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use sphereflow::harness::{run, run_acceptance, ExperimentConfig, ExperimentKind, RunReport};

#[derive(Parser)]
#[command(name = "sphereflow", version, about = "Sphere-valued Landau-Lifshitz flow experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Experiment configuration (TOML, or JSON by extension).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the config's `out_dir`.
    #[arg(long, global = true, env = "SPHEREFLOW_OUT")]
    out: Option<PathBuf>,
    /// Seed for randomized inputs; overrides the config's `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print nothing but errors.
    #[arg(long, global = true)]
    quiet: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "SPHEREFLOW_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq)]
enum Cmd {
    /// Integrate the regularized flow.
    Evolve,
    /// Audit boundary compatibility of the initial data.
    Compat,
    /// Solve the linearized problem for a time-derivative field.
    Linearized,
    /// Solve the Galerkin approximation of the linearized problem.
    Galerkin,
    /// Helical-wave convergence study (config optional).
    Converge,
    /// Sweep the regularization parameter.
    Sweep,
    /// Run the full acceptance suite.
    Selftest,
}

impl Cmd {
    fn kind(self) -> Option<ExperimentKind> {
        Some(match self {
            Cmd::Evolve => ExperimentKind::Evolve,
            Cmd::Compat => ExperimentKind::Compat,
            Cmd::Linearized => ExperimentKind::Linearized,
            Cmd::Galerkin => ExperimentKind::Galerkin,
            Cmd::Converge => ExperimentKind::Convergence,
            Cmd::Sweep => ExperimentKind::EpsSweep,
            Cmd::Selftest => return None,
        })
    }
}

fn print_report(report: &RunReport, quiet: bool) {
    if quiet {
        return;
    }
    for c in &report.checks {
        println!("{}", c.line());
    }
    for w in &report.artifacts {
        println!("wrote {w}");
    }
}

fn load(cli: &Cli, kind: ExperimentKind) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None if kind == ExperimentKind::Convergence => ExperimentConfig::from_toml("kind = \"convergence\"")?,
        None => bail!("--config is required for `{}`", kind.as_str()),
    };
    if cfg.kind != kind {
        bail!("config kind `{}` does not match subcommand `{}`", cfg.kind.as_str(), kind.as_str());
    }
    if let Some(o) = &cli.out {
        cfg.out_dir = Some(o.clone());
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

/// `Ok(true)` when every check passed.
fn execute(cli: &Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    }
    let report = match cli.cmd.kind() {
        Some(kind) => run(&load(cli, kind)?)?,
        None => {
            let report = run_acceptance(cli.seed.unwrap_or(0));
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("sphereflow-out"));
            report.write(&dir)?;
            if !cli.quiet {
                println!("report: {}", dir.join("report.json").display());
            }
            report
        }
    };
    print_report(&report, cli.quiet);
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
