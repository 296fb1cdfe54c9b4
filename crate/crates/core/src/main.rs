use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use hrs_sim::experiment::{emit_csv, snr_to_power, write_csv, write_gnuplot, ScenarioConfig};
use hrs_sim::power_alloc::scenario_closed_form_split;
use hrs_sim::Scheme;

#[derive(Parser)]
#[command(name = "hrs", version, about = "Hierarchical rate-splitting sum-rate experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Monte Carlo and deterministic-equivalent sweep.
    Sweep(Common),
    /// Deterministic-equivalent rows only.
    Detequiv(Common),
    /// Print interference summaries and the closed-form split per SNR.
    Split(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file in `key = value` format.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in scenario: disjoint or overlapping.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Comma-separated SNR list in dB.
    #[arg(long)]
    snr: Option<String>,
    #[arg(long)]
    draws: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated scheme list.
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    grid_step: Option<f64>,
    /// Objective of the HRS_EXS grid search: asymptotic or monte_carlo.
    #[arg(long)]
    exs_objective: Option<String>,
    /// Allocation for the HRS_DetEquiv row: closed_form, exhaustive or fixed(a,b).
    #[arg(long)]
    allocation: Option<String>,
    #[arg(long)]
    threads: Option<usize>,
    /// Record wall-clock time per row.
    #[arg(long)]
    timing: bool,
    /// Also write gnuplot data blocks to this path.
    #[arg(long)]
    plot: Option<PathBuf>,
}

impl Common {
    fn config(&self) -> Result<ScenarioConfig> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => ScenarioConfig::from_file(path).with_context(|| format!("reading {}", path.display()))?,
            (None, Some(name)) => ScenarioConfig::preset(name)?,
            (None, None) => ScenarioConfig::disjoint(),
        };
        let overrides = [
            ("snr_db", self.snr.clone()),
            ("draws", self.draws.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("schemes", self.scheme.clone()),
            ("grid_step", self.grid_step.map(|v| v.to_string())),
            ("exs_objective", self.exs_objective.clone()),
            ("allocation", self.allocation.clone()),
            ("threads", self.threads.map(|v| v.to_string())),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                cfg.set(key, &v)?;
            }
        }
        if self.timing {
            cfg.timing = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn sweep(args: &Common, cfg: &ScenarioConfig) -> Result<()> {
    let result = hrs_sim::experiment::run_sweep(cfg)?;
    match &args.out {
        Some(path) => emit_csv(&result, path).with_context(|| format!("writing {}", path.display()))?,
        None => write_csv(&result, std::io::stdout().lock())?,
    }
    if let Some(path) = &args.plot {
        let file = std::fs::File::create(path).with_context(|| format!("writing {}", path.display()))?;
        write_gnuplot(&result, std::io::BufWriter::new(file))?;
    }
    Ok(())
}

fn split(cfg: &ScenarioConfig) -> Result<()> {
    let scenario = cfg.build()?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "snr_db,gamma_og,gamma_ig,alpha,beta")?;
    for &snr in &cfg.snr_db {
        let (summary, s) = scenario_closed_form_split(&scenario, snr_to_power(snr))?;
        writeln!(
            out,
            "{snr},{:.6e},{:.6e},{:.6},{:.6}",
            summary.inter_group, summary.intra_group, s.alpha, s.beta
        )?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sweep(args) => sweep(&args, &args.config()?),
        Command::Detequiv(args) => {
            let mut cfg = args.config()?;
            if args.scheme.is_none() {
                cfg.schemes = vec![Scheme::HrsDetEquiv, Scheme::TtpDetEquiv];
            }
            if let Some(s) = cfg.schemes.iter().find(|s| !s.is_asymptotic()) {
                bail!("scheme {s} is not a deterministic-equivalent scheme");
            }
            sweep(&args, &cfg)
        }
        Command::Split(args) => split(&args.config()?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
