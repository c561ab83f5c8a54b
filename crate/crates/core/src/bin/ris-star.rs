//! Command-line front end: parameter sweeps and validation suites.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ris_star::experiment::{persist_sweep, run_sweep, run_validation, Architecture, ExperimentManifest, Suite, SweepSpec};
use ris_star::presets;
use ris_star::scenario::{load_scenario_file, ScenarioConfig};

#[derive(Parser)]
#[command(name = "ris-star", about = "Cooperative RIS and STAR-RIS downlink: sweeps and checks")]
struct Cli {
    /// Run a validation suite (gradients, projections, de-tightness, covariance) and exit.
    #[arg(long, value_name = "SUITE")]
    validate: Option<Suite>,
    /// Scenario file, or one of the presets `desk` and `full`.
    #[arg(long, default_value = "desk", global = true)]
    scenario: String,
    #[arg(long, default_value_t = 1, global = true)]
    seed: u64,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize every architecture over a grid and write one CSV per architecture.
    Sweep {
        /// `variable=v1,v2,...` with variable one of n, m, snr, split.
        #[arg(long)]
        grid: SweepSpec,
        /// Comma-separated architectures; defaults to all.
        #[arg(long, value_delimiter = ',')]
        arch: Vec<Architecture>,
        #[arg(long, default_value_t = 5)]
        restarts: usize,
        /// Also estimate the SE of each design by Monte-Carlo over this many blocks.
        #[arg(long)]
        mc_blocks: Option<usize>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Rerun a sweep from a persisted manifest.
    Rerun { manifest: PathBuf },
}

fn scenario(name: &str) -> ris_star::error::Result<ScenarioConfig> {
    match name {
        "desk" => Ok(presets::desk()),
        "full" => Ok(presets::full_scale()),
        path => load_scenario_file(Path::new(path)),
    }
}

fn sweep(manifest: &ExperimentManifest) -> ris_star::error::Result<()> {
    let cfg = scenario(&manifest.scenario)?;
    let rows = run_sweep(&cfg, manifest)?;
    for r in &rows {
        let mc = r.mc_sum_se.map(|v| format!("  mc {v:.4}")).unwrap_or_default();
        println!("{:<13} {:>8}  de {:.4}{mc}", r.architecture, r.value, r.de_sum_se);
    }
    for p in persist_sweep(&manifest.output, &cfg, manifest, &rows)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn run(cli: Cli) -> ris_star::error::Result<bool> {
    if let Some(n) = cli.workers {
        // fails only if a global pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    if let Some(suite) = cli.validate {
        let cfg = scenario(&cli.scenario)?;
        let checks = run_validation(suite, &cfg, cli.seed)?;
        for c in &checks {
            println!("{c}");
        }
        return Ok(checks.iter().all(|c| c.passed()));
    }
    match cli.command {
        Some(Command::Sweep {
            grid,
            arch,
            restarts,
            mc_blocks,
            out,
        }) => {
            let manifest = ExperimentManifest {
                scenario: cli.scenario,
                sweep: grid,
                architectures: if arch.is_empty() { Architecture::ALL.to_vec() } else { arch },
                seed: cli.seed,
                restarts,
                mc_blocks,
                output: out,
            };
            sweep(&manifest)?;
        }
        Some(Command::Rerun { manifest }) => {
            let m = ExperimentManifest::from_toml(&std::fs::read_to_string(manifest)?)?;
            sweep(&m)?;
        }
        None => {
            eprintln!("nothing to do; pass a subcommand or --validate");
            return Ok(false);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
