//! `levipulse` — classical and quantum simulation of pulsed trap-stiffness
//! modulation for levitated nanoparticles, plus the analysis tooling for the
//! resulting artifacts.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use levipulse_core::config::{load_config, RunKind};
use levipulse_core::pipeline;

const OUTPUT_DIR_ENV: &str = "LEVIPULSE_OUTPUT_DIR";

#[derive(Parser)]
#[command(name = "levipulse", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonRunArgs {
    /// Path to the run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides config and LEVIPULSE_OUTPUT_DIR).
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Cap the worker thread count (results are thread-count independent).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline selected by the config's `kind`.
    Run(CommonRunArgs),
    /// Run a calibration (the config must have kind = "calibrate").
    Calibrate(CommonRunArgs),
    /// Parse and validate a config, printing the resolved defaults.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
    },
    /// Analyze an existing artifact or external data file.
    Analyze {
        /// Input file (time trace, snapshots CSV, or variance series).
        #[arg(long)]
        input: PathBuf,
        /// Lorentzian PSD calibration of a (t_s, x_m) trace.
        #[arg(long)]
        psd: bool,
        /// Double-Gaussian bimodality fit of a snapshots CSV.
        #[arg(long)]
        bimodality: bool,
        /// Exponential relaxation fit of a (t_s, std_x_m) series.
        #[arg(long)]
        relaxation: bool,
        /// Snapshot index for --bimodality (default: last).
        #[arg(long)]
        snapshot: Option<usize>,
        /// Fixed kernel bandwidth in metres for --bimodality.
        #[arg(long)]
        bandwidth: Option<f64>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Convert artifacts into gnuplot-ready column files.
    PlotData {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
}

fn resolve_output_dir(
    cli_dir: Option<PathBuf>,
    config_dir: Option<PathBuf>,
    default_name: &str,
) -> PathBuf {
    if let Some(d) = cli_dir {
        return d;
    }
    if let Ok(d) = std::env::var(OUTPUT_DIR_ENV) {
        if !d.is_empty() {
            return PathBuf::from(d);
        }
    }
    config_dir.unwrap_or_else(|| PathBuf::from("runs").join(default_name))
}

fn run_command(args: CommonRunArgs, expect_kind: Option<RunKind>) -> anyhow::Result<()> {
    let config = load_config(&args.config)?;
    if let Some(kind) = expect_kind {
        if config.kind != kind {
            anyhow::bail!("config kind does not match this subcommand");
        }
    }
    let default_name = match config.kind {
        RunKind::Classical => "classical",
        RunKind::Quantum => "quantum",
        RunKind::Calibrate => "calibrate",
    };
    let out_dir = resolve_output_dir(args.output_dir, config.output_dir.clone(), default_name);
    let report = pipeline::run(&config, &out_dir, args.threads)?;
    println!("{}", serde_json::to_string_pretty(&report.summary)?);
    eprintln!(
        "wrote {} files to {}",
        report.files.len(),
        out_dir.display()
    );
    Ok(())
}

fn real_main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => run_command(args, None),
        Command::Calibrate(args) => run_command(args, Some(RunKind::Calibrate)),
        Command::ValidateConfig { config } => {
            let cfg = load_config(&config)?;
            println!("config OK (kind = {:?})", cfg.kind);
            if cfg.applied_defaults.is_empty() {
                println!("no defaults applied");
            } else {
                println!("applied defaults:");
                for d in &cfg.applied_defaults {
                    println!("  {d}");
                }
            }
            Ok(())
        }
        Command::Analyze {
            input,
            psd,
            bimodality,
            relaxation,
            snapshot,
            bandwidth,
            output_dir,
        } => {
            let out_dir = resolve_output_dir(output_dir, None, "analyze");
            let modes = [psd, bimodality, relaxation]
                .iter()
                .filter(|m| **m)
                .count();
            if modes != 1 {
                anyhow::bail!("choose exactly one of --psd, --bimodality, --relaxation");
            }
            let report = if psd {
                pipeline::analyze_psd(&input, &out_dir)?
            } else if bimodality {
                pipeline::analyze_bimodality(&input, snapshot, bandwidth, &out_dir)?
            } else {
                pipeline::analyze_relaxation(&input, &out_dir)?
            };
            println!("{}", serde_json::to_string_pretty(&report.summary)?);
            Ok(())
        }
        Command::PlotData { input, output_dir } => {
            let out_dir = resolve_output_dir(output_dir, None, "plot");
            let report = pipeline::plot_data(&input, &out_dir)?;
            eprintln!(
                "wrote {} files to {}",
                report.files.len(),
                out_dir.display()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err
                .downcast_ref::<levipulse_core::Error>()
                .map(|e| e.exit_code())
                .unwrap_or(2);
            ExitCode::from(code as u8)
        }
    }
}
