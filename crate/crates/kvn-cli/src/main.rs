//! `kvn` command-line interface.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::ExperimentConfig;
use kvn_core::KvnError;

#[derive(Parser)]
#[command(name = "kvn", about = "Generator estimation, spectra, propagation, and circuits for ODE benchmark systems")]
struct Cli {
    /// JSON experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Matrix archive path (defaults to <outputs>/<system>.kvngen).
    #[arg(long, global = true)]
    archive: Option<PathBuf>,

    /// BLAS thread cap (falls back to KVN_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble data, estimate the generator matrices, and write the archive.
    Estimate,
    /// Compute the whitened KvN spectrum with residual scores from an archive.
    Spectrum,
    /// Monte Carlo convergence study against the analytic oscillator matrices.
    Converge,
    /// Propagate the configured initial wavefunction and export snapshots.
    Propagate,
    /// Compile the block-structured propagator into quantum gates and verify.
    Circuit,
    /// Run the structural property suite on an archive.
    Verify,
}

fn exit_code_for(err: &KvnError) -> u8 {
    match err {
        KvnError::Config(_)
        | KvnError::Parse { .. }
        | KvnError::VersionMismatch { .. }
        | KvnError::Io(_)
        | KvnError::Json(_)
        | KvnError::EmptyQuadrature { .. }
        | KvnError::DegenerateDomain { .. }
        | KvnError::QubitOutOfRange { .. } => 2,
        KvnError::StructureNotFound { .. } => 3,
        KvnError::DomainEscape { .. }
        | KvnError::NonFinite { .. }
        | KvnError::RankZero
        | KvnError::RankDeficient { .. }
        | KvnError::UndefinedScore { .. }
        | KvnError::NonConvergence { .. }
        | KvnError::StructureViolation(_)
        | KvnError::Linalg(_) => 4,
    }
}

fn load_config(cli: &Cli) -> kvn_core::Result<ExperimentConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| KvnError::Config("--config is required for this command".into()))?;
    ExperimentConfig::load(path)
}

fn resolve_archive(cli: &Cli, cfg: &ExperimentConfig) -> PathBuf {
    cli.archive
        .clone()
        .unwrap_or_else(|| commands::archive_path(cfg))
}

fn run(cli: &Cli) -> kvn_core::Result<()> {
    match &cli.command {
        Command::Estimate => {
            let cfg = load_config(cli)?;
            commands::cmd_estimate(&cfg)?;
            Ok(())
        }
        Command::Spectrum => {
            let cfg = load_config(cli)?;
            let archive = resolve_archive(cli, &cfg);
            commands::cmd_spectrum(&cfg, &archive)
        }
        Command::Converge => {
            let cfg = load_config(cli)?;
            commands::cmd_converge(&cfg)
        }
        Command::Propagate => {
            let cfg = load_config(cli)?;
            let archive = resolve_archive(cli, &cfg);
            commands::cmd_propagate(&cfg, &archive)
        }
        Command::Circuit => {
            let cfg = load_config(cli)?;
            let archive = resolve_archive(cli, &cfg);
            commands::cmd_circuit(&cfg, &archive)
        }
        Command::Verify => {
            let archive = match (&cli.archive, &cli.config) {
                (Some(a), _) => a.clone(),
                (None, Some(cfg_path)) => {
                    let cfg = ExperimentConfig::load(cfg_path)?;
                    commands::archive_path(&cfg)
                }
                (None, None) => {
                    return Err(KvnError::Config(
                        "verify needs --archive or --config".into(),
                    ))
                }
            };
            commands::cmd_verify(&archive)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    // Thread cap must be in the environment before the BLAS runtime starts.
    let threads = cli
        .threads
        .or_else(|| std::env::var("KVN_THREADS").ok().and_then(|v| v.parse().ok()));
    if let Some(t) = threads {
        std::env::set_var("OPENBLAS_NUM_THREADS", t.to_string());
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
