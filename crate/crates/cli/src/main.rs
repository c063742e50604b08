use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use deepcorr_cli::{cmd_evaluate, cmd_slice, cmd_sweep, cmd_train, Result, Run, OUTPUT_ROOT_ENV};

/// Train, evaluate and inspect decomposition and correction policies.
///
/// Relative output directories resolve against $DEEPCORR_OUTPUT_ROOT, or
/// the current directory when it is unset.
#[derive(Parser)]
#[command(name = "deepcorr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the configured method and write a checkpoint, log and manifest.
    Train {
        config: PathBuf,
    },
    /// Evaluate a checkpoint (or a baseline) and write report CSVs.
    Evaluate {
        config: PathBuf,
        /// Defaults to the run's own checkpoint.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Write the greedy action over ego position x pedestrian position.
    Slice {
        config: PathBuf,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Grid points along ego x and pedestrian y.
        #[arg(long, num_args = 2, value_names = ["X", "Y"])]
        resolution: Option<Vec<usize>>,
    },
    /// Train and evaluate every seed x exploration schedule pair.
    Sweep {
        config: PathBuf,
    },
}

fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_ENV).map_or_else(|| PathBuf::from("."), PathBuf::from)
}

fn run(cli: Cli) -> Result<()> {
    let root = output_root();
    let load = |path: &Path| Run::load(path, &root);
    match cli.command {
        Command::Train { config } => {
            let run = load(&config)?;
            let summary = cmd_train(&run)?;
            println!("trained {} env steps -> {}", summary.env_steps, summary.checkpoint.display());
        }
        Command::Evaluate { config, checkpoint } => {
            let run = load(&config)?;
            let r = cmd_evaluate(&run, checkpoint.as_deref())?;
            println!(
                "n_sims={} mean_return={:.4} std_error={:.4} crash={:.2}% success={:.2}% timeout={:.2}% time_to_cross={}",
                r.n_sims,
                r.mean_return,
                r.std_error,
                r.crash_pct,
                r.success_pct,
                r.timeout_pct,
                r.mean_time_to_cross.map_or("-".into(), |t| format!("{t:.2}s")),
            );
            println!("wrote {}", run.out_dir.join("eval_report.csv").display());
        }
        Command::Slice {
            config,
            checkpoint,
            resolution,
        } => {
            let run = load(&config)?;
            let points = resolution.map(|r| (r[0], r[1]));
            let grid = cmd_slice(&run, checkpoint.as_deref(), points)?;
            println!("{} grid points -> {}", grid.len(), run.out_dir.join("policy_slice.csv").display());
        }
        Command::Sweep { config } => {
            let run = load(&config)?;
            let rows = cmd_sweep(&run)?;
            println!("{} runs -> {}", rows.len(), run.out_dir.join("sweep.csv").display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
