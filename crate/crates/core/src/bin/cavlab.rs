//! Command-line front end: reproducible synthesis, conversion, locking,
//! analysis and fitting runs.
//!
//! Exit codes: 0 success, 1 validation error (bad arguments, config or
//! input files), 2 numerical failure (fit divergence, lock instability).
//! Failures print a single machine-readable line to stderr:
//! `error: kind=<validation|numerical> message="..."`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cavlab::config::{parse_config, RunConfig};
use cavlab::pipeline::{
    cmd_analyze, cmd_convert, cmd_fit_finesse, cmd_fit_polariton, cmd_lock, cmd_report,
    cmd_synth, CommandOutput, RunContext,
};
use cavlab::Result;

#[derive(Parser)]
#[command(
    name = "cavlab",
    version,
    about = "Cavity-interferometry vibration simulator and analysis pipeline"
)]
struct Cli {
    /// Run configuration file; defaults apply for anything omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for all artifacts.
    #[arg(long, global = true, default_value = "cavlab-out")]
    out: PathBuf,

    /// Worker threads for multi-trial fits.
    #[arg(long, global = true, default_value_t = 1)]
    parallel: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize the cold-plate disturbance and differential cavity noise.
    Synth,
    /// Convert a trace between transmission and displacement (direction from
    /// the input's unit tag).
    Convert {
        #[arg(long)]
        input: PathBuf,
    },
    /// Run the active stabilization loop against a disturbance trace
    /// (synthesized from the config when --input is omitted).
    Lock {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Compute rms, peak-to-peak, rms-vs-bandwidth, spectrum and histogram
    /// of a displacement trace.
    Analyze {
        #[arg(long)]
        input: PathBuf,
    },
    /// Fit the transmission fringe to recover finesse.
    FitFinesse {
        /// Fringe scan CSV (position_m,transmission); synthesized from the
        /// config geometry when omitted.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Repeat the fit under seeded noise this many times.
        #[arg(long, default_value_t = 1)]
        trials: usize,
    },
    /// Fit the polariton avoided crossing to recover the coupling and the
    /// piezo calibration.
    FitPolariton {
        /// Observations CSV (voltage_v,energy_mev,branch); synthesized from
        /// the config model when omitted.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Repeat the fit under seeded noise this many times.
        #[arg(long, default_value_t = 1)]
        trials: usize,
    },
    /// Full pipeline: synth, lock, analyze both traces, consolidate the
    /// headline numbers.
    Report,
}

fn load_config(path: Option<&PathBuf>) -> Result<RunConfig> {
    match path {
        Some(p) => parse_config(&std::fs::read_to_string(p)?),
        None => Ok(RunConfig::default()),
    }
}

fn run(cli: Cli) -> Result<CommandOutput> {
    let config = load_config(cli.config.as_ref())?;
    let ctx = RunContext::new(config, cli.seed, cli.out, cli.parallel);
    match &cli.command {
        Command::Synth => cmd_synth(&ctx),
        Command::Convert { input } => cmd_convert(&ctx, input),
        Command::Lock { input } => cmd_lock(&ctx, input.as_deref()),
        Command::Analyze { input } => cmd_analyze(&ctx, input),
        Command::FitFinesse { input, trials } => {
            cmd_fit_finesse(&ctx, input.as_deref(), (*trials).max(1))
        }
        Command::FitPolariton { input, trials } => {
            cmd_fit_polariton(&ctx, input.as_deref(), (*trials).max(1))
        }
        Command::Report => cmd_report(&ctx),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version land here too and must stay exit 0.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    match run(cli) {
        Ok(output) => {
            for (key, value) in &output.metrics {
                println!("{key} = {value}");
            }
            for file in &output.files {
                println!("wrote: {}", file.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!(
                "error: kind={} message=\"{}\"",
                e.kind().as_str(),
                e.to_string().replace('"', "'")
            );
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
