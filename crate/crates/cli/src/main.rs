use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use weakmeas_cli::{output, CliResult, ExperimentConfig};

/// Weak-measurement experiments on discretized Hilbert spaces.
#[derive(Parser)]
#[command(name = "weakmeas", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run { config: PathBuf },
    /// Write plot-ready tables from a run record.
    EmitPlots {
        record: PathBuf,
        /// Output directory (defaults to the record's directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config file without running it.
    Validate { config: PathBuf },
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run { config } => {
            let (record, dir) = weakmeas_cli::run_config(&config)?;
            println!("{} finished in {:.2}s, output in {}", record.experiment.name(), record.duration_seconds, dir.display());
        }
        Command::EmitPlots { record, out } => {
            let rec = output::load_record(&record)?;
            let dir = out.unwrap_or_else(|| record.parent().map(PathBuf::from).unwrap_or_default());
            for path in output::emit_plots(&rec, &dir)? {
                println!("{}", path.display());
            }
        }
        Command::Validate { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            println!("{}: ok ({})", config.display(), cfg.experiment.name());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
