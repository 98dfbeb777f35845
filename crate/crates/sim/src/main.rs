use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bilattice::table::sidecar;
use bilattice::{run_sweep, write_table, Engine, Format, RunConfig, SweepSpec};
use clap::{Args, Parser, Subcommand};

/// Photonic spectra of one-dimensional bichromatic atomic lattices.
#[derive(Parser)]
#[command(name = "bilattice", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Polariton band structure over the quasi-momentum grid.
    Bands(RunArgs),
    /// Photonic gaps (numeric and closed form) for each intracell distance.
    Gaps(RunArgs),
    /// Probe transmission, reflection and absorption of the finite lattice.
    Transmit(RunArgs),
    /// Output intensity of the lattice inside a driven cavity.
    Cavity(RunArgs),
    /// Runs the engine named by the `engine` key of the config.
    Scan(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: Format,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Abort on the first failed grid cell instead of writing NaN rows.
    #[arg(long)]
    fail_fast: bool,
}

/// Exit status for unreadable or invalid configuration and output errors;
/// aborted sweeps use [`bilattice::SweepError::exit_code`].
const CONFIG_ERROR: u8 = 1;
/// Exit status when some grid cells failed but the table was still written.
const NUMERIC_ERROR: u8 = 2;

fn run(requested: Option<Engine>, args: RunArgs) -> Result<(), (u8, String)> {
    let config_err = |e: &dyn std::fmt::Display| (CONFIG_ERROR, e.to_string());
    let config = RunConfig::from_path(&args.config).map_err(|e| config_err(&e))?;
    let engine = match (requested, config.engine) {
        (Some(r), Some(c)) if r != c => {
            return Err(config_err(&format!(
                "config declares engine = {} but the `{}` subcommand was used",
                c.name(),
                r.name()
            )))
        }
        (Some(r), _) => r,
        (None, Some(c)) => c,
        (None, None) => {
            return Err(config_err(&"`scan` needs an `engine` key in the config"));
        }
    };
    let spec = SweepSpec {
        engine,
        config,
        workers: args.workers,
        fail_fast: args.fail_fast,
    };
    let output = run_sweep(&spec).map_err(|e| {
        let code = e.exit_code() as u8;
        (code, e.to_string())
    })?;
    write_table(&output.table, args.out.as_deref(), args.format).map_err(|e| config_err(&e))?;
    if !output.failures.is_empty() {
        write_error_log(args.out.as_deref(), &output.error_log()).map_err(|e| config_err(&e))?;
        return Err((
            NUMERIC_ERROR,
            format!("{} parameter cells failed", output.failures.len()),
        ));
    }
    Ok(())
}

fn write_error_log(out: Option<&Path>, log: &str) -> std::io::Result<()> {
    match out {
        Some(p) => std::fs::write(sidecar(p, ".errors.log"), log),
        None => {
            eprint!("{log}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (engine, args) = match cli.command {
        Command::Bands(a) => (Some(Engine::Bands), a),
        Command::Gaps(a) => (Some(Engine::Gaps), a),
        Command::Transmit(a) => (Some(Engine::Transmit), a),
        Command::Cavity(a) => (Some(Engine::Cavity), a),
        Command::Scan(a) => (None, a),
    };
    match run(engine, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, message)) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
