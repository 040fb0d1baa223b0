use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wavemix::cli::{
    run_catscan, run_darkstate_report, run_sweep, run_timeevo, DeltaOverride, Exit, Overrides, RunConfig, Table,
    Truncation,
};

#[derive(Parser)]
#[command(
    name = "wavemix",
    version,
    about = "Three-level atom in a driven cavity: sweeps, time series and reports"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Steady-state observables over a 1D or 2D parameter grid.
    Sweep(Common),
    /// Master-equation time series from a basis state.
    Timeevo(Common),
    /// Closed-form dark-state ladder for the configured parameters.
    Darkstates(Common),
    /// Strong-drive cat state against closed-system evolution.
    Catscan(Common),
}

#[derive(Args)]
struct Common {
    /// Configuration file (`key = JSON value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV; stdout when neither this nor `out_path` is set.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long)]
    workers: Option<usize>,
    /// Fock truncation, an integer or `auto`.
    #[arg(long = "n-max")]
    n_max: Option<Truncation>,
    /// Cavity detuning Δ, a number or `auto` (Δ₁₂ + Δ₂₃).
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<DeltaOverride>,
}

impl Common {
    fn load(&self) -> Result<RunConfig, String> {
        let cfg = match &self.config {
            Some(path) => RunConfig::from_path(path).map_err(|e| e.to_string())?,
            None => RunConfig::default(),
        };
        let overrides = Overrides {
            out: self.out.clone(),
            workers: self.workers,
            n_max: self.n_max,
            delta: self.delta,
        };
        Ok(overrides.apply(cfg))
    }
}

fn emit(table: &Table, out: Option<&Path>) -> Result<(), String> {
    match out {
        Some(path) => table
            .write(path)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => match std::io::stdout().lock().write_all(table.to_csv().as_bytes()) {
            // A closed pipe (`wavemix ... | head`) is not an error.
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(format!("cannot write to stdout: {e}")),
            _ => Ok(()),
        },
    }
}

fn run(command: Command) -> Result<Exit, String> {
    match command {
        Command::Sweep(c) => {
            let cfg = c.load()?;
            let result = run_sweep(&cfg).map_err(|e| e.to_string())?;
            emit(&result.table, cfg.out_path.as_deref())?;
            if result.failed_points > 0 {
                eprintln!(
                    "wavemix: {} of {} grid points failed",
                    result.failed_points,
                    result.rows().len()
                );
                return Ok(Exit::PartialFailure);
            }
            Ok(Exit::Success)
        }
        Command::Timeevo(c) => {
            let cfg = c.load()?;
            let out = run_timeevo(&cfg).map_err(|e| e.to_string())?;
            emit(&out.table, cfg.out_path.as_deref())?;
            if let Some(failure) = out.failure {
                eprintln!("wavemix: integration stopped: {failure}");
                return Ok(Exit::PartialFailure);
            }
            Ok(Exit::Success)
        }
        Command::Darkstates(c) => {
            let cfg = c.load()?;
            let n_max = match cfg.truncation {
                Truncation::Fixed(n) => n,
                Truncation::Auto => wavemix::solvers::TRUNCATION_START,
            };
            let mut metadata = cfg.resolved_lines();
            metadata.pop();
            let table = run_darkstate_report(&cfg.params, n_max, metadata).map_err(|e| e.to_string())?;
            emit(&table, cfg.out_path.as_deref())?;
            Ok(Exit::Success)
        }
        Command::Catscan(c) => {
            let cfg = c.load()?;
            cfg.validate_catscan().map_err(|e| e.to_string())?;
            let table = run_catscan(&cfg).map_err(|e| e.to_string())?;
            emit(&table, cfg.out_path.as_deref())?;
            Ok(Exit::Success)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let help = !e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if help { Exit::Success } else { Exit::ConfigError } as u8);
        }
    };
    let code = match run(cli.command) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("wavemix: {message}");
            Exit::ConfigError
        }
    };
    ExitCode::from(code as u8)
}
