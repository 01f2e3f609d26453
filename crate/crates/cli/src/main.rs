//! `smx`: bound-state spectra and eigenfunctions of one-dimensional wells.
//!
//! Exit status: 0 on success, 1 when `selfcheck` finds a failure, 2 for
//! configuration errors, 3 for numerical failures (partial results are
//! still written), 4 for output errors.

// `!(a > b)` is used on purpose so NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod error;
mod jobs;
mod selfcheck;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::Format;
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "smx", version, about = "Bound states by half-line scattering matrices")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output directory; overrides `output.dir` in the config.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,

    /// Output formats; overrides `output.format` in the config.
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Both,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
            FormatArg::Both => Format::Both,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Bound-state energies in the configured window.
    Spectrum { config: PathBuf },
    /// Energies plus sampled eigenfunctions and their moments.
    Wavefn { config: PathBuf },
    /// Runs the fast invariant suite.
    Selfcheck,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let format = cli.format.map(Format::from);
    match cli.command {
        Command::Spectrum { config } => {
            let job = config::load(&config)?;
            jobs::run_spectrum(&job, &jobs::sink_for(&job, cli.output_dir.as_deref(), format))
        }
        Command::Wavefn { config } => {
            let job = config::load(&config)?;
            jobs::run_wavefunctions(&job, &jobs::sink_for(&job, cli.output_dir.as_deref(), format))
        }
        Command::Selfcheck => {
            let checks = selfcheck::run_all();
            let mut report = String::new();
            for c in &checks {
                let verdict = if c.pass { "PASS" } else { "FAIL" };
                report.push_str(&format!("{verdict} {}: {}\n", c.name, c.detail));
            }
            print!("{report}");
            if let Some(dir) = &cli.output_dir {
                let sink = jobs::Sink { dir: dir.clone(), format: Format::Both };
                sink.prepare()?;
                let path = dir.join("selfcheck.txt");
                fs::write(&path, &report).map_err(|e| CliError::io(path.display(), e))?;
            }
            let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Check(failed.join(", ")))
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SMX_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("smx: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
