//! Command-line frontend: config ingestion, dispatch to the experiment
//! runners, CSV or JSON-lines output with a JSON run manifest.

mod config;
mod jobs;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fslt_core::model::ParamsFile;
use serde::{Deserialize, Serialize};

pub use config::{load_params, ParamOverrides};
pub use jobs::{
    BlockadeOpts, CriticalOpts, DisorderOpts, EliminationOpts, HeatmapOpts, Job, Outcome, RadiusOpts, SpectrumOpts,
    TransferOpts, ZeroModeOpts,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("numerical error: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<fslt_core::Error> for CliError {
    fn from(e: fslt_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    JsonLines,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::JsonLines => "jsonl",
        }
    }
}

#[derive(Args, Clone, Debug)]
pub struct Common {
    /// Parameter file with every model key, or `defaults`
    #[arg(long, value_name = "PATH|defaults", default_value = "defaults")]
    pub config: String,
    /// Output directory
    #[arg(long, value_name = "DIR", env = "FSLT_OUT_DIR", default_value = ".")]
    pub out: PathBuf,
    /// Encoding of the data file
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads for sweeps; 0 uses every available core
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    #[command(flatten)]
    pub params: ParamOverrides,
}

#[derive(Parser, Debug)]
#[command(name = "fslt", version, about = "Fock-state-lattice photon transducer simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Instantaneous chain spectrum along the pump
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        opts: SpectrumOpts,
    },
    /// Closed-form zero mode at a coupling ratio
    ZeroMode {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        opts: ZeroModeOpts,
    },
    /// Unitary pump cycle from |0, N, G>
    Transfer {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        opts: TransferOpts,
    },
    /// Pump cycle under the master equation with cavity and superatom losses
    Dissipative {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        opts: TransferOpts,
    },
    /// Monte Carlo over envelope errors
    Disorder {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        opts: DisorderOpts,
    },
    /// Final last-site population over a grid of N and T
    Heatmap {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        opts: HeatmapOpts,
    },
    /// Fidelity scan over T and its local maxima
    CriticalT {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        opts: CriticalOpts,
    },
    /// Four-level single-atom model against its effective form
    ValidateElimination {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        opts: EliminationOpts,
    },
    /// Two blockaded atoms against one
    ValidateBlockade {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        opts: BlockadeOpts,
    },
    /// Collective blockade radius in µm
    BlockadeRadius {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        opts: RadiusOpts,
    },
    /// Re-run a recorded manifest
    Replay {
        /// Manifest written by an earlier run
        #[arg(long, value_name = "PATH")]
        manifest: PathBuf,
        /// Output directory
        #[arg(long, value_name = "DIR", env = "FSLT_OUT_DIR", default_value = ".")]
        out: PathBuf,
        /// Worker threads for sweeps; 0 uses every available core
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
}

/// Everything needed to reproduce a run, plus when and how long it took.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub timestamp: String,
    pub wall_time_s: f64,
    pub seed: Option<u64>,
    pub workers: usize,
    pub format: Format,
    pub data_file: String,
    pub params: ParamsFile,
    pub job: Job,
}

impl Command {
    fn into_job(self) -> Result<(Common, Job), Box<Command>> {
        Ok(match self {
            Command::Spectrum { common, opts } => (common, Job::Spectrum(opts)),
            Command::ZeroMode { common, opts } => (common, Job::ZeroMode(opts)),
            Command::Transfer { common, opts } => (common, Job::Transfer(opts)),
            Command::Dissipative { common, opts } => (common, Job::Dissipative(opts)),
            Command::Disorder { common, opts } => (common, Job::Disorder(opts)),
            Command::Heatmap { common, opts } => (common, Job::Heatmap(opts)),
            Command::CriticalT { common, opts } => (common, Job::CriticalT(opts)),
            Command::ValidateElimination { common, opts } => (common, Job::ValidateElimination(opts)),
            Command::ValidateBlockade { common, opts } => (common, Job::ValidateBlockade(opts)),
            Command::BlockadeRadius { common, opts } => (common, Job::BlockadeRadius(opts)),
            replay @ Command::Replay { .. } => return Err(Box::new(replay)),
        })
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Run `job` and write its data file and manifest into `out`.
pub fn execute(
    job: &Job,
    params: &ParamsFile,
    format: Format,
    workers: usize,
    out: &Path,
) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let outcome = job.run(params, workers)?;
    let wall_time_s = start.elapsed().as_secs_f64();

    fs::create_dir_all(out).map_err(|e| io_error(out, e))?;
    let data_file = format!("{}.{}", job.name(), format.extension());
    let body = match format {
        Format::Csv => outcome.table.to_csv(),
        Format::JsonLines => outcome.table.to_json_lines(),
    };
    let data_path = out.join(&data_file);
    fs::write(&data_path, body).map_err(|e| io_error(&data_path, e))?;

    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
        wall_time_s,
        seed: outcome.seed,
        workers,
        format,
        data_file,
        params: params.clone(),
        job: job.clone(),
    };
    let manifest_path = out.join(format!("{}.manifest.json", job.name()));
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&manifest_path, text + "\n").map_err(|e| io_error(&manifest_path, e))?;
    Ok(outcome)
}

fn read_manifest(path: &Path) -> Result<Manifest, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn run(command: Command) -> Result<Outcome, CliError> {
    match command.into_job() {
        Ok((common, job)) => {
            let mut params = load_params(&common.config)?;
            common.params.apply(&mut params);
            params.to_params()?;
            execute(&job, &params, common.format, common.workers, &common.out)
        }
        Err(replay) => match *replay {
            Command::Replay { manifest, out, workers } => {
                let m = read_manifest(&manifest)?;
                execute(&m.job, &m.params, m.format, workers, &out)
            }
            _ => unreachable!("only replay has no job"),
        },
    }
}

/// Parse `argv` (program name first), run, print a one-line summary, and
/// return the process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli.command) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
