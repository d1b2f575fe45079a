//! Command-line driver: instance generation, offline and streaming runs,
//! exact reference values and benchmark tables.

pub mod commands;
pub mod input;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use fairconsensus::streaming::{Consistency, StreamMode};
use fairconsensus::{Backend, Error, Preset, Result};

#[derive(Debug, Parser)]
#[command(name = "fcc", version, about = "Fair consensus clustering")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic instance as a clustering file and/or a stream.
    Gen(GenArgs),
    /// Solve an instance offline or in one streaming pass.
    Run(RunArgs),
    /// Exact optimum by enumeration (small instances only).
    Oracle(OracleArgs),
    /// Compare algorithms on generated instances; writes CSV.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    /// Color ratio, e.g. `1:1` or `1:2:3`.
    #[arg(long, default_value = "1:1")]
    pub ratio: String,
    /// Number of planted fair centers.
    #[arg(long, default_value_t = 1)]
    pub centers: usize,
    /// Fraction of points moved in each input.
    #[arg(long, default_value_t = 0.2)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Clustering file to write.
    #[arg(long)]
    pub fcc: Option<PathBuf>,
    /// Stream file to write.
    #[arg(long)]
    pub pcs: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModeArg::Contiguous)]
    pub stream_mode: ModeArg,
    /// Summary destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Contiguous,
    General,
}

impl From<ModeArg> for StreamMode {
    fn from(m: ModeArg) -> StreamMode {
        match m {
            ModeArg::Contiguous => StreamMode::Contiguous,
            ModeArg::General => StreamMode::General,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RunMode {
    Offline,
    Stream,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConsistencyArg {
    Ignore,
    Warn,
    Reject,
}

impl From<ConsistencyArg> for Consistency {
    fn from(c: ConsistencyArg) -> Consistency {
        match c {
            ConsistencyArg::Ignore => Consistency::Ignore,
            ConsistencyArg::Warn => Consistency::Warn,
            ConsistencyArg::Reject => Consistency::Reject,
        }
    }
}

/// Constant set for the streaming k-median.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Constants {
    /// Practical defaults for small instances.
    Desk,
    /// Constants of the worst-case analysis.
    Analysis,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Clustering file or stream file.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = RunMode::Offline)]
    pub mode: RunMode,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value = "repair")]
    pub backend: Backend,
    /// Evaluation accuracy (1-median) or coreset accuracy (k-median).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Grid separation factor.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Grid rate.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Candidate-sample multiplier for the streaming 1-median.
    #[arg(long)]
    pub g: Option<f64>,
    /// Candidate-sample size, overriding `--g`.
    #[arg(long)]
    pub sample1: Option<usize>,
    #[arg(long)]
    pub coreset_cap: Option<usize>,
    #[arg(long, value_enum, default_value_t = Constants::Desk)]
    pub constants: Constants,
    /// Watch every clustering and never reduce.
    #[arg(long)]
    pub exhaustive: bool,
    #[arg(long, value_enum, default_value_t = ConsistencyArg::Warn)]
    pub consistency: ConsistencyArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Echo a named constant preset and its guarantees in the report.
    #[arg(long)]
    pub preset: Option<Preset>,
    /// Re-evaluate the answer against the full input.
    #[arg(long)]
    pub verify: bool,
    /// Include wall time in the report.
    #[arg(long)]
    pub timing: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long)]
    pub timing: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    #[arg(long, default_value_t = 30)]
    pub m: usize,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value = "1:1")]
    pub ratio: String,
    #[arg(long, default_value_t = 2)]
    pub centers: usize,
    #[arg(long, default_value_t = 0.2)]
    pub noise: f64,
    #[arg(long, default_value_t = 5)]
    pub instances: usize,
    #[arg(long, default_value = "repair")]
    pub backend: Backend,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fill the millis column.
    #[arg(long)]
    pub timing: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs the CLI and returns the process exit code. Failures print an error
/// object on stdout and return 1.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            println!("{}", report::error_json(&e));
            1
        }
    }
}

pub fn execute(cmd: &Command) -> Result<()> {
    match cmd {
        Command::Gen(a) => commands::gen(a),
        Command::Run(a) => commands::run(a),
        Command::Oracle(a) => commands::oracle(a),
        Command::Bench(a) => commands::bench(a),
    }
}

/// Writes `text` to `out`, or stdout when absent.
pub(crate) fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

pub(crate) fn to_json<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    text.push('\n');
    Ok(text)
}

pub(crate) fn parse_ratio(s: &str) -> Result<Vec<u32>> {
    s.split(':')
        .map(|p| p.trim().parse::<u32>())
        .collect::<std::result::Result<Vec<u32>, _>>()
        .map_err(|_| Error::Argument(format!("ratio {s:?} must be colon-separated integers")))
}
