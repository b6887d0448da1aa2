//! Command-line front end: pattern generation, checking, simulation,
//! overhead benchmarks and pattern search.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

pub mod bench;
pub mod check;
pub mod gen;
pub mod search;
pub mod simulate;

pub use simulate::{RunConfig, SimReport};

#[derive(Debug, Parser)]
#[command(name = "isaclab", version, about = "OFDM reference-signal pattern design and sensing ambiguity analysis")]
pub struct Cli {
    /// Worker threads for data-parallel stages.
    #[arg(long, global = true, env = "ISACLAB_WORKERS")]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a staggered comb pattern.
    Gen(gen::GenArgs),
    /// Run the matching design checker on a pattern file.
    Check(check::CheckArgs),
    /// Simulate a scene and report the delay-Doppler spectrum and its peaks.
    Simulate(simulate::SimulateArgs),
    /// Sensing overhead table.
    BenchOverhead(bench::BenchArgs),
    /// Search for minimal passing patterns.
    Search(search::SearchArgs),
}

/// Subcarrier spacing, FFT size and CP length.
#[derive(Debug, Clone, Args)]
pub struct NumerologyArgs {
    #[arg(long = "n", default_value_t = 256)]
    pub n: usize,
    /// CP length in samples (default N/16).
    #[arg(long = "n-cp")]
    pub n_cp: Option<usize>,
    #[arg(long = "scs-hz", default_value_t = 15e3)]
    pub scs_hz: f64,
}

impl NumerologyArgs {
    pub fn build(&self) -> Result<isaclab_core::patterns::OfdmNumerology> {
        Ok(isaclab_core::patterns::OfdmNumerology::new(self.n, self.n_cp.unwrap_or(self.n / 16), self.scs_hz)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    DelaySum,
    Fft2d,
    Iaa,
    Music,
}

/// Runs a command inside a thread pool of the requested size and returns
/// the process exit code.
pub fn run(cli: Cli) -> Result<i32> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cli.workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = builder.build().context("building worker pool")?;
    pool.install(|| match cli.command {
        Command::Gen(a) => gen::run(&a),
        Command::Check(a) => check::run(&a),
        Command::Simulate(a) => simulate::run(&a),
        Command::BenchOverhead(a) => bench::run(&a),
        Command::Search(a) => search::run(&a),
    })
}

/// Reads a pattern file, returning the pattern and its subcarrier hint.
pub fn read_pattern(path: &std::path::Path) -> Result<isaclab_core::patterns::PatternFile> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    isaclab_core::patterns::PatternFile::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

pub(crate) fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, format!("{text}\n")).with_context(|| format!("writing {}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}
