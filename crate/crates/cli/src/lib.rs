//! Command-line front end for `mflab-core`: model files, presets, analyses
//! and reports.

pub mod commands;
pub mod model_file;
pub mod presets;
pub mod report;

use clap::{Parser, ValueEnum};
use std::path::PathBuf;

/// Depth to which every loaded model's image is checked to be the
/// one-step shift given by its image adjacency.
pub const IMAGE_CHECK_DEPTH: usize = 16;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("image is not the shift of finite type given by its adjacency; shortest unrealized word: {witness}")]
    NotSft { witness: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::NotSft { .. } => 3,
        }
    }
}

impl From<mflab_core::Error> for CliError {
    fn from(e: mflab_core::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Irreducibility, aperiodicity, compatibility and the image check.
    Check,
    /// Strong and reversed lumpability and a Markov order probe.
    Lump,
    /// Fibre mixing verdict and sub-positivity index.
    Mix,
    /// Conditionals along a word with variation bounds and a decay fit.
    Gfun,
    /// Search for continuations with a persistent conditional gap.
    Badconfig,
    /// The fibre-averaged conditional with convergence deltas.
    Gtilde,
    /// Conditional cylinder values across continuations of a point.
    Tjur,
    /// Monte Carlo estimate of a conditional against the exact value.
    Simulate,
    /// Writes the model in canonical model-file form.
    Export,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, Parser)]
#[command(name = "mflab", version, about = "Analyses of one-block factors of finite-state Markov chains")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// Model file (JSON).
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub model: Option<PathBuf>,
    /// Built-in model: furstenberg:<p>, xor:<p>, wl4, pos3.
    #[arg(long)]
    pub preset: Option<String>,
    /// Word length, search depth or probe depth, depending on the command.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Continuation length for variation and bad-configuration searches.
    #[arg(long)]
    pub ext: Option<usize>,
    /// Gap threshold.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Image word to analyse; sampled from the model when omitted.
    #[arg(long)]
    pub word: Option<String>,
    /// Domain word whose conditional probability `tjur` tracks.
    #[arg(long)]
    pub cylinder: Option<String>,
    /// Image continuation for `tjur`; repeat for several.
    #[arg(long = "cont")]
    pub continuations: Vec<String>,
    /// Sample paths for `simulate`.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
}

/// Runs one invocation and returns the rendered output.
pub fn run(args: &Args) -> Result<String, CliError> {
    let loaded = commands::load(args)?;
    let format = args.format.unwrap_or(if args.command == Command::Gfun { Format::Csv } else { Format::Json });
    if args.command == Command::Export {
        return match format {
            Format::Json => Ok(model_file::ModelFile::from_process(&loaded.process).to_json()),
            Format::Csv => Err(CliError::Input("`export` writes JSON only".into())),
        };
    }
    let report = commands::execute(args, &loaded)?;
    match format {
        Format::Json => Ok(report.to_json()),
        Format::Csv => report.to_csv(),
    }
}
