//! `infodist` command-line front end.
//!
//! Every subcommand reads a file, runs one library workflow and writes a
//! document as JSON, CSV or a fixed-width table. Exit status: 0 on success,
//! 1 when `verify` finds a failing check, 2 on usage or validation errors.

pub mod json;

mod commands;
mod input;

use std::fmt::Write as _;
use std::io::Read;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub use commands::{
    assess_document, bound_document, expand_document, parse_dims, simulate_document,
    verify_document, AssessDocument, BoundDocument, ExpandDocument, SimulateDocument,
    VerifyDocument,
};
pub use input::LikelihoodDocument;

pub const TOOL_VERSION: &str = concat!("infodist ", env!("CARGO_PKG_VERSION"));

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 0x5EED_1DEA;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] infodist::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Parser)]
#[command(name = "infodist", version, about = "Disturbance spectra and information bounds of minimally disturbing measurements")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output file (standard output when omitted).
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Expand each outcome into shift-unitary coefficients C_k and the shift distribution.
    Expand {
        /// Likelihood document (`-` for standard input).
        #[arg(long)]
        input: PathBuf,
    },
    /// Information bound versus the actual maximal posterior, per outcome.
    Bound {
        #[arg(long)]
        input: PathBuf,
    },
    /// Sample conjugate-basis shift counts from a complete measurement model.
    Simulate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        shots: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Leak assessment from observed shift counts (JSON or `label,k,count` CSV).
    Assess {
        #[arg(long)]
        input: PathBuf,
        /// Dimension of CSV input; inferred from the largest shift otherwise.
        #[arg(long)]
        dims: Option<String>,
    },
    /// Brute-force verification over seeded random ensembles.
    Verify {
        /// Dimensions, e.g. `2-8` or `2,3,5,16`.
        #[arg(long, default_value = "2-8")]
        dims: String,
        /// Instances per dimension.
        #[arg(long, default_value_t = 1000)]
        count: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = infodist::oracle::DEFAULT_TOLERANCE)]
        tolerance: f64,
        /// random_likelihood, random_complete_model or real_nonnegative_spectrum.
        #[arg(long, default_value = "random_likelihood")]
        kind: String,
    },
}

/// Rendered output of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub exit_code: i32,
}

pub trait Render {
    fn json(&self) -> String;
    fn csv(&self) -> String;
    fn table(&self) -> String;

    fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.json(),
            Format::Csv => self.csv(),
            Format::Table => self.table(),
        }
    }
}

pub fn read_input(path: &Path) -> Result<Vec<u8>, CliError> {
    let io = |source| CliError::Io {
        path: path.to_owned(),
        source,
    };
    if path == Path::new("-") {
        let mut buf = Vec::new();
        std::io::stdin().read_to_end(&mut buf).map_err(io)?;
        Ok(buf)
    } else {
        std::fs::read(path).map_err(io)
    }
}

fn utf8(bytes: &[u8]) -> Result<&str, CliError> {
    std::str::from_utf8(bytes)
        .map_err(|e| CliError::Core(infodist::Error::Malformed(format!("input is not UTF-8: {e}"))))
}

/// Run a parsed command line and return the rendered document.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let (text, exit_code) = match &cli.command {
        Command::Expand { input } => {
            let bytes = read_input(input)?;
            (expand_document(utf8(&bytes)?)?.render(cli.format), 0)
        }
        Command::Bound { input } => {
            let bytes = read_input(input)?;
            (bound_document(utf8(&bytes)?)?.render(cli.format), 0)
        }
        Command::Simulate { input, shots, seed } => {
            let bytes = read_input(input)?;
            (simulate_document(utf8(&bytes)?, *shots, *seed)?.render(cli.format), 0)
        }
        Command::Assess { input, dims } => {
            let bytes = read_input(input)?;
            let dimension = match dims {
                None => None,
                Some(spec) => match parse_dims(spec)?.as_slice() {
                    [d] => Some(*d),
                    _ => return Err(CliError::Usage("assess takes a single --dims value".into())),
                },
            };
            (assess_document(&bytes, dimension)?.render(cli.format), 0)
        }
        Command::Verify {
            dims,
            count,
            seed,
            tolerance,
            kind,
        } => {
            let kind = kind.parse()?;
            let doc = verify_document(&parse_dims(dims)?, *count, *seed, *tolerance, kind)?;
            let code = if doc.report.passed() { 0 } else { 1 };
            (doc.render(cli.format), code)
        }
    };
    Ok(Outcome { text, exit_code })
}

/// Run and write the output where `--output` says; returns the process exit code.
pub fn run_and_write(cli: &Cli) -> i32 {
    let result = run(cli).and_then(|outcome| {
        match &cli.output {
            Some(path) => std::fs::write(path, &outcome.text).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?,
            None => print!("{}", outcome.text),
        }
        Ok(outcome.exit_code)
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub(crate) fn table_row(out: &mut String, cells: &[String], widths: &[usize]) {
    for (i, (cell, w)) in cells.iter().zip(widths).enumerate() {
        if i == 0 {
            let _ = write!(out, "{cell:<w$}");
        } else {
            let _ = write!(out, " {cell:>w$}");
        }
    }
    out.push('\n');
}
