//! `hdbsm`: decomposition, law verification, optical simulation and
//! classification from the command line.
//!
//! Exit codes: 0 success, 1 invariant or equivalence failure, 2 usage error.

mod commands;
mod report;
mod state_file;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::report::ReportDocument;

#[derive(Debug, Parser)]
#[command(name = "hdbsm", version, about = "High-dimensional Bell state measurement toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Expand ψ_ij ⊗ φ in the decomposition basis.
    Decompose {
        #[arg(short = 'd', value_parser = dimension_parser())]
        d: u64,
        #[arg(short = 'i')]
        i: usize,
        #[arg(short = 'j')]
        j: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Fit the index and phase laws, survey conventions and audit the printed tables.
    Verify {
        #[arg(short = 'd', value_parser = dimension_parser())]
        d: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Run the optical pipeline for ψ_ij and sample coincidences.
    Simulate {
        #[arg(short = 'd', value_parser = dimension_parser())]
        d: u64,
        #[arg(short = 'i')]
        i: usize,
        #[arg(short = 'j')]
        j: usize,
        /// Number of coincidences to draw; 0 reports probabilities only.
        #[arg(long, default_value_t = 0)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Classify a two-particle state read from a file.
    Classify {
        /// Header line `d=<n>`, then d⁴ lines `re im` in basis order
        /// [B system, B aux, A system, A aux].
        #[arg(long)]
        state: PathBuf,
        /// Mix the coincidence table with white noise: p·P + (1−p)/d⁴.
        #[arg(long, default_value_t = 1.0)]
        purity: f64,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Phase convention. Defaults to `auto` for d ≥ 3 and `literal` for d = 2.
    #[arg(long, value_enum)]
    convention: Option<ConventionArg>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output file. Without it, reports go to the output directory or stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, env = "HDBSM_OUTPUT_DIR")]
    output_dir: Option<PathBuf>,
}

/// Sign pairs are written (bell sign, decomposition sign).
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    /// The first convention reproducing k′ = (d−1)(k + i).
    Auto,
    /// Both signs +, as the states are written.
    Literal,
    Pp,
    Pm,
    Mp,
    Mm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

fn dimension_parser() -> clap::builder::RangedU64ValueParser {
    clap::value_parser!(u64).range(hdbsm_core::MIN_DIM as u64..=hdbsm_core::MAX_DIM as u64)
}

/// Bad input detected after argument parsing; maps to exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<UsageError>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let (doc, common, default_name) = match cli.command {
        Command::Decompose { d, i, j, common } => {
            let d = d as usize;
            let doc = commands::decompose(d, i, j, common.convention, common.format)?;
            (doc, common, format!("decompose-d{d}-i{i}-j{j}"))
        }
        Command::Verify { d, common } => {
            let d = d as usize;
            let doc = commands::verify(d, common.convention, common.format)?;
            (doc, common, format!("verify-d{d}"))
        }
        Command::Simulate { d, i, j, shots, seed, common } => {
            let d = d as usize;
            let doc = commands::simulate(d, i, j, shots, seed, common.convention, common.format)?;
            (doc, common, format!("simulate-d{d}-i{i}-j{j}-n{shots}-s{seed}"))
        }
        Command::Classify { state, purity, common } => {
            let stem = state
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "state".into());
            let doc = commands::classify(&state, purity, common.convention, common.format)?;
            (doc, common, format!("classify-{stem}"))
        }
    };
    emit(&doc, &common, &default_name)?;
    if !doc.passed {
        for check in doc.checks.iter().filter(|c| !c.passed) {
            eprintln!("check failed: {}: {}", check.name, check.detail);
        }
    }
    Ok(doc.passed)
}

fn emit(doc: &ReportDocument, common: &Common, default_name: &str) -> anyhow::Result<()> {
    let body = match common.format {
        Format::Json => doc.to_json()?,
        Format::Csv => doc.to_csv(),
    };
    let path = match (&common.output, &common.output_dir) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(dir)) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            Some(dir.join(format!("{default_name}.{}", common.format.name())))
        }
        (None, None) => None,
    };
    match path {
        Some(p) => {
            fs::write(&p, body).with_context(|| format!("writing {}", p.display()))?;
            eprintln!("wrote {}", p.display());
        }
        None => std::io::stdout().write_all(body.as_bytes())?,
    }
    Ok(())
}
