//! Command-line front end.
//!
//! Exit codes: 0 success, 1 partial failure (some inputs could not be
//! processed), 2 usage or configuration error.

mod evaluate;
mod segment;
mod stats;
mod synth;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    Partial,
    Usage,
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> Self {
        ExitCode::from(match s {
            Status::Success => 0,
            Status::Partial => 1,
            Status::Usage => 2,
        })
    }
}

#[derive(Debug, Parser)]
#[command(name = "subwordseg", version, about = "Segment handwritten Arabic word images into sub-words")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Segment PGM/PBM word images and write <id>.boxes.json per image
    Segment(segment::SegmentArgs),
    /// Match predicted boxes against ground truth and write a report
    Evaluate(evaluate::EvaluateArgs),
    /// Generate a synthetic corpus of word images with ground truth
    Synth(synth::SynthArgs),
    /// Sub-word count histogram of a ground-truth directory
    Stats(stats::StatsArgs),
}

pub fn run(cli: Cli) -> Status {
    let outcome = match cli.command {
        Command::Segment(a) => segment::run(a),
        Command::Evaluate(a) => evaluate::run(a),
        Command::Synth(a) => synth::run(a),
        Command::Stats(a) => stats::run(a),
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        Status::Usage
    })
}

/// Worker-pool size; 0 lets rayon decide.
#[derive(Debug, Clone, clap::Args)]
pub struct JobsArg {
    /// Worker threads (default: SUBWORDSEG_JOBS, else one per core)
    #[arg(long, env = "SUBWORDSEG_JOBS", default_value_t = 0)]
    jobs: usize,
}

impl JobsArg {
    pub fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new().num_threads(self.jobs).build().context("building worker pool")
    }
}

/// Regular files in `dir` whose names satisfy `keep`, sorted by path.
pub fn list_files(dir: &Path, keep: impl Fn(&str) -> bool) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("reading directory {}", dir.display()))? {
        let path = entry?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        if path.is_file() && keep(name) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// File name with `suffix` stripped, used as the word id.
pub fn id_from(path: &Path, suffix: &str) -> String {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
    name.strip_suffix(suffix).unwrap_or(name).to_string()
}

pub fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}
