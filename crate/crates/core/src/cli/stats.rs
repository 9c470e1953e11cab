use super::evaluate::is_truth_file;
use super::{list_files, write_json, Status};
use anyhow::Result;
use clap::Args;
use std::path::PathBuf;
use subwordseg::groundtruth::{dataset_stats, parse_truth};

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Directory of ground-truth records
    truth_dir: PathBuf,
    /// Write the JSON here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: StatsArgs) -> Result<Status> {
    let files = list_files(&args.truth_dir, is_truth_file)?;
    let mut truths = Vec::with_capacity(files.len());
    let mut failed = 0;
    for f in &files {
        match std::fs::read(f).map_err(anyhow::Error::from).and_then(|b| Ok(parse_truth(&b)?)) {
            Ok(t) => truths.push(t),
            Err(e) => {
                failed += 1;
                eprintln!("error: {}: {e:#}", f.display());
            }
        }
    }
    let stats = dataset_stats(&truths);
    match &args.out {
        Some(path) => write_json(path, &stats)?,
        None => println!("{}", serde_json::to_string_pretty(&stats)?),
    }
    Ok(if failed > 0 { Status::Partial } else { Status::Success })
}
