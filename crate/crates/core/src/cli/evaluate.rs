use super::{id_from, list_files, write_json, JobsArg, Status};
use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use subwordseg::evaluation::{evaluate_corpus, EvalConfig, EvalError, MatchConfig, TnPolicy};
use subwordseg::groundtruth::parse_truth;
use subwordseg::segmenter::SegmentationResult;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TnArg {
    Diacritics,
    Zero,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Directory of <id>.boxes.json files
    pred_dir: PathBuf,
    /// Directory of <id>.xml (or <id>.json) ground-truth records
    truth_dir: PathBuf,
    /// Minimum share of a truth box a prediction must cover
    #[arg(long, default_value_t = 0.5)]
    overlap: f64,
    #[arg(long, default_value_t = 0.8)]
    excellent: f64,
    #[arg(long, default_value_t = 0.5)]
    good: f64,
    /// Source of true negatives
    #[arg(long, value_enum, default_value = "diacritics")]
    tn_policy: TnArg,
    /// Report path
    #[arg(long, default_value = "report.json")]
    out: PathBuf,
    #[command(flatten)]
    jobs: JobsArg,
}

pub(super) fn is_truth_file(name: &str) -> bool {
    name.ends_with(".xml") || (name.ends_with(".json") && !name.ends_with(".boxes.json") && name != "manifest.json")
}

fn truth_id(path: &Path) -> String {
    path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string()
}

/// Loads every record, collecting failures as `(file id, message)`.
fn load_all<T>(
    files: &[PathBuf],
    id_of: impl Fn(&Path) -> String,
    parse: impl Fn(&[u8]) -> Result<T>,
) -> (Vec<T>, Vec<(String, String)>) {
    let mut ok = Vec::new();
    let mut failed = Vec::new();
    for f in files {
        match std::fs::read(f).map_err(anyhow::Error::from).and_then(|b| parse(&b)) {
            Ok(v) => ok.push(v),
            Err(e) => failed.push((id_of(f), format!("{}: {e:#}", f.display()))),
        }
    }
    (ok, failed)
}

pub fn run(args: EvaluateArgs) -> Result<Status> {
    if !(args.overlap > 0.0 && args.overlap <= 1.0) {
        bail!("--overlap must lie in (0, 1], got {}", args.overlap);
    }
    let pred_files = list_files(&args.pred_dir, |n| n.ends_with(".boxes.json"))?;
    let truth_files = list_files(&args.truth_dir, is_truth_file)?;
    if truth_files.is_empty() {
        bail!("no ground-truth records in {}", args.truth_dir.display());
    }

    let (mut preds, pred_failed) = load_all(
        &pred_files,
        |p| id_from(p, ".boxes.json"),
        |b| serde_json::from_slice::<SegmentationResult>(b).map_err(Into::into),
    );
    let (mut truths, truth_failed) = load_all(&truth_files, truth_id, |b| parse_truth(b).map_err(Into::into));

    // words with an unreadable record on either side are left out
    let skipped: BTreeSet<String> = pred_failed.iter().chain(&truth_failed).map(|(id, _)| id.clone()).collect();
    for (_, msg) in pred_failed.iter().chain(&truth_failed) {
        eprintln!("error: {msg}");
    }
    preds.retain(|r| !skipped.contains(&r.image_id));
    truths.retain(|t| !skipped.contains(&t.id));

    let cfg = EvalConfig {
        matching: MatchConfig { threshold: args.overlap, excellent: args.excellent, good: args.good },
        tn_policy: match args.tn_policy {
            TnArg::Diacritics => TnPolicy::DiacriticsAsTn,
            TnArg::Zero => TnPolicy::Zero,
        },
    };
    let pool = args.jobs.pool()?;
    let report = match pool.install(|| evaluate_corpus(&preds, &truths, &cfg)) {
        Ok(r) => r,
        Err(EvalError::IdMismatch { missing_truth, missing_pred }) => {
            eprintln!("error: prediction and truth id sets differ");
            for id in &missing_truth {
                eprintln!("  no truth for {id}");
            }
            for id in &missing_pred {
                eprintln!("  no prediction for {id}");
            }
            return Ok(Status::Usage);
        }
        Err(e) => bail!(e),
    };
    write_json(&args.out, &report).context("writing report")?;

    let pct = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{:.2}%", v * 100.0));
    println!(
        "{} words: exact {} over {} under {} | accuracy {} precision {} recall {} specificity {} f-score {}",
        report.words.len(),
        report.seg_classes.exact,
        report.seg_classes.over,
        report.seg_classes.under,
        pct(report.metrics.accuracy),
        pct(report.metrics.precision),
        pct(report.metrics.recall),
        pct(report.metrics.specificity),
        pct(report.metrics.f_score),
    );
    Ok(if skipped.is_empty() { Status::Success } else { Status::Partial })
}
