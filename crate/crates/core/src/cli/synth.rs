use super::{write_json, JobsArg, Status};
use anyhow::{bail, Context, Result};
use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use std::path::PathBuf;
use subwordseg::groundtruth::write_truth;
use subwordseg::raster::save_pgm;
use subwordseg::synthesis::{plan_corpus, synth_word, CorpusSpec, GapPlan, SynthParams};

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Number of words to generate
    #[arg(long)]
    words: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory (created if missing)
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    min_subwords: usize,
    #[arg(long, default_value_t = 5)]
    max_subwords: usize,
    /// Make the sub-word counts add up to exactly this many
    #[arg(long)]
    total_subwords: Option<usize>,
    /// Put one gap of exactly this width into every word
    #[arg(long, conflicts_with = "max_gap")]
    gap: Option<u32>,
    /// Widest random gap (each sub-word gets one with probability 1/2)
    #[arg(long, default_value_t = 8)]
    max_gap: u32,
    #[arg(long, default_value_t = 2)]
    max_dots: usize,
    #[arg(long, default_value_t = 3)]
    thickness: u32,
    /// Blank columns between sub-words
    #[arg(long, default_value_t = 12)]
    separation: u32,
    #[arg(long, default_value_t = 256)]
    width: usize,
    #[arg(long, default_value_t = 96)]
    height: usize,
    #[command(flatten)]
    jobs: JobsArg,
}

#[derive(Serialize)]
struct ManifestEntry<'a> {
    id: &'a str,
    params: &'a SynthParams,
}

#[derive(Serialize)]
struct Manifest<'a> {
    corpus: &'a CorpusSpec,
    words: Vec<ManifestEntry<'a>>,
}

pub fn run(args: SynthArgs) -> Result<Status> {
    let corpus = CorpusSpec {
        words: args.words,
        seed: args.seed,
        min_subwords: args.min_subwords,
        max_subwords: args.max_subwords,
        total_subwords: args.total_subwords,
        gaps: match args.gap {
            Some(g) => GapPlan::Fixed(g),
            None => GapPlan::Random { max: args.max_gap },
        },
        max_dots: args.max_dots,
        stroke_thickness: args.thickness,
        separation: args.separation,
        width: args.width,
        height: args.height,
    };
    let plan = plan_corpus(&corpus)?;
    for (_, p) in &plan {
        p.validate()?;
    }
    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;

    let pool = args.jobs.pool()?;
    let written: Vec<Result<()>> = pool.install(|| {
        plan.par_iter()
            .map(|(id, params)| -> Result<()> {
                let word = synth_word(id, params)?;
                let pgm = args.out.join(format!("{id}.pgm"));
                std::fs::write(&pgm, save_pgm(&word.image)).with_context(|| format!("writing {}", pgm.display()))?;
                let xml = args.out.join(format!("{id}.xml"));
                std::fs::write(&xml, write_truth(&word.truth)?)
                    .with_context(|| format!("writing {}", xml.display()))?;
                Ok(())
            })
            .collect()
    });
    if let Some(e) = written.into_iter().find_map(Result::err) {
        bail!(e);
    }

    let manifest =
        Manifest { corpus: &corpus, words: plan.iter().map(|(id, params)| ManifestEntry { id, params }).collect() };
    write_json(&args.out.join("manifest.json"), &manifest)?;
    let total: usize = plan.iter().map(|(_, p)| p.subword_count).sum();
    println!("wrote {} words ({} sub-words) to {}", plan.len(), total, args.out.display());
    Ok(Status::Success)
}
