use super::{list_files, write_json, JobsArg, Status};
use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use rayon::prelude::*;
use std::path::{Path, PathBuf};
use subwordseg::groundtruth::parse_truth;
use subwordseg::raster::{load_pbm, load_pgm, save_ppm, GrayImage};
use subwordseg::segmenter::{binarize_word, segment_binary, AreaBasis, PipelineConfig, SegmentationResult};
use subwordseg::{BBox, BridgeRule, CgsConfig};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BridgeArg {
    Exact2,
    Matlab,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AreaArg {
    Ink,
    Labeled,
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    /// PGM/PBM files or directories holding them
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Output directory for <id>.boxes.json (default: next to each input)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write an annotated PPM per input into this directory
    #[arg(long)]
    annotate: Option<PathBuf>,
    /// Ground-truth directory; truth boxes are drawn in red when annotating
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Components with fewer pixels than this are dropped as diacritics
    #[arg(long, default_value_t = 30)]
    min_area: u64,
    /// What the size filter measures
    #[arg(long, value_enum, default_value = "ink")]
    area_basis: AreaArg,
    /// Skip gap connection
    #[arg(long)]
    no_cgs: bool,
    /// Thin strokes before labeling
    #[arg(long)]
    skeleton: bool,
    /// Fixed binarization threshold instead of Otsu
    #[arg(long)]
    threshold: Option<u8>,
    #[arg(long, value_enum, default_value = "exact2")]
    bridge_rule: BridgeArg,
    #[arg(long, default_value_t = 4)]
    dilate_iters: u32,
    #[arg(long, default_value_t = 2)]
    bridge_iters: u32,
    #[arg(long, default_value_t = 2)]
    majority_iters: u32,
    #[command(flatten)]
    jobs: JobsArg,
}

impl SegmentArgs {
    fn config(&self) -> PipelineConfig {
        let cgs = (!self.no_cgs).then_some(CgsConfig {
            dilate_iters: self.dilate_iters,
            bridge_iters: self.bridge_iters,
            majority_iters: self.majority_iters,
            bridge_rule: match self.bridge_rule {
                BridgeArg::Exact2 => BridgeRule::ExactlyTwo,
                BridgeArg::Matlab => BridgeRule::MatlabBridge,
            },
        });
        PipelineConfig {
            threshold: self.threshold,
            cgs,
            min_area: self.min_area,
            area_basis: match self.area_basis {
                AreaArg::Ink => AreaBasis::Ink,
                AreaArg::Labeled => AreaBasis::Labeled,
            },
            apply_skeleton: self.skeleton,
        }
    }
}

fn is_image(name: &str) -> bool {
    name.ends_with(".pgm") || name.ends_with(".pbm")
}

fn expand_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in inputs {
        if p.is_dir() {
            files.extend(list_files(p, is_image)?);
        } else {
            files.push(p.clone());
        }
    }
    Ok(files)
}

fn image_id(path: &Path) -> String {
    path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string()
}

/// Greyscale copy of the page with truth boxes outlined in red and
/// predicted boxes in green, as a P6 pixmap.
pub fn render_annotation(img: &GrayImage, truth: &[BBox], pred: &[BBox]) -> Vec<u8> {
    let (w, h) = (img.width(), img.height());
    let mut rgb: Vec<u8> = img.data().iter().flat_map(|&v| [v, v, v]).collect();
    let mut outline = |b: &BBox, colour: [u8; 3]| {
        let (bx, by) = ((b.bx as usize).min(w - 1), (b.by as usize).min(h - 1));
        let (ax, ay) = (b.ax as usize, b.ay as usize);
        if ax >= w || ay >= h {
            return;
        }
        let mut put = |x: usize, y: usize| rgb[(y * w + x) * 3..(y * w + x) * 3 + 3].copy_from_slice(&colour);
        for x in ax..=bx {
            put(x, ay);
            put(x, by);
        }
        for y in ay..=by {
            put(ax, y);
            put(bx, y);
        }
    };
    for b in truth {
        outline(b, [255, 0, 0]);
    }
    for b in pred {
        outline(b, [0, 255, 0]);
    }
    save_ppm(w, h, &rgb)
}

fn process(path: &Path, args: &SegmentArgs, cfg: &PipelineConfig) -> Result<SegmentationResult> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let id = image_id(path);
    let (gray, ink) = if bytes.starts_with(b"P1") || bytes.starts_with(b"P4") {
        let ink = load_pbm(&bytes)?;
        let data = ink.bits().iter().map(|&b| if b == 1 { 0 } else { 255 }).collect();
        (GrayImage::new(ink.width(), ink.height(), data)?, ink)
    } else {
        let gray = load_pgm(&bytes)?;
        let ink = binarize_word(&gray, cfg.threshold);
        (gray, ink)
    };
    let result = segment_binary(&id, &ink, cfg);

    let out_dir = match &args.out {
        Some(d) => d.clone(),
        None => path.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    write_json(&out_dir.join(format!("{id}.boxes.json")), &result)?;

    if let Some(dir) = &args.annotate {
        let truth = match &args.truth {
            Some(tdir) => {
                let candidates = [tdir.join(format!("{id}.xml")), tdir.join(format!("{id}.json"))];
                match candidates.iter().find(|p| p.is_file()) {
                    Some(p) => {
                        parse_truth(&std::fs::read(p)?).with_context(|| format!("parsing {}", p.display()))?.subwords
                    }
                    None => Vec::new(),
                }
            }
            None => Vec::new(),
        };
        let ppm = render_annotation(&gray, &truth, &result.boxes);
        let target = dir.join(format!("{id}.ppm"));
        std::fs::write(&target, ppm).with_context(|| format!("writing {}", target.display()))?;
    }
    Ok(result)
}

pub fn run(args: SegmentArgs) -> Result<Status> {
    let files = expand_inputs(&args.inputs)?;
    if files.is_empty() {
        bail!("no PGM/PBM inputs found");
    }
    for dir in [&args.out, &args.annotate].into_iter().flatten() {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let cfg = args.config();
    let pool = args.jobs.pool()?;
    let outcomes: Vec<(PathBuf, Result<SegmentationResult>)> =
        pool.install(|| files.par_iter().map(|f| (f.clone(), process(f, &args, &cfg))).collect());

    let mut failed = 0;
    for (path, outcome) in &outcomes {
        match outcome {
            Ok(r) => log::info!("{}: {} boxes, {} removed", r.image_id, r.boxes.len(), r.removed_count),
            Err(e) => {
                failed += 1;
                eprintln!("error: {}: {e:#}", path.display());
            }
        }
    }
    println!("segmented {} of {} images", outcomes.len() - failed, outcomes.len());
    Ok(if failed > 0 { Status::Partial } else { Status::Success })
}
