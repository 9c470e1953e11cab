//! End-to-end acceptance checks. Each check prints one PASS/FAIL line; the
//! process exits non-zero if any of them fails.

mod common;

use common::{brute_otsu, count_components, flood_fill, random_image, stroke_image};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};
use subwordseg::evaluation::{evaluate_corpus, metrics, ConfusionCounts, EvalConfig};
use subwordseg::segmenter::{binarize_word, segment_word, CountClass, PipelineConfig};
use subwordseg::synthesis::{plan_corpus, synth_word, CorpusSpec, SynthParams, SynthWord};
use subwordseg::*;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn within(elapsed: Duration, limit: Duration) -> bool {
    elapsed < limit
}

fn metric_cross_check() -> Outcome {
    let start = Instant::now();
    let m = metrics(&ConfusionCounts { tp: 8811, fp: 1089, fn_: 89, tn: 0 });
    let (p, r, f) = (m.precision.unwrap(), m.recall.unwrap(), m.f_score.unwrap());
    let elapsed = start.elapsed();
    let ok = (p - 0.89).abs() < 0.005
        && (r - 0.99).abs() < 0.005
        && (f - 0.937).abs() <= 0.01
        && within(elapsed, Duration::from_secs(1));
    outcome(ok, format!("precision {p:.4} recall {r:.4} f-score {f:.4} (target 0.937 +/- 0.01) in {elapsed:?}"))
}

fn corpus() -> Vec<SynthWord> {
    let corpus = CorpusSpec { words: 500, seed: 2024, ..CorpusSpec::default() };
    plan_corpus(&corpus).unwrap().par_iter().map(|(id, p)| synth_word(id, p).unwrap()).collect()
}

/// Every sub-word's own ink ends up in a single component once gaps are
/// connected, checked with the flood-fill oracle.
fn gaps_closed(word: &SynthWord) -> bool {
    let ink = binarize_word(&word.image, None);
    let (labels, _) = flood_fill(&connect_gaps(&ink, &CgsConfig::default()));
    let w = ink.width();
    word.truth.subwords.iter().all(|b| {
        let mut seen = None;
        for y in b.ay..=b.by {
            for x in b.ax..=b.bx {
                let (xu, yu) = (x as usize, y as usize);
                if !ink.get(xu, yu) || word.dots.iter().any(|d| d.contains_point(x, y)) {
                    continue;
                }
                let l = labels[yu * w + xu];
                if *seen.get_or_insert(l) != l {
                    return false;
                }
            }
        }
        true
    })
}

fn gap_closure(words: &[SynthWord]) -> Outcome {
    let start = Instant::now();
    let cfg = PipelineConfig::default();
    let results: Vec<_> = words.par_iter().map(|w| segment_word(&w.truth.id, &w.image, &cfg)).collect();
    let truths: Vec<_> = words.iter().map(|w| w.truth.clone()).collect();
    let report = evaluate_corpus(&results, &truths, &EvalConfig::default()).unwrap();
    let open: Vec<&str> = words.par_iter().filter(|w| !gaps_closed(w)).map(|w| w.truth.id.as_str()).collect();
    let gaps: usize = words.iter().map(|w| w.gaps.len()).sum();
    let elapsed = start.elapsed();
    let exact = report.exact_fraction().unwrap();
    let recall = report.metrics.recall.unwrap();
    let ok = open.is_empty() && exact >= 0.99 && recall >= 0.99 && within(elapsed, Duration::from_secs(30));
    outcome(
        ok,
        format!(
            "{} words, {gaps} gaps, {} left open; exact {exact:.4} recall {recall:.4} in {elapsed:?}",
            words.len(),
            open.len()
        ),
    )
}

fn failure_reproduction() -> Outcome {
    let cfg = PipelineConfig::default();
    let classify = |p: &SynthParams| {
        let w = synth_word("f", p).unwrap();
        let r = segment_word("f", &w.image, &cfg);
        classify_count(r.boxes.len(), w.truth.subwords.len())
    };
    let mut rng = ChaCha8Rng::seed_from_u64(314);
    let mut over = 0;
    let mut under = 0;
    for i in 0..50u64 {
        let n = rng.random_range(1..=5);
        let mut gap_widths = vec![0; n];
        gap_widths[rng.random_range(0..n)] = rng.random_range(12..=20);
        let p = SynthParams {
            subword_count: n,
            gap_widths,
            dot_count: rng.random_range(0..=2),
            width: 320,
            seed: i,
            ..SynthParams::default()
        };
        over += (classify(&p) == CountClass::Over) as usize;

        let p = SynthParams {
            subword_count: rng.random_range(2..=5),
            separation: rng.random_range(1..8),
            dot_count: rng.random_range(0..=2),
            width: 320,
            seed: 1000 + i,
            ..SynthParams::default()
        };
        under += (classify(&p) == CountClass::Under) as usize;
    }
    outcome(
        over == 50 && under == 50,
        format!("over {over}/50 with gaps of 12-20 px, under {under}/50 with spacing below 8 px"),
    )
}

fn diacritic_filtering(words: &[SynthWord]) -> Outcome {
    let cfg = PipelineConfig::default();
    let checks: Vec<(bool, usize, usize)> = words
        .par_iter()
        .map(|w| {
            let r = segment_word(&w.truth.id, &w.image, &cfg);
            let connected = connect_gaps(&binarize_word(&w.image, None), &CgsConfig::default());
            let (map, comps) = label8(&connected);
            let small_in_output = comps.iter().any(|c| c.area < 30 && r.boxes.contains(&c.bbox));
            // the component holding each dot must be among the removed ones
            let dot_removed = |d: &BBox| match map.get(d.ax as usize, d.ay as usize) {
                0 => false,
                l => {
                    let c = &comps[l as usize - 1];
                    c.bbox.contains(d) && r.removed_boxes.contains(&c.bbox) && !r.boxes.contains(&c.bbox)
                }
            };
            let dots_removed = r.removed_count == w.dots.len() && w.dots.iter().all(dot_removed);
            (!small_in_output && dots_removed, w.dots.len(), r.removed_count)
        })
        .collect();
    let failed = checks.iter().filter(|c| !c.0).count();
    let planted: usize = checks.iter().map(|c| c.1).sum();
    let removed: usize = checks.iter().map(|c| c.2).sum();
    outcome(
        failed == 0 && planted > 0,
        format!("{planted} dots planted, {removed} removed, {failed} words with a violation"),
    )
}

fn oracle_suites() -> Outcome {
    let start = Instant::now();
    let label_bad = (0..1000u64)
        .into_par_iter()
        .filter(|&i| {
            let mut rng = ChaCha8Rng::seed_from_u64(i);
            let density = rng.random_range(0.05..0.75);
            let img = random_image(&mut rng, 64, 64, density);
            let (map, comps) = label8(&img);
            let (labels, n) = flood_fill(&img);
            map.labels() != &labels[..] || comps.len() != n as usize
        })
        .count();
    let otsu_bad = (0..1000u64)
        .into_par_iter()
        .filter(|&i| {
            let mut rng = ChaCha8Rng::seed_from_u64(10_000 + i);
            let mut bins = [0u64; 256];
            for _ in 0..rng.random_range(1..=64) {
                bins[rng.random_range(0..256)] += rng.random_range(1..2000);
            }
            otsu_threshold(&Histogram::from_bins(bins)).unwrap() != brute_otsu(&bins)
        })
        .count();
    let thin_bad = (0..200u64)
        .into_par_iter()
        .filter(|&i| {
            let img = stroke_image(&mut ChaCha8Rng::seed_from_u64(20_000 + i), 64, 64);
            let thin = thin_zhang_suen(&img);
            thin_zhang_suen(&thin) != thin || count_components(&thin) != count_components(&img)
        })
        .count();
    let elapsed = start.elapsed();
    outcome(
        label_bad + otsu_bad + thin_bad == 0 && within(elapsed, Duration::from_secs(60)),
        format!("label8 {label_bad}/1000, otsu {otsu_bad}/1000, thinning {thin_bad}/200 mismatches in {elapsed:?}"),
    )
}

fn operator_algebra() -> Outcome {
    let violations: usize = (0..500u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(30_000 + i);
            let (w, h) = (rng.random_range(8..=48), rng.random_range(8..=48));
            let density = rng.random_range(0.02..0.5);
            let a = random_image(&mut rng, w, h, density);
            let b = random_image(&mut rng, w, h, density);
            let grows = [
                dilate8(&a),
                bridge(&a, BridgeRule::ExactlyTwo),
                bridge(&a, BridgeRule::MatlabBridge),
                majority_fill(&a),
            ]
            .iter()
            .filter(|o| !a.is_subset_of(o))
            .count();
            let distributes = dilate8(&a.union(&b)) == dilate8(&a).union(&dilate8(&b));
            let shrinks = count_components(&connect_gaps(&a, &CgsConfig::default())) <= count_components(&a);
            grows + !distributes as usize + !shrinks as usize
        })
        .sum();
    outcome(violations == 0, format!("500 images, {violations} violations"))
}

fn pipeline_run(dir: &Path, jobs: &str) -> Vec<u8> {
    let bin = env!("CARGO_BIN_EXE_subwordseg");
    let (corpus, preds, report) = (dir.join("corpus"), dir.join("pred"), dir.join("report.json"));
    let steps: [Vec<&std::ffi::OsStr>; 3] = [
        vec![
            "synth".as_ref(),
            "--words".as_ref(),
            "60".as_ref(),
            "--seed".as_ref(),
            "99".as_ref(),
            "--out".as_ref(),
            corpus.as_os_str(),
        ],
        vec!["segment".as_ref(), corpus.as_os_str(), "--out".as_ref(), preds.as_os_str()],
        vec!["evaluate".as_ref(), preds.as_os_str(), corpus.as_os_str(), "--out".as_ref(), report.as_os_str()],
    ];
    for args in steps {
        let status = Command::new(bin).args(args).args(["--jobs", jobs]).output().unwrap().status;
        assert!(status.success(), "pipeline step failed with {status}");
    }
    std::fs::read(report).unwrap()
}

fn determinism() -> Outcome {
    let tmp = tempfile::TempDir::new().unwrap();
    let runs: Vec<Vec<u8>> = ["1", "8", "1"]
        .iter()
        .enumerate()
        .map(|(i, jobs)| {
            let dir = tmp.path().join(format!("run{i}"));
            std::fs::create_dir_all(&dir).unwrap();
            pipeline_run(&dir, jobs)
        })
        .collect();
    let same = runs.windows(2).all(|w| w[0] == w[1]);
    outcome(
        same && !runs[0].is_empty(),
        format!("3 runs (jobs 1, 8, 1), {} report bytes each, identical: {same}", runs[0].len()),
    )
}

fn main() {
    let words = corpus();
    let checks: Vec<(&str, Outcome)> = vec![
        ("1 metric cross-check", metric_cross_check()),
        ("2 gap closure", gap_closure(&words)),
        ("3 failure reproduction", failure_reproduction()),
        ("4 diacritic filtering", diacritic_filtering(&words)),
        ("5 oracle equivalence", oracle_suites()),
        ("6 operator algebra", operator_algebra()),
        ("7 determinism", determinism()),
    ];
    let mut failed = 0;
    for (name, o) in &checks {
        println!("criterion {name}: {} ({})", if o.ok { "PASS" } else { "FAIL" }, o.detail);
        failed += (!o.ok) as usize;
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
