//! Deterministic synthetic word images with ground truth.
//!
//! A word is a row of sub-words, each a thick polyline stroke that starts
//! and ends on a shared baseline, sometimes with an ascender. Sub-word `0`
//! is the rightmost one, matching reading order. Gaps are vertical slices
//! cut out of a flat stretch of a stroke; dots are small blobs kept well
//! clear of every stroke. Truth boxes are the stroke extents before any gap
//! is cut, without dots.
//!
//! Every random choice comes from a ChaCha8 stream seeded with
//! [`SynthParams::seed`], so a word is a pure function of its parameters.

use crate::components::BBox;
use crate::groundtruth::WordTruth;
use crate::raster::GrayImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAX_SUBWORDS: usize = 8;
pub const MAX_GAP: u32 = 20;
pub const MAX_DOTS: usize = 4;
/// Default empty columns between neighbouring sub-words.
pub const DEFAULT_SEPARATION: u32 = 12;
/// Minimum Chebyshev distance from a dot to any other ink.
pub const DOT_CLEARANCE: usize = 14;

/// Brightest ink level and darkest background level.
pub const INK_MAX: u8 = 64;
pub const BACKGROUND_MIN: u8 = 224;

const MARGIN: usize = 8;
/// Flat run at each stroke end, on the baseline.
const END_RUN: usize = 4;
const AMPLITUDE: i64 = 8;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SynthError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("canvas {width}x{height} too small, need at least {needed_width} columns")]
    CanvasTooSmall { width: usize, height: usize, needed_width: usize },
    #[error("no room left to place dot {0}")]
    NoRoomForDot(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthParams {
    pub subword_count: usize,
    pub stroke_thickness: u32,
    /// `gap_widths[i]` columns are cut out of sub-word `i`; 0 or a missing
    /// entry means no gap.
    pub gap_widths: Vec<u32>,
    /// Each dot has fewer than 30 ink pixels.
    pub dot_count: usize,
    pub width: usize,
    pub height: usize,
    /// Empty columns between neighbouring sub-words.
    pub separation: u32,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            subword_count: 3,
            stroke_thickness: 3,
            gap_widths: Vec::new(),
            dot_count: 0,
            width: 256,
            height: 96,
            separation: DEFAULT_SEPARATION,
            seed: 0,
        }
    }
}

impl SynthParams {
    fn gap(&self, i: usize) -> usize {
        self.gap_widths.get(i).copied().unwrap_or(0) as usize
    }

    /// Shortest fragment left on either side of a gap.
    fn fragment_len(&self) -> usize {
        12.max(32usize.div_ceil(self.stroke_thickness.max(1) as usize) + 2)
    }

    fn min_stroke_width(&self, i: usize) -> usize {
        match self.gap(i) {
            0 => 16,
            g => g + 2 * self.fragment_len() + 2 * END_RUN + 1,
        }
    }

    /// Narrowest canvas that fits the requested strokes.
    pub fn min_width(&self) -> usize {
        let strokes: usize = (0..self.subword_count).map(|i| self.min_stroke_width(i)).sum();
        2 * MARGIN + strokes + self.subword_count.saturating_sub(1) * self.separation as usize
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidParams(m));
        if !(1..=MAX_SUBWORDS).contains(&self.subword_count) {
            return bad(format!("subword_count {} not in 1..={MAX_SUBWORDS}", self.subword_count));
        }
        if !(1..=8).contains(&self.stroke_thickness) {
            return bad(format!("stroke_thickness {} not in 1..=8", self.stroke_thickness));
        }
        if self.gap_widths.len() > self.subword_count {
            return bad(format!("{} gap widths for {} sub-words", self.gap_widths.len(), self.subword_count));
        }
        if let Some(g) = self.gap_widths.iter().find(|&&g| g > MAX_GAP) {
            return bad(format!("gap width {g} exceeds {MAX_GAP}"));
        }
        if self.dot_count > MAX_DOTS {
            return bad(format!("dot_count {} exceeds {MAX_DOTS}", self.dot_count));
        }
        if self.separation == 0 {
            return bad("separation must be at least 1".into());
        }
        let needed_height = 2 * AMPLITUDE as usize + self.stroke_thickness as usize + 2 * MARGIN + 20;
        if self.width < self.min_width() || self.height < needed_height {
            return Err(SynthError::CanvasTooSmall {
                width: self.width,
                height: self.height,
                needed_width: self.min_width(),
            });
        }
        Ok(())
    }
}

/// A generated word together with what was planted in it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthWord {
    pub image: GrayImage,
    pub truth: WordTruth,
    /// Boxes of the planted dots.
    pub dots: Vec<BBox>,
    /// `(sub-word index, first erased column, width)` of each gap.
    pub gaps: Vec<(usize, usize, usize)>,
}

struct Stroke {
    x0: usize,
    x1: usize,
    /// `(x, centre y)` vertices, x strictly increasing from x0 to x1.
    vertices: Vec<(usize, i64)>,
    ascender: Option<(usize, usize)>,
    gap: Option<(usize, usize)>,
}

impl Stroke {
    fn centre(&self, x: usize) -> i64 {
        let k = self.vertices.partition_point(|&(vx, _)| vx <= x).clamp(1, self.vertices.len() - 1);
        let (xa, ya) = self.vertices[k - 1];
        let (xb, yb) = self.vertices[k];
        if xb == xa {
            return ya;
        }
        let t = (x as f64 - xa as f64) / (xb as f64 - xa as f64);
        (ya as f64 + t * (yb - ya) as f64).round() as i64
    }
}

/// Picks the next centre height: slope at most 1/2, within the amplitude
/// band, and still able to return to the baseline by `end_x`.
fn next_height(rng: &mut ChaCha8Rng, prev: i64, dx: usize, base: i64, end_dist: usize) -> i64 {
    let step = (dx / 2) as i64;
    let back = (end_dist / 2) as i64;
    let lo = (prev - step).max(base - AMPLITUDE).max(base - back);
    let hi = (prev + step).min(base + AMPLITUDE).min(base + back);
    if lo >= hi {
        return lo.min(hi);
    }
    rng.random_range(lo..=hi)
}

fn plan_stroke(rng: &mut ChaCha8Rng, p: &SynthParams, x0: usize, x1: usize, gap: usize, base: i64) -> Stroke {
    let inner_start = x0 + END_RUN;
    let inner_end = x1 - END_RUN;
    let frag = p.fragment_len();

    let flat = (gap > 0).then(|| {
        let c = rng.random_range(inner_start + frag..=inner_end - frag - gap);
        (c - frag, c + gap + frag, c)
    });

    // horizontal run still available for returning to the baseline; the
    // flat stretch cannot be used for that
    let remaining = |nx: usize| match flat {
        Some((fa, fb, _)) if nx <= fa => (fa - nx) + (inner_end - fb),
        _ => inner_end - nx,
    };

    let mut vertices = vec![(x0, base), (inner_start, base)];
    let mut x = inner_start;
    let mut y = base;
    while x < inner_end {
        if let Some((fa, fb, _)) = flat {
            if x == fa {
                vertices.push((fb, y));
                x = fb;
                continue;
            }
        }
        let mut nx = (x + rng.random_range(8..=16)).min(inner_end);
        if let Some((fa, _, _)) = flat {
            if x < fa && nx >= fa {
                nx = fa;
            }
        }
        y = if nx == inner_end { base } else { next_height(rng, y, nx - x, base, remaining(nx)) };
        vertices.push((nx, y));
        x = nx;
    }
    vertices.push((x1, base));
    vertices.dedup_by_key(|v| v.0);

    let ascender = (rng.random_bool(0.4) && x1 - x0 >= 24).then(|| {
        let xa = rng.random_range(x0 + END_RUN + 4..=x1 - END_RUN - 4);
        (xa, rng.random_range(10..=18))
    });
    // keep ascenders off the flat gap stretch
    let ascender = ascender.filter(|&(xa, _)| match flat {
        Some((fa, fb, _)) => xa + 6 < fa || xa > fb + 6,
        None => true,
    });

    Stroke { x0, x1, vertices, ascender, gap: flat.map(|(_, _, c)| (c, gap)) }
}

/// Generates one word image and its ground truth.
pub fn synth_word(id: &str, p: &SynthParams) -> Result<SynthWord, SynthError> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let (w, h) = (p.width, p.height);
    let t = p.stroke_thickness as i64;
    let n = p.subword_count;

    // widths, laid out left to right; sub-word i sits at slot n-1-i
    let mut slack = w - p.min_width();
    let mut widths = vec![0usize; n];
    for (slot, width) in widths.iter_mut().enumerate() {
        let i = n - 1 - slot;
        let extra = rng.random_range(0..=slack.min(28));
        *width = p.min_stroke_width(i) + extra;
        slack -= extra;
    }
    let mut x = MARGIN + rng.random_range(0..=slack);
    let base = (h / 2) as i64 + 6 + rng.random_range(-3..=3);

    let mut strokes = Vec::with_capacity(n);
    for (slot, &sw) in widths.iter().enumerate() {
        let i = n - 1 - slot;
        strokes.push(plan_stroke(&mut rng, p, x, x + sw - 1, p.gap(i), base));
        x += sw + p.separation as usize;
    }

    // render strokes into an ink mask, one owner per pixel
    let mut owner = vec![usize::MAX; w * h];
    let mut boxes: Vec<Option<BBox>> = vec![None; n];
    let half = (t - 1) / 2;
    for (slot, s) in strokes.iter().enumerate() {
        let i = n - 1 - slot;
        let mut paint = |px: usize, py: i64| {
            if py < 0 || py as usize >= h {
                return;
            }
            owner[py as usize * w + px] = i;
            let b = BBox::point(px as u32, py as u32);
            boxes[i] = Some(boxes[i].map_or(b, |old| old.merge(&b)));
        };
        for px in s.x0..=s.x1 {
            let top = s.centre(px) - half;
            for py in top..top + t {
                paint(px, py);
            }
        }
        if let Some((xa, rise)) = s.ascender {
            let top = s.centre(xa) - half;
            for px in xa..(xa + t as usize).min(s.x1 + 1) {
                for py in (top - rise as i64).max(2)..top {
                    paint(px, py);
                }
            }
        }
    }

    // dots keep their distance from the uncut strokes and from each other
    let mut dots = Vec::with_capacity(p.dot_count);
    for d in 0..p.dot_count {
        let mut placed = None;
        for _ in 0..2000 {
            let (dw, dh) = (rng.random_range(2..=5usize), rng.random_range(2..=5usize));
            let dx = rng.random_range(1..w - dw - 1);
            let dy = rng.random_range(1..h - dh - 1);
            let clear = |(cx, cy): (usize, usize)| {
                let xs = cx.saturating_sub(DOT_CLEARANCE - 1)..(cx + DOT_CLEARANCE).min(w);
                let ys = cy.saturating_sub(DOT_CLEARANCE - 1)..(cy + DOT_CLEARANCE).min(h);
                ys.clone().all(|yy| xs.clone().all(|xx| owner[yy * w + xx] == usize::MAX))
            };
            if (dy..dy + dh).all(|yy| (dx..dx + dw).all(|xx| clear((xx, yy)))) {
                placed = Some(BBox::new(dx as u32, dy as u32, (dx + dw - 1) as u32, (dy + dh - 1) as u32).unwrap());
                break;
            }
        }
        let b = placed.ok_or(SynthError::NoRoomForDot(d + 1))?;
        for yy in b.ay..=b.by {
            for xx in b.ax..=b.bx {
                owner[yy as usize * w + xx as usize] = n + d;
            }
        }
        dots.push(b);
    }

    // cut the gaps after the truth boxes and dot clearances are fixed
    let mut gaps = Vec::new();
    for (slot, s) in strokes.iter().enumerate() {
        let i = n - 1 - slot;
        if let Some((c, g)) = s.gap {
            for px in c..c + g {
                for py in 0..h {
                    if owner[py * w + px] == i {
                        owner[py * w + px] = usize::MAX;
                    }
                }
            }
            gaps.push((i, c, g));
        }
    }
    gaps.sort_unstable();

    let data = owner
        .iter()
        .map(|&o| if o == usize::MAX { rng.random_range(BACKGROUND_MIN..=255) } else { rng.random_range(16..=INK_MAX) })
        .collect();
    let image = GrayImage::new(w, h, data).expect("validated dimensions");
    let subwords = boxes.into_iter().map(|b| b.expect("every stroke paints pixels")).collect();
    Ok(SynthWord { image, truth: WordTruth { id: id.to_string(), subwords, letters: Vec::new() }, dots, gaps })
}

/// How to draw gaps for a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapPlan {
    /// One gap of exactly this width in one randomly chosen sub-word.
    Fixed(u32),
    /// Each sub-word gets, with probability 1/2, a gap of `0..=max` columns.
    Random { max: u32 },
}

/// Parameters for a whole corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub words: usize,
    pub seed: u64,
    pub min_subwords: usize,
    pub max_subwords: usize,
    /// When set, sub-word counts are drawn so that they sum to this total.
    pub total_subwords: Option<usize>,
    pub gaps: GapPlan,
    pub max_dots: usize,
    pub stroke_thickness: u32,
    pub separation: u32,
    pub width: usize,
    pub height: usize,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            words: 0,
            seed: 0,
            min_subwords: 1,
            max_subwords: 5,
            total_subwords: None,
            gaps: GapPlan::Random { max: 8 },
            max_dots: 2,
            stroke_thickness: 3,
            separation: DEFAULT_SEPARATION,
            width: 256,
            height: 96,
        }
    }
}

/// Word id used in synthetic corpora: `S0001`, `S0002`, ...
pub fn corpus_id(index: usize) -> String {
    format!("S{:04}", index + 1)
}

fn word_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws per-word parameters for a corpus. Word `i` uses stream `i + 1`
/// of the corpus seed, so its parameters do not depend on other words.
/// The canvas is widened when a word would not fit the requested width.
pub fn plan_corpus(corpus: &CorpusSpec) -> Result<Vec<(String, SynthParams)>, SynthError> {
    let (lo, hi) = (corpus.min_subwords, corpus.max_subwords);
    if lo < 1 || hi > MAX_SUBWORDS || lo > hi {
        return Err(SynthError::InvalidParams(format!("sub-word range {lo}..={hi} outside 1..={MAX_SUBWORDS}")));
    }
    if corpus.max_dots > MAX_DOTS {
        return Err(SynthError::InvalidParams(format!("max_dots {} exceeds {MAX_DOTS}", corpus.max_dots)));
    }
    match corpus.gaps {
        GapPlan::Fixed(g) | GapPlan::Random { max: g } if g > MAX_GAP => {
            return Err(SynthError::InvalidParams(format!("gap width {g} exceeds {MAX_GAP}")));
        }
        _ => {}
    }

    let counts: Vec<usize> = match corpus.total_subwords {
        None => (0..corpus.words).map(|i| word_rng(corpus.seed, i as u64 + 1).random_range(lo..=hi)).collect(),
        Some(total) => {
            if total < corpus.words * lo || total > corpus.words * hi {
                return Err(SynthError::InvalidParams(format!(
                    "{total} sub-words cannot be spread over {} words with {lo}..={hi} each",
                    corpus.words
                )));
            }
            let mut counts = vec![lo; corpus.words];
            let mut open: Vec<usize> = (0..corpus.words).collect();
            let mut rng = word_rng(corpus.seed, 0);
            for _ in 0..total - corpus.words * lo {
                let k = rng.random_range(0..open.len());
                counts[open[k]] += 1;
                if counts[open[k]] == hi {
                    open.swap_remove(k);
                }
            }
            counts
        }
    };

    let mut plan = Vec::with_capacity(corpus.words);
    for (i, &n) in counts.iter().enumerate() {
        // draws below come after the count draw on the same stream
        let mut rng = word_rng(corpus.seed, i as u64 + 1);
        let _ = rng.random_range(lo..=hi);
        let gap_widths = match corpus.gaps {
            GapPlan::Fixed(g) => {
                let mut v = vec![0; n];
                v[rng.random_range(0..n)] = g;
                v
            }
            GapPlan::Random { max } => {
                (0..n).map(|_| if rng.random_bool(0.5) { rng.random_range(0..=max) } else { 0 }).collect()
            }
        };
        let mut params = SynthParams {
            subword_count: n,
            stroke_thickness: corpus.stroke_thickness,
            gap_widths,
            dot_count: rng.random_range(0..=corpus.max_dots),
            width: corpus.width,
            height: corpus.height,
            separation: corpus.separation,
            seed: rng.random(),
        };
        params.width = params.width.max(params.min_width() + 24);
        params.validate()?;
        plan.push((corpus_id(i), params));
    }
    Ok(plan)
}
