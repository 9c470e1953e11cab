//! Box matching against ground truth and the detection metrics.
//!
//! A predicted box matches a truth box on the share of the truth box it
//! covers (`intersection / truth area`). Predicted boxes come from dilated
//! strokes with dots removed while truth boxes are tight, so IoU would
//! penalise every correct detection; IoU is still reported per pair.

use crate::components::BBox;
use crate::groundtruth::WordTruth;
use crate::segmenter::{classify_count, CountClass, SegmentationResult};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl std::ops::AddAssign for ConfusionCounts {
    fn add_assign(&mut self, o: Self) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
        self.tn += o.tn;
    }
}

/// The five ratios; `None` where the denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub specificity: Option<f64>,
    pub f_score: Option<f64>,
}

impl Metrics {
    pub fn all_undefined(&self) -> bool {
        [self.accuracy, self.precision, self.recall, self.specificity, self.f_score].iter().all(Option::is_none)
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn metrics(c: &ConfusionCounts) -> Metrics {
    let accuracy = ratio(c.tp + c.tn, c.tp + c.fp + c.fn_ + c.tn);
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let specificity = ratio(c.tn, c.tn + c.fp);
    let f_score = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        _ => None,
    };
    Metrics { accuracy, precision, recall, specificity, f_score }
}

/// Fraction of truth boxes left unmatched, `FN / (TP + FN)`.
pub fn miss_rate(c: &ConfusionCounts) -> Option<f64> {
    ratio(c.fn_, c.tp + c.fn_)
}

fn intersection_area(a: &BBox, b: &BBox) -> u64 {
    a.intersection(b).map_or(0, |i| i.area())
}

/// Share of `truth` covered by `pred`.
pub fn overlap_ratio(pred: &BBox, truth: &BBox) -> f64 {
    intersection_area(pred, truth) as f64 / truth.area() as f64
}

pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let inter = intersection_area(a, b);
    inter as f64 / (a.area() + b.area() - inter) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quality {
    Excellent,
    Good,
    Poor,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchConfig {
    /// Minimum overlap ratio for a pair.
    pub threshold: f64,
    pub excellent: f64,
    pub good: f64,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self { threshold: 0.5, excellent: 0.8, good: 0.5 }
    }
}

impl MatchConfig {
    pub fn quality(&self, overlap: f64) -> Quality {
        if overlap >= self.excellent {
            Quality::Excellent
        } else if overlap >= self.good {
            Quality::Good
        } else {
            Quality::Poor
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchPair {
    pub pred: BBox,
    pub truth: BBox,
    pub overlap: f64,
    pub iou: f64,
    pub quality: Quality,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub pairs: Vec<MatchPair>,
    pub unmatched_pred: Vec<BBox>,
    pub unmatched_truth: Vec<BBox>,
    pub count_class: CountClass,
}

/// Greedy one-to-one matching by decreasing overlap ratio, ties broken by
/// truth index then predicted index. Pairs below the threshold are never
/// formed. Overlaps are ranked exactly as fractions.
pub fn match_boxes(pred: &[BBox], truth: &[BBox], cfg: &MatchConfig) -> MatchReport {
    // (intersection, truth area, truth index, pred index)
    let mut candidates: Vec<(u64, u64, usize, usize)> = Vec::new();
    for (ti, t) in truth.iter().enumerate() {
        for (pi, p) in pred.iter().enumerate() {
            let inter = intersection_area(p, t);
            if inter > 0 && inter as f64 / t.area() as f64 >= cfg.threshold {
                candidates.push((inter, t.area(), ti, pi));
            }
        }
    }
    candidates.sort_by(|a, b| {
        let lhs = a.0 as u128 * b.1 as u128;
        let rhs = b.0 as u128 * a.1 as u128;
        rhs.cmp(&lhs).then(a.2.cmp(&b.2)).then(a.3.cmp(&b.3))
    });

    let mut truth_used = vec![false; truth.len()];
    let mut pred_used = vec![false; pred.len()];
    let mut pairs = Vec::new();
    for (_, _, ti, pi) in candidates {
        if truth_used[ti] || pred_used[pi] {
            continue;
        }
        truth_used[ti] = true;
        pred_used[pi] = true;
        let overlap = overlap_ratio(&pred[pi], &truth[ti]);
        pairs.push(MatchPair {
            pred: pred[pi],
            truth: truth[ti],
            overlap,
            iou: iou(&pred[pi], &truth[ti]),
            quality: cfg.quality(overlap),
        });
    }
    let unused = |boxes: &[BBox], used: &[bool]| {
        boxes.iter().zip(used).filter(|(_, &u)| !u).map(|(b, _)| *b).collect::<Vec<_>>()
    };
    MatchReport {
        unmatched_pred: unused(pred, &pred_used),
        unmatched_truth: unused(truth, &truth_used),
        pairs,
        count_class: classify_count(pred.len(), truth.len()),
    }
}

/// Where true negatives come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TnPolicy {
    /// Components dropped by the diacritic filter count as true negatives.
    #[default]
    DiacriticsAsTn,
    Zero,
}

pub fn counts_from_match(r: &MatchReport, removed_small: usize, policy: TnPolicy) -> ConfusionCounts {
    ConfusionCounts {
        tp: r.pairs.len() as u64,
        fp: r.unmatched_pred.len() as u64,
        fn_: r.unmatched_truth.len() as u64,
        tn: match policy {
            TnPolicy::DiacriticsAsTn => removed_small as u64,
            TnPolicy::Zero => 0,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalConfig {
    pub matching: MatchConfig,
    pub tn_policy: TnPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordReport {
    pub id: String,
    pub pairs: Vec<MatchPair>,
    pub unmatched_pred: Vec<BBox>,
    pub unmatched_truth: Vec<BBox>,
    pub count_class: CountClass,
    pub counts: ConfusionCounts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SegClasses {
    pub exact: usize,
    pub over: usize,
    pub under: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub threshold: f64,
    /// Sorted by id.
    pub words: Vec<WordReport>,
    pub counts: ConfusionCounts,
    pub metrics: Metrics,
    /// "Undetected fraction": unmatched truth boxes over all truth boxes.
    pub miss_rate: Option<f64>,
    pub seg_classes: SegClasses,
}

impl EvalReport {
    pub fn exact_fraction(&self) -> Option<f64> {
        ratio(self.seg_classes.exact as u64, self.words.len() as u64)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("duplicate {side} id {id:?}")]
    DuplicateId { side: &'static str, id: String },
    #[error("id sets differ: no truth for {missing_truth:?}, no prediction for {missing_pred:?}")]
    IdMismatch { missing_truth: Vec<String>, missing_pred: Vec<String> },
}

fn index_by_id<'a, T>(
    items: &'a [T],
    id: impl Fn(&T) -> &str,
    side: &'static str,
) -> Result<BTreeMap<&'a str, &'a T>, EvalError> {
    let mut map = BTreeMap::new();
    for item in items {
        if map.insert(id(item), item).is_some() {
            return Err(EvalError::DuplicateId { side, id: id(item).to_string() });
        }
    }
    Ok(map)
}

/// Joins predictions with truths by id and aggregates the per-word
/// matches. The report does not depend on input order.
pub fn evaluate_corpus(
    results: &[SegmentationResult],
    truths: &[WordTruth],
    cfg: &EvalConfig,
) -> Result<EvalReport, EvalError> {
    let preds = index_by_id(results, |r| &r.image_id, "prediction")?;
    let truth_map = index_by_id(truths, |t| &t.id, "truth")?;

    let pred_ids: BTreeSet<&str> = preds.keys().copied().collect();
    let truth_ids: BTreeSet<&str> = truth_map.keys().copied().collect();
    if pred_ids != truth_ids {
        return Err(EvalError::IdMismatch {
            missing_truth: pred_ids.difference(&truth_ids).map(|s| s.to_string()).collect(),
            missing_pred: truth_ids.difference(&pred_ids).map(|s| s.to_string()).collect(),
        });
    }

    let joined: Vec<(&str, &SegmentationResult, &WordTruth)> =
        preds.iter().map(|(id, r)| (*id, *r, truth_map[id])).collect();
    let words: Vec<WordReport> = joined
        .par_iter()
        .map(|(id, r, t)| {
            let m = match_boxes(&r.boxes, &t.subwords, &cfg.matching);
            let counts = counts_from_match(&m, r.removed_count, cfg.tn_policy);
            WordReport {
                id: id.to_string(),
                pairs: m.pairs,
                unmatched_pred: m.unmatched_pred,
                unmatched_truth: m.unmatched_truth,
                count_class: m.count_class,
                counts,
            }
        })
        .collect();

    let mut counts = ConfusionCounts::default();
    let mut seg_classes = SegClasses::default();
    for w in &words {
        counts += w.counts;
        match w.count_class {
            CountClass::Exact => seg_classes.exact += 1,
            CountClass::Over => seg_classes.over += 1,
            CountClass::Under => seg_classes.under += 1,
        }
    }
    Ok(EvalReport {
        threshold: cfg.matching.threshold,
        words,
        metrics: metrics(&counts),
        miss_rate: miss_rate(&counts),
        counts,
        seg_classes,
    })
}
