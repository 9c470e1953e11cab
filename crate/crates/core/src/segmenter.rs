//! Word image to sub-word boxes.
//!
//! The pipeline is: binarize (Otsu unless a threshold is forced), connect
//! gaps, optionally thin, label 8-connected components, drop components
//! smaller than `min_area`, and report the boxes of the rest from right to
//! left.

use crate::components::{filter_small, label8, BBox, Component};
use crate::morphology::{connect_gaps, CgsConfig};
use crate::raster::{binarize, histogram, otsu_threshold, BinaryImage, GrayImage};
use crate::skeleton::thin_zhang_suen;
use serde::{Deserialize, Serialize};

/// Default diacritic cut-off in pixels.
pub const DEFAULT_MIN_AREA: u64 = 30;

/// What "size" means when deciding whether a component is a diacritic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AreaBasis {
    /// Ink pixels of the binarized image that fall in the component.
    /// Unaffected by how much gap connection inflated the component.
    #[default]
    Ink,
    /// Pixel count of the component in the image that was labelled.
    Labeled,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Forced binarization threshold; Otsu when `None`.
    pub threshold: Option<u8>,
    /// Gap connection settings; `None` skips the step.
    pub cgs: Option<CgsConfig>,
    pub min_area: u64,
    pub area_basis: AreaBasis,
    pub apply_skeleton: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            threshold: None,
            cgs: Some(CgsConfig::default()),
            min_area: DEFAULT_MIN_AREA,
            area_basis: AreaBasis::Ink,
            apply_skeleton: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Binarize,
    ConnectGaps,
    Skeleton,
    Filter,
}

/// Foreground pixels and component count after one stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageTrace {
    pub stage: Stage,
    pub foreground: usize,
    pub components: usize,
}

/// Segmentation outcome for one word image.
///
/// Serializes as `{"id", "boxes", "removed"}`; the stage trace is not
/// part of the record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "ResultRecord", into = "ResultRecord")]
pub struct SegmentationResult {
    pub image_id: String,
    /// Sub-word boxes, right to left.
    pub boxes: Vec<BBox>,
    pub removed_count: usize,
    pub removed_boxes: Vec<BBox>,
    pub stage_trace: Vec<StageTrace>,
}

#[derive(Serialize, Deserialize)]
struct ResultRecord {
    id: String,
    boxes: Vec<BBox>,
    removed: Vec<BBox>,
}

impl From<ResultRecord> for SegmentationResult {
    fn from(r: ResultRecord) -> Self {
        Self {
            image_id: r.id,
            boxes: r.boxes,
            removed_count: r.removed.len(),
            removed_boxes: r.removed,
            stage_trace: Vec::new(),
        }
    }
}

impl From<SegmentationResult> for ResultRecord {
    fn from(r: SegmentationResult) -> Self {
        Self { id: r.image_id, boxes: r.boxes, removed: r.removed_boxes }
    }
}

/// Right-to-left reading order: descending `ax`, then ascending `ay`.
pub fn sort_right_to_left(boxes: &mut [BBox]) {
    boxes.sort_by(|a, b| b.ax.cmp(&a.ax).then(a.ay.cmp(&b.ay)).then(a.cmp(b)));
}

fn trace(stage: Stage, img: &BinaryImage, components: usize) -> StageTrace {
    StageTrace { stage, foreground: img.foreground_count(), components }
}

/// Binarization step of the pipeline. An image with a single grey level
/// has no contrast to split and comes back blank under automatic
/// thresholding.
pub fn binarize_word(img: &GrayImage, threshold: Option<u8>) -> BinaryImage {
    match threshold {
        Some(t) => binarize(img, t),
        None => {
            let h = histogram(img);
            if h.occupied_levels() < 2 {
                return BinaryImage::zeros(img.width(), img.height()).expect("image is non-empty");
            }
            let t = otsu_threshold(&h).expect("non-empty histogram");
            binarize(img, t)
        }
    }
}

pub fn segment_word(id: &str, img: &GrayImage, cfg: &PipelineConfig) -> SegmentationResult {
    let ink = binarize_word(img, cfg.threshold);
    segment_binary(id, &ink, cfg)
}

/// Runs the pipeline from an already binarized image.
pub fn segment_binary(id: &str, ink: &BinaryImage, cfg: &PipelineConfig) -> SegmentationResult {
    let mut stage_trace = vec![trace(Stage::Binarize, ink, label8(ink).1.len())];

    let connected = match &cfg.cgs {
        Some(cgs) => connect_gaps(ink, cgs),
        None => ink.clone(),
    };
    let (connected_map, connected_comps) = label8(&connected);
    if cfg.cgs.is_some() {
        stage_trace.push(trace(Stage::ConnectGaps, &connected, connected_comps.len()));
    }

    let (labelled_map, comps, to_connected) = if cfg.apply_skeleton {
        let thin = thin_zhang_suen(&connected);
        let (map, comps) = label8(&thin);
        stage_trace.push(trace(Stage::Skeleton, &thin, comps.len()));
        // every skeleton component sits inside one connected component
        let mut to_connected = vec![0u32; comps.len() + 1];
        for (i, &l) in map.labels().iter().enumerate() {
            if l != 0 {
                to_connected[l as usize] = connected_map.labels()[i];
            }
        }
        (map, comps, Some(to_connected))
    } else {
        (connected_map.clone(), connected_comps, None)
    };

    let sized: Vec<Component> = match cfg.area_basis {
        AreaBasis::Labeled => comps,
        AreaBasis::Ink => {
            let mut ink_area = vec![0u64; connected_map.component_count() as usize + 1];
            for (&bit, &l) in ink.bits().iter().zip(connected_map.labels()) {
                if bit != 0 {
                    ink_area[l as usize] += 1;
                }
            }
            comps
                .into_iter()
                .map(|mut c| {
                    let parent = match &to_connected {
                        Some(m) => m[c.label as usize],
                        None => c.label,
                    };
                    c.area = ink_area[parent as usize];
                    c
                })
                .collect()
        }
    };

    let (kept, removed) = filter_small(&sized, cfg.min_area);
    let mut boxes: Vec<BBox> = kept.iter().map(|c| c.bbox).collect();
    let mut removed_boxes: Vec<BBox> = removed.iter().map(|c| c.bbox).collect();
    sort_right_to_left(&mut boxes);
    sort_right_to_left(&mut removed_boxes);

    let kept_labels: Vec<bool> = {
        let mut keep = vec![false; sized.len() + 1];
        for c in &kept {
            keep[c.label as usize] = true;
        }
        keep
    };
    let filtered_bits = labelled_map.labels().iter().map(|&l| kept_labels[l as usize] as u8).collect();
    let filtered = BinaryImage::from_raw(ink.width(), ink.height(), filtered_bits);
    stage_trace.push(trace(Stage::Filter, &filtered, kept.len()));

    SegmentationResult { image_id: id.to_string(), boxes, removed_count: removed.len(), removed_boxes, stage_trace }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountClass {
    Exact,
    Over,
    Under,
}

/// Compares a predicted sub-word count against the true count.
pub fn classify_count(pred_count: usize, truth_count: usize) -> CountClass {
    use std::cmp::Ordering::*;
    match pred_count.cmp(&truth_count) {
        Less => CountClass::Under,
        Greater => CountClass::Over,
        Equal => CountClass::Exact,
    }
}
