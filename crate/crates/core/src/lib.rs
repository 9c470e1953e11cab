//! Sub-word segmentation of offline handwritten Arabic word images.
//!
//! A word image is binarized with Otsu's method, broken strokes are
//! reconnected with three neighbour-rule operators, and the 8-connected
//! components that survive a small-diacritic filter become sub-word boxes.
//! The crate also carries the ground-truth format, a deterministic
//! synthetic word generator, and the box-matching evaluation harness.

pub mod components;
pub mod evaluation;
pub mod groundtruth;
pub mod morphology;
pub mod raster;
pub mod segmenter;
pub mod skeleton;
pub mod synthesis;

pub use components::{filter_small, label8, BBox, Component, LabelMap};
pub use morphology::{bridge, connect_gaps, dilate8, majority_fill, BridgeRule, CgsConfig};
pub use raster::{binarize, histogram, otsu_threshold, BinaryImage, GrayImage, Histogram};
pub use segmenter::{classify_count, segment_word, CountClass, PipelineConfig, SegmentationResult};
pub use skeleton::thin_zhang_suen;
