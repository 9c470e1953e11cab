//! Neighbour-rule operators used to reconnect broken strokes.
//!
//! Every operator is synchronous: each output pixel is decided from the
//! input image alone. Pixels outside the frame count as background. None
//! of the operators ever clears a foreground pixel.

use crate::raster::BinaryImage;
use serde::{Deserialize, Serialize};

/// Ring order of the eight neighbours, clockwise from north:
/// N, NE, E, SE, S, SW, W, NW.
pub(crate) const RING: [(isize, isize); 8] = [(0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1)];

/// Neighbour pattern of `(x, y)` as a bit mask in [`RING`] order.
pub(crate) fn ring_mask(img: &BinaryImage, x: usize, y: usize) -> u8 {
    let (x, y) = (x as isize, y as isize);
    RING.iter().enumerate().fold(0u8, |m, (i, &(dx, dy))| m | ((img.get_or_zero(x + dx, y + dy) as u8) << i))
}

/// Which rule [`bridge`] applies to a background pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BridgeRule {
    /// Set when exactly two of the eight neighbours are foreground.
    #[default]
    ExactlyTwo,
    /// Set when the foreground neighbours form two or more groups that are
    /// not 8-connected to each other inside the neighbourhood.
    MatlabBridge,
}

/// Repeat counts for the gap-connection composite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CgsConfig {
    pub dilate_iters: u32,
    pub bridge_iters: u32,
    pub majority_iters: u32,
    pub bridge_rule: BridgeRule,
}

impl Default for CgsConfig {
    fn default() -> Self {
        Self { dilate_iters: 4, bridge_iters: 2, majority_iters: 2, bridge_rule: BridgeRule::ExactlyTwo }
    }
}

fn map_background(img: &BinaryImage, mut rule: impl FnMut(u8) -> bool) -> BinaryImage {
    let (w, h) = (img.width(), img.height());
    let mut out = img.bits().to_vec();
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if out[i] == 0 && rule(ring_mask(img, x, y)) {
                out[i] = 1;
            }
        }
    }
    BinaryImage::from_raw(w, h, out)
}

/// Dilation by the 3x3 square.
pub fn dilate8(img: &BinaryImage) -> BinaryImage {
    map_background(img, |mask| mask != 0)
}

/// Number of 8-connected groups formed by the set neighbours of a pixel,
/// the centre excluded. Two ring cells touch when they are consecutive on
/// the ring, or when both are edge cells (N/E/S/W) one step apart, which
/// are diagonal to each other.
pub(crate) fn ring_groups(mask: u8) -> u32 {
    let adjacent = |a: usize, b: usize| {
        let d = (a + 8 - b) % 8;
        d == 1 || d == 7 || (a.is_multiple_of(2) && b.is_multiple_of(2) && (d == 2 || d == 6))
    };
    let mut seen = 0u8;
    let mut groups = 0;
    for start in 0..8 {
        if mask & (1 << start) == 0 || seen & (1 << start) != 0 {
            continue;
        }
        groups += 1;
        let mut stack = vec![start];
        seen |= 1 << start;
        while let Some(a) = stack.pop() {
            for b in 0..8 {
                if mask & (1 << b) != 0 && seen & (1 << b) == 0 && adjacent(a, b) {
                    seen |= 1 << b;
                    stack.push(b);
                }
            }
        }
    }
    groups
}

pub fn bridge(img: &BinaryImage, rule: BridgeRule) -> BinaryImage {
    match rule {
        BridgeRule::ExactlyTwo => map_background(img, |mask| mask.count_ones() == 2),
        BridgeRule::MatlabBridge => map_background(img, |mask| ring_groups(mask) >= 2),
    }
}

/// Sets background pixels with five or more foreground neighbours.
pub fn majority_fill(img: &BinaryImage) -> BinaryImage {
    map_background(img, |mask| mask.count_ones() >= 5)
}

/// Dilation, then bridging, then majority fill, each repeated as configured.
pub fn connect_gaps(img: &BinaryImage, cfg: &CgsConfig) -> BinaryImage {
    let mut out = img.clone();
    for _ in 0..cfg.dilate_iters {
        out = dilate8(&out);
    }
    for _ in 0..cfg.bridge_iters {
        out = bridge(&out, cfg.bridge_rule);
    }
    for _ in 0..cfg.majority_iters {
        out = majority_fill(&out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn img(rows: &[&str]) -> BinaryImage {
        let h = rows.len();
        let w = rows[0].len();
        BinaryImage::from_fn(w, h, |x, y| rows[y].as_bytes()[x] == b'#').unwrap()
    }

    #[test]
    fn dilate_center_pixel_grows_to_square() {
        let src = img(&[".....", ".....", "..#..", ".....", "....."]);
        assert_eq!(dilate8(&src), img(&[".....", ".###.", ".###.", ".###.", "....."]));
    }

    #[test]
    fn dilate_clips_at_border() {
        assert_eq!(dilate8(&img(&["#.", ".."])), img(&["##", "##"]));
        let empty = BinaryImage::zeros(4, 3).unwrap();
        assert_eq!(dilate8(&empty), empty);
    }

    #[test]
    fn bridge_exactly_two() {
        let out = bridge(&img(&["#..", "...", "..#"]), BridgeRule::ExactlyTwo);
        assert!(out.get(1, 1));
        assert_eq!(out.foreground_count(), 3);

        let out = bridge(&img(&["###", "...", "..."]), BridgeRule::ExactlyTwo);
        assert!(!out.get(1, 1), "centre has three neighbours");

        let empty = BinaryImage::zeros(3, 3).unwrap();
        assert_eq!(bridge(&empty, BridgeRule::ExactlyTwo), empty);
    }

    #[test]
    fn ring_group_counts() {
        assert_eq!(ring_groups(0), 0);
        assert_eq!(ring_groups(0b1111_1111), 1);
        // NW and SE only
        assert_eq!(ring_groups(0b1000_1000), 2);
        // N and E touch diagonally
        assert_eq!(ring_groups(0b0000_0101), 1);
        // NW and NE, N clear
        assert_eq!(ring_groups(0b1000_0010), 2);
        // N, S, E, W: each pair of consecutive edge cells touches
        assert_eq!(ring_groups(0b0101_0101), 1);
        // N and S only
        assert_eq!(ring_groups(0b0001_0001), 2);
    }

    #[test]
    fn matlab_bridge_joins_separate_groups_only() {
        let out = bridge(&img(&["#..", "...", "..#"]), BridgeRule::MatlabBridge);
        assert!(out.get(1, 1));
        // two touching neighbours are a single group: no bridge
        let out = bridge(&img(&["##.", "...", "..."]), BridgeRule::MatlabBridge);
        assert!(!out.get(1, 1));
        // three-way split is still bridged, unlike the exactly-two rule
        let src = img(&["#.#", "...", ".#."]);
        assert!(bridge(&src, BridgeRule::MatlabBridge).get(1, 1));
        assert!(!bridge(&src, BridgeRule::ExactlyTwo).get(1, 1));
    }

    #[test]
    fn majority_needs_five() {
        let five = img(&["###", "#.#", "..."]);
        assert!(majority_fill(&five).get(1, 1));
        let four = img(&["###", "#..", "..."]);
        assert!(!majority_fill(&four).get(1, 1));
        let lone = img(&["...", ".#.", "..."]);
        assert_eq!(majority_fill(&lone), lone);
    }

    #[test]
    fn connect_gaps_joins_bars_eight_apart() {
        // two 20x4 bars, 8 empty columns between them
        let src = BinaryImage::from_fn(64, 16, |x, y| {
            (6..10).contains(&y) && ((6..26).contains(&x) || (34..54).contains(&x))
        })
        .unwrap();
        let out = connect_gaps(&src, &CgsConfig::default());
        assert!(src.is_subset_of(&out));
        // every column between the bars is bridged on the bar rows
        assert!((26..34).all(|x| out.get(x, 7)));
    }

    #[test]
    fn connect_gaps_empty_stays_empty() {
        let empty = BinaryImage::zeros(9, 9).unwrap();
        assert_eq!(connect_gaps(&empty, &CgsConfig::default()), empty);
    }

    #[test]
    fn zero_iterations_is_identity() {
        let src = img(&["#.#", "...", ".#."]);
        let cfg = CgsConfig { dilate_iters: 0, bridge_iters: 0, majority_iters: 0, ..Default::default() };
        assert_eq!(connect_gaps(&src, &cfg), src);
    }
}
