//! Zhang-Suen parallel thinning.
//!
//! Neighbours are named p2..p9 clockwise from north (p2 = N, p4 = E,
//! p6 = S, p8 = W). A foreground pixel is deleted in a sub-pass when
//!
//! * 2 <= B(p) <= 6, B being the number of foreground neighbours,
//! * A(p) == 1, A being the number of 0 -> 1 transitions around p2..p9,p2,
//! * p2*p4*p6 == 0 and p4*p6*p8 == 0 (first sub-pass), or
//!   p2*p4*p8 == 0 and p2*p6*p8 == 0 (second sub-pass).
//!
//! Deletions within a sub-pass are decided on the sub-pass input.
//!
//! Like the published algorithm this erases a free-standing 2x2 block
//! completely; strokes at least three pixels thick keep their topology.

use crate::morphology::ring_mask;
use crate::raster::BinaryImage;

const P2: u8 = 1 << 0;
const P4: u8 = 1 << 2;
const P6: u8 = 1 << 4;
const P8: u8 = 1 << 6;

fn transitions(mask: u8) -> u32 {
    // bit i -> bit i+1 around the ring, wrapping p9 -> p2
    (!mask & mask.rotate_right(1)).count_ones()
}

fn all(mask: u8, bits: u8) -> bool {
    mask & bits == bits
}

fn deletable(mask: u8, second: bool) -> bool {
    let b = mask.count_ones();
    if !(2..=6).contains(&b) || transitions(mask) != 1 {
        return false;
    }
    if second {
        !all(mask, P2 | P4 | P8) && !all(mask, P2 | P6 | P8)
    } else {
        !all(mask, P2 | P4 | P6) && !all(mask, P4 | P6 | P8)
    }
}

fn sub_pass(img: &mut BinaryImage, second: bool, marked: &mut Vec<(usize, usize)>) -> usize {
    marked.clear();
    for y in 0..img.height() {
        for x in 0..img.width() {
            if img.get(x, y) && deletable(ring_mask(img, x, y), second) {
                marked.push((x, y));
            }
        }
    }
    for &(x, y) in marked.iter() {
        img.set(x, y, false);
    }
    marked.len()
}

/// Thins foreground strokes to one-pixel-wide paths.
///
/// Stops after an iteration in which neither sub-pass deletes anything, or
/// after `width + height` iterations.
pub fn thin_zhang_suen(img: &BinaryImage) -> BinaryImage {
    let mut out = img.clone();
    let mut marked = Vec::new();
    for _ in 0..img.width() + img.height() {
        let first = sub_pass(&mut out, false, &mut marked);
        let second = sub_pass(&mut out, true, &mut marked);
        if first + second == 0 {
            break;
        }
    }
    out
}
