//! Reference implementations used as oracles, plus random image makers.
#![allow(dead_code)]

use rand::Rng;
use std::collections::VecDeque;
use subwordseg::{BBox, BinaryImage};

/// Breadth-first 8-connected labeling. Labels follow the raster order of
/// each component's first pixel, starting at 1.
pub fn flood_fill(img: &BinaryImage) -> (Vec<u32>, u32) {
    let (w, h) = (img.width(), img.height());
    let mut labels = vec![0u32; w * h];
    let mut next = 0;
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if img.bits()[start] == 0 || labels[start] != 0 {
            continue;
        }
        next += 1;
        labels[start] = next;
        queue.push_back(start);
        while let Some(p) = queue.pop_front() {
            let (x, y) = ((p % w) as isize, (p / w) as isize);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                        continue;
                    }
                    let q = ny as usize * w + nx as usize;
                    if img.bits()[q] == 1 && labels[q] == 0 {
                        labels[q] = next;
                        queue.push_back(q);
                    }
                }
            }
        }
    }
    (labels, next)
}

pub fn count_components(img: &BinaryImage) -> u32 {
    flood_fill(img).1
}

/// Areas and minimal boxes per flood-fill label (index 0 unused).
pub fn oracle_boxes(img: &BinaryImage) -> Vec<(u64, BBox)> {
    let (labels, n) = flood_fill(img);
    let w = img.width();
    let mut out: Vec<Option<(u64, BBox)>> = vec![None; n as usize + 1];
    for (i, &l) in labels.iter().enumerate() {
        if l == 0 {
            continue;
        }
        let p = BBox::point((i % w) as u32, (i / w) as u32);
        out[l as usize] = Some(match out[l as usize] {
            None => (1, p),
            Some((a, b)) => (a + 1, b.merge(&p)),
        });
    }
    out.into_iter().skip(1).map(Option::unwrap).collect()
}

/// Exhaustive Otsu: tries every split and keeps the first with the largest
/// between-class variance, compared as exact fractions. Class 0 holds the
/// levels at or below the split. Needs bins small enough for `u128`.
pub fn brute_otsu(bins: &[u64; 256]) -> u8 {
    let n: u128 = bins.iter().map(|&b| b as u128).sum();
    let s: u128 = bins.iter().enumerate().map(|(i, &b)| i as u128 * b as u128).sum();
    let mut best: Option<(u8, u128, u128)> = None;
    for t in 0..256usize {
        let n0: u128 = bins[..=t].iter().map(|&b| b as u128).sum();
        let s0: u128 = bins[..=t].iter().enumerate().map(|(i, &b)| i as u128 * b as u128).sum();
        let n1 = n - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        // mean difference times n0*n1 is s0*n1 - s1*n0
        let s1 = s - s0;
        let d = (s0 * n1).abs_diff(s1 * n0);
        let (num, den) = (d * d, n0 * n1);
        let better = match best {
            None => true,
            Some((_, bn, bd)) => num * bd > bn * den,
        };
        if better {
            best = Some((t as u8, num, den));
        }
    }
    match best {
        Some((t, _, _)) => t,
        None => bins.iter().position(|&b| b > 0).expect("non-empty histogram") as u8,
    }
}

pub fn random_image(rng: &mut impl Rng, w: usize, h: usize, density: f64) -> BinaryImage {
    BinaryImage::from_fn(w, h, |_, _| rng.random_bool(density)).unwrap()
}

/// Thick random polylines: a few strokes of 3 to 5 pixel wide square pens.
pub fn stroke_image(rng: &mut impl Rng, w: usize, h: usize) -> BinaryImage {
    let mut img = BinaryImage::zeros(w, h).unwrap();
    for _ in 0..rng.random_range(1..=4) {
        let pen = rng.random_range(3..=5) as isize;
        let mut p = (rng.random_range(0..w) as isize, rng.random_range(0..h) as isize);
        for _ in 0..rng.random_range(1..=3) {
            let q = (rng.random_range(0..w) as isize, rng.random_range(0..h) as isize);
            let steps = (q.0 - p.0).abs().max((q.1 - p.1).abs()).max(1);
            for k in 0..=steps {
                let cx = p.0 + (q.0 - p.0) * k / steps;
                let cy = p.1 + (q.1 - p.1) * k / steps;
                for y in cy..cy + pen {
                    for x in cx..cx + pen {
                        if x < w as isize && y < h as isize {
                            img.set(x as usize, y as usize, true);
                        }
                    }
                }
            }
            p = q;
        }
    }
    img
}

/// Same operator applied to the image rotated by 180 degrees and rotated
/// back; a synchronous neighbour rule gives the same result either way.
pub fn rotate180(img: &BinaryImage) -> BinaryImage {
    let mut bits = img.bits().to_vec();
    bits.reverse();
    BinaryImage::new(img.width(), img.height(), bits).unwrap()
}
