//! 8-connected component labeling, bounding boxes and small-component
//! filtering.

use crate::raster::BinaryImage;
use serde::{Deserialize, Serialize};

/// Inclusive axis-aligned box: `(ax, ay)` is the upper-left pixel and
/// `(bx, by)` the bottom-right pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BBox {
    pub ax: u32,
    pub ay: u32,
    pub bx: u32,
    pub by: u32,
}

impl BBox {
    /// `None` unless `ax <= bx` and `ay <= by`.
    pub fn new(ax: u32, ay: u32, bx: u32, by: u32) -> Option<Self> {
        (ax <= bx && ay <= by).then_some(Self { ax, ay, bx, by })
    }

    pub fn point(x: u32, y: u32) -> Self {
        Self { ax: x, ay: y, bx: x, by: y }
    }

    pub fn width(&self) -> u64 {
        (self.bx - self.ax) as u64 + 1
    }

    pub fn height(&self) -> u64 {
        (self.by - self.ay) as u64 + 1
    }

    pub fn area(&self) -> u64 {
        self.width() * self.height()
    }

    pub fn contains_point(&self, x: u32, y: u32) -> bool {
        (self.ax..=self.bx).contains(&x) && (self.ay..=self.by).contains(&y)
    }

    pub fn contains(&self, other: &BBox) -> bool {
        self.ax <= other.ax && self.ay <= other.ay && self.bx >= other.bx && self.by >= other.by
    }

    pub fn intersection(&self, other: &BBox) -> Option<BBox> {
        BBox::new(self.ax.max(other.ax), self.ay.max(other.ay), self.bx.min(other.bx), self.by.min(other.by))
    }

    /// Smallest box covering both.
    pub fn merge(&self, other: &BBox) -> BBox {
        BBox {
            ax: self.ax.min(other.ax),
            ay: self.ay.min(other.ay),
            bx: self.bx.max(other.bx),
            by: self.by.max(other.by),
        }
    }

    pub(crate) fn extend(&mut self, x: u32, y: u32) {
        self.ax = self.ax.min(x);
        self.ay = self.ay.min(y);
        self.bx = self.bx.max(x);
        self.by = self.by.max(y);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    /// 1-based label, matching the value stored in the [`LabelMap`].
    pub label: u32,
    /// Foreground pixel count.
    pub area: u64,
    pub bbox: BBox,
}

/// Per-pixel labels, 0 for background and 1..=K for the K components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<u32>,
}

impl LabelMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    pub fn component_count(&self) -> u32 {
        self.labels.iter().copied().max().unwrap_or(0)
    }
}

/// Disjoint sets over provisional labels, union by size with path
/// compression.
struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    fn new() -> Self {
        Self { parent: Vec::new(), size: Vec::new() }
    }

    fn make_set(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        self.size.push(1);
        id
    }

    fn find(&mut self, id: u32) -> u32 {
        let mut root = id;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut cur = id;
        while self.parent[cur as usize] != root {
            let next = self.parent[cur as usize];
            self.parent[cur as usize] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        let (big, small) = if self.size[ra as usize] >= self.size[rb as usize] { (ra, rb) } else { (rb, ra) };
        self.parent[small as usize] = big;
        self.size[big as usize] += self.size[small as usize];
    }
}

/// Two-pass labeling over 8-connectivity.
///
/// Final labels follow the raster-scan order in which each component is
/// first met, so the result is fully determined by the image. Components
/// are returned sorted by label.
pub fn label8(img: &BinaryImage) -> (LabelMap, Vec<Component>) {
    let (w, h) = (img.width(), img.height());
    let bits = img.bits();
    const NONE: u32 = u32::MAX;
    let mut provisional = vec![NONE; w * h];
    let mut sets = UnionFind::new();

    // first pass: scan mask is W, NW, N, NE
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if bits[i] == 0 {
                continue;
            }
            let mut current = NONE;
            let mut visit = |j: usize, sets: &mut UnionFind| {
                let l = provisional[j];
                if l == NONE {
                    return;
                }
                if current == NONE {
                    current = l;
                } else {
                    sets.union(current, l);
                }
            };
            if x > 0 {
                visit(i - 1, &mut sets);
            }
            if y > 0 {
                let up = i - w;
                if x > 0 {
                    visit(up - 1, &mut sets);
                }
                visit(up, &mut sets);
                if x + 1 < w {
                    visit(up + 1, &mut sets);
                }
            }
            provisional[i] = if current == NONE { sets.make_set() } else { current };
        }
    }

    // second pass: resolve roots and renumber densely in scan order
    let mut final_of_root = vec![0u32; sets.parent.len()];
    let mut labels = vec![0u32; w * h];
    let mut comps: Vec<Component> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if provisional[i] == NONE {
                continue;
            }
            let root = sets.find(provisional[i]) as usize;
            if final_of_root[root] == 0 {
                comps.push(Component { label: comps.len() as u32 + 1, area: 0, bbox: BBox::point(x as u32, y as u32) });
                final_of_root[root] = comps.len() as u32;
            }
            let label = final_of_root[root];
            labels[i] = label;
            let c = &mut comps[label as usize - 1];
            c.area += 1;
            c.bbox.extend(x as u32, y as u32);
        }
    }
    (LabelMap { width: w, height: h, labels }, comps)
}

/// Splits components into `(kept, removed)`; removed are those with
/// `area < min_area`. Both halves keep the input order.
pub fn filter_small(comps: &[Component], min_area: u64) -> (Vec<Component>, Vec<Component>) {
    comps.iter().cloned().partition(|c| c.area >= min_area)
}
