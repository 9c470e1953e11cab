//! Raster data model, histogramming and Otsu binarization.
//!
//! Coordinates are `x` = column from the left and `y` = row from the top,
//! both 0-based, with row-major storage. In a [`BinaryImage`] a set bit
//! (`1`) is foreground ink.

mod netpbm;

pub use netpbm::{load_pbm, load_pgm, save_pbm, save_pgm, save_ppm, NetpbmError};

use num_bigint::{BigInt, BigUint};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RasterError {
    #[error("image dimensions must be at least 1x1, got {width}x{height}")]
    EmptyDimensions { width: usize, height: usize },
    #[error("pixel buffer holds {actual} values, expected {expected}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("binary pixel at index {index} is {value}, expected 0 or 1")]
    NotBinary { index: usize, value: u8 },
    #[error("empty histogram")]
    EmptyHistogram,
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<(), RasterError> {
    if width == 0 || height == 0 {
        return Err(RasterError::EmptyDimensions { width, height });
    }
    let expected = width * height;
    if len != expected {
        return Err(RasterError::LengthMismatch { expected, actual: len });
    }
    Ok(())
}

/// 8-bit greyscale image.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self, RasterError> {
        check_dims(width, height, data.len())?;
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self, RasterError> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.data[y * self.width + x] = value;
    }
}

/// Bilevel image, one byte per pixel holding 0 or 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    bits: Vec<u8>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, bits: Vec<u8>) -> Result<Self, RasterError> {
        check_dims(width, height, bits.len())?;
        if let Some((index, &value)) = bits.iter().enumerate().find(|(_, &b)| b > 1) {
            return Err(RasterError::NotBinary { index, value });
        }
        Ok(Self { width, height, bits })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self, RasterError> {
        Self::new(width, height, vec![0; width * height])
    }

    /// Builds an image from `f(x, y)`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Result<Self, RasterError> {
        check_dims(width, height, width * height)?;
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y) as u8);
            }
        }
        Ok(Self { width, height, bits })
    }

    /// Internal constructor for buffers already known to be valid.
    pub(crate) fn from_raw(width: usize, height: usize, bits: Vec<u8>) -> Self {
        debug_assert_eq!(bits.len(), width * height);
        Self { width, height, bits }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x] != 0
    }

    pub fn set(&mut self, x: usize, y: usize, on: bool) {
        self.bits[y * self.width + x] = on as u8;
    }

    /// Value at signed coordinates; anything outside the frame reads as 0.
    pub fn get_or_zero(&self, x: isize, y: isize) -> bool {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            return false;
        }
        self.get(x as usize, y as usize)
    }

    pub fn foreground_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b != 0).count()
    }

    /// True when every foreground pixel of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &BinaryImage) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.bits.iter().zip(&other.bits).all(|(&a, &b)| a <= b)
    }

    /// Pixel-wise OR of two same-sized images.
    ///
    /// # Panics
    /// If the dimensions differ.
    pub fn union(&self, other: &BinaryImage) -> BinaryImage {
        assert_eq!((self.width, self.height), (other.width, other.height), "union of differently sized images");
        let bits = self.bits.iter().zip(&other.bits).map(|(&a, &b)| a | b).collect();
        BinaryImage::from_raw(self.width, self.height, bits)
    }
}

/// 256-bin intensity histogram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    bins: [u64; 256],
    total: u64,
}

impl Histogram {
    pub fn from_bins(bins: [u64; 256]) -> Self {
        let total = bins.iter().sum();
        Self { bins, total }
    }

    pub fn bins(&self) -> &[u64; 256] {
        &self.bins
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of intensity levels with a nonzero count.
    pub fn occupied_levels(&self) -> usize {
        self.bins.iter().filter(|&&c| c > 0).count()
    }
}

pub fn histogram(img: &GrayImage) -> Histogram {
    let mut bins = [0u64; 256];
    for &v in img.data() {
        bins[v as usize] += 1;
    }
    Histogram::from_bins(bins)
}

/// Otsu's threshold: the smallest `t` maximizing the between-class variance
/// `w0 * w1 * (m0 - m1)^2`, class 0 being intensities `<= t`.
///
/// Scores are compared exactly. Scaled by `N^2` the variance at `t` equals
/// `(s0*N - S*n0)^2 / (n0 * n1)` where `n0`/`s0` are the count and intensity
/// sum of class 0 and `N`/`S` are the totals, so candidates are ranked by
/// cross-multiplying integer fractions.
///
/// A histogram with a single occupied level has zero between-class variance
/// at every threshold; that level itself is returned so the result still
/// names an intensity that actually occurs.
pub fn otsu_threshold(h: &Histogram) -> Result<u8, RasterError> {
    if h.total == 0 {
        return Err(RasterError::EmptyHistogram);
    }
    if h.occupied_levels() == 1 {
        let level = h.bins.iter().position(|&c| c > 0).unwrap_or(0);
        return Ok(level as u8);
    }

    let total = BigInt::from(h.total);
    let total_sum: BigInt = h.bins.iter().enumerate().map(|(v, &c)| BigInt::from(v as u64 * c)).sum();

    // best score as numerator / denominator; starts at 0/1
    let mut best_t = 0u8;
    let mut best_num = BigUint::from(0u8);
    let mut best_den = BigUint::from(1u8);

    let mut n0: u64 = 0;
    let mut s0: u128 = 0;
    for t in 0..256usize {
        n0 += h.bins[t];
        s0 += t as u128 * h.bins[t] as u128;
        let n1 = h.total - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let diff = BigInt::from(s0) * &total - &total_sum * BigInt::from(n0);
        let num = diff.magnitude().pow(2);
        let den = BigUint::from(n0) * BigUint::from(n1);
        if &num * &best_den > &best_num * &den {
            best_t = t as u8;
            best_num = num;
            best_den = den;
        }
    }
    Ok(best_t)
}

/// Foreground ink is dark: a pixel is set when its intensity is `<= t`.
pub fn binarize(img: &GrayImage, t: u8) -> BinaryImage {
    let bits = img.data().iter().map(|&v| (v <= t) as u8).collect();
    BinaryImage::from_raw(img.width(), img.height(), bits)
}
