//! Netpbm codecs: PBM (P1/P4) and PGM (P2/P5) readers and writers, plus a
//! P6 writer for annotated colour output.

use super::{BinaryImage, GrayImage};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("netpbm parse error at byte {offset}: {message}")]
pub struct NetpbmError {
    pub offset: usize,
    pub message: String,
}

fn err<T>(offset: usize, message: impl Into<String>) -> Result<T, NetpbmError> {
    Err(NetpbmError { offset, message: message.into() })
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn magic(&mut self) -> Result<[u8; 2], NetpbmError> {
        if self.bytes.len() < 2 {
            return err(0, "missing magic number");
        }
        self.pos = 2;
        Ok([self.bytes[0], self.bytes[1]])
    }

    /// Skips whitespace and `#` comments.
    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn uint(&mut self, what: &str) -> Result<usize, NetpbmError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return if self.pos >= self.bytes.len() {
                err(self.pos, format!("truncated data: expected {what}"))
            } else {
                err(self.pos, format!("expected {what}"))
            };
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .map_or_else(|| err(start, format!("{what} out of range")), Ok)
    }

    /// The single whitespace byte separating a binary header from its raster.
    fn raster_separator(&mut self) -> Result<(), NetpbmError> {
        match self.bytes.get(self.pos) {
            Some(c) if c.is_ascii_whitespace() => {
                self.pos += 1;
                Ok(())
            }
            Some(_) => err(self.pos, "expected whitespace before raster data"),
            None => err(self.pos, "truncated data: missing raster"),
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], NetpbmError> {
        let available = self.bytes.len() - self.pos;
        if available < n {
            return err(self.bytes.len(), format!("truncated data: expected {n} raster bytes, found {available}"));
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }
}

fn dimensions(cur: &mut Cursor<'_>) -> Result<(usize, usize), NetpbmError> {
    let at = cur.pos;
    let width = cur.uint("width")?;
    let height = cur.uint("height")?;
    if width == 0 || height == 0 {
        return err(at, format!("invalid dimensions {width}x{height}"));
    }
    if width.checked_mul(height).is_none() {
        return err(at, "image dimensions overflow");
    }
    Ok((width, height))
}

/// Reads a P2 or P5 greymap. Samples are rescaled to 0..=255 when
/// `maxval` is below 255.
pub fn load_pgm(bytes: &[u8]) -> Result<GrayImage, NetpbmError> {
    let mut cur = Cursor::new(bytes);
    let magic = cur.magic()?;
    let ascii = match &magic {
        b"P2" => true,
        b"P5" => false,
        _ => return err(0, format!("bad PGM magic {:?}", String::from_utf8_lossy(&magic))),
    };
    let (width, height) = dimensions(&mut cur)?;
    let maxval_at = {
        cur.skip_ws();
        cur.pos
    };
    let maxval = cur.uint("maxval")?;
    if maxval == 0 || maxval > 255 {
        return err(maxval_at, format!("unsupported maxval {maxval}"));
    }

    let n = width * height;
    let mut data = Vec::with_capacity(n);
    if ascii {
        for _ in 0..n {
            cur.skip_ws();
            let at = cur.pos;
            let v = cur.uint("sample")?;
            if v > maxval {
                return err(at, format!("sample {v} exceeds maxval {maxval}"));
            }
            data.push(v);
        }
    } else {
        cur.raster_separator()?;
        let raster = cur.take(n)?;
        for (i, &v) in raster.iter().enumerate() {
            if v as usize > maxval {
                return err(cur.pos - n + i, format!("sample {v} exceeds maxval {maxval}"));
            }
            data.push(v as usize);
        }
    }
    let data = data
        .into_iter()
        .map(|v| if maxval == 255 { v as u8 } else { ((v * 255 + maxval / 2) / maxval) as u8 })
        .collect();
    Ok(GrayImage::new(width, height, data).expect("dimensions checked"))
}

/// Writes a binary (P5) greymap with maxval 255.
pub fn save_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.data());
    out
}

/// Reads a P1 or P4 bitmap. PBM `1` is black, which is foreground ink.
pub fn load_pbm(bytes: &[u8]) -> Result<BinaryImage, NetpbmError> {
    let mut cur = Cursor::new(bytes);
    let magic = cur.magic()?;
    let ascii = match &magic {
        b"P1" => true,
        b"P4" => false,
        _ => return err(0, format!("bad PBM magic {:?}", String::from_utf8_lossy(&magic))),
    };
    let (width, height) = dimensions(&mut cur)?;
    let n = width * height;
    let mut bits = Vec::with_capacity(n);
    if ascii {
        // P1 samples may be packed without separators.
        while bits.len() < n {
            cur.skip_ws();
            match cur.bytes.get(cur.pos) {
                Some(b'0') => bits.push(0),
                Some(b'1') => bits.push(1),
                Some(&c) => {
                    return err(cur.pos, format!("unexpected byte {c:#04x} in P1 raster"));
                }
                None => {
                    return err(cur.pos, format!("truncated data: {} of {n} pixels present", bits.len()));
                }
            }
            cur.pos += 1;
        }
    } else {
        cur.raster_separator()?;
        let stride = width.div_ceil(8);
        let raster = cur.take(stride * height)?;
        for row in raster.chunks_exact(stride) {
            for x in 0..width {
                bits.push((row[x / 8] >> (7 - x % 8)) & 1);
            }
        }
    }
    Ok(BinaryImage::new(width, height, bits).expect("dimensions checked"))
}

/// Writes a packed (P4) bitmap, MSB first, rows padded to whole bytes.
pub fn save_pbm(img: &BinaryImage) -> Vec<u8> {
    let (w, h) = (img.width(), img.height());
    let mut out = format!("P4\n{w} {h}\n").into_bytes();
    let stride = w.div_ceil(8);
    for row in img.bits().chunks_exact(w) {
        let mut packed = vec![0u8; stride];
        for (x, &b) in row.iter().enumerate() {
            packed[x / 8] |= b << (7 - x % 8);
        }
        out.extend_from_slice(&packed);
    }
    debug_assert_eq!(out.len(), format!("P4\n{w} {h}\n").len() + stride * h);
    out
}

/// Writes a P6 pixmap from interleaved RGB triples.
///
/// # Panics
/// If `rgb.len() != width * height * 3`.
pub fn save_ppm(width: usize, height: usize, rgb: &[u8]) -> Vec<u8> {
    assert_eq!(rgb.len(), width * height * 3, "rgb buffer size");
    let mut out = format!("P6\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(rgb);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_binary_and_ascii() {
        let mut bytes = b"P5 2 1 255\n".to_vec();
        bytes.extend_from_slice(&[0x00, 0xFF]);
        let img = load_pgm(&bytes).unwrap();
        assert_eq!((img.width(), img.height()), (2, 1));
        assert_eq!(img.data(), &[0, 255]);

        let img = load_pgm(b"P2 1 1 255\n128\n").unwrap();
        assert_eq!(img.data(), &[128]);
    }

    #[test]
    fn pgm_comments_and_rescale() {
        let img = load_pgm(b"P2\n# a comment\n2 1\n# another\n15\n0 15\n").unwrap();
        assert_eq!(img.data(), &[0, 255]);
    }

    #[test]
    fn pgm_errors_carry_offsets() {
        let e = load_pgm(b"P9 1 1 255\n0").unwrap_err();
        assert_eq!(e.offset, 0);
        assert!(e.message.contains("magic"));

        let e = load_pgm(b"P5 1 1 65535\n\0\0").unwrap_err();
        assert_eq!(e.offset, 7);
        assert!(e.message.contains("maxval"));

        let e = load_pgm(b"P5 3 1 255\n\x01").unwrap_err();
        assert!(e.message.contains("truncated"));
        assert_eq!(e.offset, 12);

        let e = load_pgm(b"P2 2 1 255\n1").unwrap_err();
        assert!(e.message.contains("truncated"));

        let e = load_pgm(b"P2 1 1 10\n11").unwrap_err();
        assert!(e.message.contains("exceeds"));
    }

    #[test]
    fn pbm_ascii_packed_and_spaced() {
        let img = load_pbm(b"P1 2 2\n1 0 0 1\n").unwrap();
        assert_eq!(img.bits(), &[1, 0, 0, 1]);
        let img = load_pbm(b"P1 2 2\n1001").unwrap();
        assert_eq!(img.bits(), &[1, 0, 0, 1]);
    }

    #[test]
    fn pbm_p4_width_seven_uses_one_byte_per_row() {
        // 0b1010_1011: the trailing padding bit must be ignored
        let mut bytes = b"P4\n7 2\n".to_vec();
        bytes.extend_from_slice(&[0b1010_1011, 0b0000_0011]);
        let img = load_pbm(&bytes).unwrap();
        assert_eq!(img.bits(), &[1, 0, 1, 0, 1, 0, 1, 0, 0, 0, 0, 0, 0, 1]);

        let saved = save_pbm(&img);
        assert_eq!(saved.len(), b"P4\n7 2\n".len() + 2);
        assert_eq!(load_pbm(&saved).unwrap(), img);
    }

    #[test]
    fn pbm_payload_mismatch() {
        assert!(load_pbm(b"P4\n9 2\n\xff\xff\xff").unwrap_err().message.contains("truncated"));
        assert!(load_pbm(b"P1 2 2\n1 0 1").is_err());
        assert!(load_pbm(b"P1 1 1\n2").is_err());
        assert!(load_pbm(b"P1 0 1\n").is_err());
    }

    #[test]
    fn ppm_header() {
        let out = save_ppm(1, 1, &[1, 2, 3]);
        assert_eq!(out, b"P6\n1 1\n255\n\x01\x02\x03");
    }
}
