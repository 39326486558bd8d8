//! Portable graymap codec (P2 and P5).

use crate::error::{Error, Result};
use crate::saliency::GrayImage;

/// Largest accepted pixel count.
pub const MAX_PIXELS: usize = 1 << 28;

fn fail(offset: usize, reason: impl Into<String>) -> Error {
    Error::Format {
        what: "PGM",
        position: format!("byte {offset}"),
        reason: reason.into(),
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_space(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n' && c != b'\r') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    /// Next decimal token and its offset.
    fn number(&mut self, what: &str) -> Result<(u64, usize)> {
        self.skip_space();
        let start = self.pos;
        let mut value: u64 = 0;
        while let Some(&b) = self.bytes.get(self.pos).filter(|b| b.is_ascii_digit()) {
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add(u64::from(b - b'0')))
                .ok_or_else(|| fail(start, format!("{what} overflows")))?;
            self.pos += 1;
        }
        if self.pos == start {
            return Err(match self.bytes.get(start) {
                None => fail(start, format!("truncated: expected {what}")),
                Some(&b) => fail(start, format!("expected {what}, found {:?}", b as char)),
            });
        }
        match self.bytes.get(self.pos) {
            None => Ok((value, start)),
            Some(b) if b.is_ascii_whitespace() || *b == b'#' => Ok((value, start)),
            Some(&b) => Err(fail(self.pos, format!("unexpected {:?} after {what}", b as char))),
        }
    }
}

pub fn read_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let binary = match bytes.get(..2) {
        Some(b"P2") => false,
        Some(b"P5") => true,
        _ => return Err(fail(0, "bad magic number, expected P2 or P5")),
    };
    let mut c = Cursor { bytes, pos: 2 };
    if !c.bytes.get(2).is_some_and(|b| b.is_ascii_whitespace() || *b == b'#') {
        return Err(fail(2, "expected whitespace after magic number"));
    }
    let (width, dims_at) = c.number("width")?;
    let (height, _) = c.number("height")?;
    if width == 0 || height == 0 {
        return Err(fail(dims_at, "width and height must be positive"));
    }
    let pixels = usize::try_from(width)
        .ok()
        .zip(usize::try_from(height).ok())
        .and_then(|(w, h)| w.checked_mul(h))
        .filter(|&n| n <= MAX_PIXELS)
        .ok_or_else(|| fail(dims_at, format!("dimension overflow ({width}x{height})")))?;
    let (maxval, max_at) = c.number("maxval")?;
    if !(1..=65535).contains(&maxval) {
        return Err(fail(max_at, format!("maxval {maxval} outside 1..=65535")));
    }
    let scale = maxval as f64;
    let mut data = Vec::with_capacity(pixels);
    if binary {
        if !c.bytes.get(c.pos).is_some_and(|b| b.is_ascii_whitespace()) {
            return Err(fail(c.pos, "expected a single whitespace byte before the raster"));
        }
        c.pos += 1;
        let depth = if maxval > 255 { 2 } else { 1 };
        let need = pixels * depth;
        let raster = &bytes[c.pos..];
        if raster.len() < need {
            return Err(fail(
                bytes.len(),
                format!("truncated raster: {} of {need} bytes", raster.len()),
            ));
        }
        if raster.len() > need {
            return Err(fail(c.pos + need, "trailing data after raster"));
        }
        for (i, chunk) in raster.chunks_exact(depth).enumerate() {
            let v = if depth == 2 {
                u64::from(u16::from_be_bytes([chunk[0], chunk[1]]))
            } else {
                u64::from(chunk[0])
            };
            if v > maxval {
                return Err(fail(c.pos + i * depth, format!("sample {v} exceeds maxval {maxval}")));
            }
            data.push(v as f64 / scale);
        }
    } else {
        for _ in 0..pixels {
            let (v, at) = c.number("sample")?;
            if v > maxval {
                return Err(fail(at, format!("sample {v} exceeds maxval {maxval}")));
            }
            data.push(v as f64 / scale);
        }
        c.skip_space();
        if c.pos != bytes.len() {
            return Err(fail(c.pos, "trailing data after raster"));
        }
    }
    GrayImage::new(width as usize, height as usize, data)
}

/// Binary graymap with maxval 255; values are clamped to [0, 1] and
/// rounded half up.
pub fn write_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(
        img.data()
            .iter()
            .map(|v| (v.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8),
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ascii_two_by_two() {
        let img = read_pgm(b"P2 2 2 255 0 255 0 255").unwrap();
        assert_eq!(img.data(), &[0.0, 1.0, 0.0, 1.0]);
        assert_eq!((img.width(), img.height()), (2, 2));
    }

    #[test]
    fn sixteen_bit_normalization() {
        assert_eq!(read_pgm(b"P2\n1 1\n65535\n65535\n").unwrap().data(), &[1.0]);
        let bin = [b"P5 2 1 65535\n".as_slice(), &[0xff, 0xff, 0x80, 0x00]].concat();
        let img = read_pgm(&bin).unwrap();
        assert_eq!(img.get(0, 0), 1.0);
        assert_eq!(img.get(1, 0), 32768.0 / 65535.0);
    }

    #[test]
    fn comments_in_header() {
        let img = read_pgm(b"P2\n# made by hand\n3 1 # width height\n# max\n4\n0 2 4\n").unwrap();
        assert_eq!(img.data(), &[0.0, 0.5, 1.0]);
    }

    #[test]
    fn binary_round_trip_is_byte_identical() {
        let payload: Vec<u8> = (0..=255u8).chain(0..=255u8).collect();
        let file = [b"P5\n32 16\n255\n".as_slice(), &payload].concat();
        assert_eq!(write_pgm(&read_pgm(&file).unwrap()), file);
    }

    #[test]
    fn rounding_half_up() {
        let img = GrayImage::new(3, 1, vec![0.5 / 255.0, 1.5 / 255.0, 2.0]).unwrap();
        assert_eq!(&write_pgm(&img)[11..], &[1, 2, 255]);
    }

    fn offset_of(err: Error) -> String {
        match err {
            Error::Format { position, .. } => position,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejections_carry_offsets() {
        assert_eq!(offset_of(read_pgm(b"P6 1 1 255 0").unwrap_err()), "byte 0");
        assert_eq!(offset_of(read_pgm(b"P2 1 1 255 256").unwrap_err()), "byte 11");
        assert_eq!(offset_of(read_pgm(b"P5 2 2 255\n\x01\x02").unwrap_err()), "byte 13");
        assert_eq!(offset_of(read_pgm(b"P2 1 1 0 0").unwrap_err()), "byte 7");
        assert_eq!(offset_of(read_pgm(b"P2 99999999 99999999 255 0").unwrap_err()), "byte 3");
        assert_eq!(offset_of(read_pgm(b"P2 1 1 255 0 7").unwrap_err()), "byte 13");
        assert_eq!(offset_of(read_pgm(b"P2 1x 1 255 0").unwrap_err()), "byte 4");
    }

    proptest! {
        #[test]
        fn ascii_and_binary_agree(w in 1usize..12, h in 1usize..12, seed in any::<u64>()) {
            let mut rng = crate::rng::RandomSource::new(seed);
            let px: Vec<u8> = (0..w * h).map(|_| rng.below(256) as u8).collect();
            let ascii = format!("P2\n{w} {h}\n255\n{}\n", px.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" "));
            let bin = [format!("P5 {w} {h} 255\n").into_bytes(), px.clone()].concat();
            let a = read_pgm(ascii.as_bytes()).unwrap();
            prop_assert_eq!(&a, &read_pgm(&bin).unwrap());
            prop_assert_eq!(&write_pgm(&a)[format!("P5\n{w} {h}\n255\n").len()..], &px[..]);
        }
    }
}
