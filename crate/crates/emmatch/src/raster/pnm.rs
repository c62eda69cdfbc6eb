//! Netpbm readers and writers: PGM (P2/P5) and PPM (P3/P6), maxval up
//! to 255. Color input is converted to luminance with the 0.299 / 0.587
//! / 0.114 weights.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::GrayImage;

const LUMA_R: f64 = 0.299;
const LUMA_G: f64 = 0.587;
const LUMA_B: f64 = 0.114;

/// Loads a PGM or PPM file as a grayscale image.
pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let data = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&data).map_err(|msg| Error::Format(format!("{}: {msg}", path.display())))
}

/// Writes `img` as a binary PGM (P5), quantizing intensities with
/// round-half-up and clamping to `[0, 255]`.
pub fn save_image(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::with_capacity(img.width() * img.height() + 32);
    out.extend_from_slice(format!("P5\n{} {}\n255\n", img.width(), img.height()).as_bytes());
    out.extend(img.pixels().iter().map(|&v| quantize(v)));
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Writes `img` as an ASCII PGM (P2) with the same quantization rule.
pub fn save_image_ascii(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    out.push_str(&format!("P2\n{} {}\n255\n", img.width(), img.height()));
    for row in img.pixels().chunks(img.width()) {
        let line: Vec<String> = row.iter().map(|&v| quantize(v).to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    fs::write(path, out.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Round-half-up to an integer intensity, clamped to `[0, 255]`.
#[inline]
pub fn quantize(v: f64) -> u8 {
    (v + 0.5).floor().clamp(0.0, 255.0) as u8
}

struct Tokens<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(data: &'a [u8]) -> Self {
        Tokens { data, pos: 0 }
    }

    /// Next whitespace-delimited token, skipping `#` comments.
    fn next(&mut self) -> Option<&'a [u8]> {
        loop {
            while self.pos < self.data.len() && self.data[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos >= self.data.len() {
                return None;
            }
            if self.data[self.pos] == b'#' {
                while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            let start = self.pos;
            while self.pos < self.data.len()
                && !self.data[self.pos].is_ascii_whitespace()
                && self.data[self.pos] != b'#'
            {
                self.pos += 1;
            }
            return Some(&self.data[start..self.pos]);
        }
    }

    fn next_usize(&mut self, what: &str) -> std::result::Result<usize, String> {
        let tok = self.next().ok_or_else(|| format!("missing {what}"))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format!("invalid {what}"))
    }

    /// Position just past the single whitespace byte that terminates the
    /// header before binary sample data.
    fn binary_start(&mut self) -> std::result::Result<usize, String> {
        if self.pos < self.data.len() && self.data[self.pos].is_ascii_whitespace() {
            Ok(self.pos + 1)
        } else {
            Err("missing whitespace before binary data".into())
        }
    }
}

fn decode(data: &[u8]) -> std::result::Result<GrayImage, String> {
    if data.len() < 2 {
        return Err("file too short".into());
    }
    let magic = &data[..2];
    let (channels, binary) = match magic {
        b"P2" => (1, false),
        b"P3" => (3, false),
        b"P5" => (1, true),
        b"P6" => (3, true),
        _ => {
            return Err(format!(
                "unsupported magic {:?} (expected P2/P3/P5/P6)",
                String::from_utf8_lossy(magic)
            ))
        }
    };
    let mut toks = Tokens::new(&data[2..]);
    let width = toks.next_usize("width")?;
    let height = toks.next_usize("height")?;
    let maxval = toks.next_usize("maxval")?;
    if width == 0 || height == 0 {
        return Err("zero-dimension image".into());
    }
    if maxval == 0 || maxval > 255 {
        return Err(format!("unsupported maxval {maxval} (expected 1..=255)"));
    }
    let scale = 255.0 / maxval as f64;
    let count = width * height * channels;

    let samples: Vec<f64> = if binary {
        let start = toks.binary_start()? + 2; // offset past magic
        let raw = &data[start..];
        if raw.len() < count {
            return Err(format!(
                "truncated pixel data: expected {count} bytes, found {}",
                raw.len()
            ));
        }
        raw[..count].iter().map(|&b| b as f64 * scale).collect()
    } else {
        let mut v = Vec::with_capacity(count);
        for _ in 0..count {
            v.push(toks.next_usize("pixel sample")? as f64 * scale);
        }
        v
    };

    let pixels = if channels == 1 {
        samples
    } else {
        samples
            .chunks_exact(3)
            .map(|rgb| LUMA_R * rgb[0] + LUMA_G * rgb[1] + LUMA_B * rgb[2])
            .collect()
    };
    GrayImage::new(width, height, pixels).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decode_p2_2x2() {
        let img = decode(b"P2\n2 2\n255\n0 10\n20 30\n").unwrap();
        assert_eq!(img.width(), 2);
        assert_eq!(img.height(), 2);
        assert_eq!(img.pixels(), &[0.0, 10.0, 20.0, 30.0]);
    }

    #[test]
    fn decode_skips_comments() {
        let img = decode(b"P2 # ascii pgm\n# another comment\n2 1 255\n7 9\n").unwrap();
        assert_eq!(img.pixels(), &[7.0, 9.0]);
    }

    #[test]
    fn ppm_white_pixel_is_255() {
        let img = decode(b"P3\n1 1\n255\n255 255 255\n").unwrap();
        assert!((img.get(0, 0) - 255.0).abs() < 1e-12);
    }

    #[test]
    fn p5_round_trip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rt.pgm");
        let mut img = GrayImage::filled(32, 32, 0.0).unwrap();
        for y in 8..24 {
            for x in 10..22 {
                img.set(x, y, 255.0);
            }
        }
        save_image(&img, &path).unwrap();
        let back = load_image(&path).unwrap();
        assert_eq!(back, img);
        // Saving again yields bit-identical bytes.
        let path2 = dir.path().join("rt2.pgm");
        save_image(&back, &path2).unwrap();
        assert_eq!(fs::read(&path).unwrap(), fs::read(&path2).unwrap());
    }

    #[test]
    fn p2_round_trip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rt.pgm");
        let img = GrayImage::new(3, 2, vec![0.0, 1.0, 2.0, 253.0, 254.0, 255.0]).unwrap();
        save_image_ascii(&img, &path).unwrap();
        assert_eq!(load_image(&path).unwrap(), img);
    }

    #[test]
    fn save_single_gray_pixel() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("one.pgm");
        let img = GrayImage::new(1, 1, vec![128.0]).unwrap();
        save_image(&img, &path).unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"P5\n1 1\n255\n\x80");
    }

    #[test]
    fn quantize_rounds_half_up_and_clamps() {
        assert_eq!(quantize(127.6), 128);
        assert_eq!(quantize(127.5), 128);
        assert_eq!(quantize(127.4), 127);
        assert_eq!(quantize(-3.0), 0);
        assert_eq!(quantize(300.0), 255);
    }

    #[test]
    fn maxval_scaling() {
        let img = decode(b"P2\n1 1\n15\n15\n").unwrap();
        assert!((img.get(0, 0) - 255.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_garbage() {
        assert!(decode(b"P7\n1 1\n255\n0").is_err());
        assert!(decode(b"P2\n0 1\n255\n").is_err());
        assert!(decode(b"P5\n2 2\n255\nab").is_err()); // truncated
        assert!(decode(b"P2\n1 1\n300\n10\n").is_err());
    }

    #[test]
    fn load_missing_file_is_io_error() {
        let err = load_image("/nonexistent/path/x.pgm").unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }
}
