//! sRGB frame container and binary PPM (P6) reading/writing.
//!
//! P6 is the mandatory interchange format: a text header (`P6`, width,
//! height, maxval, with `#` comments allowed between tokens), one whitespace
//! byte, then width×height×3 raw bytes. Only maxval 255 is supported.

use crate::color::SrgbColor;
use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("not a P6 PPM file (magic `{0}`)")]
    BadMagic(String),
    #[error("malformed PPM header: {0}")]
    MalformedHeader(String),
    #[error("unsupported PPM maxval {0} (must be 255)")]
    UnsupportedMaxval(u32),
    #[error("pixel data truncated: expected {expected} bytes, found {found}")]
    TruncatedData { expected: usize, found: usize },
    #[error("frame dimensions {width}x{height} invalid")]
    BadDimensions { width: usize, height: usize },
}

/// A width×height grid of sRGB pixels, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SrgbFrame {
    width: usize,
    height: usize,
    pixels: Vec<SrgbColor>,
}

impl SrgbFrame {
    pub fn new(width: usize, height: usize, pixels: Vec<SrgbColor>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 || pixels.len() != width * height {
            return Err(ImageError::BadDimensions { width, height });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, color: SrgbColor) -> Self {
        Self {
            width,
            height,
            pixels: vec![color; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> SrgbColor) -> Self {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.pixels.len()
    }

    pub fn pixels(&self) -> &[SrgbColor] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> SrgbColor {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, c: SrgbColor) {
        self.pixels[y * self.width + x] = c;
    }

    /// Parses a binary PPM (P6).
    pub fn from_ppm_bytes(bytes: &[u8]) -> Result<Self, ImageError> {
        let mut cursor = 0usize;
        let magic = read_token(bytes, &mut cursor)
            .ok_or_else(|| ImageError::MalformedHeader("missing magic".into()))?;
        if magic != b"P6" {
            return Err(ImageError::BadMagic(
                String::from_utf8_lossy(magic).into_owned(),
            ));
        }
        let width = read_number(bytes, &mut cursor, "width")?;
        let height = read_number(bytes, &mut cursor, "height")?;
        let maxval = read_number(bytes, &mut cursor, "maxval")?;
        if maxval != 255 {
            return Err(ImageError::UnsupportedMaxval(maxval));
        }
        // Exactly one whitespace byte separates the header from pixel data.
        match bytes.get(cursor) {
            Some(b) if b.is_ascii_whitespace() => cursor += 1,
            _ => {
                return Err(ImageError::MalformedHeader(
                    "missing whitespace before pixel data".into(),
                ))
            }
        }
        let width = width as usize;
        let height = height as usize;
        if width == 0 || height == 0 {
            return Err(ImageError::BadDimensions { width, height });
        }
        let expected = width * height * 3;
        let data = &bytes[cursor..];
        if data.len() < expected {
            return Err(ImageError::TruncatedData {
                expected,
                found: data.len(),
            });
        }
        let pixels = data[..expected]
            .chunks_exact(3)
            .map(|c| SrgbColor::new(c[0], c[1], c[2]))
            .collect();
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Serializes as binary PPM: `P6\n{w} {h}\n255\n` + raw triplets.
    pub fn to_ppm_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.pixels.len() * 3 + 32);
        out.extend_from_slice(format!("P6\n{} {}\n255\n", self.width, self.height).as_bytes());
        for p in &self.pixels {
            out.extend_from_slice(&[p.r, p.g, p.b]);
        }
        out
    }

    pub fn load_ppm(path: impl AsRef<Path>) -> Result<Self, ImageError> {
        let path_str = path.as_ref().display().to_string();
        let mut bytes = Vec::new();
        std::fs::File::open(&path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|source| ImageError::Io {
                path: path_str,
                source,
            })?;
        Self::from_ppm_bytes(&bytes)
    }

    pub fn save_ppm(&self, path: impl AsRef<Path>) -> Result<(), ImageError> {
        let path_str = path.as_ref().display().to_string();
        std::fs::File::create(&path)
            .and_then(|mut f| f.write_all(&self.to_ppm_bytes()))
            .map_err(|source| ImageError::Io {
                path: path_str,
                source,
            })
    }
}

/// Skips whitespace and `#` comments, then returns the next token.
fn read_token<'a>(bytes: &'a [u8], cursor: &mut usize) -> Option<&'a [u8]> {
    loop {
        while *cursor < bytes.len() && bytes[*cursor].is_ascii_whitespace() {
            *cursor += 1;
        }
        if *cursor < bytes.len() && bytes[*cursor] == b'#' {
            while *cursor < bytes.len() && bytes[*cursor] != b'\n' {
                *cursor += 1;
            }
            continue;
        }
        break;
    }
    if *cursor >= bytes.len() {
        return None;
    }
    let start = *cursor;
    while *cursor < bytes.len() && !bytes[*cursor].is_ascii_whitespace() {
        *cursor += 1;
    }
    Some(&bytes[start..*cursor])
}

fn read_number(bytes: &[u8], cursor: &mut usize, what: &str) -> Result<u32, ImageError> {
    let token = read_token(bytes, cursor)
        .ok_or_else(|| ImageError::MalformedHeader(format!("missing {what}")))?;
    std::str::from_utf8(token)
        .ok()
        .and_then(|s| s.parse::<u32>().ok())
        .ok_or_else(|| {
            ImageError::MalformedHeader(format!(
                "invalid {what} `{}`",
                String::from_utf8_lossy(token)
            ))
        })
}
