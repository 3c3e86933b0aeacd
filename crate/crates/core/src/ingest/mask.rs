use std::path::Path;

use crate::{Error, Result};

/// Binary raster, row-major, `true` = foreground.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    pixels: Vec<bool>,
}

impl Mask {
    pub fn new(width: usize, height: usize, pixels: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Shape(format!(
                "mask dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::Shape(format!(
                "{} pixels for a {width}x{height} mask",
                pixels.len()
            )));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn empty(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![false; width * height])
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> bool) -> Result<Self> {
        let pixels = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[bool] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.pixels[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.pixels.iter().filter(|&&p| p).count()
    }

    pub fn same_shape(&self, other: &Mask) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// Splits a PGM header into tokens, skipping `#` comments. Returns the tokens
/// and the offset just past the single whitespace byte after the last one.
fn header_tokens(bytes: &[u8], count: usize) -> Option<(Vec<String>, usize)> {
    let mut tokens = Vec::with_capacity(count);
    let mut i = 0;
    while tokens.len() < count {
        while i < bytes.len() && (bytes[i].is_ascii_whitespace() || bytes[i] == b'#') {
            if bytes[i] == b'#' {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            } else {
                i += 1;
            }
        }
        let start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if start == i {
            return None;
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..i]).into_owned());
    }
    if i >= bytes.len() {
        return None;
    }
    Some((tokens, i + 1))
}

/// Decodes a binary (P5) 8-bit PGM whose pixels are strictly 0 or 255.
pub fn decode_pgm(bytes: &[u8], path: &Path) -> Result<Mask> {
    let fail = |offset: usize, reason: String| Error::Format {
        path: path.to_path_buf(),
        offset: offset as u64,
        reason,
    };
    if !bytes.starts_with(b"P5") {
        return Err(Error::Unsupported(format!("{}: not a binary PGM (P5)", path.display())));
    }
    let (tokens, data_start) =
        header_tokens(&bytes[2..], 3).ok_or_else(|| fail(bytes.len(), "truncated PGM header".into()))?;
    let data_start = data_start + 2;
    let num = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| fail(0, format!("bad header value `{s}`")))
    };
    let (width, height, maxval) = (num(&tokens[0])?, num(&tokens[1])?, num(&tokens[2])?);
    if maxval != 255 {
        return Err(Error::Unsupported(format!(
            "{}: PGM maxval {maxval}, only 255 is supported",
            path.display()
        )));
    }
    let len = width * height;
    let payload = &bytes[data_start..];
    if payload.len() < len {
        return Err(fail(bytes.len(), format!("truncated pixel data, expected {len} bytes")));
    }
    let mut pixels = Vec::with_capacity(len);
    for (k, &b) in payload[..len].iter().enumerate() {
        match b {
            0 => pixels.push(false),
            255 => pixels.push(true),
            v => {
                return Err(fail(
                    data_start + k,
                    format!("pixel value {v} at ({}, {}) is not binary", k % width, k / width),
                ))
            }
        }
    }
    Mask::new(width, height, pixels)
}

pub fn encode_pgm(mask: &Mask) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", mask.width, mask.height).into_bytes();
    out.extend(mask.pixels.iter().map(|&p| if p { 255u8 } else { 0 }));
    out
}

pub fn load_mask(path: impl AsRef<Path>) -> Result<Mask> {
    let path = path.as_ref();
    decode_pgm(&super::read_file(path)?, path)
}

pub fn save_mask(mask: &Mask, path: impl AsRef<Path>) -> Result<()> {
    super::write_file(path.as_ref(), &encode_pgm(mask))
}
