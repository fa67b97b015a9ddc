//! Grayscale PGM (`P2` ASCII and `P5` binary, maxval 255) reading and writing.
//!
//! Pixels load as reals in 0–255. On save, values are clamped to `[0, 255]`
//! and rounded half-to-even.

use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::grid::ImageField;

#[derive(Debug, Error)]
pub enum PgmError {
    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),
    #[error("unsupported maxval {0} (only 255 is accepted)")]
    UnsupportedMaxval(u64),
    #[error("truncated pixel data: expected {expected} samples, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("malformed pixel data: {0}")]
    MalformedData(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PgmFormat {
    /// `P2`
    Ascii,
    /// `P5`
    #[default]
    Binary,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn header_number(&mut self, what: &str) -> Result<u64, PgmError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(PgmError::MalformedHeader(format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| PgmError::MalformedHeader(format!("{what} out of range")))
    }
}

/// Parses PGM bytes into a field.
pub fn decode(bytes: &[u8]) -> Result<ImageField, PgmError> {
    let format = match bytes.get(..2) {
        Some(b"P2") => PgmFormat::Ascii,
        Some(b"P5") => PgmFormat::Binary,
        _ => return Err(PgmError::MalformedHeader("missing P2/P5 magic number".into())),
    };
    let mut cur = Cursor { bytes, pos: 2 };
    if !cur.bytes.get(2).is_some_and(|b| b.is_ascii_whitespace() || *b == b'#') {
        return Err(PgmError::MalformedHeader(
            "magic number not followed by whitespace".into(),
        ));
    }
    let width = cur.header_number("width")? as usize;
    let height = cur.header_number("height")? as usize;
    let maxval = cur.header_number("maxval")?;
    if width == 0 || height == 0 {
        return Err(PgmError::MalformedHeader(format!("zero dimension {width}x{height}")));
    }
    if maxval != 255 {
        return Err(PgmError::UnsupportedMaxval(maxval));
    }
    let expected = width * height;
    let data: Vec<f64> = match format {
        PgmFormat::Binary => {
            match cur.bytes.get(cur.pos) {
                Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
                _ => return Err(PgmError::MalformedHeader("maxval not followed by whitespace".into())),
            }
            let payload = &cur.bytes[cur.pos..];
            if payload.len() < expected {
                return Err(PgmError::Truncated {
                    expected,
                    found: payload.len(),
                });
            }
            payload[..expected].iter().map(|&b| b as f64).collect()
        }
        PgmFormat::Ascii => {
            let text = std::str::from_utf8(&cur.bytes[cur.pos..])
                .map_err(|_| PgmError::MalformedData("non-UTF-8 sample text".into()))?;
            let mut values = Vec::with_capacity(expected);
            for token in text.split_ascii_whitespace().take(expected) {
                let v: u64 = token
                    .parse()
                    .map_err(|_| PgmError::MalformedData(format!("bad sample `{token}`")))?;
                if v > maxval {
                    return Err(PgmError::MalformedData(format!("sample {v} exceeds maxval")));
                }
                values.push(v as f64);
            }
            if values.len() < expected {
                return Err(PgmError::Truncated {
                    expected,
                    found: values.len(),
                });
            }
            values
        }
    };
    Ok(ImageField::from_vec(width, height, data).expect("dimensions checked"))
}

/// Clamps to `[0, 255]` and rounds half-to-even. NaN maps to 0.
pub fn quantize(x: f64) -> u8 {
    if x.is_nan() {
        return 0;
    }
    x.clamp(0.0, 255.0).round_ties_even() as u8
}

pub fn encode(field: &ImageField, format: PgmFormat) -> Vec<u8> {
    let (w, h) = field.dims();
    let magic = match format {
        PgmFormat::Ascii => "P2",
        PgmFormat::Binary => "P5",
    };
    let mut out = format!("{magic}\n{w} {h}\n255\n").into_bytes();
    match format {
        PgmFormat::Binary => out.extend(field.data().iter().map(|&x| quantize(x))),
        PgmFormat::Ascii => {
            for row in field.data().chunks(w) {
                let line: Vec<String> = row.iter().map(|&x| quantize(x).to_string()).collect();
                out.extend_from_slice(line.join(" ").as_bytes());
                out.push(b'\n');
            }
        }
    }
    out
}

pub fn load_image(path: impl AsRef<Path>) -> Result<ImageField, PgmError> {
    decode(&fs::read(path)?)
}

pub fn save_image(field: &ImageField, path: impl AsRef<Path>, format: PgmFormat) -> Result<(), PgmError> {
    fs::write(path, encode(field, format))?;
    Ok(())
}
