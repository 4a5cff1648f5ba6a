//! Binary PGM (P5) with maxval up to 255.

use std::path::Path;

use hccr_core::GrayImage;

use crate::error::{read_file, write_file, Error, Result};

const CONTEXT: &str = "pgm";

struct Header {
    width: usize,
    height: usize,
    maxval: usize,
    data_start: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(Error::format(CONTEXT, 0, "missing P5 magic"));
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in &mut fields {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(Error::format(CONTEXT, pos, "expected a header number"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format(CONTEXT, start, "header number out of range"))?;
    }
    // Exactly one whitespace byte separates the header from the raster.
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::format(CONTEXT, pos, "header not terminated by whitespace"));
    }
    let [width, height, maxval] = fields;
    if maxval == 0 || maxval > 255 {
        return Err(Error::format(CONTEXT, pos, format!("unsupported maxval {}", maxval)));
    }
    Ok(Header {
        width,
        height,
        maxval,
        data_start: pos + 1,
    })
}

/// Pixels are divided by maxval into [0, 1].
pub fn parse_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let h = parse_header(bytes)?;
    let n = h.width * h.height;
    let raster = bytes
        .get(h.data_start..h.data_start + n)
        .ok_or_else(|| Error::format(CONTEXT, bytes.len(), format!("raster needs {} bytes", n)))?;
    let maxval = h.maxval as f32;
    Ok(GrayImage::new(
        h.height,
        h.width,
        raster.iter().map(|&b| (b as f32 / maxval).min(1.0)).collect(),
    )?)
}

/// Values are clamped to [0, 1] and quantized to maxval 255.
pub fn encode_pgm(image: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend(image.data().iter().map(|&v| to_byte(v)));
    out
}

pub(crate) fn to_byte(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn read_pgm(path: &Path) -> Result<GrayImage> {
    parse_pgm(&read_file(path)?).map_err(|e| e.at_path(path))
}

pub fn write_pgm(path: &Path, image: &GrayImage) -> Result<()> {
    write_file(path, &encode_pgm(image))
}
