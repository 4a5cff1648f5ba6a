//! GNT sample containers.
//!
//! A file is a plain sequence of records, all integers little-endian:
//! `u32 total size | 2-byte tag | u16 width | u16 height | width·height bytes`,
//! where the total size counts the whole record (`10 + width·height`).

use std::path::Path;

use hccr_core::data::Dataset;
use hccr_core::GrayImage;

use crate::error::{read_file, write_file, Error, Result};
use crate::pgm::to_byte;

const CONTEXT: &str = "gnt";
const RECORD_HEADER: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GntRecord {
    pub tag: [u8; 2],
    pub width: u16,
    pub height: u16,
    /// Row-major, `width · height` bytes.
    pub pixels: Vec<u8>,
}

/// Which byte value the file uses for the page background.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    /// 255 is background, ink is dark.
    LightBackground,
    /// 0 is background, ink is bright.
    DarkBackground,
}

pub fn parse_gnt(bytes: &[u8]) -> Result<Vec<GntRecord>> {
    let mut records = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let header = bytes.get(pos..pos + RECORD_HEADER).ok_or_else(|| {
            Error::format(
                CONTEXT,
                pos,
                format!("truncated record header: {} of 10 bytes", bytes.len() - pos),
            )
        })?;
        let size = u32::from_le_bytes([header[0], header[1], header[2], header[3]]) as usize;
        let tag = [header[4], header[5]];
        let width = u16::from_le_bytes([header[6], header[7]]);
        let height = u16::from_le_bytes([header[8], header[9]]);
        let expected = RECORD_HEADER + width as usize * height as usize;
        if size != expected {
            return Err(Error::format(
                CONTEXT,
                pos,
                format!("size field {} but 10 + {}x{} = {}", size, width, height, expected),
            ));
        }
        let pixels = bytes.get(pos + RECORD_HEADER..pos + size).ok_or_else(|| {
            Error::format(
                CONTEXT,
                pos,
                format!("truncated record: {} bytes declared, {} present", size, bytes.len() - pos),
            )
        })?;
        records.push(GntRecord {
            tag,
            width,
            height,
            pixels: pixels.to_vec(),
        });
        pos += size;
    }
    Ok(records)
}

pub fn encode_gnt(records: &[GntRecord]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for r in records {
        let n = r.width as usize * r.height as usize;
        if r.pixels.len() != n {
            return Err(Error::Invalid(format!(
                "record {:?}: {} pixels for {}x{}",
                tag_name(r.tag),
                r.pixels.len(),
                r.width,
                r.height
            )));
        }
        let size = u32::try_from(RECORD_HEADER + n)
            .map_err(|_| Error::Invalid(format!("record of {} pixels is too large", n)))?;
        out.extend_from_slice(&size.to_le_bytes());
        out.extend_from_slice(&r.tag);
        out.extend_from_slice(&r.width.to_le_bytes());
        out.extend_from_slice(&r.height.to_le_bytes());
        out.extend_from_slice(&r.pixels);
    }
    Ok(out)
}

/// Printable ASCII tags become their two characters; anything else (for
/// example GB2312 codes) becomes `0xHHHH` in file byte order.
pub fn tag_name(tag: [u8; 2]) -> String {
    if tag.iter().all(|b| b.is_ascii_graphic()) {
        tag.iter().map(|&b| b as char).collect()
    } else {
        format!("0x{:02X}{:02X}", tag[0], tag[1])
    }
}

pub fn parse_tag_name(name: &str) -> Result<[u8; 2]> {
    let b = name.as_bytes();
    if b.len() == 2 && b.iter().all(|c| c.is_ascii_graphic()) {
        return Ok([b[0], b[1]]);
    }
    if let Some(hex) = name.strip_prefix("0x").filter(|h| h.len() == 4) {
        if let Ok(v) = u16::from_str_radix(hex, 16) {
            return Ok(v.to_be_bytes());
        }
    }
    Err(Error::Invalid(format!("class name {:?} is not a GNT tag", name)))
}

/// Majority vote over the border pixels of every record.
pub fn detect_polarity(records: &[GntRecord]) -> Polarity {
    let (mut light, mut total) = (0usize, 0usize);
    for r in records {
        let (w, h) = (r.width as usize, r.height as usize);
        for y in 0..h {
            for x in 0..w {
                if y == 0 || x == 0 || y + 1 == h || x + 1 == w {
                    total += 1;
                    light += (r.pixels[y * w + x] >= 128) as usize;
                }
            }
        }
    }
    if 2 * light >= total {
        Polarity::LightBackground
    } else {
        Polarity::DarkBackground
    }
}

/// Samples with a white background (1.0) whatever the file polarity.
/// Unseen tags become new classes in file order.
pub fn records_to_dataset(records: &[GntRecord], polarity: Polarity) -> Result<Dataset> {
    let mut ds = Dataset::new();
    for r in records {
        let data = r
            .pixels
            .iter()
            .map(|&b| match polarity {
                Polarity::LightBackground => b as f32 / 255.0,
                Polarity::DarkBackground => (255 - b) as f32 / 255.0,
            })
            .collect();
        ds.push(GrayImage::new(r.height as usize, r.width as usize, data)?, &tag_name(r.tag));
    }
    Ok(ds)
}

pub fn dataset_to_records(dataset: &Dataset, polarity: Polarity) -> Result<Vec<GntRecord>> {
    dataset
        .samples
        .iter()
        .map(|s| {
            let dim = |v: usize| {
                u16::try_from(v).map_err(|_| Error::Invalid(format!("image extent {} exceeds u16", v)))
            };
            Ok(GntRecord {
                tag: parse_tag_name(&s.class_name)?,
                width: dim(s.image.width())?,
                height: dim(s.image.height())?,
                pixels: s
                    .image
                    .data()
                    .iter()
                    .map(|&v| match polarity {
                        Polarity::LightBackground => to_byte(v),
                        Polarity::DarkBackground => 255 - to_byte(v),
                    })
                    .collect(),
            })
        })
        .collect()
}

pub fn load_gnt_with_polarity(path: &Path) -> Result<(Dataset, Polarity)> {
    let records = parse_gnt(&read_file(path)?).map_err(|e| e.at_path(path))?;
    let polarity = detect_polarity(&records);
    if polarity == Polarity::DarkBackground {
        log::info!("{}: dark background detected, inverting", path.display());
    }
    Ok((records_to_dataset(&records, polarity)?, polarity))
}

pub fn load_gnt(path: &Path) -> Result<Dataset> {
    load_gnt_with_polarity(path).map(|(ds, _)| ds)
}

pub fn write_gnt(path: &Path, dataset: &Dataset, polarity: Polarity) -> Result<()> {
    write_file(path, &encode_gnt(&dataset_to_records(dataset, polarity)?)?)
}
