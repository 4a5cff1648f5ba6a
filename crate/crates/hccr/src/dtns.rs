//! Raw tensor dumps: `"DTNS" | u8 rank | rank × u32 extents | f32 values`, little-endian.

use std::path::Path;

use hccr_core::Tensor;

use crate::error::{read_file, write_file, Error, Result};

const MAGIC: &[u8; 4] = b"DTNS";
const CONTEXT: &str = "dtns";

pub fn encode_dtns(tensor: &Tensor<f32>) -> Result<Vec<u8>> {
    let rank = u8::try_from(tensor.rank()).map_err(|_| Error::Invalid(format!("rank {} exceeds 255", tensor.rank())))?;
    let mut out = Vec::with_capacity(5 + 4 * tensor.rank() + 4 * tensor.len());
    out.extend_from_slice(MAGIC);
    out.push(rank);
    for &d in tensor.shape() {
        let d = u32::try_from(d).map_err(|_| Error::Invalid(format!("extent {} exceeds u32", d)))?;
        out.extend_from_slice(&d.to_le_bytes());
    }
    for v in tensor.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_dtns(bytes: &[u8]) -> Result<Tensor<f32>> {
    if bytes.get(..4) != Some(MAGIC.as_slice()) {
        return Err(Error::format(CONTEXT, 0, "missing DTNS magic"));
    }
    let rank = *bytes.get(4).ok_or_else(|| Error::format(CONTEXT, 4, "missing rank"))? as usize;
    let dims_end = 5 + 4 * rank;
    let dims = bytes
        .get(5..dims_end)
        .ok_or_else(|| Error::format(CONTEXT, 5, format!("truncated extents for rank {}", rank)))?;
    let shape: Vec<usize> = dims
        .chunks_exact(4)
        .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize)
        .collect();
    let n: usize = shape.iter().product();
    let values = &bytes[dims_end..];
    if values.len() != 4 * n {
        return Err(Error::format(
            CONTEXT,
            dims_end,
            format!("{} value bytes for {} elements", values.len(), n),
        ));
    }
    let data = values
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();
    Ok(Tensor::new(shape, data)?)
}

pub fn write_dtns(path: &Path, tensor: &Tensor<f32>) -> Result<()> {
    write_file(path, &encode_dtns(tensor)?)
}

pub fn read_dtns(path: &Path) -> Result<Tensor<f32>> {
    decode_dtns(&read_file(path)?).map_err(|e| e.at_path(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let t = Tensor::new([2, 1], vec![1.0f32, -2.5]).unwrap();
        let b = encode_dtns(&t).unwrap();
        assert_eq!(&b[..5], b"DTNS\x02");
        assert_eq!(&b[5..13], &[2, 0, 0, 0, 1, 0, 0, 0]);
        assert_eq!(&b[13..17], &1.0f32.to_le_bytes());
        assert_eq!(b.len(), 21);
        assert_eq!(decode_dtns(&b).unwrap(), t);
    }

    #[test]
    fn rejects_short_values() {
        let t = Tensor::new([3], vec![1.0f32, 2.0, 3.0]).unwrap();
        let b = encode_dtns(&t).unwrap();
        assert!(decode_dtns(&b[..b.len() - 1]).is_err());
        assert!(decode_dtns(b"DTNX\x00").is_err());
    }
}
