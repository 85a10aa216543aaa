//! `.fmap` tensor files.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "FMAP"
//! 4       1     version (1)
//! 5       1     format (0 = INT8, 1 = INT16, 2 = FP16)
//! 6       1     reserved (0)
//! 7       4     width    u32 LE
//! 11      4     height   u32 LE
//! 15      4     channels u32 LE
//! 19      ...   samples in raster order, little-endian
//! ```

use half::f16;

use crate::error::{invalid, FmapError, Result};
use crate::tensor::{AnyFeatureMap, Dims, Element, FeatureMap, SampleFormat};

pub const FMAP_MAGIC: &[u8; 4] = b"FMAP";
pub const FMAP_VERSION: u8 = 1;
pub const FMAP_HEADER_LEN: usize = 19;

pub fn store_fmap(map: &AnyFeatureMap) -> Vec<u8> {
    match map {
        AnyFeatureMap::Int8(m) => store(m),
        AnyFeatureMap::Int16(m) => store(m),
        AnyFeatureMap::Fp16(m) => store(m),
    }
}

fn store<T: Element>(map: &FeatureMap<T>) -> Vec<u8> {
    let dims = map.dims();
    let sample_bytes = (T::FORMAT.bit_width() / 8) as usize;
    let mut out = Vec::with_capacity(FMAP_HEADER_LEN + dims.len() * sample_bytes);
    out.extend_from_slice(FMAP_MAGIC);
    out.push(FMAP_VERSION);
    out.push(T::FORMAT.tag());
    out.push(0);
    for d in [dims.width, dims.height, dims.channels] {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for v in map.data() {
        let bits = v.to_bits().to_le_bytes();
        out.extend_from_slice(&bits[..sample_bytes]);
    }
    out
}

pub fn load_fmap(bytes: &[u8]) -> Result<AnyFeatureMap> {
    if bytes.len() < 4 || &bytes[..4] != FMAP_MAGIC {
        return Err(FmapError::BadMagic.into());
    }
    if bytes.len() < FMAP_HEADER_LEN {
        return Err(FmapError::TruncatedPayload { expected: FMAP_HEADER_LEN, actual: bytes.len() }.into());
    }
    if bytes[4] != FMAP_VERSION {
        return Err(FmapError::UnsupportedVersion(bytes[4]).into());
    }
    let format = SampleFormat::from_tag(bytes[5]).ok_or(FmapError::UnknownFormat(bytes[5]))?;
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize;
    let dims = Dims::new(word(7), word(11), word(15));
    if dims.width == 0 || dims.height == 0 || dims.channels == 0 {
        return Err(invalid(format!("fmap dims must be positive, got {dims}")));
    }
    let payload = &bytes[FMAP_HEADER_LEN..];
    Ok(match format {
        SampleFormat::Int8 => AnyFeatureMap::Int8(load::<i8>(dims, payload)?),
        SampleFormat::Int16 => AnyFeatureMap::Int16(load::<i16>(dims, payload)?),
        SampleFormat::Fp16 => AnyFeatureMap::Fp16(load::<f16>(dims, payload)?),
    })
}

fn load<T: Element>(dims: Dims, payload: &[u8]) -> Result<FeatureMap<T>> {
    let sample_bytes = (T::FORMAT.bit_width() / 8) as usize;
    let expected = dims
        .width
        .checked_mul(dims.height)
        .and_then(|n| n.checked_mul(dims.channels))
        .and_then(|n| n.checked_mul(sample_bytes))
        .ok_or_else(|| invalid(format!("fmap dims {dims} overflow")))?;
    if payload.len() < expected {
        return Err(FmapError::TruncatedPayload { expected, actual: payload.len() }.into());
    }
    if payload.len() > expected {
        return Err(FmapError::TrailingBytes(payload.len() - expected).into());
    }
    let data = payload
        .chunks_exact(sample_bytes)
        .map(|c| {
            let bits = if sample_bytes == 1 { u16::from(c[0]) } else { u16::from_le_bytes([c[0], c[1]]) };
            T::from_bits(bits)
        })
        .collect();
    FeatureMap::new(dims, data)
}
