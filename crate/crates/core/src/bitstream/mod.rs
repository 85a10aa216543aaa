//! `.asc` stream format.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "ASCF"
//! 4       1     version (1)
//! 5       1     flags: bit0 two-endpoint, bit1 vbr, bit2 permutation present,
//!               bits3-4 scale policy (0 adaptive, 1 revised only, 2 log only)
//! 6       1     sample format (0 INT8, 1 INT16, 2 FP16)
//! 7       1     block width
//! 8       1     block height
//! 9       2     block channels  u16 LE
//! 11      12    width, height, channels  u32 LE each
//! 23      2·C   channel permutation, u16 LE each (if flagged)
//! ```
//!
//! The payload that follows is one LSB-first bit sequence, zero-padded only
//! at the very end: for VBR streams a mask bit per sample, then every block
//! record back to back. A block record is
//!
//! * two-endpoint: `endpoint1, endpoint2` as raw format-width words, then
//!   3-bit indices. `endpoint1 <= endpoint2` means revised linear with
//!   `(min, max) = (endpoint1, endpoint2)`; otherwise log-linear with the
//!   endpoints swapped.
//! * one-endpoint: the maximum as one format-width word whose sign bit is
//!   the scale flag (set for log-linear), then the indices.

mod bits;
mod rate;

pub use bits::{BitReader, BitWriter};
pub use rate::{measured_rate, nominal_rate, payload_bits, RateReport};

use half::f16;

use crate::block::BlockShape;
use crate::codec::{CodecConfig, EncodedBlock, EncodedTensor, EndpointMode, Payload, ScalePolicy, ZvcMask, ZvcPayload};
use crate::error::{malformed, Corruption, Result};
use crate::reorder::ChannelPermutation;
use crate::scales::ScaleKind;
use crate::tensor::{Dims, Element, SampleFormat};

pub const STREAM_MAGIC: &[u8; 4] = b"ASCF";
pub const STREAM_VERSION: u8 = 1;
pub const HEADER_LEN: usize = 23;

const FLAG_TWO_ENDPOINT: u8 = 1;
const FLAG_VBR: u8 = 1 << 1;
const FLAG_PERMUTATION: u8 = 1 << 2;
const POLICY_SHIFT: u8 = 3;
const KNOWN_FLAGS: u8 = 0b1_1111;

/// A decoded stream of any sample format.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyEncodedTensor {
    Int8(EncodedTensor<i8>),
    Int16(EncodedTensor<i16>),
    Fp16(EncodedTensor<f16>),
}

impl AnyEncodedTensor {
    pub fn config(&self) -> &CodecConfig {
        match self {
            AnyEncodedTensor::Int8(t) => &t.config,
            AnyEncodedTensor::Int16(t) => &t.config,
            AnyEncodedTensor::Fp16(t) => &t.config,
        }
    }

    pub fn dims(&self) -> Dims {
        match self {
            AnyEncodedTensor::Int8(t) => t.dims,
            AnyEncodedTensor::Int16(t) => t.dims,
            AnyEncodedTensor::Fp16(t) => t.dims,
        }
    }

    pub fn scale_usage(&self) -> (usize, usize) {
        match self {
            AnyEncodedTensor::Int8(t) => t.scale_usage(),
            AnyEncodedTensor::Int16(t) => t.scale_usage(),
            AnyEncodedTensor::Fp16(t) => t.scale_usage(),
        }
    }
}

/// Parsed header fields.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamHeader {
    pub config: CodecConfig,
    pub dims: Dims,
    pub has_permutation: bool,
}

fn policy_bits(p: ScalePolicy) -> u8 {
    match p {
        ScalePolicy::Adaptive => 0,
        ScalePolicy::RevisedOnly => 1,
        ScalePolicy::LogOnly => 2,
    }
}

pub fn serialize<T: Element>(tensor: &EncodedTensor<T>) -> Vec<u8> {
    let cfg = &tensor.config;
    let mut out = Vec::with_capacity(HEADER_LEN);
    out.extend_from_slice(STREAM_MAGIC);
    out.push(STREAM_VERSION);
    let mut flags = policy_bits(cfg.scale) << POLICY_SHIFT;
    if cfg.mode == EndpointMode::TwoEndpoint {
        flags |= FLAG_TWO_ENDPOINT;
    }
    if cfg.vbr {
        flags |= FLAG_VBR;
    }
    if tensor.permutation.is_some() {
        flags |= FLAG_PERMUTATION;
    }
    out.push(flags);
    out.push(cfg.format.tag());
    out.push(cfg.shape.width as u8);
    out.push(cfg.shape.height as u8);
    out.extend_from_slice(&(cfg.shape.channels as u16).to_le_bytes());
    for d in [tensor.dims.width, tensor.dims.height, tensor.dims.channels] {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    if let Some(perm) = &tensor.permutation {
        for &c in perm.order() {
            out.extend_from_slice(&(c as u16).to_le_bytes());
        }
    }

    let mut bits = BitWriter::new();
    let blocks = match &tensor.payload {
        Payload::Cbr(blocks) => blocks,
        Payload::Vbr(p) => {
            for bit in p.mask.iter() {
                bits.write(u32::from(bit), 1);
            }
            &p.blocks
        }
    };
    for block in blocks {
        write_block(&mut bits, block, cfg.mode);
    }
    out.extend_from_slice(&bits.finish());
    out
}

fn write_block<T: Element>(bits: &mut BitWriter, block: &EncodedBlock<T>, mode: EndpointMode) {
    let width = T::FORMAT.bit_width();
    match mode {
        EndpointMode::TwoEndpoint => {
            let (first, second) = match block.scale {
                ScaleKind::RevisedLinear => (block.min, block.max),
                ScaleKind::LogLinear => (block.max, block.min),
            };
            bits.write(u32::from(first.to_bits()), width);
            bits.write(u32::from(second.to_bits()), width);
        }
        EndpointMode::OneEndpoint => {
            let mut word = u32::from(block.max.to_bits());
            if block.scale == ScaleKind::LogLinear {
                word |= 1 << (width - 1);
            }
            bits.write(word, width);
        }
    }
    for &index in &block.indices {
        bits.write(u32::from(index), 3);
    }
}

pub fn parse_header(bytes: &[u8]) -> Result<StreamHeader> {
    if bytes.len() < 4 || &bytes[..4] != STREAM_MAGIC {
        return Err(Corruption::BadMagic.into());
    }
    if bytes.len() < 5 {
        return Err(Corruption::Truncated.into());
    }
    if bytes[4] != STREAM_VERSION {
        return Err(Corruption::UnsupportedVersion(bytes[4]).into());
    }
    if bytes.len() < HEADER_LEN {
        return Err(Corruption::Truncated.into());
    }
    let flags = bytes[5];
    if flags & !KNOWN_FLAGS != 0 {
        return Err(malformed(format!("unknown flag bits {flags:#010b}")));
    }
    let scale = match flags >> POLICY_SHIFT {
        0 => ScalePolicy::Adaptive,
        1 => ScalePolicy::RevisedOnly,
        2 => ScalePolicy::LogOnly,
        p => return Err(malformed(format!("unknown scale policy {p}"))),
    };
    let format = SampleFormat::from_tag(bytes[6]).ok_or_else(|| malformed(format!("unknown format {}", bytes[6])))?;
    let shape = BlockShape::new(
        usize::from(bytes[7]),
        usize::from(bytes[8]),
        usize::from(u16::from_le_bytes([bytes[9], bytes[10]])),
    )
    .map_err(|e| malformed(e.to_string()))?;
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize;
    let dims = Dims::new(word(11), word(15), word(19));
    if dims.width == 0 || dims.height == 0 || dims.channels == 0 {
        return Err(malformed(format!("empty tensor dims {dims}")));
    }
    let mode = if flags & FLAG_TWO_ENDPOINT != 0 { EndpointMode::TwoEndpoint } else { EndpointMode::OneEndpoint };
    let config = CodecConfig::new(shape, mode, format, flags & FLAG_VBR != 0)
        .map_err(|e| malformed(e.to_string()))?
        .with_scale(scale);
    Ok(StreamHeader { config, dims, has_permutation: flags & FLAG_PERMUTATION != 0 })
}

/// Decoded stream plus the exact number of payload bits it occupied
/// (header and permutation excluded, final byte padding excluded).
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedStream {
    pub tensor: AnyEncodedTensor,
    pub payload_bits: u64,
}

pub fn deserialize(bytes: &[u8]) -> Result<AnyEncodedTensor> {
    Ok(parse(bytes)?.tensor)
}

pub fn parse(bytes: &[u8]) -> Result<ParsedStream> {
    let header = parse_header(bytes)?;
    Ok(match header.config.format {
        SampleFormat::Int8 => {
            let (t, n) = parse_body::<i8>(&header, bytes)?;
            ParsedStream { tensor: AnyEncodedTensor::Int8(t), payload_bits: n }
        }
        SampleFormat::Int16 => {
            let (t, n) = parse_body::<i16>(&header, bytes)?;
            ParsedStream { tensor: AnyEncodedTensor::Int16(t), payload_bits: n }
        }
        SampleFormat::Fp16 => {
            let (t, n) = parse_body::<f16>(&header, bytes)?;
            ParsedStream { tensor: AnyEncodedTensor::Fp16(t), payload_bits: n }
        }
    })
}

/// Deserializes a stream whose sample type is known in advance.
pub fn deserialize_as<T: Element>(bytes: &[u8]) -> Result<EncodedTensor<T>> {
    let header = parse_header(bytes)?;
    if header.config.format != T::FORMAT {
        return Err(malformed(format!("stream holds {} samples, not {}", header.config.format, T::FORMAT)));
    }
    Ok(parse_body::<T>(&header, bytes)?.0)
}

fn parse_body<T: Element>(header: &StreamHeader, bytes: &[u8]) -> Result<(EncodedTensor<T>, u64)> {
    let cfg = header.config;
    let dims = header.dims;
    let mut at = HEADER_LEN;
    let permutation = if header.has_permutation {
        let end = dims
            .channels
            .checked_mul(2)
            .and_then(|n| n.checked_add(at))
            .filter(|&end| end <= bytes.len())
            .ok_or(Corruption::Truncated)?;
        let order = bytes[at..end].chunks_exact(2).map(|c| usize::from(u16::from_le_bytes([c[0], c[1]]))).collect();
        at = end;
        Some(ChannelPermutation::new(order).map_err(|e| malformed(e.to_string()))?)
    } else {
        None
    };

    let mut bits = BitReader::new(&bytes[at..]);
    let payload = if cfg.vbr {
        let n = dims.len();
        if n as u64 > bits_available(&bytes[at..]) {
            return Err(Corruption::Truncated.into());
        }
        let mut mask = ZvcMask::new(n);
        for i in 0..n {
            if bits.read(1)? == 1 {
                mask.set(i, true);
            }
        }
        let count = mask.count_ones().div_ceil(cfg.block_size());
        let blocks = read_blocks::<T>(&mut bits, &cfg, count)?;
        Payload::Vbr(ZvcPayload { mask, blocks })
    } else {
        Payload::Cbr(read_blocks::<T>(&mut bits, &cfg, cfg.shape.block_count(dims))?)
    };
    let payload_bits = bits.bit_pos();
    bits.finish()?;
    Ok((EncodedTensor { config: cfg, dims, permutation, payload }, payload_bits))
}

fn bits_available(bytes: &[u8]) -> u64 {
    bytes.len() as u64 * 8
}

fn endpoint<T: Element>(word: u32) -> Result<T> {
    let v = T::from_bits(word as u16);
    if !v.is_finite() {
        return Err(malformed(format!("non-finite endpoint {word:#06x}")));
    }
    Ok(v)
}

fn read_blocks<T: Element>(bits: &mut BitReader<'_>, cfg: &CodecConfig, count: usize) -> Result<Vec<EncodedBlock<T>>> {
    let width = T::FORMAT.bit_width();
    let size = cfg.block_size();
    // Capacity is bounded by what the payload could possibly hold.
    let mut blocks = Vec::with_capacity(count.min(1 << 16));
    for _ in 0..count {
        let (scale, min, max) = match cfg.mode {
            EndpointMode::TwoEndpoint => {
                let first: T = endpoint(bits.read(width)?)?;
                let second: T = endpoint(bits.read(width)?)?;
                if first.level() <= second.level() {
                    (ScaleKind::RevisedLinear, first, second)
                } else {
                    (ScaleKind::LogLinear, second, first)
                }
            }
            EndpointMode::OneEndpoint => {
                let word = bits.read(width)?;
                let flag = 1 << (width - 1);
                let scale = if word & flag != 0 { ScaleKind::LogLinear } else { ScaleKind::RevisedLinear };
                (scale, T::default(), endpoint(word & !flag)?)
            }
        };
        let indices = (0..size).map(|_| bits.read(3).map(|i| i as u8)).collect::<Result<Vec<_>>>()?;
        blocks.push(EncodedBlock { scale, min, max, indices });
    }
    Ok(blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{decode, encode, encode_permuted};
    use crate::error::Error;
    use crate::tensor::FeatureMap;

    fn cfg(size: usize, mode: EndpointMode, vbr: bool) -> CodecConfig {
        CodecConfig::new(BlockShape::linear(size).unwrap(), mode, SampleFormat::Int8, vbr).unwrap()
    }

    fn single_block(values: Vec<i8>, mode: EndpointMode) -> (EncodedTensor<i8>, Vec<u8>) {
        let n = values.len();
        let map = FeatureMap::new(Dims::new(n, 1, 1), values).unwrap();
        let enc = encode(&map, &cfg(n, mode, false)).unwrap();
        let bytes = serialize(&enc);
        (enc, bytes)
    }

    #[test]
    fn log_block_emits_max_then_min() {
        let (enc, bytes) = single_block(vec![0, 1, 2, 3, 0, 1, 2, 96], EndpointMode::TwoEndpoint);
        assert_eq!(enc.blocks()[0].scale, ScaleKind::LogLinear);
        let payload = &bytes[HEADER_LEN..];
        assert_eq!(payload.len(), 5);
        assert_eq!(&payload[..2], &[96, 0]);
        assert_eq!(&payload[2..], &[0b0100_0000, 0b0000_0010, 0b1110_0100]);
    }

    #[test]
    fn revised_block_emits_min_then_max() {
        let (enc, bytes) = single_block(vec![-5, 40, 40, -5], EndpointMode::TwoEndpoint);
        assert_eq!(enc.blocks()[0].scale, ScaleKind::RevisedLinear);
        assert_eq!(&bytes[HEADER_LEN..HEADER_LEN + 2], &[(-5i8) as u8, 40]);
    }

    #[test]
    fn endpoint_order_decides_scale() {
        let mut bytes = single_block(vec![0, 0, 0, 0], EndpointMode::TwoEndpoint).1;
        bytes[HEADER_LEN] = 96;
        bytes[HEADER_LEN + 1] = 0;
        let AnyEncodedTensor::Int8(t) = deserialize(&bytes).unwrap() else { panic!() };
        let b = &t.blocks()[0];
        assert_eq!((b.scale, b.min, b.max), (ScaleKind::LogLinear, 0, 96));
        bytes[HEADER_LEN] = 7;
        bytes[HEADER_LEN + 1] = 7;
        let AnyEncodedTensor::Int8(t) = deserialize(&bytes).unwrap() else { panic!() };
        let b = &t.blocks()[0];
        assert_eq!((b.scale, b.min, b.max), (ScaleKind::RevisedLinear, 7, 7));
    }

    #[test]
    fn one_endpoint_sign_flag() {
        let (enc, bytes) = single_block(vec![0, 1, 2, 3, 0, 1, 2, 96], EndpointMode::OneEndpoint);
        assert_eq!(enc.blocks()[0].scale, ScaleKind::LogLinear);
        assert_eq!(bytes[HEADER_LEN], 96 | 0x80);
        // One 8-bit endpoint plus 8 indices: exactly 32 bits.
        assert_eq!(bytes.len(), HEADER_LEN + 4);
        assert_eq!(deserialize_as::<i8>(&bytes).unwrap(), enc);
    }

    #[test]
    fn corrupt_variants() {
        let (_, bytes) = single_block(vec![1, 2, 3, 4], EndpointMode::TwoEndpoint);
        let mut bad = bytes.clone();
        bad[0] = b'Z';
        assert_eq!(deserialize(&bad).unwrap_err(), Error::CorruptStream(Corruption::BadMagic));
        let mut bad = bytes.clone();
        bad[4] = 9;
        assert_eq!(deserialize(&bad).unwrap_err(), Error::CorruptStream(Corruption::UnsupportedVersion(9)));
        assert_eq!(deserialize(&bytes[..bytes.len() - 1]).unwrap_err(), Error::CorruptStream(Corruption::Truncated));
        assert_eq!(deserialize(&bytes[..10]).unwrap_err(), Error::CorruptStream(Corruption::Truncated));
        let mut long = bytes.clone();
        long.push(0);
        assert_eq!(deserialize(&long).unwrap_err(), Error::CorruptStream(Corruption::TrailingData(1)));
        let mut bad = bytes.clone();
        bad[5] |= 0x80;
        assert!(matches!(deserialize(&bad), Err(Error::CorruptStream(Corruption::Malformed(_)))));
        assert!(deserialize_as::<i16>(&bytes).is_err());
    }

    #[test]
    fn fp16_nan_endpoint_rejected() {
        let map = FeatureMap::new(Dims::new(2, 1, 1), vec![f16::ONE, f16::ZERO]).unwrap();
        let c = CodecConfig::new(BlockShape::linear(2).unwrap(), EndpointMode::TwoEndpoint, SampleFormat::Fp16, false)
            .unwrap();
        let mut bytes = serialize(&encode(&map, &c).unwrap());
        let nan = f16::NAN.to_bits().to_le_bytes();
        bytes[HEADER_LEN] = nan[0];
        bytes[HEADER_LEN + 1] = nan[1];
        assert!(deserialize(&bytes).is_err());
    }

    #[test]
    fn permutation_and_vbr_round_trip() {
        let map = FeatureMap::<i8>::from_fn(Dims::new(3, 2, 4), |w, h, c| {
            if (w + h + c) % 3 == 0 {
                0
            } else {
                (w * 7 + h * 3 + c * 11) as i8
            }
        })
        .unwrap();
        let perm = ChannelPermutation::new(vec![2, 0, 3, 1]).unwrap();
        for vbr in [false, true] {
            let c =
                CodecConfig::new(BlockShape::new(2, 2, 2).unwrap(), EndpointMode::OneEndpoint, SampleFormat::Int8, vbr)
                    .unwrap();
            let enc = encode_permuted(&map, &c, &perm).unwrap();
            let bytes = serialize(&enc);
            let back = deserialize_as::<i8>(&bytes).unwrap();
            assert_eq!(back, enc);
            assert_eq!(decode(&back).unwrap(), decode(&enc).unwrap());
        }
    }
}
