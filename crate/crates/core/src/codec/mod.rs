//! Block codec: constant-bitrate blocks and the zero-mask variable-bitrate
//! wrapper around them.

mod cbr;
mod vbr;

pub use cbr::{block_l1, decode_block, encode_block, find_endpoints, trial_encode};
pub use vbr::{ZvcMask, ZvcPayload};

use serde::{Deserialize, Serialize};

use crate::block::BlockShape;
use crate::error::{invalid, Result};
use crate::reorder::{apply_permutation, ChannelPermutation};
use crate::scales::ScaleKind;
use crate::tensor::{Dims, Element, FeatureMap, SampleFormat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EndpointMode {
    /// Only the maximum is stored; the minimum is taken to be zero.
    OneEndpoint,
    TwoEndpoint,
}

impl EndpointMode {
    pub const fn count(self) -> u32 {
        match self {
            EndpointMode::OneEndpoint => 1,
            EndpointMode::TwoEndpoint => 2,
        }
    }
}

/// Which scales the encoder may choose between.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalePolicy {
    /// Per block, the scale with the lower L1 error (ties go to revised linear).
    #[default]
    Adaptive,
    RevisedOnly,
    LogOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodecConfig {
    pub shape: BlockShape,
    pub mode: EndpointMode,
    pub format: SampleFormat,
    pub vbr: bool,
    pub scale: ScalePolicy,
}

impl CodecConfig {
    pub fn new(shape: BlockShape, mode: EndpointMode, format: SampleFormat, vbr: bool) -> Result<Self> {
        if shape.width > u8::MAX as usize || shape.height > u8::MAX as usize {
            return Err(invalid(format!("block shape {shape} exceeds 255 in a spatial axis")));
        }
        if shape.channels > u16::MAX as usize {
            return Err(invalid(format!("block shape {shape} exceeds 65535 channels")));
        }
        Ok(CodecConfig { shape, mode, format, vbr, scale: ScalePolicy::Adaptive })
    }

    pub fn with_scale(mut self, scale: ScalePolicy) -> Self {
        self.scale = scale;
        self
    }

    pub const fn block_size(&self) -> usize {
        self.shape.size()
    }

    /// Bits of one encoded block: endpoints plus a 3-bit index per sample.
    pub const fn block_bits(&self) -> u64 {
        (self.mode.count() * self.format.bit_width()) as u64 + 3 * self.shape.size() as u64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedBlock<T> {
    pub scale: ScaleKind,
    /// Always zero in one-endpoint mode.
    pub min: T,
    pub max: T,
    /// One index in `0..8` per block sample, in block raster order.
    pub indices: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload<T> {
    Cbr(Vec<EncodedBlock<T>>),
    Vbr(ZvcPayload<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedTensor<T> {
    pub config: CodecConfig,
    pub dims: Dims,
    pub permutation: Option<ChannelPermutation>,
    pub payload: Payload<T>,
}

impl<T: Element> EncodedTensor<T> {
    pub fn blocks(&self) -> &[EncodedBlock<T>] {
        match &self.payload {
            Payload::Cbr(blocks) => blocks,
            Payload::Vbr(p) => &p.blocks,
        }
    }

    /// Number of blocks using each scale, `(revised, log)`.
    pub fn scale_usage(&self) -> (usize, usize) {
        let log = self.blocks().iter().filter(|b| b.scale == ScaleKind::LogLinear).count();
        (self.blocks().len() - log, log)
    }
}

fn check_format<T: Element>(config: &CodecConfig) -> Result<()> {
    if config.format != T::FORMAT {
        return Err(invalid(format!("config format {} does not match {} samples", config.format, T::FORMAT)));
    }
    Ok(())
}

/// Encodes a feature map, choosing CBR or VBR from `config.vbr`.
pub fn encode<T: Element>(map: &FeatureMap<T>, config: &CodecConfig) -> Result<EncodedTensor<T>> {
    check_format::<T>(config)?;
    let payload = if config.vbr {
        Payload::Vbr(vbr::encode_vbr(map, config)?)
    } else {
        Payload::Cbr(cbr::encode_blocks(map, config)?)
    };
    Ok(EncodedTensor { config: *config, dims: map.dims(), permutation: None, payload })
}

/// Reorders channels with `perm` before encoding and records the
/// permutation so that [`decode`] restores the original order.
pub fn encode_permuted<T: Element>(
    map: &FeatureMap<T>,
    config: &CodecConfig,
    perm: &ChannelPermutation,
) -> Result<EncodedTensor<T>> {
    let permuted = apply_permutation(map, perm)?;
    let mut enc = encode(&permuted, config)?;
    enc.permutation = Some(perm.clone());
    Ok(enc)
}

pub fn decode<T: Element>(enc: &EncodedTensor<T>) -> Result<FeatureMap<T>> {
    check_format::<T>(&enc.config)?;
    let map = match &enc.payload {
        Payload::Cbr(blocks) => cbr::decode_blocks(blocks, &enc.config, enc.dims)?,
        Payload::Vbr(p) => vbr::decode_vbr(p, &enc.config, enc.dims)?,
    };
    match &enc.permutation {
        Some(perm) => apply_permutation(&map, &perm.invert()),
        None => Ok(map),
    }
}
