//! Zero-value compression wrapper.
//!
//! A one-bit-per-sample mask marks the nonzero samples. The nonzeros are
//! gathered in global raster order, cut into one-dimensional blocks of the
//! configured block size, and each block is coded like a CBR block. The last
//! partial block is padded by repeating its final value, which keeps the pad
//! inside the block's range.

use rayon::prelude::*;

use super::cbr::{decode_block, encode_block};
use super::{CodecConfig, EncodedBlock};
use crate::error::{malformed, Result};
use crate::tensor::{Dims, Element, FeatureMap};

/// Bit `i` is set when sample `i` (raster order) is nonzero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZvcMask {
    len: usize,
    words: Vec<u64>,
}

impl ZvcMask {
    pub fn new(len: usize) -> Self {
        ZvcMask { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn from_bools(bits: impl IntoIterator<Item = bool>) -> Self {
        let mut mask = ZvcMask::new(0);
        for b in bits {
            if mask.len.is_multiple_of(64) {
                mask.words.push(0);
            }
            if b {
                mask.words[mask.len / 64] |= 1 << (mask.len % 64);
            }
            mask.len += 1;
        }
        mask
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "mask index {i} out of range {}", self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "mask index {i} out of range {}", self.len);
        if value {
            self.words[i / 64] |= 1 << (i % 64);
        } else {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.get(i))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZvcPayload<T> {
    pub mask: ZvcMask,
    pub blocks: Vec<EncodedBlock<T>>,
}

pub(super) fn encode_vbr<T: Element>(map: &FeatureMap<T>, config: &CodecConfig) -> Result<ZvcPayload<T>> {
    let mask = ZvcMask::from_bools(map.data().iter().map(|v| !v.is_zero()));
    let nonzeros: Vec<T> = map.data().iter().copied().filter(|v| !v.is_zero()).collect();
    let size = config.block_size();
    let blocks = nonzeros
        .par_chunks(size)
        .map(|chunk| {
            if chunk.len() == size {
                encode_block(chunk, config)
            } else {
                let mut padded = chunk.to_vec();
                padded.resize(size, *chunk.last().expect("chunks are nonempty"));
                encode_block(&padded, config)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ZvcPayload { mask, blocks })
}

pub(super) fn decode_vbr<T: Element>(
    payload: &ZvcPayload<T>,
    config: &CodecConfig,
    dims: Dims,
) -> Result<FeatureMap<T>> {
    if payload.mask.len() != dims.len() {
        return Err(malformed(format!("mask covers {} samples, tensor has {}", payload.mask.len(), dims.len())));
    }
    let nnz = payload.mask.count_ones();
    let size = config.block_size();
    if payload.blocks.len() * size < nnz {
        return Err(malformed(format!(
            "mask marks {nnz} nonzeros but blocks hold only {}",
            payload.blocks.len() * size
        )));
    }
    if payload.blocks.len() != nnz.div_ceil(size) {
        return Err(malformed(format!(
            "{} nonzero blocks for {nnz} nonzeros of block size {size}",
            payload.blocks.len()
        )));
    }
    let values = payload.blocks.par_iter().map(|b| decode_block(b, config)).collect::<Result<Vec<_>>>()?;
    let mut nonzeros = values.into_iter().flatten();
    let data = payload
        .mask
        .iter()
        .map(|bit| if bit { nonzeros.next().expect("count checked above") } else { T::default() })
        .collect();
    FeatureMap::new(dims, data)
}
