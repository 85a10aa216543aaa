use rayon::prelude::*;

use super::{CodecConfig, EncodedBlock, EndpointMode, ScalePolicy};
use crate::block::{partition, reassemble, Block};
use crate::error::{malformed, Error, Result};
use crate::scales::{build_table, InterpolationTable, ScaleKind};
use crate::tensor::{Dims, Element, FeatureMap, Level};

/// Block endpoints `(min, max)`; the minimum is pinned to zero in
/// one-endpoint mode.
pub fn find_endpoints<T: Element>(values: &[T], mode: EndpointMode) -> Result<(T, T)> {
    let first = *values.first().ok_or_else(|| crate::error::invalid("empty block"))?;
    let (mut lo, mut hi) = (first, first);
    for &v in &values[1..] {
        if v.level() < lo.level() {
            lo = v;
        }
        if v.level() > hi.level() {
            hi = v;
        }
    }
    match mode {
        EndpointMode::TwoEndpoint => Ok((lo, hi)),
        EndpointMode::OneEndpoint => {
            if lo.is_negative() {
                return Err(Error::ModeViolation(format!("{lo:?}")));
            }
            // -0.0 would collide with the scale flag in the sign bit.
            let hi = if hi.is_zero() { T::default() } else { hi };
            Ok((T::default(), hi))
        }
    }
}

#[inline]
fn reconstruct<T: Element>(table: &InterpolationTable<T::Level>, index: u8) -> T {
    T::from_level(table.point(index))
}

/// Sum of absolute reconstruction errors of `values` under `table`.
pub fn block_l1<T: Element>(values: &[T], table: &InterpolationTable<T::Level>) -> T::Level {
    values.iter().fold(<T::Level as Level>::ZERO, |acc, &x| {
        let index = table.index_of_shifted(x.level() - table.min);
        acc + (x.level() - reconstruct::<T>(table, index).level()).abs()
    })
}

/// Indices and L1 error of `values` under one scale.
pub fn trial_encode<T: Element>(values: &[T], kind: ScaleKind, min: T, max: T) -> Result<(Vec<u8>, T::Level)> {
    let table = build_table(kind, min.level(), max.level())?;
    let mut l1 = <T::Level as Level>::ZERO;
    let indices = values
        .iter()
        .map(|&x| {
            let index = table.index_of_shifted(x.level() - table.min);
            l1 = l1 + (x.level() - reconstruct::<T>(&table, index).level()).abs();
            index
        })
        .collect();
    Ok((indices, l1))
}

pub fn encode_block<T: Element>(values: &[T], config: &CodecConfig) -> Result<EncodedBlock<T>> {
    let (min, max) = find_endpoints(values, config.mode)?;
    let kinds: &[ScaleKind] = if min.level() == max.level() {
        // Equal endpoints cannot signal the log scale; both scales coincide.
        &[ScaleKind::RevisedLinear]
    } else {
        match config.scale {
            ScalePolicy::Adaptive => &ScaleKind::ALL,
            ScalePolicy::RevisedOnly => &[ScaleKind::RevisedLinear],
            ScalePolicy::LogOnly => &[ScaleKind::LogLinear],
        }
    };
    let mut best: Option<(ScaleKind, Vec<u8>, T::Level)> = None;
    for &kind in kinds {
        let (indices, l1) = trial_encode(values, kind, min, max)?;
        // Strictly lower wins, so revised linear keeps ties.
        if best.as_ref().is_none_or(|(_, _, b)| l1 < *b) {
            best = Some((kind, indices, l1));
        }
    }
    let (scale, indices, _) = best.expect("at least one scale is tried");
    Ok(EncodedBlock { scale, min, max, indices })
}

pub fn decode_block<T: Element>(enc: &EncodedBlock<T>, config: &CodecConfig) -> Result<Vec<T>> {
    if enc.indices.len() != config.block_size() {
        return Err(malformed(format!(
            "block carries {} indices, expected {}",
            enc.indices.len(),
            config.block_size()
        )));
    }
    if config.mode == EndpointMode::OneEndpoint && !enc.min.is_zero() {
        return Err(malformed("one-endpoint block with nonzero minimum"));
    }
    let table = build_table(enc.scale, enc.min.level(), enc.max.level())
        .map_err(|_| malformed(format!("endpoints {:?} > {:?}", enc.min, enc.max)))?;
    enc.indices
        .iter()
        .map(
            |&i| {
                if i >= 8 {
                    Err(malformed(format!("index {i} out of range")))
                } else {
                    Ok(reconstruct::<T>(&table, i))
                }
            },
        )
        .collect()
}

pub(super) fn encode_blocks<T: Element>(map: &FeatureMap<T>, config: &CodecConfig) -> Result<Vec<EncodedBlock<T>>> {
    partition(map, config.shape).par_iter().map(|b| encode_block(&b.values, config)).collect()
}

pub(super) fn decode_blocks<T: Element>(
    blocks: &[EncodedBlock<T>],
    config: &CodecConfig,
    dims: Dims,
) -> Result<FeatureMap<T>> {
    let shape = config.shape;
    let decoded = blocks
        .par_iter()
        .enumerate()
        .map(|(i, enc)| Ok(Block { shape, origin: shape.origin(dims, i), values: decode_block(enc, config)? }))
        .collect::<Result<Vec<_>>>()?;
    reassemble(&decoded, dims)
}
