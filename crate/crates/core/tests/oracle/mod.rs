//! Reference implementations used by the integration and acceptance tests.
//!
//! Everything here is written from the scale definitions alone, with exact
//! integer arithmetic and no calls into the library's index or threshold code.

#![allow(dead_code)]

use asc_core::ScaleKind;

/// Shifted interpolation points as multiples of `R / 32`.
pub fn points_over_32(kind: ScaleKind) -> [i64; 8] {
    match kind {
        ScaleKind::RevisedLinear => [0, 4, 8, 12, 16, 20, 24, 32],
        ScaleKind::LogLinear => [0, 1, 2, 3, 4, 8, 16, 32],
    }
}

/// Index of the exact point `m + p·R/32` nearest to `x`, ties to the lower index.
pub fn nearest_index(kind: ScaleKind, min: i64, max: i64, x: i64) -> u8 {
    let range = max - min;
    let target = 32 * (x - min);
    let mut best = 0usize;
    let mut best_dist = i64::MAX;
    for (i, p) in points_over_32(kind).iter().enumerate() {
        let dist = (target - p * range).abs();
        if dist < best_dist {
            best = i;
            best_dist = dist;
        }
    }
    best as u8
}

/// Distance from `x` to the nearest exact point, in units of `1/32`.
pub fn nearest_distance_32(kind: ScaleKind, min: i64, max: i64, x: i64) -> i64 {
    let range = max - min;
    let target = 32 * (x - min);
    points_over_32(kind).iter().map(|p| (target - p * range).abs()).min().unwrap()
}

/// Reconstructed integer value for `index`: `m + floor(p·R/32)`.
pub fn reconstruct(kind: ScaleKind, min: i64, max: i64, index: u8) -> i64 {
    min + (points_over_32(kind)[index as usize] * (max - min)).div_euclid(32)
}

/// L1 error of a block of integers under one scale, using the oracle indices.
pub fn block_l1(kind: ScaleKind, values: &[i64]) -> i64 {
    let min = *values.iter().min().unwrap();
    let max = *values.iter().max().unwrap();
    values.iter().map(|&x| (x - reconstruct(kind, min, max, nearest_index(kind, min, max, x))).abs()).sum()
}

/// Bits of a block record: endpoints plus three bits per sample.
pub fn block_bits(endpoints: u64, sample_bits: u64, block_size: u64) -> u64 {
    endpoints * sample_bits + 3 * block_size
}
