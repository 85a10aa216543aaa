//! Interpolation points and thresholds for the two block scales.
//!
//! Both scales are expressed in the *shifted* domain, i.e. relative to the
//! minimum endpoint `m`, where every point and threshold is `k·R / 2^s` for
//! the range `R = M − m`, a small odd `k` and a shift `s`:
//!
//! ```text
//! index        0    1     2     3     4     5     6     7
//! revised      0   R/8   R/4  3R/8   R/2  5R/8  3R/4   R
//! log-linear   0   R/32  R/16 3R/32  R/8   R/4   R/2   R
//! ```
//!
//! Threshold `th_i` sits halfway between points `i-1` and `i`. A shifted
//! sample maps to the highest index whose threshold it strictly exceeds.

use std::cmp::Ordering;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::tensor::Level;

/// Interpolation scale carried by an encoded block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScaleKind {
    RevisedLinear,
    LogLinear,
}

impl ScaleKind {
    pub const ALL: [ScaleKind; 2] = [ScaleKind::RevisedLinear, ScaleKind::LogLinear];

    /// Points as `(numerator, shift)` pairs.
    pub const fn point_fractions(self) -> [(u32, u32); 8] {
        match self {
            ScaleKind::RevisedLinear => [(0, 0), (1, 3), (1, 2), (3, 3), (1, 1), (5, 3), (3, 2), (1, 0)],
            ScaleKind::LogLinear => [(0, 0), (1, 5), (1, 4), (3, 5), (1, 3), (1, 2), (1, 1), (1, 0)],
        }
    }

    /// Thresholds `th1..th7` as `(numerator, shift)` pairs.
    pub const fn threshold_fractions(self) -> [(u32, u32); 7] {
        match self {
            ScaleKind::RevisedLinear => [(1, 4), (3, 4), (5, 4), (7, 4), (9, 4), (11, 4), (7, 3)],
            ScaleKind::LogLinear => [(1, 6), (3, 6), (5, 6), (7, 6), (3, 4), (3, 3), (3, 2)],
        }
    }
}

impl std::fmt::Display for ScaleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScaleKind::RevisedLinear => "revised-linear",
            ScaleKind::LogLinear => "log-linear",
        })
    }
}

fn check_range<L: Level>(range: L) -> Result<()> {
    // NaN compares as unordered and is rejected here too.
    if !matches!(range.partial_cmp(&L::ZERO), Some(Ordering::Greater | Ordering::Equal)) {
        return Err(invalid(format!("range must be nonnegative, got {range:?}")));
    }
    Ok(())
}

pub fn shifted_points<L: Level>(kind: ScaleKind, range: L) -> Result<[L; 8]> {
    check_range(range)?;
    Ok(kind.point_fractions().map(|(k, s)| range.scaled(k, s)))
}

pub fn shifted_thresholds<L: Level>(kind: ScaleKind, range: L) -> Result<[L; 7]> {
    check_range(range)?;
    Ok(kind.threshold_fractions().map(|(k, s)| range.scaled(k, s)))
}

/// Points and thresholds of one scale for one endpoint pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationTable<L> {
    pub kind: ScaleKind,
    pub min: L,
    pub max: L,
    /// Absolute interpolation points `v0..v7`.
    pub points: [L; 8],
    /// Thresholds `th1..th7`, in the shifted domain.
    pub thresholds: [L; 7],
}

pub fn build_table<L: Level>(kind: ScaleKind, min: L, max: L) -> Result<InterpolationTable<L>> {
    if !matches!(min.partial_cmp(&max), Some(Ordering::Less | Ordering::Equal)) {
        return Err(invalid(format!("minimum endpoint {min:?} exceeds maximum {max:?}")));
    }
    let range = max - min;
    let shifted = shifted_points(kind, range)?;
    let mut points = shifted.map(|p| min + p);
    // Exact for integers; pins v7 for float rounding.
    points[7] = max;
    Ok(InterpolationTable { kind, min, max, points, thresholds: shifted_thresholds(kind, range)? })
}

impl<L: Level> InterpolationTable<L> {
    /// Index for a sample already shifted by the minimum endpoint.
    #[inline]
    pub fn index_of_shifted(&self, shifted: L) -> u8 {
        let mut index = 0;
        for (i, &th) in self.thresholds.iter().enumerate() {
            if shifted > th {
                index = i as u8 + 1;
            }
        }
        index
    }

    #[inline]
    pub fn point(&self, index: u8) -> L {
        self.points[index as usize]
    }
}

/// Threshold-based index assignment for a sample inside `[min, max]`.
pub fn assign_index<L: Level>(x: L, table: &InterpolationTable<L>) -> Result<u8> {
    if !(table.min <= x && x <= table.max) {
        return Err(invalid(format!("sample {x:?} outside endpoints [{:?}, {:?}]", table.min, table.max)));
    }
    Ok(table.index_of_shifted(x - table.min))
}

/// Exact points of the classic seven-interval linear scale,
/// `v_i = (i·M + (7 − i)·m) / 7`.
pub fn linear_reference_points(min: i64, max: i64) -> Result<[Ratio<i64>; 8]> {
    if min > max {
        return Err(invalid(format!("minimum endpoint {min} exceeds maximum {max}")));
    }
    Ok(std::array::from_fn(|i| {
        let i = i as i64;
        Ratio::new(i * max + (7 - i) * min, 7)
    }))
}
