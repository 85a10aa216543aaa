//! Feature-map data model.
//!
//! A feature map is a `width × height × channels` tensor stored in raster
//! order: `w` varies fastest, then `h`, then `c`. Samples are one of three
//! formats, each mapped onto an arithmetic [`Level`] domain used by the codec:
//! signed integers compute in `i64` with floor semantics, FP16 computes in
//! `f64` and narrows back with round-to-nearest-even.

use std::fmt::Debug;
use std::ops::{Add, Sub};

use half::f16;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, FmapError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleFormat {
    Int8,
    Int16,
    Fp16,
}

impl SampleFormat {
    pub const fn bit_width(self) -> u32 {
        match self {
            SampleFormat::Int8 => 8,
            SampleFormat::Int16 | SampleFormat::Fp16 => 16,
        }
    }

    pub const fn tag(self) -> u8 {
        match self {
            SampleFormat::Int8 => 0,
            SampleFormat::Int16 => 1,
            SampleFormat::Fp16 => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(SampleFormat::Int8),
            1 => Some(SampleFormat::Int16),
            2 => Some(SampleFormat::Fp16),
            _ => None,
        }
    }

    /// Largest representable magnitude, used as the PSNR peak.
    pub const fn peak(self) -> f64 {
        match self {
            SampleFormat::Int8 => 127.0,
            SampleFormat::Int16 => 32767.0,
            SampleFormat::Fp16 => 65504.0,
        }
    }
}

impl std::fmt::Display for SampleFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SampleFormat::Int8 => "int8",
            SampleFormat::Int16 => "int16",
            SampleFormat::Fp16 => "fp16",
        })
    }
}

/// Arithmetic domain for interpolation math.
pub trait Level: Copy + PartialOrd + Debug + Send + Sync + Add<Output = Self> + Sub<Output = Self> {
    const ZERO: Self;

    /// `self * num / 2^shift`. Integer levels round toward negative infinity,
    /// which is what a hardware right shift does.
    fn scaled(self, num: u32, shift: u32) -> Self;

    fn abs(self) -> Self;

    fn to_f64(self) -> f64;
}

impl Level for i64 {
    const ZERO: Self = 0;

    #[inline]
    fn scaled(self, num: u32, shift: u32) -> Self {
        (self * i64::from(num)) >> shift
    }

    #[inline]
    fn abs(self) -> Self {
        i64::abs(self)
    }

    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Level for f64 {
    const ZERO: Self = 0.0;

    #[inline]
    fn scaled(self, num: u32, shift: u32) -> Self {
        // Both factors are exact for binary16-derived ranges.
        self * f64::from(num) / (1u64 << shift) as f64
    }

    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }

    fn to_f64(self) -> f64 {
        self
    }
}

/// A storable sample type.
pub trait Element: Copy + PartialEq + Debug + Default + Send + Sync + 'static {
    const FORMAT: SampleFormat;
    type Level: Level;

    fn level(self) -> Self::Level;

    /// Narrows a level back to a sample. Levels produced by the codec always
    /// lie between two samples of this type, so integer narrowing never
    /// saturates in practice.
    fn from_level(level: Self::Level) -> Self;

    /// Raw format-width word, zero-extended to 16 bits.
    fn to_bits(self) -> u16;

    fn from_bits(bits: u16) -> Self;

    fn is_zero(self) -> bool;

    fn is_negative(self) -> bool;

    fn is_finite(self) -> bool {
        true
    }
}

impl Element for i8 {
    const FORMAT: SampleFormat = SampleFormat::Int8;
    type Level = i64;

    fn level(self) -> i64 {
        i64::from(self)
    }

    fn from_level(level: i64) -> Self {
        level.clamp(i64::from(i8::MIN), i64::from(i8::MAX)) as i8
    }

    fn to_bits(self) -> u16 {
        u16::from(self as u8)
    }

    fn from_bits(bits: u16) -> Self {
        bits as u8 as i8
    }

    fn is_zero(self) -> bool {
        self == 0
    }

    fn is_negative(self) -> bool {
        self < 0
    }
}

impl Element for i16 {
    const FORMAT: SampleFormat = SampleFormat::Int16;
    type Level = i64;

    fn level(self) -> i64 {
        i64::from(self)
    }

    fn from_level(level: i64) -> Self {
        level.clamp(i64::from(i16::MIN), i64::from(i16::MAX)) as i16
    }

    fn to_bits(self) -> u16 {
        self as u16
    }

    fn from_bits(bits: u16) -> Self {
        bits as i16
    }

    fn is_zero(self) -> bool {
        self == 0
    }

    fn is_negative(self) -> bool {
        self < 0
    }
}

impl Element for f16 {
    const FORMAT: SampleFormat = SampleFormat::Fp16;
    type Level = f64;

    fn level(self) -> f64 {
        self.to_f64()
    }

    fn from_level(level: f64) -> Self {
        f16::from_f64(level)
    }

    fn to_bits(self) -> u16 {
        f16::to_bits(self)
    }

    fn from_bits(bits: u16) -> Self {
        f16::from_bits(bits)
    }

    fn is_zero(self) -> bool {
        self.to_bits() & 0x7FFF == 0
    }

    fn is_negative(self) -> bool {
        self < f16::ZERO
    }

    fn is_finite(self) -> bool {
        f16::is_finite(self)
    }
}

/// Tensor extent `(width, height, channels)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
}

impl Dims {
    pub const fn new(width: usize, height: usize, channels: usize) -> Self {
        Dims { width, height, channels }
    }

    pub const fn len(&self) -> usize {
        self.width * self.height * self.channels
    }

    pub const fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub const fn plane(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub const fn offset(&self, w: usize, h: usize, c: usize) -> usize {
        (c * self.height + h) * self.width + w
    }
}

impl std::fmt::Display for Dims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}x{}", self.width, self.height, self.channels)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap<T> {
    dims: Dims,
    data: Vec<T>,
}

impl<T: Element> FeatureMap<T> {
    pub fn new(dims: Dims, data: Vec<T>) -> Result<Self> {
        if dims.width == 0 || dims.height == 0 || dims.channels == 0 {
            return Err(invalid(format!("feature map dims must be positive, got {dims}")));
        }
        if data.len() != dims.len() {
            return Err(invalid(format!("feature map {dims} needs {} samples, got {}", dims.len(), data.len())));
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Fmap(FmapError::NonFinite(index)));
        }
        Ok(FeatureMap { dims, data })
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize, usize) -> T) -> Result<Self> {
        let mut data = Vec::with_capacity(dims.len());
        for c in 0..dims.channels {
            for h in 0..dims.height {
                for w in 0..dims.width {
                    data.push(f(w, h, c));
                }
            }
        }
        Self::new(dims, data)
    }

    pub fn format(&self) -> SampleFormat {
        T::FORMAT
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, w: usize, h: usize, c: usize) -> T {
        self.data[self.dims.offset(w, h, c)]
    }

    /// The contiguous `width × height` plane of one channel.
    pub fn channel(&self, c: usize) -> &[T] {
        let plane = self.dims.plane();
        &self.data[c * plane..(c + 1) * plane]
    }

    pub fn zero_count(&self) -> usize {
        self.data.iter().filter(|v| v.is_zero()).count()
    }
}

/// A feature map of any supported format.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyFeatureMap {
    Int8(FeatureMap<i8>),
    Int16(FeatureMap<i16>),
    Fp16(FeatureMap<f16>),
}

impl AnyFeatureMap {
    pub fn format(&self) -> SampleFormat {
        match self {
            AnyFeatureMap::Int8(_) => SampleFormat::Int8,
            AnyFeatureMap::Int16(_) => SampleFormat::Int16,
            AnyFeatureMap::Fp16(_) => SampleFormat::Fp16,
        }
    }

    pub fn dims(&self) -> Dims {
        match self {
            AnyFeatureMap::Int8(m) => m.dims(),
            AnyFeatureMap::Int16(m) => m.dims(),
            AnyFeatureMap::Fp16(m) => m.dims(),
        }
    }

    /// All samples widened to `f64`, in raster order.
    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            AnyFeatureMap::Int8(m) => m.data().iter().map(|&v| f64::from(v)).collect(),
            AnyFeatureMap::Int16(m) => m.data().iter().map(|&v| f64::from(v)).collect(),
            AnyFeatureMap::Fp16(m) => m.data().iter().map(|v| v.to_f64()).collect(),
        }
    }

    pub fn zero_count(&self) -> usize {
        match self {
            AnyFeatureMap::Int8(m) => m.zero_count(),
            AnyFeatureMap::Int16(m) => m.zero_count(),
            AnyFeatureMap::Fp16(m) => m.zero_count(),
        }
    }
}

impl From<FeatureMap<i8>> for AnyFeatureMap {
    fn from(m: FeatureMap<i8>) -> Self {
        AnyFeatureMap::Int8(m)
    }
}

impl From<FeatureMap<i16>> for AnyFeatureMap {
    fn from(m: FeatureMap<i16>) -> Self {
        AnyFeatureMap::Int16(m)
    }
}

impl From<FeatureMap<f16>> for AnyFeatureMap {
    fn from(m: FeatureMap<f16>) -> Self {
        AnyFeatureMap::Fp16(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_widths() {
        assert_eq!(SampleFormat::Int8.bit_width(), 8);
        assert_eq!(SampleFormat::Int16.bit_width(), 16);
        assert_eq!(SampleFormat::Fp16.bit_width(), 16);
        for f in [SampleFormat::Int8, SampleFormat::Int16, SampleFormat::Fp16] {
            assert_eq!(SampleFormat::from_tag(f.tag()), Some(f));
        }
        assert_eq!(SampleFormat::from_tag(3), None);
    }

    #[test]
    fn raster_order_is_w_then_h_then_c() {
        let m = FeatureMap::<i8>::from_fn(Dims::new(3, 2, 2), |w, h, c| (w + 10 * h + 100 * c) as i8).unwrap();
        assert_eq!(&m.data()[..4], &[0, 1, 2, 10]);
        assert_eq!(m.get(2, 1, 1), 112);
        assert_eq!(m.channel(1), &[100, 101, 102, 110, 111, 112]);
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(FeatureMap::<i8>::new(Dims::new(2, 2, 1), vec![0; 3]).is_err());
        assert!(FeatureMap::<i8>::new(Dims::new(0, 2, 1), vec![]).is_err());
        let nan = FeatureMap::<f16>::new(Dims::new(2, 1, 1), vec![f16::ONE, f16::NAN]);
        assert_eq!(nan.unwrap_err(), Error::Fmap(FmapError::NonFinite(1)));
        let inf = FeatureMap::<f16>::new(Dims::new(1, 1, 1), vec![f16::NEG_INFINITY]);
        assert!(inf.is_err());
    }

    #[test]
    fn integer_scaling_floors() {
        assert_eq!(7i64.scaled(3, 3), 2);
        assert_eq!(96i64.scaled(5, 6), 7);
        assert_eq!(1.0f64.scaled(3, 5), 3.0 / 32.0);
    }
}
