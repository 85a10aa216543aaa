//! Reconstruction quality metrics.

use serde::{Serialize, Serializer};

use crate::error::{invalid, Result};
use crate::tensor::AnyFeatureMap;

/// Peak signal-to-noise ratio; infinite when the reconstruction is exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Psnr {
    Finite(f64),
    Infinite,
}

impl Serialize for Psnr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Psnr::Finite(db) => s.serialize_f64(*db),
            Psnr::Infinite => s.serialize_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QualityReport {
    pub samples: usize,
    pub l1_total: f64,
    pub l1_mean: f64,
    pub mse: f64,
    pub psnr: Psnr,
    pub max_abs_error: f64,
    /// Blocks per scale, when the stream is known.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale_usage: Option<ScaleUsage>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ScaleUsage {
    pub revised_linear: usize,
    pub log_linear: usize,
}

/// Compares a reconstruction against its original. PSNR uses the largest
/// representable magnitude of the sample format as peak.
pub fn quality(original: &AnyFeatureMap, reconstructed: &AnyFeatureMap) -> Result<QualityReport> {
    if original.format() != reconstructed.format() || original.dims() != reconstructed.dims() {
        return Err(invalid(format!(
            "cannot compare {} {} with {} {}",
            original.format(),
            original.dims(),
            reconstructed.format(),
            reconstructed.dims()
        )));
    }
    let (a, b) = (original.to_f64(), reconstructed.to_f64());
    let n = a.len();
    let (mut l1, mut sq, mut max_abs) = (0.0, 0.0, 0.0f64);
    for (x, y) in a.iter().zip(&b) {
        let d = (x - y).abs();
        l1 += d;
        sq += d * d;
        max_abs = max_abs.max(d);
    }
    let mse = sq / n as f64;
    let psnr = if mse == 0.0 {
        Psnr::Infinite
    } else {
        let peak = original.format().peak();
        Psnr::Finite(10.0 * (peak * peak / mse).log10())
    };
    Ok(QualityReport {
        samples: n,
        l1_total: l1,
        l1_mean: l1 / n as f64,
        mse,
        psnr,
        max_abs_error: max_abs,
        scale_usage: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{Dims, FeatureMap};

    #[test]
    fn identical_is_infinite() {
        let m: AnyFeatureMap = FeatureMap::<i8>::new(Dims::new(2, 2, 1), vec![1, 2, 3, 4]).unwrap().into();
        let q = quality(&m, &m).unwrap();
        assert_eq!(q.l1_total, 0.0);
        assert_eq!(q.psnr, Psnr::Infinite);
    }

    #[test]
    fn single_lsb_error() {
        let n = 64;
        let a: AnyFeatureMap = FeatureMap::<i8>::new(Dims::new(8, 8, 1), vec![5; n]).unwrap().into();
        let mut data = vec![5i8; n];
        data[17] = 6;
        let b: AnyFeatureMap = FeatureMap::new(Dims::new(8, 8, 1), data).unwrap().into();
        let q = quality(&a, &b).unwrap();
        assert_eq!(q.mse, 1.0 / n as f64);
        assert_eq!(q.max_abs_error, 1.0);
        assert_eq!(q.l1_total, 1.0);
        let Psnr::Finite(db) = q.psnr else { panic!() };
        assert!((db - 10.0 * (127.0f64 * 127.0 * 64.0).log10()).abs() < 1e-9);
    }

    #[test]
    fn mismatch() {
        let a: AnyFeatureMap = FeatureMap::<i8>::new(Dims::new(2, 1, 1), vec![1, 2]).unwrap().into();
        let b: AnyFeatureMap = FeatureMap::<i16>::new(Dims::new(2, 1, 1), vec![1, 2]).unwrap().into();
        assert!(quality(&a, &b).is_err());
    }
}
