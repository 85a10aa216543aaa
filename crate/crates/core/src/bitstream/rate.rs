use num_rational::Ratio;

use super::{parse, AnyEncodedTensor};
use crate::codec::CodecConfig;
use crate::error::{invalid, Error, Result};
use crate::tensor::{AnyFeatureMap, Dims};

/// Fixed compression rate of a CBR configuration:
/// `block_size · bits / (bits · endpoints + 3 · block_size)`.
pub fn nominal_rate(config: &CodecConfig) -> Result<Ratio<u64>> {
    if config.vbr {
        return Err(Error::Unsupported("nominal rate is defined for constant-bitrate configs only".into()));
    }
    let size = config.block_size() as u64;
    let bits = u64::from(config.format.bit_width());
    Ok(Ratio::new(size * bits, config.block_bits()))
}

/// Closed-form payload length for a tensor with `nonzeros` nonzero samples
/// (ignored for CBR).
pub fn payload_bits(config: &CodecConfig, dims: Dims, nonzeros: usize) -> u64 {
    if config.vbr {
        dims.len() as u64 + nonzeros.div_ceil(config.block_size()) as u64 * config.block_bits()
    } else {
        config.shape.block_count(dims) as u64 * config.block_bits()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    /// Only defined for CBR streams.
    pub nominal: Option<Ratio<u64>>,
    /// Uncompressed sample bits over payload bits.
    pub measured: Ratio<u64>,
    pub uncompressed_bits: u64,
    pub payload_bits: u64,
    /// Fraction of zero samples in the source.
    pub sparsity: f64,
    /// Blocks per scale, `(revised, log)`.
    pub scale_usage: (usize, usize),
}

pub fn measured_rate(stream: &[u8], source: &AnyFeatureMap) -> Result<RateReport> {
    let parsed = parse(stream)?;
    let config = *parsed.tensor.config();
    let dims = parsed.tensor.dims();
    if dims != source.dims() || config.format != source.format() {
        return Err(invalid(format!(
            "stream holds {} {dims}, source is {} {}",
            config.format,
            source.format(),
            source.dims()
        )));
    }
    let uncompressed_bits = dims.len() as u64 * u64::from(config.format.bit_width());
    let nominal = if config.vbr { None } else { Some(nominal_rate(&config)?) };
    let scale_usage = match &parsed.tensor {
        AnyEncodedTensor::Int8(t) => t.scale_usage(),
        AnyEncodedTensor::Int16(t) => t.scale_usage(),
        AnyEncodedTensor::Fp16(t) => t.scale_usage(),
    };
    Ok(RateReport {
        nominal,
        measured: Ratio::new(uncompressed_bits, parsed.payload_bits),
        uncompressed_bits,
        payload_bits: parsed.payload_bits,
        sparsity: source.zero_count() as f64 / dims.len() as f64,
        scale_usage,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitstream::serialize;
    use crate::block::BlockShape;
    use crate::codec::{encode, EndpointMode};
    use crate::tensor::{FeatureMap, SampleFormat};

    fn cbr(mode: EndpointMode, size: usize, format: SampleFormat) -> CodecConfig {
        CodecConfig::new(BlockShape::linear(size).unwrap(), mode, format, false).unwrap()
    }

    #[test]
    fn nominal_fixtures() {
        use EndpointMode::*;
        use SampleFormat::*;
        assert_eq!(nominal_rate(&cbr(TwoEndpoint, 16, Int8)).unwrap(), Ratio::new(128, 64));
        assert_eq!(nominal_rate(&cbr(OneEndpoint, 8, Int8)).unwrap(), Ratio::from_integer(2));
        assert_eq!(nominal_rate(&cbr(OneEndpoint, 16, Int16)).unwrap(), Ratio::from_integer(4));
        assert_eq!(nominal_rate(&cbr(OneEndpoint, 8, Int16)).unwrap(), Ratio::new(16, 5));
        let mut vbr = cbr(TwoEndpoint, 16, Int8);
        vbr.vbr = true;
        assert!(matches!(nominal_rate(&vbr), Err(Error::Unsupported(_))));
    }

    #[test]
    fn all_zero_vbr_int16_rate_is_sixteen() {
        let map = FeatureMap::<i16>::new(Dims::new(4, 4, 4), vec![0; 64]).unwrap();
        let mut c = cbr(EndpointMode::TwoEndpoint, 16, SampleFormat::Int16);
        c.vbr = true;
        let bytes = serialize(&encode(&map, &c).unwrap());
        let r = measured_rate(&bytes, &map.into()).unwrap();
        assert_eq!(r.measured, Ratio::from_integer(16));
        assert_eq!(r.nominal, None);
        assert_eq!(r.sparsity, 1.0);
    }

    #[test]
    fn padded_cbr_is_below_nominal() {
        let map = FeatureMap::<i8>::new(Dims::new(3, 1, 1), vec![1, 2, 3]).unwrap();
        let c = cbr(EndpointMode::TwoEndpoint, 4, SampleFormat::Int8);
        let bytes = serialize(&encode(&map, &c).unwrap());
        let r = measured_rate(&bytes, &map.into()).unwrap();
        assert_eq!(r.payload_bits, 28);
        assert_eq!(r.measured, Ratio::new(24, 28));
        assert!(r.measured < r.nominal.unwrap());
    }

    #[test]
    fn source_mismatch() {
        let map = FeatureMap::<i8>::new(Dims::new(4, 1, 1), vec![1, 2, 3, 4]).unwrap();
        let c = cbr(EndpointMode::TwoEndpoint, 4, SampleFormat::Int8);
        let bytes = serialize(&encode(&map, &c).unwrap());
        let other = FeatureMap::<i8>::new(Dims::new(2, 2, 1), vec![1, 2, 3, 4]).unwrap();
        assert!(measured_rate(&bytes, &other.into()).is_err());
    }
}
