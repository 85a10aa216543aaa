//! Adaptive scale block compression for neural-network feature maps.
//!
//! Feature maps are cut into cubical blocks. Each block stores its endpoints
//! and a 3-bit index per sample into eight interpolation points, drawn from
//! either a power-of-two linear scale or a log-linear scale, whichever has
//! the lower L1 error for that block. The variable-bitrate variant adds a
//! zero mask and codes only the nonzero samples.
//!
//! ```
//! use asc_core::{block::derive_cubical_shape, codec, CodecConfig, Dims, EndpointMode, FeatureMap, SampleFormat};
//!
//! let map = FeatureMap::<i8>::from_fn(Dims::new(4, 4, 4), |w, h, c| (w * h + c) as i8).unwrap();
//! let shape = derive_cubical_shape(16).unwrap();
//! let config = CodecConfig::new(shape, EndpointMode::TwoEndpoint, SampleFormat::Int8, false).unwrap();
//! let encoded = codec::encode(&map, &config).unwrap();
//! let bytes = asc_core::bitstream::serialize(&encoded);
//! let decoded = codec::decode(&asc_core::bitstream::deserialize_as::<i8>(&bytes).unwrap()).unwrap();
//! assert_eq!(decoded.dims(), map.dims());
//! ```

pub mod bitstream;
pub mod block;
pub mod codec;
mod error;
pub mod fmap;
pub mod hw;
pub mod metrics;
pub mod reorder;
pub mod scales;
pub mod tensor;

pub use block::{Block, BlockShape};
pub use codec::{CodecConfig, EncodedBlock, EncodedTensor, EndpointMode, ScalePolicy};
pub use error::{Corruption, Error, FmapError, Result};
pub use scales::{InterpolationTable, ScaleKind};
pub use tensor::{AnyFeatureMap, Dims, Element, FeatureMap, Level, SampleFormat};

pub use half::f16;
