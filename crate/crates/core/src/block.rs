//! Cubical block partitioning and reassembly.
//!
//! Blocks tile the tensor in raster order (block-w fastest, then block-h,
//! then block-c) and hold their samples in the same w/h/c raster order.
//! Positions past the tensor edge are filled by clamp-to-edge replication,
//! so padding never widens a block's value range.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, malformed, Result};
use crate::tensor::{Dims, Element, FeatureMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockShape {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
}

impl BlockShape {
    pub fn new(width: usize, height: usize, channels: usize) -> Result<Self> {
        if width == 0 || height == 0 || channels == 0 {
            return Err(invalid(format!("block dims must be positive, got ({width}, {height}, {channels})")));
        }
        let size = width
            .checked_mul(height)
            .and_then(|s| s.checked_mul(channels))
            .ok_or_else(|| invalid("block size overflows"))?;
        if !size.is_power_of_two() {
            return Err(invalid(format!("block size {width}x{height}x{channels} = {size} is not a power of two")));
        }
        Ok(BlockShape { width, height, channels })
    }

    /// A one-dimensional shape `(size, 1, 1)`.
    pub fn linear(size: usize) -> Result<Self> {
        Self::new(size, 1, 1)
    }

    pub const fn size(&self) -> usize {
        self.width * self.height * self.channels
    }

    /// Number of blocks along each axis needed to cover `dims`.
    pub fn grid(&self, dims: Dims) -> (usize, usize, usize) {
        (dims.width.div_ceil(self.width), dims.height.div_ceil(self.height), dims.channels.div_ceil(self.channels))
    }

    pub fn block_count(&self, dims: Dims) -> usize {
        let (x, y, z) = self.grid(dims);
        x * y * z
    }

    /// Origin of the `index`-th block in traversal order.
    pub fn origin(&self, dims: Dims, index: usize) -> (usize, usize, usize) {
        let (gx, gy, _) = self.grid(dims);
        let bx = index % gx;
        let by = (index / gx) % gy;
        let bz = index / (gx * gy);
        (bx * self.width, by * self.height, bz * self.channels)
    }
}

impl std::fmt::Display for BlockShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.width, self.height, self.channels)
    }
}

impl std::str::FromStr for BlockShape {
    type Err = crate::Error;

    /// Parses `WxHxC`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(['x', 'X']).collect();
        if parts.len() != 3 {
            return Err(invalid(format!("block shape must look like WxHxC, got {s:?}")));
        }
        let mut dims = [0usize; 3];
        for (d, p) in dims.iter_mut().zip(&parts) {
            *d = p.trim().parse().map_err(|_| invalid(format!("bad block dimension {p:?}")))?;
        }
        BlockShape::new(dims[0], dims[1], dims[2])
    }
}

/// Most cube-like `(W, H, C)` factorization of a power-of-two block size.
///
/// Starts from `(1, 1, size)` and trades a factor of four in channels for a
/// doubling of both spatial sides until the channel depth is at most twice
/// the width.
pub fn derive_cubical_shape(block_size: usize) -> Result<BlockShape> {
    if block_size < 2 || !block_size.is_power_of_two() {
        return Err(invalid(format!("block size must be a power of two >= 2, got {block_size}")));
    }
    let (mut w, mut h, mut c) = (1, 1, block_size);
    while c > 2 * w && c >= 4 {
        w *= 2;
        h *= 2;
        c /= 4;
    }
    BlockShape::new(w, h, c)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block<T> {
    pub shape: BlockShape,
    pub origin: (usize, usize, usize),
    pub values: Vec<T>,
}

fn extract<T: Element>(map: &FeatureMap<T>, shape: BlockShape, origin: (usize, usize, usize)) -> Block<T> {
    let dims = map.dims();
    let (ox, oy, oz) = origin;
    let mut values = Vec::with_capacity(shape.size());
    for c in 0..shape.channels {
        let c = (oz + c).min(dims.channels - 1);
        for h in 0..shape.height {
            let h = (oy + h).min(dims.height - 1);
            for w in 0..shape.width {
                let w = (ox + w).min(dims.width - 1);
                values.push(map.get(w, h, c));
            }
        }
    }
    Block { shape, origin, values }
}

/// Splits `map` into blocks in traversal order.
pub fn partition<T: Element>(map: &FeatureMap<T>, shape: BlockShape) -> Vec<Block<T>> {
    let dims = map.dims();
    (0..shape.block_count(dims)).map(|i| extract(map, shape, shape.origin(dims, i))).collect()
}

/// Inverse of [`partition`]: drops padding and rebuilds the tensor.
///
/// Blocks must arrive in traversal order with the origins `partition` would
/// assign; anything else is reported as a corrupt stream.
pub fn reassemble<T: Element>(blocks: &[Block<T>], dims: Dims) -> Result<FeatureMap<T>> {
    let shape = match blocks.first() {
        Some(b) => b.shape,
        None => return Err(malformed("no blocks to reassemble")),
    };
    let expected = shape.block_count(dims);
    if blocks.len() != expected {
        return Err(malformed(format!("expected {expected} blocks, got {}", blocks.len())));
    }
    if dims.is_empty() {
        return Err(invalid(format!("cannot reassemble into empty dims {dims}")));
    }
    let mut data = vec![T::default(); dims.len()];
    for (i, block) in blocks.iter().enumerate() {
        if block.shape != shape || block.values.len() != shape.size() {
            return Err(malformed(format!("block {i} has inconsistent shape")));
        }
        let origin = shape.origin(dims, i);
        if block.origin != origin {
            return Err(malformed(format!("block {i} has origin {:?}, expected {:?}", block.origin, origin)));
        }
        let (ox, oy, oz) = origin;
        let mut k = 0;
        for c in oz..oz + shape.channels {
            for h in oy..oy + shape.height {
                for w in ox..ox + shape.width {
                    if w < dims.width && h < dims.height && c < dims.channels {
                        data[dims.offset(w, h, c)] = block.values[k];
                    }
                    k += 1;
                }
            }
        }
    }
    FeatureMap::new(dims, data)
}
