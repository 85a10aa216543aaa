//! LSB-first bit packing.

use crate::error::{Corruption, Result};

#[derive(Debug, Default)]
pub struct BitWriter {
    buf: Vec<u8>,
    bits: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends the low `width` bits of `value`, least significant first.
    pub fn write(&mut self, value: u32, width: u32) {
        debug_assert!(width <= 32);
        for i in 0..width {
            let bit = (value >> i) & 1;
            let pos = (self.bits % 8) as u32;
            if pos == 0 {
                self.buf.push(0);
            }
            if bit != 0 {
                *self.buf.last_mut().unwrap() |= 1 << pos;
            }
            self.bits += 1;
        }
    }

    pub fn bit_len(&self) -> u64 {
        self.bits
    }

    /// The packed bytes; the final byte is zero-padded.
    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

#[derive(Debug)]
pub struct BitReader<'a> {
    data: &'a [u8],
    pos: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        BitReader { data, pos: 0 }
    }

    pub fn read(&mut self, width: u32) -> Result<u32> {
        debug_assert!(width <= 32);
        if self.pos + u64::from(width) > self.data.len() as u64 * 8 {
            return Err(Corruption::Truncated.into());
        }
        let mut value = 0u32;
        for i in 0..width {
            let byte = self.data[(self.pos / 8) as usize];
            value |= u32::from((byte >> (self.pos % 8)) & 1) << i;
            self.pos += 1;
        }
        Ok(value)
    }

    pub fn bit_pos(&self) -> u64 {
        self.pos
    }

    /// Checks that only zero padding remains after the current position.
    pub fn finish(self) -> Result<()> {
        let used = self.pos.div_ceil(8) as usize;
        if used < self.data.len() {
            return Err(Corruption::TrailingData(self.data.len() - used).into());
        }
        if !self.pos.is_multiple_of(8) && self.data[used - 1] >> (self.pos % 8) != 0 {
            return Err(Corruption::Malformed("nonzero padding bits".into()).into());
        }
        Ok(())
    }
}
