//! MSB-first bit I/O with exp-Golomb codes, plus the `SCCF` container.
//!
//! Every syntax element in the codec is a raw flag, a fixed-width field or an
//! order-0 exp-Golomb code. Encoders write through [`BitSink`] so the same
//! serialisation code can either emit bytes ([`BitWriter`]) or just count
//! bits for rate estimation ([`BitCounter`]).

mod container;

pub use container::{
    read_container, write_container, BitstreamHeader, ToolFlags, FORMAT_VERSION, MAGIC,
};

use crate::{Error, Result};

/// Destination for syntax elements.
pub trait BitSink {
    /// Writes the low `n` bits of `value`, most significant first. `n <= 64`.
    fn put_bits(&mut self, value: u64, n: u32);

    fn bits_written(&self) -> u64;

    #[inline]
    fn put_flag(&mut self, bit: bool) {
        self.put_bits(u64::from(bit), 1);
    }

    /// Order-0 exp-Golomb.
    #[inline]
    fn put_ue(&mut self, v: u32) {
        let code = u64::from(v) + 1;
        let len = 64 - code.leading_zeros();
        self.put_bits(0, len - 1);
        self.put_bits(code, len);
    }

    #[inline]
    fn put_se(&mut self, v: i32) {
        self.put_ue(se_to_ue(v));
    }
}

/// Maps 0, 1, -1, 2, -2, ... onto 0, 1, 2, 3, 4, ...
#[inline]
pub fn se_to_ue(v: i32) -> u32 {
    if v > 0 {
        (2 * i64::from(v) - 1) as u32
    } else {
        (-2 * i64::from(v)) as u32
    }
}

#[inline]
pub fn ue_to_se(u: u32) -> i32 {
    if u & 1 == 1 {
        ((i64::from(u) + 1) / 2) as i32
    } else {
        (-(i64::from(u) / 2)) as i32
    }
}

/// Length in bits of `ue(v)`.
#[inline]
pub fn ue_len(v: u32) -> u32 {
    2 * (64 - (u64::from(v) + 1).leading_zeros()) - 1
}

#[inline]
pub fn se_len(v: i32) -> u32 {
    ue_len(se_to_ue(v))
}

#[derive(Debug, Default, Clone)]
pub struct BitWriter {
    bytes: Vec<u8>,
    acc: u64,
    nacc: u32,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Flushes with zero-bit padding to the next byte boundary.
    pub fn finish(mut self) -> Vec<u8> {
        while self.nacc >= 8 {
            self.nacc -= 8;
            self.bytes.push((self.acc >> self.nacc) as u8);
        }
        if self.nacc > 0 {
            self.bytes.push((self.acc << (8 - self.nacc)) as u8);
        }
        self.bytes
    }
}

impl BitSink for BitWriter {
    fn put_bits(&mut self, value: u64, n: u32) {
        debug_assert!(n <= 64);
        if n == 0 {
            return;
        }
        if n > 32 {
            self.put_bits(value >> 32, n - 32);
            self.put_bits(value & 0xffff_ffff, 32);
            return;
        }
        let v = value & ((1u64 << n) - 1);
        self.acc = (self.acc << n) | v;
        self.nacc += n;
        while self.nacc >= 8 {
            self.nacc -= 8;
            self.bytes.push((self.acc >> self.nacc) as u8);
        }
        self.acc &= (1u64 << self.nacc) - 1;
    }

    fn bits_written(&self) -> u64 {
        self.bytes.len() as u64 * 8 + u64::from(self.nacc)
    }
}

/// Counts bits without storing them.
#[derive(Debug, Default, Clone, Copy)]
pub struct BitCounter {
    bits: u64,
}

impl BitCounter {
    pub fn new() -> Self {
        Self::default()
    }
}

impl BitSink for BitCounter {
    #[inline]
    fn put_bits(&mut self, _value: u64, n: u32) {
        self.bits += u64::from(n);
    }

    #[inline]
    fn bits_written(&self) -> u64 {
        self.bits
    }
}

#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0 }
    }

    #[inline]
    pub fn position(&self) -> usize {
        self.pos
    }

    #[inline]
    pub fn bits_left(&self) -> usize {
        self.data.len() * 8 - self.pos
    }

    #[inline]
    pub fn read_flag(&mut self) -> Result<bool> {
        if self.pos >= self.data.len() * 8 {
            return Err(Error::Exhausted(self.pos));
        }
        let bit = (self.data[self.pos >> 3] >> (7 - (self.pos & 7))) & 1;
        self.pos += 1;
        Ok(bit == 1)
    }

    pub fn read_bits(&mut self, n: u32) -> Result<u64> {
        debug_assert!(n <= 64);
        if self.bits_left() < n as usize {
            return Err(Error::Exhausted(self.pos));
        }
        let mut v = 0u64;
        for _ in 0..n {
            v = (v << 1) | u64::from(self.read_flag()?);
        }
        Ok(v)
    }

    pub fn read_ue(&mut self) -> Result<u32> {
        let start = self.pos;
        let mut zeros = 0u32;
        while !self.read_flag()? {
            zeros += 1;
            if zeros > 32 {
                return Err(Error::bitstream(
                    format!("bit {start}"),
                    "exp-Golomb prefix too long",
                ));
            }
        }
        let suffix = self.read_bits(zeros)?;
        let v = (1u64 << zeros) - 1 + suffix;
        u32::try_from(v)
            .map_err(|_| Error::bitstream(format!("bit {start}"), "exp-Golomb value overflows u32"))
    }

    pub fn read_se(&mut self) -> Result<i32> {
        self.read_ue().map(ue_to_se)
    }

    /// Checks that only zero padding remains in the current byte and that the
    /// buffer is fully consumed.
    pub fn finish(&mut self) -> Result<()> {
        while self.pos % 8 != 0 {
            if self.read_flag()? {
                return Err(Error::bitstream(
                    format!("bit {}", self.pos - 1),
                    "non-zero padding bit",
                ));
            }
        }
        if self.pos != self.data.len() * 8 {
            return Err(Error::bitstream(
                format!("bit {}", self.pos),
                format!(
                    "{} trailing bytes after payload",
                    self.data.len() - self.pos / 8
                ),
            ));
        }
        Ok(())
    }
}
