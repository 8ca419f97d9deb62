//! Bit-serial CRC-16 over bit vectors.
//!
//! Messages here are arbitrary-length bit sequences (a polar payload is rarely
//! byte aligned), so the register is clocked one bit at a time, MSB first.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CRC_WIDTH: usize = 16;

/// Parameters of a 16-bit CRC in the usual Rocksoft notation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrcSpec {
    pub width: u8,
    pub polynomial: u16,
    pub init_value: u16,
    pub reflect_in: bool,
    pub reflect_out: bool,
    pub final_xor: u16,
}

impl CrcSpec {
    /// CRC-16/CCITT with zero seed and no reflection (a.k.a. XMODEM).
    pub const CCITT16: CrcSpec = CrcSpec {
        width: 16,
        polynomial: 0x1021,
        init_value: 0,
        reflect_in: false,
        reflect_out: false,
        final_xor: 0,
    };

    pub fn validate(&self) -> Result<()> {
        if self.width as usize != CRC_WIDTH {
            return Err(Error::InvalidParameter(format!(
                "only 16-bit CRCs are supported, got width {}",
                self.width
            )));
        }
        Ok(())
    }

    /// CRC of `message`. With `reflect_in`, bits are consumed LSB first within
    /// each 8-bit group (a trailing partial group is reversed on its own).
    pub fn compute(&self, message: &[u8]) -> u16 {
        let mut reg = self.init_value;
        let mut clock = |bit: u8| {
            let top = (reg >> 15) as u8 & 1;
            reg <<= 1;
            if top ^ (bit & 1) == 1 {
                reg ^= self.polynomial;
            }
        };
        if self.reflect_in {
            for chunk in message.chunks(8) {
                chunk.iter().rev().for_each(|&b| clock(b));
            }
        } else {
            message.iter().for_each(|&b| clock(b));
        }
        let reg = if self.reflect_out { reg.reverse_bits() } else { reg };
        reg ^ self.final_xor
    }

    /// The CRC of `message` as 16 bits, MSB first.
    pub fn compute_bits(&self, message: &[u8]) -> [u8; CRC_WIDTH] {
        let crc = self.compute(message);
        let mut out = [0u8; CRC_WIDTH];
        for (i, b) in out.iter_mut().enumerate() {
            *b = ((crc >> (CRC_WIDTH - 1 - i)) & 1) as u8;
        }
        out
    }

    /// `message ∥ crc(message)`.
    pub fn append(&self, message: &[u8]) -> Vec<u8> {
        let mut out = Vec::with_capacity(message.len() + CRC_WIDTH);
        out.extend_from_slice(message);
        out.extend_from_slice(&self.compute_bits(message));
        out
    }

    /// Checks a `message ∥ crc` block. Blocks shorter than the CRC fail.
    pub fn check(&self, block: &[u8]) -> bool {
        if block.len() < CRC_WIDTH {
            return false;
        }
        let (message, tail) = block.split_at(block.len() - CRC_WIDTH);
        self.compute_bits(message)[..] == *tail
    }
}

impl Default for CrcSpec {
    fn default() -> Self {
        Self::CCITT16
    }
}
