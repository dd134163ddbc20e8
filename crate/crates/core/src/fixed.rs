//! Signed binary fixed point stored in `i64`.
//!
//! All per-sample state (score, gradient, hessian) and every histogram
//! accumulator is an integer count of `2^-frac_bits` units. Sums are exact
//! integer additions, so any grouping or ordering of the same samples gives
//! the same bits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_FRAC_BITS: u32 = 24;
pub const MIN_FRAC_BITS: u32 = 8;
pub const MAX_FRAC_BITS: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedFormat {
    frac_bits: u32,
}

impl Default for FixedFormat {
    fn default() -> Self {
        FixedFormat {
            frac_bits: DEFAULT_FRAC_BITS,
        }
    }
}

impl FixedFormat {
    pub fn new(frac_bits: u32) -> Result<Self> {
        if !(MIN_FRAC_BITS..=MAX_FRAC_BITS).contains(&frac_bits) {
            return Err(Error::InvalidArgument(format!(
                "frac_bits {frac_bits} outside [{MIN_FRAC_BITS}, {MAX_FRAC_BITS}]"
            )));
        }
        Ok(FixedFormat { frac_bits })
    }

    pub fn frac_bits(self) -> u32 {
        self.frac_bits
    }

    #[inline]
    pub fn scale(self) -> f64 {
        (1u64 << self.frac_bits) as f64
    }

    /// Value of one unit in the last place.
    #[inline]
    pub fn ulp(self) -> f64 {
        1.0 / self.scale()
    }

    /// Round-to-nearest, ties to even. Scaling by a power of two is exact in
    /// binary floating point, so the only rounding is the final one.
    #[inline]
    pub fn quantize(self, value: f64) -> i64 {
        (value * self.scale()).round_ties_even() as i64
    }

    #[inline]
    pub fn dequantize(self, raw: i64) -> f64 {
        raw as f64 / self.scale()
    }
}
