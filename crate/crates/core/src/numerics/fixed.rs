//! Fixed-point complex arithmetic on big integers, for re-evaluating sums
//! whose cancellation exceeds what `f64` can carry.

use super::logsum::SignedLogComplex;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use std::f64::consts::LN_2;

/// `(re + i im) · 2^{-bits}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedComplex {
    pub re: BigInt,
    pub im: BigInt,
    bits: u32,
}

fn bigint_from_f64(x: f64, bits: u32) -> BigInt {
    if x == 0.0 {
        return BigInt::zero();
    }
    // x = mantissa · 2^exp exactly
    let raw = x.abs().to_bits();
    let biased = ((raw >> 52) & 0x7ff) as i64;
    let (mant, exp) = if biased == 0 {
        (raw & ((1 << 52) - 1), -1074)
    } else {
        ((raw & ((1 << 52) - 1)) | (1 << 52), biased - 1075)
    };
    let shift = exp + bits as i64;
    let m = BigInt::from(mant);
    let v = if shift >= 0 { m << shift as usize } else { m >> (-shift) as usize };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// Leading bits of `(re, im) · 2^{-bits}` as `f64`s scaled into `[0, 1]`,
/// together with the binary exponent that restores them.
fn ln_parts(re: &BigInt, im: &BigInt, bits: u32) -> (f64, f64, f64) {
    let top = re.bits().max(im.bits()) as i64;
    let shift = (top - 60).max(0);
    let down = 2f64.powi((shift - top) as i32);
    let r = (re >> shift as usize).to_f64().unwrap_or(0.0) * down;
    let i = (im >> shift as usize).to_f64().unwrap_or(0.0) * down;
    (r, i, (top - bits as i64) as f64 * LN_2)
}

impl FixedComplex {
    pub fn from_complex(z: Complex64, bits: u32) -> Self {
        Self {
            re: bigint_from_f64(z.re, bits),
            im: bigint_from_f64(z.im, bits),
            bits,
        }
    }

    pub fn zero(bits: u32) -> Self {
        Self {
            re: BigInt::zero(),
            im: BigInt::zero(),
            bits,
        }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
            bits: self.bits,
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self {
            re: &self.re - &o.re,
            im: &self.im - &o.im,
            bits: self.bits,
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let b = self.bits as usize;
        Self {
            re: (&self.re * &o.re - &self.im * &o.im) >> b,
            im: (&self.re * &o.im + &self.im * &o.re) >> b,
            bits: self.bits,
        }
    }

    pub fn scale_int(&self, k: &BigInt) -> Self {
        Self {
            re: &self.re * k,
            im: &self.im * k,
            bits: self.bits,
        }
    }

    pub fn div_int(&self, k: &BigInt) -> Self {
        Self {
            re: &self.re / k,
            im: &self.im / k,
            bits: self.bits,
        }
    }

    /// `1/z = z̄/|z|²`.
    pub fn recip(&self) -> Self {
        let norm = &self.re * &self.re + &self.im * &self.im;
        let b = 2 * self.bits as usize;
        Self {
            re: (&self.re << b) / &norm,
            im: -((&self.im << b) / &norm),
            bits: self.bits,
        }
    }

    /// Sum of the component magnitudes as an `f64` logarithm (a cheap
    /// stand-in for `ln|z|` up to a factor of at most √2).
    pub fn ln_l1(&self) -> f64 {
        let (r, i, ln_scale) = ln_parts(&self.re, &self.im, self.bits);
        (r.abs() + i.abs()).ln() + ln_scale
    }

    pub fn to_signed_log(&self) -> SignedLogComplex {
        if self.is_zero() {
            return SignedLogComplex::ZERO;
        }
        let (r, i, ln_scale) = ln_parts(&self.re, &self.im, self.bits);
        let z = Complex64::new(r, i);
        SignedLogComplex::new(z.norm().ln() + ln_scale, z.arg())
    }

}
