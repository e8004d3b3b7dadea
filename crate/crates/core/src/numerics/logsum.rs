//! Values carried as (log-modulus, phase) and signed log-sum accumulation.
//!
//! Terms such as `C(2N-1, j) · (w z̄)^{j+1/2-N}` overflow `f64` long before the
//! sums they enter do, so evaluation happens on logarithms and is exponentiated
//! once at the end.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::ops::{Div, Mul};

/// A complex number stored as `exp(log_modulus + i·phase)`.
///
/// Zero is represented by `log_modulus == -inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLogComplex {
    pub log_modulus: f64,
    pub phase: f64,
}

impl SignedLogComplex {
    pub const ZERO: Self = Self {
        log_modulus: f64::NEG_INFINITY,
        phase: 0.0,
    };
    pub const ONE: Self = Self {
        log_modulus: 0.0,
        phase: 0.0,
    };

    pub fn new(log_modulus: f64, phase: f64) -> Self {
        Self { log_modulus, phase }
    }

    /// From a complex logarithm `ln|z| + i·arg z` on any branch.
    pub fn from_ln(l: Complex64) -> Self {
        Self::new(l.re, l.im)
    }

    pub fn from_complex(z: Complex64) -> Self {
        if z == Complex64::new(0.0, 0.0) {
            Self::ZERO
        } else {
            Self::new(z.norm().ln(), z.arg())
        }
    }

    pub fn from_real(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else if x > 0.0 {
            Self::new(x.ln(), 0.0)
        } else {
            Self::new((-x).ln(), PI)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.log_modulus == f64::NEG_INFINITY
    }

    /// Phase reduced to `(-π, π]`.
    pub fn principal_phase(&self) -> f64 {
        let p = self.phase.rem_euclid(2.0 * PI);
        if p > PI {
            p - 2.0 * PI
        } else {
            p
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(self.log_modulus.exp(), self.principal_phase())
    }

    pub fn powi(&self, k: i64) -> Self {
        if self.is_zero() {
            return if k == 0 { Self::ONE } else { Self::ZERO };
        }
        Self::new(self.log_modulus * k as f64, self.phase * k as f64)
    }
}

impl Mul for SignedLogComplex {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::ZERO;
        }
        Self::new(self.log_modulus + rhs.log_modulus, self.phase + rhs.phase)
    }
}

impl Div for SignedLogComplex {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        if self.is_zero() {
            return Self::ZERO;
        }
        Self::new(self.log_modulus - rhs.log_modulus, self.phase - rhs.phase)
    }
}

/// Streaming sum of complex terms given by their logarithms.
///
/// The running sum is kept relative to the largest term seen so far, so no
/// term is exponentiated at its true magnitude.
#[derive(Debug, Clone)]
pub struct LogSumAccumulator {
    scale: f64,
    sum: Complex64,
    abs_sum: f64,
    terms: usize,
}

impl Default for LogSumAccumulator {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSumAccumulator {
    pub fn new() -> Self {
        Self {
            scale: f64::NEG_INFINITY,
            sum: Complex64::new(0.0, 0.0),
            abs_sum: 0.0,
            terms: 0,
        }
    }

    /// Adds the term `exp(l)`.
    pub fn push_ln(&mut self, l: Complex64) {
        if l.re == f64::NEG_INFINITY {
            return;
        }
        self.terms += 1;
        if l.re > self.scale {
            let factor = (self.scale - l.re).exp();
            self.sum *= factor;
            self.abs_sum *= factor;
            self.scale = l.re;
        }
        let t = Complex64::from_polar((l.re - self.scale).exp(), l.im);
        self.sum += t;
        self.abs_sum += t.norm();
    }

    pub fn push(&mut self, term: SignedLogComplex) {
        self.push_ln(Complex64::new(term.log_modulus, term.phase));
    }

    pub fn len(&self) -> usize {
        self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms == 0
    }

    pub fn total(&self) -> SignedLogComplex {
        if self.terms == 0 || self.sum == Complex64::new(0.0, 0.0) {
            return SignedLogComplex::ZERO;
        }
        SignedLogComplex::new(self.scale + self.sum.norm().ln(), self.sum.arg())
    }

    /// Decimal digits lost to cancellation: `log10(Σ|t| / |Σ t|)`.
    pub fn cancellation_digits(&self) -> f64 {
        if self.terms == 0 {
            return 0.0;
        }
        (self.abs_sum / self.sum.norm()).log10()
    }
}

/// Sum of real signed terms `±exp(ln_abs)` with separate positive and negative
/// buckets, combined once.
#[derive(Debug, Clone)]
pub struct RealLogSum {
    positive: LogSumAccumulator,
    negative: LogSumAccumulator,
}

impl Default for RealLogSum {
    fn default() -> Self {
        Self::new()
    }
}

impl RealLogSum {
    pub fn new() -> Self {
        Self {
            positive: LogSumAccumulator::new(),
            negative: LogSumAccumulator::new(),
        }
    }

    pub fn push(&mut self, ln_abs: f64, negative: bool) {
        let bucket = if negative {
            &mut self.negative
        } else {
            &mut self.positive
        };
        bucket.push_ln(Complex64::new(ln_abs, 0.0));
    }

    fn bucket_ln(acc: &LogSumAccumulator) -> f64 {
        acc.total().log_modulus
    }

    /// Returns `(ln|sum|, sign)` with `sign ∈ {-1, 0, 1}`.
    pub fn total(&self) -> (f64, f64) {
        let p = Self::bucket_ln(&self.positive);
        let n = Self::bucket_ln(&self.negative);
        if p == n {
            return (f64::NEG_INFINITY, 0.0);
        }
        let (hi, lo, sign) = if p > n { (p, n, 1.0) } else { (n, p, -1.0) };
        // ln(e^hi - e^lo) = hi + ln(1 - e^(lo - hi))
        (hi + (-(lo - hi).exp()).ln_1p(), sign)
    }

    pub fn value(&self) -> f64 {
        let (l, s) = self.total();
        s * l.exp()
    }

    pub fn cancellation_digits(&self) -> f64 {
        let p = Self::bucket_ln(&self.positive);
        let n = Self::bucket_ln(&self.negative);
        let (l, _) = self.total();
        let gross = if p >= n {
            p + (n - p).exp().ln_1p()
        } else {
            n + (p - n).exp().ln_1p()
        };
        (gross - l) / std::f64::consts::LN_10
    }
}

/// `exp(z) - 1` without cancellation for small `|z|`.
pub fn expm1_complex(z: Complex64) -> Complex64 {
    let half_sin = (0.5 * z.im).sin();
    Complex64::new(
        z.re.exp_m1() * z.im.cos() - 2.0 * half_sin * half_sin,
        z.re.exp() * z.im.sin(),
    )
}

/// Principal `ln(1 + z)`, accurate for small `|z|`.
pub fn ln1p_complex(z: Complex64) -> Complex64 {
    if z.norm() < 1e-4 {
        // ln(1+z) = z - z²/2 + z³/3 - ...
        let mut term = z;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 1..=8 {
            acc += term / k as f64;
            term *= -z;
        }
        acc
    } else {
        (Complex64::new(1.0, 0.0) + z).ln()
    }
}
