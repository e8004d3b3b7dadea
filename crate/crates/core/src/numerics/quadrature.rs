//! Adaptive quadrature: 21-point Gauss–Kronrod on intervals, straight complex
//! segments, the half line, and the unit disk in polar coordinates.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

/// Values that can be integrated: reals and complex numbers.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn modulus(&self) -> f64;
    fn to_complex(&self) -> Complex64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn modulus(&self) -> f64 {
        self.abs()
    }
    fn to_complex(&self) -> Complex64 {
        Complex64::new(*self, 0.0)
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn modulus(&self) -> f64 {
        self.norm()
    }
    fn to_complex(&self) -> Complex64 {
        *self
    }
}

/// Absolute and relative targets; the run stops once the error estimate is
/// below `max(abs, rel·|estimate|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 1e-10,
            rel: 1e-10,
            max_intervals: 4000,
        }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self {
            abs,
            rel,
            ..Self::default()
        }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub abs_error: f64,
    pub intervals: usize,
}

// Kronrod abscissae; odd indices are the 10-point Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_340_285_080,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
    res_abs: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        // ties broken by position so refinement order is deterministic
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gauss_kronrod<T, F>(f: &mut F, a: f64, b: f64) -> Result<Segment<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> Result<T>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kronrod = fc * WGK[10];
    let mut gauss = T::zero();
    let mut res_abs = fc.modulus() * WGK[10];
    let mut values = [(T::zero(), T::zero()); 10];
    for (i, &x) in XGK.iter().take(10).enumerate() {
        let dx = half * x;
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        values[i] = (f1, f2);
        kronrod = kronrod + (f1 + f2) * WGK[i];
        res_abs += (f1.modulus() + f2.modulus()) * WGK[i];
        if i % 2 == 1 {
            gauss = gauss + (f1 + f2) * WG[i / 2];
        }
    }
    let mean = kronrod * 0.5;
    let mut res_asc = (fc - mean).modulus() * WGK[10];
    for (i, (f1, f2)) in values.iter().enumerate() {
        res_asc += ((*f1 - mean).modulus() + (*f2 - mean).modulus()) * WGK[i];
    }
    let scale = half.abs();
    res_abs *= scale;
    res_asc *= scale;
    let mut error = ((kronrod - gauss) * half).modulus();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Segment {
        a,
        b,
        value: kronrod * half,
        error,
        res_abs,
    })
}

/// Globally adaptive integration of a fallible integrand over `[a, b]`.
///
/// The requested target is never tighter than `100·ε·∫|f|`, below which the
/// error estimate is dominated by rounding and subdivision cannot improve it.
pub fn try_integrate_1d<T, F>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> Result<T>,
{
    try_integrate_breaks(f, &[a, b], tol)
}

/// As [`try_integrate_1d`], with the initial partition given by `points`
/// (increasing or decreasing). Breakpoints let narrow peaks be seen by the
/// first panels.
pub fn try_integrate_breaks<T, F>(mut f: F, points: &[f64], tol: Tolerance) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> Result<T>,
{
    let mut heap = BinaryHeap::new();
    let mut total = T::zero();
    let mut total_err = 0.0;
    let mut total_abs = 0.0;
    for pair in points.windows(2) {
        if pair[0] == pair[1] {
            continue;
        }
        let seg = gauss_kronrod(&mut f, pair[0], pair[1])?;
        total = total + seg.value;
        total_err += seg.error;
        total_abs += seg.res_abs;
        heap.push(seg);
    }
    if heap.is_empty() {
        return Ok(Estimate {
            value: T::zero(),
            abs_error: 0.0,
            intervals: 0,
        });
    }
    let target = |total: &T, total_abs: f64| tol.target(total.modulus()).max(100.0 * f64::EPSILON * total_abs);
    while total_err > target(&total, total_abs) {
        let fail = |total: T, total_err: f64| Error::Quadrature {
            estimate: total.to_complex(),
            abs_error: total_err,
            requested: tol.target(total.modulus()),
        };
        if heap.len() >= tol.max_intervals {
            return Err(fail(total, total_err));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            // interval cannot be split further in floating point
            return Err(fail(total, total_err));
        }
        let left = gauss_kronrod(&mut f, worst.a, mid)?;
        let right = gauss_kronrod(&mut f, mid, worst.b)?;
        total = total - worst.value + left.value + right.value;
        total_err += left.error + right.error - worst.error;
        total_abs += left.res_abs + right.res_abs - worst.res_abs;
        heap.push(left);
        heap.push(right);
        if heap.len() % 64 == 0 {
            // resum to shed drift from the running updates
            total = heap.iter().fold(T::zero(), |acc, s| acc + s.value);
            total_err = heap.iter().map(|s| s.error).sum();
            total_abs = heap.iter().map(|s| s.res_abs).sum();
        }
    }
    let intervals = heap.len();
    let value = heap.iter().fold(T::zero(), |acc, s| acc + s.value);
    let abs_error = heap.iter().map(|s| s.error).sum();
    Ok(Estimate {
        value,
        abs_error,
        intervals,
    })
}

/// `∫_a^b f(x) dx`.
pub fn integrate_1d<T, F>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    try_integrate_1d(|x| Ok(f(x)), a, b, tol)
}

/// `∫_a^∞ f(x) dx` through the map `x = a + t/(1-t)`.
pub fn integrate_half_line<T, F>(f: F, a: f64, tol: Tolerance) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    integrate_1d(
        |t| {
            if t >= 1.0 {
                return T::zero();
            }
            let s = 1.0 - t;
            f(a + t / s) * (1.0 / (s * s))
        },
        0.0,
        1.0,
        tol,
    )
}

/// `∫ f(γ) dγ` along the straight segment from `z0` to `z1`.
pub fn integrate_segment<F>(f: F, z0: Complex64, z1: Complex64, tol: Tolerance) -> Result<Estimate<Complex64>>
where
    F: Fn(Complex64) -> Complex64,
{
    try_integrate_segment(|z| Ok(f(z)), z0, z1, tol)
}

pub fn try_integrate_segment<F>(f: F, z0: Complex64, z1: Complex64, tol: Tolerance) -> Result<Estimate<Complex64>>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let dz = z1 - z0;
    try_integrate_1d(|t| Ok(f(z0 + dz * t)? * dz), 0.0, 1.0, tol)
}

/// Periodic trapezoid rule on `(-π, π)` with nodes offset by half a step, so
/// the negative real axis (`θ = π`) is never sampled. The node count doubles
/// until two successive rules agree.
pub fn integrate_circle<T, F>(f: &mut F, r: f64, tol: Tolerance) -> Result<T>
where
    T: QuadValue,
    F: FnMut(Complex64) -> Result<T>,
{
    let mut rule = |m: usize| -> Result<(T, f64)> {
        let step = 2.0 * PI / m as f64;
        let mut acc = T::zero();
        let mut gross = 0.0;
        for k in 0..m {
            let theta = -PI + step * (k as f64 + 0.5);
            let v = f(Complex64::from_polar(r, theta))?;
            gross += v.modulus();
            acc = acc + v;
        }
        Ok((acc * step, gross * step))
    };
    let mut m = 16;
    let (mut prev, _) = rule(m)?;
    loop {
        m *= 2;
        let (next, gross) = rule(m)?;
        let diff = (next - prev).modulus();
        if diff <= tol.abs.max(tol.rel * next.modulus()).max(32.0 * f64::EPSILON * gross) {
            return Ok(next);
        }
        if m >= 1 << 15 {
            return Err(Error::Quadrature {
                estimate: next.to_complex(),
                abs_error: diff,
                requested: tol.target(next.modulus()),
            });
        }
        prev = next;
    }
}

/// `∫_𝔻 f(w) dA(w)` over the unit disk as `∫_0^1 r dr ∫ f(r e^{iθ}) dθ`,
/// adaptive Gauss–Kronrod in `r` around a periodic trapezoid rule in `θ`.
pub fn try_integrate_disk<T, F>(mut f: F, tol: Tolerance) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: FnMut(Complex64) -> Result<T>,
{
    let inner_tol = Tolerance::new(tol.abs * 1e-2, tol.rel * 1e-2);
    try_integrate_1d(
        |r| {
            if r == 0.0 {
                return Ok(T::zero());
            }
            Ok(integrate_circle(&mut f, r, inner_tol)? * r)
        },
        0.0,
        1.0,
        tol,
    )
}

pub fn integrate_disk<T, F>(f: F, tol: Tolerance) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: Fn(Complex64) -> T,
{
    try_integrate_disk(|w| Ok(f(w)), tol)
}
