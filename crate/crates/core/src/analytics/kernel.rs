//! The 2×2 correlation kernel `[[D, S], [-S(y,x), I]]` and the Pfaffian
//! n-point correlations built from it.
//!
//! All three entries share the form `prefactor · (2N+1)2N/π · σ(L)` with
//! `σ(L) = Σ_j C(2N-1, j) (e^{(2j+1-2N)L} - e^{(2N-2j-1)L}) / (2N-2j-1)`,
//! where `L` is a logarithm of `(x ȳ)^{1/2}`. Individual entries depend on
//! which root is used; Pfaffians do not, provided the roots factor through
//! the points (`L = ℓ(x) + ℓ(y)̄` and so on). [`KernelPoint`] fixes that
//! per-point root.

use super::constants::EnsembleConstants;
use super::jpdf::tau;
use crate::error::{Error, Result};
use crate::numerics::fixed::FixedComplex;
use crate::numerics::logsum::{expm1_complex, LogSumAccumulator, SignedLogComplex};
use num_bigint::BigInt;
use crate::numerics::pfaffian::{pfaffian, SkewMatrix};
use crate::numerics::quadrature::{try_integrate_breaks, Tolerance};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, LN_2, PI};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Relative tolerance on `M + Mᵀ` when assembling the correlation matrix.
pub const SKEW_TOL: f64 = 1e-10;

/// Cancellation (in decimal digits) beyond which the `f64` log-sum for `σ`
/// is recomputed in fixed point.
pub const SIGMA_CANCELLATION_DIGITS: f64 = 4.0;

/// `ln σ(L)` via a complex log-sum of the `N` terms, each written as
/// `-(2/k) C sinh(kL)` with the growing exponential factored out.
///
/// Near `e^{2L} → -1` the terms cancel to many digits, roughly
/// `((|u|+1/|u|)/|u+1/u|)^{2N-1}` with `u = e^L`; past
/// [`SIGMA_CANCELLATION_DIGITS`] the same sum is redone exactly in big-integer
/// fixed point at a precision sized from the measured cancellation.
pub fn ln_sigma(l: Complex64, c: &EnsembleConstants) -> SignedLogComplex {
    let n = c.n();
    let mut acc = LogSumAccumulator::new();
    for j in 0..n {
        let k = (2 * n - 2 * j - 1) as f64;
        let kl = k * l;
        let (lead, rest) = if l.re <= 0.0 {
            (-kl, -expm1_complex(2.0 * kl))
        } else {
            (kl, expm1_complex(-2.0 * kl))
        };
        if rest == ZERO {
            continue;
        }
        acc.push_ln(c.ln_binom(j) - k.ln() + lead + rest.ln());
    }
    let digits = acc.cancellation_digits();
    if acc.is_empty() || digits <= SIGMA_CANCELLATION_DIGITS {
        return acc.total();
    }
    sigma_fixed(l.exp(), n, digits)
}

/// `σ` in fixed point given `u = e^L`: `Σ_j C(2N-1,j) (u^{-k} - u^{k})/k`.
fn sigma_fixed(u: Complex64, n: usize, digits_hint: f64) -> SignedLogComplex {
    let m = 2 * n - 1;
    // integer bits needed for the largest power of 1/u or u
    let head = (u.norm().ln().abs() * m as f64 / LN_2).ceil() as u32;
    let mut cancel_bits = if digits_hint.is_finite() { (digits_hint * 3.33) as u32 } else { 64 };
    for _ in 0..8 {
        let bits = 96 + cancel_bits + head + (m as f64).log2().ceil() as u32;
        let fu = FixedComplex::from_complex(u, bits);
        let fui = fu.recip();
        let u2 = fu.mul(&fu);
        let ui2 = fui.mul(&fui);
        // powers for k = 1, 3, …, m, then walk j from N-1 down to 0
        let mut pos = fu.clone();
        let mut neg = fui.clone();
        let mut terms = Vec::with_capacity(n);
        for idx in 0..n {
            if idx > 0 {
                pos = pos.mul(&u2);
                neg = neg.mul(&ui2);
            }
            terms.push((neg.clone(), pos.clone()));
        }
        let mut binom = BigInt::from(1u8);
        let mut total = FixedComplex::zero(bits);
        let mut gross = f64::NEG_INFINITY;
        for j in 0..n {
            let k = m - 2 * j;
            let (neg_k, pos_k) = &terms[(k - 1) / 2];
            let t = neg_k.sub(pos_k).scale_int(&binom).div_int(&BigInt::from(k));
            let lt = t.ln_l1();
            gross = if gross > lt { gross + (lt - gross).exp().ln_1p() } else { lt + (gross - lt).exp().ln_1p() };
            total = total.add(&t);
            binom = binom * BigInt::from(m - j) / BigInt::from(j + 1);
        }
        let result = total.to_signed_log();
        if result.is_zero() {
            cancel_bits = cancel_bits * 2 + 64;
            continue;
        }
        let measured = ((gross - result.log_modulus) / LN_2).max(0.0).ceil() as u32;
        if measured + 32 <= cancel_bits + 64 {
            return result;
        }
        cancel_bits = measured + 32;
    }
    SignedLogComplex::ZERO
}

/// `ln T(r)` with `T(r) = (1/r - r)^{1/2} / (r + 1/r)^{N+1}` (principal root,
/// so `T(1/r) = i T(r)` for `r < 1`).
fn ln_t(r: f64, n: usize) -> Complex64 {
    if r == 1.0 {
        return Complex64::new(f64::NEG_INFINITY, 0.0);
    }
    let ln_r = r.ln();
    let ln_gap = ((1.0 - r) * (1.0 + r)).abs().ln() - ln_r;
    let phase = if r > 1.0 { FRAC_PI_2 } else { 0.0 };
    Complex64::new(0.5 * ln_gap - (n as f64 + 1.0) * ((1.0 + r * r).ln() - ln_r), phase)
}

fn check_modulus(x: Complex64, what: &str) -> Result<f64> {
    let r = x.norm();
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("{what} = {x} must be finite and nonzero")));
    }
    Ok(r)
}

fn finish(ln_prefactor: Complex64, sigma: SignedLogComplex, c: &EnsembleConstants) -> Complex64 {
    if sigma.is_zero() || ln_prefactor.re == f64::NEG_INFINITY {
        return ZERO;
    }
    let total = ln_prefactor + c.ln_kernel_constant() + Complex64::new(sigma.log_modulus, sigma.phase);
    total.exp()
}

/// `S(x, y)` for arbitrary nonzero `x, y`, with prefactor
/// `(1/i)·T(|x|)·T(1/|y|)/(|x||y|)` and the principal root of `x ȳ`.
/// Reduces to `A_{xy}·(2N+1)2N/π·σ(x ȳ)` in the disk.
pub fn s_general(x: Complex64, y: Complex64, c: &EnsembleConstants) -> Result<Complex64> {
    let rx = check_modulus(x, "x")?;
    let ry = check_modulus(y, "y")?;
    let n = c.n();
    let ln_pref = Complex64::new(-rx.ln() - ry.ln(), -FRAC_PI_2) + ln_t(rx, n) + ln_t(1.0 / ry, n);
    let l = 0.5 * (x * y.conj()).ln();
    Ok(finish(ln_pref, ln_sigma(l, c), c))
}

fn check_disk(w: Complex64) -> Result<f64> {
    let r = check_modulus(w, "w")?;
    if r > 1.0 {
        return Err(Error::Domain(format!("|w| = {r} outside the closed unit disk")));
    }
    Ok(r)
}

/// `S(w, z)` from the finite sum, principal branch of `(w z̄)^{1/2}`.
pub fn kernel_s_sum(w: Complex64, z: Complex64, c: &EnsembleConstants) -> Result<Complex64> {
    check_disk(w)?;
    check_disk(z)?;
    s_general(w, z, c)
}

/// `D(w, z) = S(w, 1/z̄)/|z|²`. Antisymmetric, so exactly zero at `w = z`.
pub fn kernel_d(w: Complex64, z: Complex64, c: &EnsembleConstants) -> Result<Complex64> {
    check_disk(w)?;
    let rz = check_disk(z)?;
    if w == z {
        return Ok(ZERO);
    }
    Ok(s_general(w, 1.0 / z.conj(), c)? / (rz * rz))
}

/// `I(w, z) = S(1/w̄, z)/|w|²`. Antisymmetric, so exactly zero at `w = z`.
pub fn kernel_i(w: Complex64, z: Complex64, c: &EnsembleConstants) -> Result<Complex64> {
    let rw = check_disk(w)?;
    check_disk(z)?;
    if w == z {
        return Ok(ZERO);
    }
    Ok(s_general(1.0 / w.conj(), z, c)? / (rw * rw))
}

/// Contour for the integral form of `S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IntegralPath {
    /// `γ = t(1 - v)`, `t ∈ [0, 1]`. Ill-conditioned when `v = w z̄` lies near
    /// the negative real axis: the path then passes close to `γ = 1`, where
    /// the integrand is of size `|1-γ|^{-N}` while the integral is not.
    Segment,
    /// `1 - γ = v^s`, `s ∈ [0, 1]`, a straight line in `Log(1-γ)`. Homotopic
    /// to the segment in the plane slit along `γ ∈ [1, ∞)`, so the value is
    /// the same, and `|1-γ| ≥ |v|` along the whole path.
    #[default]
    Logarithmic,
}

/// Distance from the origin to the segment `[1, v]` (how close the straight
/// path comes to the branch point) and the parameter where it is attained.
fn branch_clearance(v: Complex64) -> (f64, f64) {
    let d = v - 1.0;
    if d.norm_sqr() == 0.0 {
        return (1.0, 0.0);
    }
    let t = (-d.re / d.norm_sqr()).clamp(0.0, 1.0);
    ((1.0 + t * d).norm(), t)
}

/// `S(w, z)` from `A_{wz}·2^{2N-1}(2N+1)N/π·∫_0^{1-wz̄} (1-γ)^{-N-1/2}(1-γ/2)^{2N-1} dγ`,
/// integrand evaluated in log space along the chosen path.
pub fn kernel_s_integral(w: Complex64, z: Complex64, c: &EnsembleConstants, tol: Tolerance) -> Result<Complex64> {
    kernel_s_integral_along(w, z, c, tol, IntegralPath::default())
}

pub fn kernel_s_integral_along(
    w: Complex64,
    z: Complex64,
    c: &EnsembleConstants,
    tol: Tolerance,
    path: IntegralPath,
) -> Result<Complex64> {
    let rw = check_disk(w)?;
    let rz = check_disk(z)?;
    if rw == 1.0 || rz == 1.0 {
        return Ok(ZERO);
    }
    let v = w * z.conj();
    let n = c.n();
    let nf = n as f64;
    // the integrand in terms of u = 1 - γ
    let ln_f = |ln_u: Complex64, u: Complex64| -(nf + 0.5) * ln_u + (2.0 * nf - 1.0) * (0.5 * (1.0 + u)).ln();
    let integral = match path {
        IntegralPath::Segment => {
            let (clearance, t_near) = branch_clearance(v);
            if clearance < 1e-6 {
                return Err(Error::Branch(format!(
                    "integration path passes within 1e-6 of gamma = 1 (w z̄ = {v})"
                )));
            }
            let upper = 1.0 - v;
            let g = |t: f64| {
                let u = 1.0 - upper * t;
                ln_f(u.ln(), u)
            };
            let shift = (0..=64).map(|k| g(k as f64 / 64.0).re).fold(f64::NEG_INFINITY, f64::max);
            let width = clearance / upper.norm() / nf.sqrt();
            let mut breaks = vec![0.0];
            for t in [t_near - 4.0 * width, t_near - width, t_near, t_near + width, t_near + 4.0 * width] {
                if t > *breaks.last().unwrap() && t < 1.0 {
                    breaks.push(t);
                }
            }
            breaks.push(1.0);
            let e = try_integrate_breaks(|t: f64| Ok((g(t) - shift).exp() * upper), &breaks, tol)?;
            (e.value, shift)
        }
        IntegralPath::Logarithmic => {
            let ln_v = v.ln();
            // dγ = -v^s Log v ds
            let g = |s: f64| {
                let ln_u = s * ln_v;
                ln_f(ln_u, ln_u.exp()) + ln_u
            };
            let shift = (0..=64).map(|k| g(k as f64 / 64.0).re).fold(f64::NEG_INFINITY, f64::max);
            let e = try_integrate_breaks(|s: f64| Ok(-(g(s) - shift).exp() * ln_v), &[0.0, 1.0], tol)?;
            (e.value, shift)
        }
    };
    let (value, shift) = integral;
    let ln_a = -rw.ln() - rz.ln() + ln_t(rw, n).re + ln_t(rz, n).re;
    let ln_const = (2.0 * nf - 1.0) * 2f64.ln() + ((2.0 * nf + 1.0) * nf / PI).ln();
    Ok(value * (ln_a + ln_const + shift).exp())
}

/// The defining double sums over the monomial skew-orthogonal basis, evaluated
/// directly in floating point from `τ`. Plain arithmetic, so only usable for
/// moderate `N`; kept as an independent check on the closed forms.
pub mod direct {
    use super::*;

    fn q(k: usize, n: usize, x: Complex64) -> Complex64 {
        if k % 2 == 0 {
            x.powi(2 * (k / 2) as i32)
        } else {
            x.powi((2 * n - 1 - 2 * (k / 2)) as i32)
        }
    }

    fn a(k: usize, x: Complex64, n: usize) -> Result<Complex64> {
        Ok(tau(x, n)? * q(k, n, x) / x.norm())
    }

    fn b(k: usize, x: Complex64, n: usize) -> Result<Complex64> {
        let y = 1.0 / x.conj();
        Ok(tau(y, n)? * q(k, n, y) / x.norm())
    }

    type Basis = fn(usize, Complex64, usize) -> Result<Complex64>;

    fn pair_sum(f: Basis, g: Basis, x: Complex64, y: Complex64, c: &EnsembleConstants) -> Result<Complex64> {
        let n = c.n();
        let mut acc = ZERO;
        for j in 0..n {
            let t = f(2 * j, x, n)? * g(2 * j + 1, y, n)? - f(2 * j + 1, x, n)? * g(2 * j, y, n)?;
            acc += t / c.h(j);
        }
        Ok(acc / I)
    }

    pub fn kernel_s(x: Complex64, y: Complex64, c: &EnsembleConstants) -> Result<Complex64> {
        pair_sum(a, b, x, y, c)
    }

    pub fn kernel_d(x: Complex64, y: Complex64, c: &EnsembleConstants) -> Result<Complex64> {
        pair_sum(a, a, x, y, c)
    }

    pub fn kernel_i(x: Complex64, y: Complex64, c: &EnsembleConstants) -> Result<Complex64> {
        pair_sum(b, b, x, y, c)
    }
}

/// A disk point with its per-point half-logarithm `ℓ(w)` and log prefactor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPoint {
    pub w: Complex64,
    ell: Complex64,
    ln_weight: f64,
}

impl KernelPoint {
    /// `ℓ(w) = ½ Log w`.
    pub fn new(w: Complex64, c: &EnsembleConstants) -> Result<Self> {
        let r = check_disk(w)?;
        Ok(Self {
            w,
            ell: 0.5 * w.ln(),
            ln_weight: ln_t(r, c.n()).re - r.ln(),
        })
    }

    /// The same point with the other square root, `ℓ(w) + iπ`.
    pub fn flipped(&self) -> Self {
        Self {
            ell: self.ell + I * PI,
            ..*self
        }
    }

    pub fn ell(&self) -> Complex64 {
        self.ell
    }
}

/// Entries `D(x,y)`, `S(x,y)`, `S(y,x)`, `I(x,y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelBlock {
    pub d: Complex64,
    pub s: Complex64,
    pub s_rev: Complex64,
    pub i: Complex64,
}

impl KernelBlock {
    pub fn new(x: &KernelPoint, y: &KernelPoint, c: &EnsembleConstants) -> Self {
        let ln_a = Complex64::new(x.ln_weight + y.ln_weight, 0.0);
        let s = finish(ln_a, ln_sigma(x.ell + y.ell.conj(), c), c);
        let s_rev = finish(ln_a, ln_sigma(y.ell + x.ell.conj(), c), c);
        let d = -I * finish(ln_a, ln_sigma(x.ell - y.ell, c), c);
        let i = I * finish(ln_a, ln_sigma(y.ell.conj() - x.ell.conj(), c), c);
        Self { d, s, s_rev, i }
    }

    /// `[[D, S], [-S(y,x), I]]`.
    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        [[self.d, self.s], [-self.s_rev, self.i]]
    }
}

/// The `2n×2n` matrix of kernel blocks, checked for skew symmetry.
pub fn correlation_matrix(points: &[KernelPoint], c: &EnsembleConstants) -> Result<SkewMatrix> {
    let n = points.len();
    let dim = 2 * n;
    let mut data = vec![ZERO; dim * dim];
    for (l, p) in points.iter().enumerate() {
        for (m, q) in points.iter().enumerate() {
            let b = KernelBlock::new(p, q, c).matrix();
            for a in 0..2 {
                for e in 0..2 {
                    data[(2 * l + a) * dim + 2 * m + e] = b[a][e];
                }
            }
        }
    }
    SkewMatrix::new(dim, data, SKEW_TOL)
}

/// `ρ_(n)(w_1, …, w_n) = Pf[K_N(w_l, w_m)]` as a complex number, with the
/// per-point roots as given.
pub fn rho_n_points(points: &[KernelPoint], c: &EnsembleConstants) -> Result<Complex64> {
    if points.is_empty() || points.len() > c.n() {
        return Err(Error::Domain(format!("need 1 ≤ n ≤ N = {}, got n = {}", c.n(), points.len())));
    }
    Ok(pfaffian(&correlation_matrix(points, c)?))
}

/// `ρ_(n)` at disk points; the imaginary part of the Pfaffian is discarded.
pub fn rho_n(ws: &[Complex64], c: &EnsembleConstants) -> Result<f64> {
    let points = ws.iter().map(|&w| KernelPoint::new(w, c)).collect::<Result<Vec<_>>>()?;
    Ok(rho_n_points(&points, c)?.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::density::density;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn point(rng: &mut ChaCha8Rng, rmax: f64) -> Complex64 {
        Complex64::from_polar(rmax * rng.random::<f64>().sqrt(), rng.random_range(-3.1..3.1))
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    #[test]
    fn sum_matches_integral() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let tol = Tolerance::new(0.0, 1e-12);
        for n in [1, 5, 20, 50] {
            let c = EnsembleConstants::new(n).unwrap();
            for _ in 0..50 {
                let (w, z) = (point(&mut rng, 0.95), point(&mut rng, 0.95));
                let s = kernel_s_sum(w, z, &c).unwrap();
                let si = kernel_s_integral(w, z, &c, tol).unwrap();
                assert!(rel(s, si) < 1e-8, "N={n} w={w} z={z}: {s} vs {si}");
            }
        }
    }

    #[test]
    fn segment_path_agrees_away_from_the_cut() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let tol = Tolerance::new(0.0, 1e-12);
        for n in [1, 5, 20] {
            let c = EnsembleConstants::new(n).unwrap();
            let mut checked = 0;
            while checked < 20 {
                let (w, z) = (point(&mut rng, 0.95), point(&mut rng, 0.95));
                if (w * z.conj()).arg().abs() > 2.0 {
                    continue;
                }
                let a = kernel_s_integral_along(w, z, &c, tol, IntegralPath::Segment).unwrap();
                let b = kernel_s_sum(w, z, &c).unwrap();
                assert!(rel(a, b) < 1e-8, "N={n}: {a} vs {b}");
                checked += 1;
            }
        }
        // real w = z = r: the segment is real
        let c = EnsembleConstants::new(8).unwrap();
        let r = Complex64::new(0.6, 0.0);
        let a = kernel_s_integral_along(r, r, &c, tol, IntegralPath::Segment).unwrap();
        assert!(a.im.abs() < 1e-14 * a.re);
        assert!((a.re - density(r, &c).unwrap()).abs() < 1e-10 * a.re);
        let neg = Complex64::new(-0.5, 0.0);
        assert!(matches!(
            kernel_s_integral_along(neg, Complex64::new(0.9, 0.0), &c, tol, IntegralPath::Segment),
            Err(Error::Branch(_))
        ));
    }

    #[test]
    fn s_on_diagonal_is_density() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in [1, 3, 10] {
            let c = EnsembleConstants::new(n).unwrap();
            for _ in 0..10 {
                let w = point(&mut rng, 0.99);
                let s = kernel_s_sum(w, w, &c).unwrap();
                assert!(s.im.abs() < 1e-12 * s.re && s.re >= 0.0);
                assert!((s.re - density(w, &c).unwrap()).abs() < 1e-10 * s.re);
            }
        }
    }

    #[test]
    fn vanishes_on_the_circle() {
        let c = EnsembleConstants::new(4).unwrap();
        let w = Complex64::new(0.3, 0.2);
        let u = Complex64::from_polar(1.0, 0.5);
        assert_eq!(kernel_s_sum(w, u, &c).unwrap(), ZERO);
        assert_eq!(kernel_s_sum(u, w, &c).unwrap(), ZERO);
        assert_eq!(kernel_s_integral(u, w, &c, Tolerance::default()).unwrap(), ZERO);
    }

    #[test]
    fn relations_match_direct_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in [1, 2, 4, 7] {
            let c = EnsembleConstants::new(n).unwrap();
            for _ in 0..20 {
                let (x, y) = (point(&mut rng, 0.9), point(&mut rng, 0.9));
                let px = KernelPoint::new(x, &c).unwrap();
                let py = KernelPoint::new(y, &c).unwrap();
                let blk = KernelBlock::new(&px, &py, &c);
                assert!(rel(blk.s, direct::kernel_s(x, y, &c).unwrap()) < 1e-9);
                assert!(rel(blk.s_rev, direct::kernel_s(y, x, &c).unwrap()) < 1e-9);
                assert!(rel(blk.d, direct::kernel_d(x, y, &c).unwrap()) < 1e-9);
                assert!(rel(blk.i, direct::kernel_i(x, y, &c).unwrap()) < 1e-9);
                // the relation forms use principal roots of the products, so
                // they agree with the direct sums up to an overall sign
                for (a, b) in [
                    (kernel_d(x, y, &c).unwrap(), blk.d),
                    (kernel_i(x, y, &c).unwrap(), blk.i),
                    (kernel_s_sum(x, y, &c).unwrap(), blk.s),
                ] {
                    assert!(rel(a, b).min(rel(-a, b)) < 1e-9, "{a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn d_and_i_are_antisymmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let c = EnsembleConstants::new(6).unwrap();
        for _ in 0..20 {
            let (x, y) = (point(&mut rng, 0.9), point(&mut rng, 0.9));
            assert!(rel(kernel_d(x, y, &c).unwrap(), -kernel_d(y, x, &c).unwrap()) < 1e-10);
            assert!(rel(kernel_i(x, y, &c).unwrap(), -kernel_i(y, x, &c).unwrap()) < 1e-10);
            let px = KernelPoint::new(x, &c).unwrap();
            let b = KernelBlock::new(&px, &px, &c);
            assert_eq!(b.d, ZERO);
            assert_eq!(b.i, ZERO);
        }
    }

    #[test]
    fn rho_one_is_density() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1, 4, 12] {
            let c = EnsembleConstants::new(n).unwrap();
            for _ in 0..10 {
                let w = point(&mut rng, 0.97);
                let r1 = rho_n(&[w], &c).unwrap();
                let d = density(w, &c).unwrap();
                assert!((r1 - d).abs() < 1e-10 * d);
            }
        }
    }

    #[test]
    fn gauge_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let c = EnsembleConstants::new(5).unwrap();
        for _ in 0..30 {
            let pts: Vec<KernelPoint> = (0..3).map(|_| KernelPoint::new(point(&mut rng, 0.9), &c).unwrap()).collect();
            let base = rho_n_points(&pts, &c).unwrap();
            assert!(base.im.abs() <= 1e-8 * base.norm().max(1e-300));
            let flips: Vec<KernelPoint> =
                pts.iter().enumerate().map(|(k, p)| if rng.random::<bool>() || k == 0 { p.flipped() } else { *p }).collect();
            let alt = rho_n_points(&flips, &c).unwrap();
            assert!(rel(alt, base) < 1e-8);
        }
    }

    #[test]
    fn rho2_coincident_and_separated() {
        let c = EnsembleConstants::new(30).unwrap();
        let w = Complex64::new(0.2, -0.1);
        let r1 = rho_n(&[w], &c).unwrap();
        assert!(rho_n(&[w, w], &c).unwrap().abs() < 1e-8 * r1 * r1);
        let a = Complex64::new(0.45, 0.0);
        let b = Complex64::new(-0.45, 0.05);
        let f = rho_n(&[a], &c).unwrap() * rho_n(&[b], &c).unwrap();
        assert!((rho_n(&[a, b], &c).unwrap() / f - 1.0).abs() < 0.01);
    }

    #[test]
    fn rejects_too_many_points() {
        let c = EnsembleConstants::new(1).unwrap();
        let w = [Complex64::new(0.1, 0.0), Complex64::new(0.2, 0.0)];
        assert!(rho_n(&w, &c).is_err());
    }
}
