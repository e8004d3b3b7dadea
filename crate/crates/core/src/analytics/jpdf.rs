//! The eigenvalue jpdf in half-plane (`λ`) and disk (`w`) coordinates.

use super::constants::EnsembleConstants;
use crate::error::{Error, Result};
use crate::numerics::logsum::SignedLogComplex;
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn check_nonzero(x: Complex64) -> Result<()> {
    if x == ZERO || !x.is_finite() {
        return Err(Error::Domain(format!("tau needs a finite nonzero argument, got {x}")));
    }
    Ok(())
}

/// `ln τ(x)` with `τ(x) = (1/x)^{N-1/2} (1/|x| - |x|)^{1/2} / (|x| + 1/|x|)^{N+1}`,
/// principal branches throughout. Minus infinity on the unit circle.
pub fn ln_tau(x: Complex64, n: usize) -> Result<Complex64> {
    check_nonzero(x)?;
    if x.im == 0.0 && x.re < 0.0 {
        return Err(Error::Branch(format!("(1/x)^(N-1/2) at x = {x} lies on the cut")));
    }
    let r = x.norm();
    if r == 1.0 {
        return Ok(Complex64::new(f64::NEG_INFINITY, 0.0));
    }
    let nf = n as f64;
    let ln_r = r.ln();
    // ln(1/r - r) = ln|(1-r)(1+r)| - ln r
    let ln_gap = ((1.0 - r) * (1.0 + r)).abs().ln() - ln_r;
    let gap_phase = if r > 1.0 { FRAC_PI_2 } else { 0.0 };
    let ln_sum = (1.0 + r * r).ln() - ln_r;
    Ok(-(nf - 0.5) * x.ln() + Complex64::new(0.5 * ln_gap - (nf + 1.0) * ln_sum, gap_phase))
}

pub fn tau(x: Complex64, n: usize) -> Result<Complex64> {
    let l = ln_tau(x, n)?;
    if l.re == f64::NEG_INFINITY {
        return Ok(ZERO);
    }
    Ok(l.exp())
}

/// `ln[τ(w) τ(1/w̄)]`.
pub fn ln_tau_pair(w: Complex64, n: usize) -> Result<Complex64> {
    check_nonzero(w)?;
    Ok(ln_tau(w, n)? + ln_tau(1.0 / w.conj(), n)?)
}

/// Log of the jpdf of the `N` upper-half-plane eigenvalues:
/// `|C_N| ∏ |λ_j - λ̄_j|² / (1+|λ_j|²)^{2N+2} · ∏_{j<k} |λ_k-λ_j|² |λ_k-λ̄_j|²`.
pub fn jpdf_lambda(lambdas: &[Complex64], c: &EnsembleConstants) -> Result<SignedLogComplex> {
    let n = c.n();
    if lambdas.len() != n {
        return Err(Error::Domain(format!("expected {n} eigenvalues, got {}", lambdas.len())));
    }
    if let Some(l) = lambdas.iter().find(|l| !(l.im > 0.0)) {
        return Err(Error::Domain(format!("eigenvalue {l} is not in the upper half-plane")));
    }
    let mut ln = c.ln_abs_c_n();
    for l in lambdas {
        ln += 2.0 * (2.0 * l.im).ln() - 2.0 * (n as f64 + 1.0) * l.norm_sqr().ln_1p();
    }
    for k in 0..n {
        for j in 0..k {
            let d1 = (lambdas[k] - lambdas[j]).norm();
            let d2 = (lambdas[k] - lambdas[j].conj()).norm();
            if d1 == 0.0 {
                return Ok(SignedLogComplex::ZERO);
            }
            ln += 2.0 * d1.ln() + 2.0 * d2.ln();
        }
    }
    Ok(SignedLogComplex::new(ln, 0.0))
}

/// Log and phase of the disk-coordinate jpdf
/// `C_N ∏ (1/(i|w_j|²)) τ(w_j) τ(1/w̄_j) · Δ(w_1, …, w_N, 1/w̄_1, …, 1/w̄_N)`.
/// The phase is tracked, not assumed: it should reduce to zero.
pub fn jpdf_w(ws: &[Complex64], c: &EnsembleConstants) -> Result<SignedLogComplex> {
    let n = c.n();
    if ws.len() != n {
        return Err(Error::Domain(format!("expected {n} points, got {}", ws.len())));
    }
    if let Some(w) = ws.iter().find(|w| !(w.norm() > 0.0 && w.norm() < 1.0)) {
        return Err(Error::Domain(format!("|w| = {} outside (0, 1)", w.norm())));
    }
    let mut ln = Complex64::new(c.ln_abs_c_n(), if c.c_n_negative() { PI } else { 0.0 });
    for &w in ws {
        ln += Complex64::new(-2.0 * w.norm().ln(), -FRAC_PI_2) + ln_tau_pair(w, n)?;
    }
    let xs: Vec<Complex64> = ws.iter().copied().chain(ws.iter().map(|w| 1.0 / w.conj())).collect();
    for k in 0..xs.len() {
        for j in 0..k {
            let d = xs[k] - xs[j];
            if d == ZERO {
                return Ok(SignedLogComplex::ZERO);
            }
            ln += d.ln();
        }
    }
    Ok(SignedLogComplex::from_ln(ln))
}

/// `∏ 4/|1+w_j|⁴`, the Jacobian of `λ ↦ w` per point.
pub fn ln_flt_jacobian(ws: &[Complex64]) -> f64 {
    ws.iter().map(|w| 4f64.ln() - 4.0 * (1.0 + w).norm().ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moebius::flt_w_to_lambda;
    use crate::numerics::quadrature::{integrate_disk, integrate_1d, Tolerance};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn disk_points(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
        (0..n)
            .map(|_| Complex64::from_polar(0.95 * rng.random::<f64>().sqrt(), rng.random_range(-3.1..3.1)))
            .collect()
    }

    #[test]
    fn tau_on_circle_and_real_axis() {
        assert_eq!(tau(Complex64::from_polar(1.0, 0.4), 3).unwrap(), ZERO);
        let t = tau(Complex64::new(0.4, 0.0), 3).unwrap();
        assert!(t.re > 0.0 && t.im == 0.0);
        assert!(matches!(tau(Complex64::new(-0.5, 0.0), 2), Err(Error::Branch(_))));
        assert!(matches!(tau(ZERO, 2), Err(Error::Domain(_))));
    }

    #[test]
    fn tau_pair_modulus() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..6 {
            for w in disk_points(20, &mut rng) {
                let r = w.norm();
                let got = ln_tau_pair(w, n).unwrap().re;
                let want = (1.0 / r - r).ln() - (2.0 * n as f64 + 2.0) * (r + 1.0 / r).ln();
                assert!((got - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn radial_weight_closed_form() {
        // (1/i) τ(w)τ(1/w̄)/|w|² = e^{-iθ(2N-1)} (1-r²) r^{2N-1} / (1+r²)^{2N+2} off the cut
        let n = 3;
        let w = Complex64::from_polar(0.6, 2.2);
        let lhs = (ln_tau_pair(w, n).unwrap() - 2.0 * w.norm().ln()).exp() / Complex64::new(0.0, 1.0);
        let r: f64 = 0.6;
        let rhs = Complex64::from_polar((1.0 - r * r) * r.powi(5) / (1.0 + r * r).powi(8), -2.2 * 5.0);
        assert!((lhs - rhs).norm() < 1e-14);
    }

    #[test]
    fn w_form_is_real_positive_and_matches_lambda_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in 1..=6 {
            let c = EnsembleConstants::new(n).unwrap();
            for _ in 0..20 {
                let ws = disk_points(n, &mut rng);
                let jw = jpdf_w(&ws, &c).unwrap();
                let value = jw.to_complex();
                assert!(value.im.abs() <= 1e-10 * value.norm(), "phase {}", jw.principal_phase());
                assert!(value.re > 0.0);
                let ls: Vec<Complex64> = ws.iter().map(|&w| flt_w_to_lambda(w).unwrap()).collect();
                let jl = jpdf_lambda(&ls, &c).unwrap();
                let rhs = jl.log_modulus + ln_flt_jacobian(&ws);
                assert!((jw.log_modulus - rhs).abs() < 1e-10, "N={n}");
            }
        }
    }

    #[test]
    fn repeated_points_vanish() {
        let c = EnsembleConstants::new(2).unwrap();
        let w = Complex64::new(0.2, 0.3);
        assert!(jpdf_w(&[w, w], &c).unwrap().is_zero());
        let l = Complex64::new(0.2, 1.3);
        assert!(jpdf_lambda(&[l, l], &c).unwrap().is_zero());
    }

    #[test]
    fn n1_normalization() {
        let c = EnsembleConstants::new(1).unwrap();
        let tol = Tolerance::new(1e-11, 1e-11);
        let disk = integrate_disk(|w: Complex64| jpdf_w(&[w], &c).map(|v| v.to_complex().re).unwrap_or(0.0), tol).unwrap();
        assert!((disk.value - 1.0).abs() < 1e-8, "{}", disk.value);
        // upper half-plane in polar coordinates about the origin
        let half_plane = integrate_1d(
            |t: f64| {
                if t >= 1.0 {
                    return 0.0;
                }
                let rho = t / (1.0 - t);
                let inner = integrate_1d(
                    |phi: f64| jpdf_lambda(&[Complex64::from_polar(rho, phi)], &c).unwrap().to_complex().re,
                    0.0,
                    PI,
                    Tolerance::new(1e-13, 1e-12),
                )
                .unwrap()
                .value;
                inner * rho / (1.0 - t).powi(2)
            },
            0.0,
            1.0,
            Tolerance::new(1e-10, 1e-10),
        )
        .unwrap();
        assert!((half_plane.value - 1.0).abs() < 1e-6, "{}", half_plane.value);
    }
}
