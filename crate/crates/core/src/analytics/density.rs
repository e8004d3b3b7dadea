//! The one-point density `ρ(w) = S(w, w)` and its large-`N` form.

use super::constants::EnsembleConstants;
use crate::error::{Error, Result};
use crate::numerics::logsum::RealLogSum;
use num_complex::Complex64;
use std::f64::consts::PI;

/// `ρ` at radius `r = |w|`. For real `v = r² < 1` every term of the kernel
/// sum is positive, so the sum is a plain log-sum.
pub fn density_radial(r: f64, c: &EnsembleConstants) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::Domain(format!("radius {r} outside [0, 1]")));
    }
    let n = c.n();
    let nf = n as f64;
    if r == 0.0 {
        return Ok((2.0 * nf + 1.0) * 2.0 * nf / (PI * (2.0 * nf - 1.0)));
    }
    if r == 1.0 {
        return Ok(0.0);
    }
    let ln_r = r.ln();
    // A_ww = (1/r²)(1/r - r)/(r + 1/r)^{2N+2}
    let ln_a = -2.0 * ln_r + ((1.0 - r) * (1.0 + r)).ln() - ln_r - (2.0 * nf + 2.0) * ((1.0 + r * r).ln() - ln_r);
    let mut acc = RealLogSum::new();
    for j in 0..n {
        let k = (2 * n - 2 * j - 1) as f64;
        // (r^{-k} - r^{k})/k = r^{-k}(-expm1(2k ln r))/k
        acc.push(c.ln_binom(j) - k.ln() - k * ln_r + (-(2.0 * k * ln_r).exp_m1()).ln(), false);
    }
    let (ln_sum, _) = acc.total();
    Ok((ln_a + c.ln_kernel_constant() + ln_sum).exp())
}

/// `ρ(w)`; depends only on `|w|`.
pub fn density(w: Complex64, c: &EnsembleConstants) -> Result<f64> {
    density_radial(w.norm(), c)
}

/// `2N / (π (1 + r²)²)`.
pub fn density_limit(w: Complex64, n: usize) -> f64 {
    2.0 * n as f64 / (PI * (1.0 + w.norm_sqr()).powi(2))
}

/// `2π ∫_a^b r ρ(r) dr`: the expected number of eigenvalues in the annulus.
pub fn annulus_mass(a: f64, b: f64, c: &EnsembleConstants, tol: crate::numerics::quadrature::Tolerance) -> Result<f64> {
    let e = crate::numerics::quadrature::try_integrate_1d(|r| Ok(2.0 * PI * r * density_radial(r, c)?), a, b, tol)?;
    Ok(e.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quadrature::{integrate_half_line, Tolerance};

    #[test]
    fn n1_closed_form() {
        let c = EnsembleConstants::new(1).unwrap();
        assert!((density_radial(0.0, &c).unwrap() - 6.0 / PI).abs() < 1e-15);
        for k in 1..100 {
            let r = k as f64 / 100.0;
            let want = 6.0 / PI * (1.0 - r * r).powi(2) / (1.0 + r * r).powi(4);
            let got = density_radial(r, &c).unwrap();
            assert!((got - want).abs() < 1e-13 * want.max(1e-3), "r={r}: {got} vs {want}");
        }
        assert_eq!(density_radial(1.0, &c).unwrap(), 0.0);
    }

    #[test]
    fn small_radius_is_continuous() {
        for n in [1, 7, 60] {
            let c = EnsembleConstants::new(n).unwrap();
            let at0 = density_radial(0.0, &c).unwrap();
            let near = density_radial(1e-6, &c).unwrap();
            assert!((at0 - near).abs() < 1e-9 * at0, "N={n}: {at0} vs {near}");
        }
    }

    #[test]
    fn normalization() {
        let tol = Tolerance::new(1e-12, 1e-12);
        for n in [1, 5, 25, 100] {
            let c = EnsembleConstants::new(n).unwrap();
            let mass = annulus_mass(0.0, 1.0, &c, tol).unwrap();
            assert!((mass / n as f64 - 1.0).abs() < 1e-8, "N={n}: {mass}");
        }
    }

    #[test]
    fn limit_values_and_mass() {
        assert!((density_limit(Complex64::new(0.0, 0.0), 100) - 200.0 / PI).abs() < 1e-12);
        let tol = Tolerance::new(1e-13, 1e-13);
        // N over the disk, 2N over the whole plane (the sphere covers both sheets)
        let disk = crate::numerics::quadrature::integrate_1d(
            |r: f64| 2.0 * PI * r * density_limit(Complex64::new(r, 0.0), 3),
            0.0,
            1.0,
            tol,
        )
        .unwrap();
        assert!((disk.value - 3.0).abs() < 1e-12);
        let plane = integrate_half_line(|r: f64| 2.0 * PI * r * density_limit(Complex64::new(r, 0.0), 3), 0.0, tol).unwrap();
        assert!((plane.value - 6.0).abs() < 1e-10);
    }
}
