//! Bulk scaling near the boundary point `w = 1`.

use super::constants::EnsembleConstants;
use super::kernel::kernel_s_sum;
use crate::error::{Error, Result};
use crate::numerics::erf::erf_complex_checked;
use num_complex::Complex64;
use std::f64::consts::PI;

/// `(4π/i) (Y B)^{1/2} e^{-2π(Y²+B²)} erf(√π (W - Z̄))` for `W = X+iY`, `Z = A+iB`.
pub fn scaled_s(big_w: Complex64, big_z: Complex64) -> Result<Complex64> {
    let (y, b) = (big_w.im, big_z.im);
    if !(y > 0.0 && b > 0.0) {
        return Err(Error::Domain(format!("scaled kernel needs Im W, Im Z > 0, got {big_w}, {big_z}")));
    }
    let e = erf_complex_checked(PI.sqrt() * (big_w - big_z.conj()))?;
    let pref = 4.0 * PI * (y * b).sqrt() * (-2.0 * PI * (y * y + b * b)).exp();
    Ok(Complex64::new(0.0, -pref) * e)
}

/// `scaled_s(W, W)`; depends only on `Y = Im W`. Vanishes on the boundary
/// `Y = 0`.
pub fn scaled_density(y: f64) -> Result<f64> {
    if y == 0.0 {
        return Ok(0.0);
    }
    Ok(scaled_s(Complex64::new(0.0, y), Complex64::new(0.0, y))?.re)
}

/// `w♯ = 1 + 2iW√(π/N)`.
pub fn sharp(big_w: Complex64, n: usize) -> Complex64 {
    1.0 + Complex64::new(0.0, 2.0) * big_w * (PI / n as f64).sqrt()
}

/// `(4π/N)·S(w♯, z♯)` at finite `N`.
pub fn finite_n_scaled_s(big_w: Complex64, big_z: Complex64, c: &EnsembleConstants) -> Result<Complex64> {
    let n = c.n();
    let (w, z) = (sharp(big_w, n), sharp(big_z, n));
    for (p, label) in [(w, "W"), (z, "Z")] {
        if !(p.norm() < 1.0) {
            return Err(Error::Domain(format!("{label} maps outside the disk at N = {n} (|w| = {})", p.norm())));
        }
    }
    Ok(kernel_s_sum(w, z, c)? * (4.0 * PI / n as f64))
}
