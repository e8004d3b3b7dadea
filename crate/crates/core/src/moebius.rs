//! The fractional linear map between the upper half-plane and the unit disk,
//! and stereographic projection for point-cloud export.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Slack allowed on `|w| ≤ 1` for points that come out of an eigensolver.
pub const DISK_SLACK: f64 = 1e-9;

/// `w = (1 + iλ)/(1 - iλ)`.
pub fn flt_lambda_to_w(lambda: Complex64) -> Result<Complex64> {
    let den = 1.0 - I * lambda;
    if den == Complex64::new(0.0, 0.0) {
        return Err(Error::Pole(format!("lambda = {lambda}")));
    }
    Ok((1.0 + I * lambda) / den)
}

/// `λ = (1/i)(w - 1)/(w + 1)`.
pub fn flt_w_to_lambda(w: Complex64) -> Result<Complex64> {
    let den = w + 1.0;
    if den == Complex64::new(0.0, 0.0) {
        return Err(Error::Pole(format!("w = {w}")));
    }
    Ok(-I * (w - 1.0) / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskPoint {
    w: Complex64,
}

impl DiskPoint {
    pub fn new(w: Complex64) -> Result<Self> {
        if !(w.norm() <= 1.0 + DISK_SLACK) {
            return Err(Error::Domain(format!("|w| = {} lies outside the unit disk", w.norm())));
        }
        Ok(Self { w })
    }

    pub fn from_lambda(lambda: Complex64) -> Result<Self> {
        Self::new(flt_lambda_to_w(lambda)?)
    }

    pub fn w(&self) -> Complex64 {
        self.w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// `λ = X + iY ↦ (2X, 2Y, |λ|² - 1)/(|λ|² + 1)` on the unit sphere; the
/// origin goes to the south pole and the unit circle to the equator.
pub fn stereographic(lambda: Complex64) -> SpherePoint {
    let r2 = lambda.norm_sqr();
    if !r2.is_finite() {
        return SpherePoint { x: 0.0, y: 0.0, z: 1.0 };
    }
    if r2 > 1.0 {
        // divide through by |λ|² to keep large inputs accurate
        let inv = 1.0 / r2;
        let d = 1.0 + inv;
        return SpherePoint {
            x: 2.0 * lambda.re * inv / d,
            y: 2.0 * lambda.im * inv / d,
            z: (1.0 - inv) / d,
        };
    }
    let d = r2 + 1.0;
    SpherePoint {
        x: 2.0 * lambda.re / d,
        y: 2.0 * lambda.im / d,
        z: (r2 - 1.0) / d,
    }
}
