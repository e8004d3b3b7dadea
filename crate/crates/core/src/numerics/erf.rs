//! Complex error function.
//!
//! Two independent evaluations are provided: the Maclaurin series, used for
//! `|Re z| < 1`, and Laplace's continued fraction for `erfc`, used elsewhere.
//! The series loses about `2·(Re z)²/ln 10` digits to cancellation, so the
//! crossover is placed on the real part rather than on `|z|`.

use crate::error::{Error, Result};
use num_complex::Complex64;

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

/// Moduli beyond this are outside the documented accuracy envelope.
pub const ERF_ENVELOPE: f64 = 30.0;

const CROSSOVER_RE: f64 = 1.0;

/// `erf(z)` by its Maclaurin series.
pub fn erf_series(z: Complex64) -> Complex64 {
    let z2 = z * z;
    let mut term = z;
    let mut sum = z;
    let limit = z2.norm();
    let mut n = 0u32;
    loop {
        n += 1;
        term *= -z2 / f64::from(n);
        let contribution = term / f64::from(2 * n + 1);
        sum += contribution;
        if f64::from(n) > limit && contribution.norm() <= 1e-17 * sum.norm() {
            break;
        }
        if n > 20_000 {
            break;
        }
    }
    sum * FRAC_2_SQRT_PI
}

/// `erfc(z)` for `Re z > 0` by Laplace's continued fraction, evaluated with
/// the modified Lentz algorithm.
pub fn erfc_continued_fraction(z: Complex64) -> Complex64 {
    const TINY: f64 = 1e-300;
    let tiny = Complex64::new(TINY, 0.0);
    let mut f = if z.norm() == 0.0 { tiny } else { z };
    let mut c = f;
    let mut d = Complex64::new(0.0, 0.0);
    for k in 1..100_000u32 {
        let a = 0.5 * f64::from(k);
        d = z + d * a;
        if d.norm() == 0.0 {
            d = tiny;
        }
        d = d.inv();
        c = z + a / c;
        if c.norm() == 0.0 {
            c = tiny;
        }
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 1e-16 {
            break;
        }
    }
    (-z * z).exp() / (std::f64::consts::PI.sqrt() * f)
}

/// The complex error function.
///
/// Odd and conjugate-symmetric by construction. Values whose modulus
/// exceeds `f64::MAX` come back infinite.
pub fn erf_complex(z: Complex64) -> Complex64 {
    if z.re < 0.0 {
        return -erf_complex(-z);
    }
    if z.re < CROSSOVER_RE {
        let s = erf_series(z);
        // keep exact conjugate symmetry on the real axis
        if z.im == 0.0 {
            Complex64::new(s.re, 0.0)
        } else {
            s
        }
    } else {
        Complex64::new(1.0, 0.0) - erfc_continued_fraction(z)
    }
}

/// As [`erf_complex`], but refuses arguments outside `|z| ≤ 30`.
pub fn erf_complex_checked(z: Complex64) -> Result<Complex64> {
    if !(z.norm() <= ERF_ENVELOPE) {
        return Err(Error::Domain(format!(
            "erf argument {z} outside the accuracy envelope |z| <= {ERF_ENVELOPE}"
        )));
    }
    Ok(erf_complex(z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    // 30-digit reference values
    const REFERENCE: &[(f64, f64, f64, f64)] = &[
        (1.0, 1.0, 1.3161512816979477, 0.19045346923783468),
        (0.0, 1.0, 0.0, 1.6504257587975428),
        (0.3, -2.2, 30.7539511613586, -14.374319537416994),
        (-1.7, 0.4, -0.9995380010329961, 0.018737115541508885),
        (2.5, 4.0, 1119.3677156394565, 1742.1085801923439),
        (0.05, 10.6, 2.90964246692419e+47, 1.6488251156043702e+47),
        (1.2, 9.0, 1.1186078170133973e+33, -1.929727890971953e+33),
        (3.0, -0.5, 1.0000280653614764, 2.6284897222588233e-07),
    ];

    #[test]
    fn matches_reference_values() {
        for &(x, y, re, im) in REFERENCE {
            let got = erf_complex(Complex64::new(x, y));
            assert!(rel(got, Complex64::new(re, im)) < 1e-12, "erf({x}+{y}i) = {got}");
        }
    }

    #[test]
    fn zero_and_real_limit() {
        assert_eq!(erf_complex(Complex64::new(0.0, 0.0)), Complex64::new(0.0, 0.0));
        let six = erf_complex(Complex64::new(6.0, 0.0));
        assert!((six - 1.0).norm() < 1e-12);
        assert!((erf_complex(Complex64::new(1.0, 0.0)).re - 0.842_700_792_949_714_9).abs() < 1e-15);
    }

    #[test]
    fn envelope_is_enforced() {
        assert!(erf_complex_checked(Complex64::new(20.0, 25.0)).is_err());
        assert!(erf_complex_checked(Complex64::new(2.0, 2.0)).is_ok());
    }

    #[test]
    fn series_and_continued_fraction_agree() {
        // region where both evaluations are accurate: 1 ≤ Re z ≤ 2
        let mut state = 0x2545_f491_4f6c_dd1du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            let z = Complex64::new(1.0 + next(), 4.0 * next() - 2.0);
            let a = erf_series(z);
            let b = Complex64::new(1.0, 0.0) - erfc_continued_fraction(z);
            assert!(rel(a, b) < 1e-12, "z={z}: {a} vs {b}");
        }
    }

    proptest! {
        #[test]
        fn odd_and_conjugate_symmetric(x in -5.0f64..5.0, y in -5.0f64..5.0) {
            let z = Complex64::new(x, y);
            let e = erf_complex(z);
            prop_assert!(rel(erf_complex(-z), -e) < 1e-14);
            prop_assert!(rel(erf_complex(z.conj()), e.conj()) < 1e-14);
        }
    }
}
