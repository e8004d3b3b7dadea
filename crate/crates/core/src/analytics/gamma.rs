//! Numerical skew inner products `γ_{j,k}` of the monomial basis, used to
//! check skew orthogonality and the normalisation of the jpdf.

use super::constants::EnsembleConstants;
use super::jpdf::ln_tau_pair;
use crate::error::Result;
use crate::numerics::pfaffian::SkewMatrix;
use crate::numerics::quadrature::{try_integrate_disk, Tolerance};
use num_complex::Complex64;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `q_{2j}(w) = w^{2j}`, `q_{2j+1}(w) = w^{2N-1-2j}`.
pub fn monomial(k: usize, n: usize, w: Complex64) -> Complex64 {
    if k % 2 == 0 {
        w.powi(2 * (k / 2) as i32)
    } else {
        w.powi((2 * n - 1 - 2 * (k / 2)) as i32)
    }
}

/// `γ_{j,k} = (1/i) ∫_𝔻 τ(w) τ(1/w̄)/|w|² (q_{j-1}(w) q_{k-1}(1/w̄) - q_{j-1}(1/w̄) q_{k-1}(w)) dA`,
/// indices starting at 1. The angular grid never samples the cut of `τ`.
pub fn gamma_jk_numeric(j: usize, k: usize, c: &EnsembleConstants, tol: Tolerance) -> Result<Complex64> {
    let n = c.n();
    assert!((1..=2 * n).contains(&j) && (1..=2 * n).contains(&k), "index outside 1..=2N");
    let e = try_integrate_disk(
        |w: Complex64| {
            let wr = 1.0 / w.conj();
            let weight = (ln_tau_pair(w, n)? - 2.0 * w.norm().ln()).exp() / I;
            let anti = monomial(j - 1, n, w) * monomial(k - 1, n, wr) - monomial(j - 1, n, wr) * monomial(k - 1, n, w);
            Ok(weight * anti)
        },
        tol,
    )?;
    Ok(e.value)
}

/// The full `2N×2N` matrix `[γ_{j,k}]`.
pub fn gamma_matrix_numeric(c: &EnsembleConstants, tol: Tolerance) -> Result<SkewMatrix> {
    let dim = 2 * c.n();
    let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
    for j in 0..dim {
        for k in j + 1..dim {
            let g = gamma_jk_numeric(j + 1, k + 1, c, tol)?;
            data[j * dim + k] = g;
            data[k * dim + j] = -g;
        }
    }
    SkewMatrix::new(dim, data, 0.0)
}
