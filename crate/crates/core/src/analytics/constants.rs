use crate::error::{Error, Result};
use crate::numerics::special::{ln_factorial, ln_gamma, log_binomial};
use std::f64::consts::PI;

/// Per-`N` constants: `C_N`, the skew norms `h_j`, and the binomials
/// `C(2N-1, j)` used by the kernel, all stored as logarithms.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConstants {
    n: usize,
    ln_abs_c_n: f64,
    c_n_negative: bool,
    ln_binom: Vec<f64>,
    ln_abs_h: Vec<f64>,
    h_negative: Vec<bool>,
}

impl EnsembleConstants {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("N must be at least 1".into()));
        }
        let nf = n as f64;
        let ln_g = ln_gamma(2.0 * nf + 2.0);
        let ln_abs_c_n = -nf * PI.ln() - ln_factorial(n as u64)
            + (1..=n).map(|j| ln_g - 2.0 * ln_gamma(2.0 * j as f64)).sum::<f64>();
        let c_n_negative = (n * (n - 1) / 2) % 2 == 1;
        let m = 2 * n as u64 - 1;
        let ln_binom = (0..=m).map(|k| log_binomial(m, k)).collect::<Result<Vec<_>>>()?;
        let mut ln_abs_h = Vec::with_capacity(n);
        let mut h_negative = Vec::with_capacity(n);
        for j in 0..n {
            let num = 2.0 * nf - 4.0 * j as f64 - 1.0;
            ln_abs_h.push(PI.ln() + num.abs().ln() - ((2.0 * nf + 1.0) * 2.0 * nf).ln() - ln_binom[2 * j]);
            h_negative.push(num < 0.0);
        }
        Ok(Self {
            n,
            ln_abs_c_n,
            c_n_negative,
            ln_binom,
            ln_abs_h,
            h_negative,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `C_N`; under- or overflows for large `N`, where [`ln_abs_c_n`](Self::ln_abs_c_n) is the usable form.
    pub fn c_n(&self) -> f64 {
        let v = self.ln_abs_c_n.exp();
        if self.c_n_negative {
            -v
        } else {
            v
        }
    }

    pub fn ln_abs_c_n(&self) -> f64 {
        self.ln_abs_c_n
    }

    pub fn c_n_negative(&self) -> bool {
        self.c_n_negative
    }

    /// `h_j = π(2N-4j-1) / ((2N+1)(2N)) · C(2N-1, 2j)^{-1}`.
    pub fn h(&self, j: usize) -> f64 {
        let v = self.ln_abs_h[j].exp();
        if self.h_negative[j] {
            -v
        } else {
            v
        }
    }

    pub fn ln_abs_h(&self, j: usize) -> f64 {
        self.ln_abs_h[j]
    }

    /// `ln C(2N-1, k)` for `0 ≤ k ≤ 2N-1`.
    pub fn ln_binom(&self, k: usize) -> f64 {
        self.ln_binom[k]
    }

    /// `ln((2N+1)·2N/π)`, the constant in front of the kernel sum.
    pub fn ln_kernel_constant(&self) -> f64 {
        let nf = self.n as f64;
        ((2.0 * nf + 1.0) * 2.0 * nf / PI).ln()
    }

    /// `Γ(N+1)·C_N·∏ h_j`, evaluated in log space; equals one when the jpdf
    /// is normalised.
    pub fn normalization_product(&self) -> f64 {
        let ln = ln_factorial(self.n as u64) + self.ln_abs_c_n + self.ln_abs_h.iter().sum::<f64>();
        let negatives = self.h_negative.iter().filter(|&&b| b).count() + usize::from(self.c_n_negative);
        let v = ln.exp();
        if negatives % 2 == 1 {
            -v
        } else {
            v
        }
    }
}

/// `h_j` for a single `(j, N)`.
pub fn skew_norm_h(j: usize, n: usize) -> Result<f64> {
    if j >= n {
        return Err(Error::Domain(format!("j = {j} outside 0..{n}")));
    }
    Ok(EnsembleConstants::new(n)?.h(j))
}
