//! Real quaternions, quaternion matrices and their complex 2×2 block embeddings.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

/// `q0 + i q1 + j q2 + k q3` with real components.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RealQuaternion {
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
}

impl RealQuaternion {
    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Self = Self::new(1.0, 0.0, 0.0, 0.0);

    pub const fn new(q0: f64, q1: f64, q2: f64, q3: f64) -> Self {
        Self { q0, q1, q2, q3 }
    }

    pub const fn scalar(q0: f64) -> Self {
        Self::new(q0, 0.0, 0.0, 0.0)
    }

    pub fn conj(&self) -> Self {
        Self::new(self.q0, -self.q1, -self.q2, -self.q3)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.q0 * self.q0 + self.q1 * self.q1 + self.q2 * self.q2 + self.q3 * self.q3
    }

    /// `[[α, β], [-β̄, ᾱ]]` with `α = q0 + i q1`, `β = q2 + i q3`.
    pub fn block(&self) -> [[Complex64; 2]; 2] {
        let alpha = Complex64::new(self.q0, self.q1);
        let beta = Complex64::new(self.q2, self.q3);
        [[alpha, beta], [-beta.conj(), alpha.conj()]]
    }

    /// Inverse of [`block`](Self::block), reading `α` and `β` from the first row.
    pub fn from_block(block: &[[Complex64; 2]; 2]) -> Self {
        Self::new(block[0][0].re, block[0][0].im, block[0][1].re, block[0][1].im)
    }

    /// Distance of a 2×2 block from the quaternion pattern.
    pub fn block_residual(block: &[[Complex64; 2]; 2]) -> f64 {
        let d1 = (block[1][1] - block[0][0].conj()).norm();
        let d2 = (block[1][0] + block[0][1].conj()).norm();
        d1.max(d2)
    }
}

impl Add for RealQuaternion {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.q0 + o.q0, self.q1 + o.q1, self.q2 + o.q2, self.q3 + o.q3)
    }
}

impl Sub for RealQuaternion {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.q0 - o.q0, self.q1 - o.q1, self.q2 - o.q2, self.q3 - o.q3)
    }
}

impl Neg for RealQuaternion {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.q0, -self.q1, -self.q2, -self.q3)
    }
}

impl Mul for RealQuaternion {
    type Output = Self;
    // Hamilton product
    fn mul(self, o: Self) -> Self {
        let (a0, a1, a2, a3) = (self.q0, self.q1, self.q2, self.q3);
        let (b0, b1, b2, b3) = (o.q0, o.q1, o.q2, o.q3);
        Self::new(
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        )
    }
}

impl Mul<f64> for RealQuaternion {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.q0 * s, self.q1 * s, self.q2 * s, self.q3 * s)
    }
}

/// Square `N×N` matrix of real quaternions, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuaternionMatrix {
    dim: usize,
    entries: Vec<RealQuaternion>,
}

impl QuaternionMatrix {
    pub fn new(dim: usize, entries: Vec<RealQuaternion>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::Domain(format!(
                "quaternion matrix of dimension {dim} needs {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Ok(Self { dim, entries })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> RealQuaternion) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for j in 0..dim {
            for k in 0..dim {
                entries.push(f(j, k));
            }
        }
        Self { dim, entries }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_fn(dim, |_, _| RealQuaternion::ZERO)
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |j, k| if j == k { RealQuaternion::ONE } else { RealQuaternion::ZERO })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, j: usize, k: usize) -> RealQuaternion {
        self.entries[j * self.dim + k]
    }

    pub fn entries(&self) -> &[RealQuaternion] {
        &self.entries
    }

    /// `(Q^D)_{jk} = (Q_{kj})^*`.
    pub fn dual(&self) -> Self {
        Self::from_fn(self.dim, |j, k| self.get(k, j).conj())
    }

    pub fn embed(&self) -> ComplexBlockMatrix {
        let n2 = 2 * self.dim;
        let mut data = vec![Complex64::new(0.0, 0.0); n2 * n2];
        for j in 0..self.dim {
            for k in 0..self.dim {
                let b = self.get(j, k).block();
                for (a, row) in b.iter().enumerate() {
                    for (c, v) in row.iter().enumerate() {
                        data[(2 * j + a) * n2 + 2 * k + c] = *v;
                    }
                }
            }
        }
        ComplexBlockMatrix { dim: n2, data }
    }

    /// Sum of the scalar parts of the diagonal.
    pub fn qtrace(&self) -> f64 {
        (0..self.dim).map(|j| self.get(j, j).q0).sum()
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Domain(format!("dimension mismatch {} vs {}", self.dim, other.dim)));
        }
        Ok(Self::from_fn(self.dim, |j, k| {
            (0..self.dim).fold(RealQuaternion::ZERO, |acc, l| acc + self.get(j, l) * other.get(l, k))
        }))
    }

    /// Largest component of `Q - Q^D` relative to `max(1, max |Q_jk|)`.
    pub fn self_dual_residual(&self) -> f64 {
        let d = self.dual();
        let scale = self.entries.iter().map(|q| q.norm_sqr().sqrt()).fold(1.0, f64::max);
        let diff = self
            .entries
            .iter()
            .zip(d.entries.iter())
            .map(|(a, b)| (*a - *b).norm_sqr().sqrt())
            .fold(0.0, f64::max);
        diff / scale
    }

    /// `qdet Q = (det embed Q)^{1/2}` for self-dual `Q`, using the
    /// nonnegative root.
    pub fn qdet_selfdual(&self, tol: f64) -> Result<f64> {
        let residual = self.self_dual_residual();
        if residual > tol {
            return Err(Error::NotSelfDual { residual, tol });
        }
        let det = self.embed().determinant();
        // self-duality makes the embedding Hermitian, so the determinant is real
        let scale = self.entries.iter().map(|q| q.norm_sqr().sqrt()).fold(1.0, f64::max);
        let floor = tol * scale.powi(2 * self.dim as i32);
        if det.re < -floor {
            return Err(Error::NegativeDeterminant(det.re));
        }
        Ok(det.re.max(0.0).sqrt())
    }
}

impl Add for &QuaternionMatrix {
    type Output = QuaternionMatrix;
    fn add(self, o: &QuaternionMatrix) -> QuaternionMatrix {
        assert_eq!(self.dim, o.dim, "dimension mismatch");
        QuaternionMatrix::from_fn(self.dim, |j, k| self.get(j, k) + o.get(j, k))
    }
}

/// Dense complex `2N×2N` matrix, row-major; the working form for linear algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexBlockMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexBlockMatrix {
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::Domain(format!("expected {} entries, got {}", dim * dim, data.len())));
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.get(i, j).conj();
            }
        }
        Self { dim: n, data }
    }

    pub fn to_faer(&self) -> faer::Mat<faer::c64> {
        faer::Mat::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    pub fn from_faer(m: faer::MatRef<'_, faer::c64>) -> Self {
        let n = m.nrows();
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(m[(i, j)]);
            }
        }
        Self { dim: n, data }
    }

    pub fn determinant(&self) -> Complex64 {
        self.to_faer().determinant()
    }

    /// Largest deviation of any 2×2 block from the quaternion pattern, or
    /// infinity for odd dimension.
    pub fn quaternion_residual(&self) -> f64 {
        if self.dim % 2 == 1 {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for j in 0..self.dim / 2 {
            for k in 0..self.dim / 2 {
                worst = worst.max(RealQuaternion::block_residual(&self.block(j, k)));
            }
        }
        worst
    }

    pub fn is_quaternion(&self, tol: f64) -> bool {
        self.quaternion_residual() <= tol
    }

    fn block(&self, j: usize, k: usize) -> [[Complex64; 2]; 2] {
        [
            [self.get(2 * j, 2 * k), self.get(2 * j, 2 * k + 1)],
            [self.get(2 * j + 1, 2 * k), self.get(2 * j + 1, 2 * k + 1)],
        ]
    }

    /// Reads back the quaternion matrix, failing if any block breaks the pattern.
    pub fn extract(&self, tol: f64) -> Result<QuaternionMatrix> {
        let residual = self.quaternion_residual();
        if residual > tol {
            return Err(Error::NotQuaternion(residual));
        }
        let n = self.dim / 2;
        Ok(QuaternionMatrix::from_fn(n, |j, k| RealQuaternion::from_block(&self.block(j, k))))
    }
}
