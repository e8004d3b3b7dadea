//! Pfaffians of complex skew-symmetric matrices.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Dense complex matrix checked to satisfy `Aᵀ = -A` on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl SkewMatrix {
    /// Validates `|A + Aᵀ|_max ≤ tol · max(1, |A|_max)`.
    pub fn new(dim: usize, data: Vec<Complex64>, tol: f64) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::Domain(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        let scale = data.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let mut residual: f64 = 0.0;
        for i in 0..dim {
            for j in i..dim {
                residual = residual.max((data[i * dim + j] + data[j * dim + i]).norm());
            }
        }
        if residual > tol * scale {
            return Err(Error::NotSkewSymmetric { residual, tol });
        }
        Ok(Self { dim, data })
    }

    /// Builds the matrix from its strict upper triangle.
    pub fn from_upper(dim: usize, mut upper: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            for j in i + 1..dim {
                let v = upper(i, j);
                data[i * dim + j] = v;
                data[j * dim + i] = -v;
            }
        }
        Self { dim, data }
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
}

/// Parlett–Reid tridiagonalisation with partial pivoting, `O(n³)`.
pub fn pfaffian(m: &SkewMatrix) -> Complex64 {
    let n = m.dim;
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if n % 2 == 1 {
        return Complex64::new(0.0, 0.0);
    }
    let mut a = m.data.clone();
    let idx = |i: usize, j: usize| i * n + j;
    let mut pf = Complex64::new(1.0, 0.0);
    let mut k = 0;
    while k + 1 < n {
        let mut kp = k + 1;
        let mut best = a[idx(k + 1, k)].norm();
        for i in k + 2..n {
            let v = a[idx(i, k)].norm();
            if v > best {
                best = v;
                kp = i;
            }
        }
        if kp != k + 1 {
            // swap rows and columns k+1 <-> kp; the Pfaffian changes sign
            for j in 0..n {
                a.swap(idx(k + 1, j), idx(kp, j));
            }
            for i in 0..n {
                a.swap(idx(i, k + 1), idx(i, kp));
            }
            pf = -pf;
        }
        let pivot = a[idx(k, k + 1)];
        if pivot == Complex64::new(0.0, 0.0) {
            return Complex64::new(0.0, 0.0);
        }
        pf *= pivot;
        if k + 2 < n {
            let tau: Vec<Complex64> = (k + 2..n).map(|j| a[idx(k, j)] / pivot).collect();
            let col: Vec<Complex64> = (k + 2..n).map(|i| a[idx(i, k + 1)]).collect();
            for (ii, i) in (k + 2..n).enumerate() {
                for (jj, j) in (k + 2..n).enumerate() {
                    a[idx(i, j)] += tau[ii] * col[jj] - col[ii] * tau[jj];
                }
            }
        }
        k += 2;
    }
    pf
}

/// Expansion along the first row. Exponential cost; meant as a cross-check
/// for small matrices.
pub fn pfaffian_expansion(m: &SkewMatrix) -> Complex64 {
    let idx: Vec<usize> = (0..m.dim).collect();
    expand(m, &idx)
}

fn expand(m: &SkewMatrix, idx: &[usize]) -> Complex64 {
    match idx.len() {
        0 => Complex64::new(1.0, 0.0),
        n if n % 2 == 1 => Complex64::new(0.0, 0.0),
        2 => m.get(idx[0], idx[1]),
        _ => {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 1..idx.len() {
                let rest: Vec<usize> = idx[1..].iter().copied().filter(|&x| x != idx[j]).collect();
                let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                acc += sign * m.get(idx[0], idx[j]) * expand(m, &rest);
            }
            acc
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use faer::Mat;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_skew(n: usize, rng: &mut ChaCha8Rng) -> SkewMatrix {
        SkewMatrix::from_upper(n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    fn det(m: &SkewMatrix) -> Complex64 {
        let n = m.dim();
        let mat = Mat::<faer::c64>::from_fn(n, n, |i, j| m.get(i, j));
        mat.determinant()
    }

    #[test]
    fn two_by_two_and_four_by_four() {
        let m = SkewMatrix::from_upper(2, |_, _| c(0.3, -2.0));
        assert_eq!(pfaffian(&m), c(0.3, -2.0));
        // Pf = a12 a34 - a13 a24 + a14 a23
        let vals = [c(1.0, 0.5), c(-2.0, 0.0), c(0.7, 1.1), c(3.0, -1.0), c(0.2, 0.2), c(-1.5, 0.4)];
        let mut it = vals.iter();
        let m = SkewMatrix::from_upper(4, |_, _| *it.next().unwrap());
        let expected = vals[0] * vals[5] - vals[1] * vals[4] + vals[2] * vals[3];
        assert!((pfaffian(&m) - expected).norm() < 1e-14);
    }

    #[test]
    fn odd_dimension_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(pfaffian(&random_skew(5, &mut rng)), c(0.0, 0.0));
    }

    #[test]
    fn square_is_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in (2..=16).step_by(2) {
            for _ in 0..5 {
                let m = random_skew(n, &mut rng);
                let pf = pfaffian(&m);
                let d = det(&m);
                assert!((pf * pf - d).norm() <= 1e-10 * d.norm().max(1.0), "n={n}: {} vs {}", pf * pf, d);
            }
        }
    }

    #[test]
    fn matches_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [2, 4, 6, 8] {
            let m = random_skew(n, &mut rng);
            let a = pfaffian(&m);
            let b = pfaffian_expansion(&m);
            assert!((a - b).norm() < 1e-12 * b.norm().max(1.0));
        }
    }

    #[test]
    fn block_diagonal_is_product() {
        let blocks = [c(2.0, 0.0), c(0.0, -1.5), c(0.25, 0.75)];
        let m = SkewMatrix::from_upper(6, |i, j| if j == i + 1 && i % 2 == 0 { blocks[i / 2] } else { c(0.0, 0.0) });
        let expected = blocks[0] * blocks[1] * blocks[2];
        assert!((pfaffian(&m) - expected).norm() < 1e-15);
    }

    #[test]
    fn pivoting_handles_zero_leading_entry() {
        // a12 = 0 forces a swap
        let m = SkewMatrix::from_upper(4, |i, j| match (i, j) {
            (0, 1) => c(0.0, 0.0),
            (0, 2) => c(1.0, 0.0),
            (1, 3) => c(2.0, 0.0),
            _ => c(0.5, 0.0),
        });
        let exp = pfaffian_expansion(&m);
        assert!((pfaffian(&m) - exp).norm() < 1e-14);
    }

    #[test]
    fn rejects_non_skew() {
        let data = vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)];
        assert!(matches!(SkewMatrix::new(2, data, 1e-12), Err(Error::NotSkewSymmetric { .. })));
    }
}
