//! Seeded draws of `Y = A⁻¹B` for Gaussian `A`, `B` and the reduction of the
//! spectrum to one eigenvalue per conjugate pair.
//!
//! Reproducibility: each draw uses a ChaCha20 stream seeded from
//! `derive_seed(master_seed, draw_index, attempt)`, and normals come from
//! `rand_distr::StandardNormal` (ziggurat). Both crates are pinned to exact
//! versions in the manifest, since a change in either alters the bits.

use crate::error::{Error, Result};
use crate::moebius::flt_lambda_to_w;
use crate::quaternion::{QuaternionMatrix, RealQuaternion};
use faer::linalg::solvers::Solve;
use faer::{c64, Mat};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Upper bound on redraws per draw index, across both failure causes.
pub const MAX_ATTEMPTS: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Beta {
    Real,
    Complex,
    Quaternion,
}

impl Beta {
    pub fn as_u8(self) -> u8 {
        match self {
            Beta::Real => 1,
            Beta::Complex => 2,
            Beta::Quaternion => 4,
        }
    }
}

impl TryFrom<u8> for Beta {
    type Error = Error;
    fn try_from(b: u8) -> Result<Self> {
        match b {
            1 => Ok(Beta::Real),
            2 => Ok(Beta::Complex),
            4 => Ok(Beta::Quaternion),
            _ => Err(Error::Config(format!("beta must be 1, 2 or 4, got {b}"))),
        }
    }
}

impl From<Beta> for u8 {
    fn from(b: Beta) -> u8 {
        b.as_u8()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub beta: Beta,
    pub n: usize,
    pub count: usize,
    pub master_seed: u64,
    pub cond_limit: f64,
    pub pair_tol: f64,
}

impl EnsembleConfig {
    pub fn new(beta: Beta, n: usize, count: usize, master_seed: u64) -> Self {
        Self {
            beta,
            n,
            count,
            master_seed,
            cond_limit: 1e12,
            pair_tol: 1e-6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        if self.count == 0 {
            return Err(Error::Config("count must be at least 1".into()));
        }
        if !(self.cond_limit > 1.0) {
            return Err(Error::Config(format!("cond_limit must exceed 1, got {}", self.cond_limit)));
        }
        if !(self.pair_tol > 0.0) {
            return Err(Error::Config(format!("pair_tol must be positive, got {}", self.pair_tol)));
        }
        Ok(())
    }

    /// Size of the complex matrices handed to the solver.
    pub fn matrix_dim(&self) -> usize {
        match self.beta {
            Beta::Quaternion => 2 * self.n,
            _ => self.n,
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Per-draw seed; independent of how draws are scheduled.
pub fn derive_seed(master_seed: u64, draw_index: u64, attempt: u32) -> u64 {
    let h = splitmix64(master_seed);
    let h = splitmix64(h ^ splitmix64(draw_index.wrapping_mul(0xd134_2543_de82_ef95)));
    splitmix64(h ^ splitmix64(u64::from(attempt).wrapping_add(0x2545_f491_4f6c_dd1d)))
}

fn normal(rng: &mut ChaCha20Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn gaussian_quaternion_matrix(n: usize, rng: &mut ChaCha20Rng) -> QuaternionMatrix {
    QuaternionMatrix::from_fn(n, |_, _| {
        let q0 = normal(rng);
        let q1 = normal(rng);
        let q2 = normal(rng);
        let q3 = normal(rng);
        RealQuaternion::new(q0, q1, q2, q3)
    })
}

/// `N×N` matrix of real quaternions with iid standard normal components,
/// filled row-major, components in the order `q0, q1, q2, q3`.
pub fn sample_gaussian_quaternion(n: usize, seed: u64) -> QuaternionMatrix {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    gaussian_quaternion_matrix(n, &mut rng)
}

/// Dense matrix in whichever field the ensemble lives in.
#[derive(Debug, Clone)]
pub enum DenseMatrix {
    Real(Mat<f64>),
    Complex(Mat<c64>),
}

impl DenseMatrix {
    pub fn dim(&self) -> usize {
        match self {
            DenseMatrix::Real(m) => m.nrows(),
            DenseMatrix::Complex(m) => m.nrows(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        match self {
            DenseMatrix::Real(m) => Complex64::new(m[(i, j)], 0.0),
            DenseMatrix::Complex(m) => m[(i, j)],
        }
    }

    pub fn to_complex(&self) -> Mat<c64> {
        let n = self.dim();
        Mat::from_fn(n, n, |i, j| self.get(i, j))
    }

    pub fn norm_max(&self) -> f64 {
        let n = self.dim();
        let mut m: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                m = m.max(self.get(i, j).norm());
            }
        }
        m
    }

    fn norm_l1(&self) -> f64 {
        let n = self.dim();
        (0..n).map(|j| (0..n).map(|i| self.get(i, j).norm()).sum::<f64>()).fold(0.0, f64::max)
    }
}

fn gaussian_matrix(beta: Beta, n: usize, rng: &mut ChaCha20Rng) -> DenseMatrix {
    match beta {
        Beta::Real => {
            let mut m = Mat::<f64>::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] = normal(rng);
                }
            }
            DenseMatrix::Real(m)
        }
        Beta::Complex => {
            let mut m = Mat::<c64>::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    let re = normal(rng);
                    let im = normal(rng);
                    m[(i, j)] = c64::new(re, im);
                }
            }
            DenseMatrix::Complex(m)
        }
        Beta::Quaternion => {
            let q = gaussian_quaternion_matrix(n, rng);
            DenseMatrix::Complex(q.embed().to_faer())
        }
    }
}

trait Factor {
    fn solve_c(&self, rhs: &Mat<c64>) -> Mat<c64>;
    fn solve_adjoint_c(&self, rhs: &Mat<c64>) -> Mat<c64>;
}

struct RealLu(faer::linalg::solvers::PartialPivLu<f64>);
struct ComplexLu(faer::linalg::solvers::PartialPivLu<c64>);

fn split(rhs: &Mat<c64>) -> Mat<f64> {
    // [Re | Im] side by side
    let (n, k) = (rhs.nrows(), rhs.ncols());
    Mat::from_fn(n, 2 * k, |i, j| if j < k { rhs[(i, j)].re } else { rhs[(i, j - k)].im })
}

fn join(x: &Mat<f64>) -> Mat<c64> {
    let (n, k) = (x.nrows(), x.ncols() / 2);
    Mat::from_fn(n, k, |i, j| c64::new(x[(i, j)], x[(i, j + k)]))
}

impl Factor for RealLu {
    fn solve_c(&self, rhs: &Mat<c64>) -> Mat<c64> {
        join(&self.0.solve(&split(rhs)))
    }
    fn solve_adjoint_c(&self, rhs: &Mat<c64>) -> Mat<c64> {
        join(&self.0.solve_transpose(&split(rhs)))
    }
}

impl Factor for ComplexLu {
    fn solve_c(&self, rhs: &Mat<c64>) -> Mat<c64> {
        self.0.solve(rhs)
    }
    fn solve_adjoint_c(&self, rhs: &Mat<c64>) -> Mat<c64> {
        self.0.solve_adjoint(rhs)
    }
}

/// Hager's estimate of `‖A⁻¹‖₁` from solves with `A` and `A^H`.
fn inverse_norm_estimate(lu: &dyn Factor, n: usize) -> f64 {
    let mut x = Mat::<c64>::from_fn(n, 1, |_, _| c64::new(1.0 / n as f64, 0.0));
    let mut estimate = 0.0;
    for _ in 0..5 {
        let y = lu.solve_c(&x);
        let norm1: f64 = (0..n).map(|i| y[(i, 0)].norm()).sum();
        if !norm1.is_finite() {
            return f64::INFINITY;
        }
        estimate = norm1;
        let xi = Mat::<c64>::from_fn(n, 1, |i, _| {
            let v = y[(i, 0)];
            if v.norm() == 0.0 {
                c64::new(1.0, 0.0)
            } else {
                v / v.norm()
            }
        });
        let z = lu.solve_adjoint_c(&xi);
        let (mut jmax, mut zmax) = (0, 0.0);
        let mut ztx = 0.0;
        for i in 0..n {
            let a = z[(i, 0)].norm();
            if a > zmax {
                zmax = a;
                jmax = i;
            }
            ztx += (z[(i, 0)].conj() * x[(i, 0)]).re;
        }
        if zmax <= ztx {
            break;
        }
        x = Mat::<c64>::from_fn(n, 1, |i, _| if i == jmax { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) });
    }
    estimate
}

/// One accepted draw: the factors, the solution `Y` of `A·Y = B`, and diagnostics.
#[derive(Debug, Clone)]
pub struct SphericalDraw {
    pub a: DenseMatrix,
    pub b: DenseMatrix,
    pub y: DenseMatrix,
    pub seed_used: u64,
    pub attempt: u32,
    pub cond_estimate: f64,
}

impl SphericalDraw {
    /// `‖A·Y - B‖_max / ‖B‖_max`.
    pub fn solve_residual(&self) -> f64 {
        let a = self.a.to_complex();
        let y = self.y.to_complex();
        let b = self.b.to_complex();
        let r = &a * &y - &b;
        let n = r.nrows();
        let mut m: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                m = m.max(r[(i, j)].norm());
            }
        }
        m / self.b.norm_max()
    }
}

/// Draws `A`, `B` from the stream for `(master_seed, draw_index, attempt)`
/// and solves `A·Y = B` by LU. Gives back the condition estimate when it
/// exceeds the limit.
fn try_spherical(cfg: &EnsembleConfig, draw_index: u64, attempt: u32) -> std::result::Result<SphericalDraw, f64> {
    let seed = derive_seed(cfg.master_seed, draw_index, attempt);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let a = gaussian_matrix(cfg.beta, cfg.n, &mut rng);
    let b = gaussian_matrix(cfg.beta, cfg.n, &mut rng);
    let n = a.dim();
    let (y, cond) = match (&a, &b) {
        (DenseMatrix::Real(am), DenseMatrix::Real(bm)) => {
            let lu = RealLu(am.partial_piv_lu());
            let cond = a.norm_l1() * inverse_norm_estimate(&lu, n);
            (DenseMatrix::Real(lu.0.solve(bm)), cond)
        }
        (DenseMatrix::Complex(am), DenseMatrix::Complex(bm)) => {
            let lu = ComplexLu(am.partial_piv_lu());
            let cond = a.norm_l1() * inverse_norm_estimate(&lu, n);
            (DenseMatrix::Complex(lu.0.solve(bm)), cond)
        }
        _ => unreachable!("A and B share a field"),
    };
    if !(cond <= cfg.cond_limit) {
        return Err(cond);
    }
    Ok(SphericalDraw {
        a,
        b,
        y,
        seed_used: seed,
        attempt,
        cond_estimate: cond,
    })
}

/// `Y = A⁻¹B` for the given draw, redrawing with the next attempt index
/// while `A` is too ill-conditioned.
pub fn sample_spherical(cfg: &EnsembleConfig, draw_index: u64) -> Result<SphericalDraw> {
    sample_spherical_from(cfg, draw_index, 0)
}

/// Like [`sample_spherical`] but starting from a given attempt index.
pub fn sample_spherical_from(cfg: &EnsembleConfig, draw_index: u64, first_attempt: u32) -> Result<SphericalDraw> {
    cfg.validate()?;
    let mut last_cond = f64::NAN;
    for attempt in first_attempt..MAX_ATTEMPTS {
        match try_spherical(cfg, draw_index, attempt) {
            Ok(d) => return Ok(d),
            Err(cond) => {
                last_cond = cond;
                log::debug!("draw {draw_index}: attempt {attempt} rejected, condition estimate {cond:e}");
            }
        }
    }
    Err(Error::SolveFailure {
        attempts: MAX_ATTEMPTS,
        cond: last_cond,
    })
}

/// All eigenvalues of a dense matrix.
pub fn eigenvalues(y: &DenseMatrix) -> Result<Vec<Complex64>> {
    match y {
        DenseMatrix::Real(m) => m.eigenvalues().map_err(|e| Error::Eigensolver(format!("{e:?}"))),
        DenseMatrix::Complex(m) => m.eigenvalues().map_err(|e| Error::Eigensolver(format!("{e:?}"))),
    }
}

/// Result of pairing a spectrum under conjugation.
#[derive(Debug, Clone, PartialEq)]
pub struct Paired {
    /// One member per pair, `Im ≥ 0`, sorted by `(Re, Im)`.
    pub representatives: Vec<Complex64>,
    /// Largest `|λ_a - conj(λ_b)| / max(1, |λ_a|)` over matched pairs.
    pub max_residual: f64,
    /// Largest `|λ_a - conj(λ_b)|` over matched pairs.
    pub max_abs_residual: f64,
    /// Pairs whose members both sit on the real axis to within tolerance.
    pub real_axis: usize,
}

fn by_re_im(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Matches each eigenvalue with its nearest conjugate: after sorting by real
/// part, candidates are scanned outward until the real-part gap exceeds the
/// best distance so far. Ties go to the candidate whose `|Im|` is closest.
pub fn pair_reduce(eigs: &[Complex64], pair_tol: f64) -> Result<Paired> {
    if eigs.len() % 2 == 1 {
        return Err(Error::Pairing(format!("odd number of eigenvalues ({})", eigs.len())));
    }
    let mut sorted = eigs.to_vec();
    sorted.sort_by(by_re_im);
    let n = sorted.len();
    let mut used = vec![false; n];
    let mut reps = Vec::with_capacity(n / 2);
    let mut max_residual: f64 = 0.0;
    let mut max_abs_residual: f64 = 0.0;
    let mut real_axis = 0;
    for a in 0..n {
        if used[a] {
            continue;
        }
        used[a] = true;
        let la = sorted[a];
        let target = la.conj();
        let mut best: Option<(usize, f64)> = None;
        let better = |cand: usize, d: f64, best: &Option<(usize, f64)>| match best {
            None => true,
            Some((b, bd)) => {
                d < *bd || (d == *bd && (sorted[cand].im.abs() - la.im.abs()).abs() < (sorted[*b].im.abs() - la.im.abs()).abs())
            }
        };
        for b in a + 1..n {
            let gap = sorted[b].re - la.re;
            if let Some((_, bd)) = best {
                if gap > bd {
                    break;
                }
            }
            if used[b] {
                continue;
            }
            let d = (sorted[b] - target).norm();
            if better(b, d, &best) {
                best = Some((b, d));
            }
        }
        let Some((b, d)) = best else {
            return Err(Error::Pairing(format!("no partner left for {la}")));
        };
        let scale = 1f64.max(la.norm());
        if d > pair_tol * scale {
            return Err(Error::Pairing(format!("{la} and {} differ from a conjugate pair by {d:e}", sorted[b])));
        }
        used[b] = true;
        max_residual = max_residual.max(d / scale);
        max_abs_residual = max_abs_residual.max(d);
        let lb = sorted[b];
        let mut rep = if la.im >= lb.im { la } else { lb };
        if la.im.abs() <= pair_tol * scale && lb.im.abs() <= pair_tol * scale {
            real_axis += 1;
            rep.im = rep.im.abs();
        }
        reps.push(rep);
    }
    reps.sort_by(by_re_im);
    Ok(Paired {
        representatives: reps,
        max_residual,
        max_abs_residual,
        real_axis,
    })
}

/// One draw carried through solve, eigensolve, pairing and the FLT.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSample {
    pub draw_index: u64,
    pub beta: Beta,
    pub n: usize,
    pub seed_used: u64,
    /// For β = 4 one eigenvalue per conjugate pair (`Im ≥ 0`); for β = 1, 2
    /// the full spectrum. Sorted by `(Re, Im)`.
    pub lambdas: Vec<Complex64>,
    pub ws: Vec<Complex64>,
    pub resample_count: u32,
    pub cond_estimate: f64,
    /// Largest relative pairing residual (β = 4 only).
    pub pair_residual: f64,
    pub real_axis: usize,
}

pub fn run_draw(cfg: &EnsembleConfig, draw_index: u64) -> Result<SpectrumSample> {
    cfg.validate()?;
    let mut attempt = 0;
    let mut last_err = None;
    while attempt < MAX_ATTEMPTS {
        let draw = sample_spherical_from(cfg, draw_index, attempt)?;
        let eigs = eigenvalues(&draw.y)?;
        let (lambdas, pair_residual, real_axis) = match cfg.beta {
            Beta::Quaternion => match pair_reduce(&eigs, cfg.pair_tol) {
                Ok(p) => (p.representatives, p.max_residual, p.real_axis),
                Err(e) => {
                    log::debug!("draw {draw_index}: attempt {} discarded: {e}", draw.attempt);
                    last_err = Some(e);
                    attempt = draw.attempt + 1;
                    continue;
                }
            },
            _ => {
                let mut all = eigs;
                all.sort_by(by_re_im);
                let real = all.iter().filter(|l| l.im == 0.0).count();
                (all, 0.0, real)
            }
        };
        let ws = lambdas.iter().map(|&l| flt_lambda_to_w(l)).collect::<Result<Vec<_>>>()?;
        return Ok(SpectrumSample {
            draw_index,
            beta: cfg.beta,
            n: cfg.n,
            seed_used: draw.seed_used,
            lambdas,
            ws,
            resample_count: draw.attempt,
            cond_estimate: draw.cond_estimate,
            pair_residual,
            real_axis,
        });
    }
    Err(last_err.unwrap_or(Error::SolveFailure {
        attempts: MAX_ATTEMPTS,
        cond: f64::NAN,
    }))
}
