//! Batch runs, radial histograms and their comparison with the finite-`N`
//! density.

use crate::analytics::{density_limit, density_radial, EnsembleConstants};
use crate::error::{Error, Result};
use crate::numerics::quadrature::{try_integrate_1d, Tolerance};
use crate::sampler::{run_draw, EnsembleConfig, SpectrumSample};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::atomic::{AtomicUsize, Ordering};

/// Largest tolerated fraction of failed draws in a batch.
pub const MAX_FAILURE_RATE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    /// Successful draws in `draw_index` order.
    pub samples: Vec<SpectrumSample>,
    pub failures: Vec<(u64, Error)>,
}

impl Batch {
    pub fn total_resamples(&self) -> u64 {
        self.samples.iter().map(|s| u64::from(s.resample_count)).sum()
    }
}

/// Runs `cfg.count` draws in parallel. Results depend only on the config,
/// not on how rayon schedules the work.
pub fn run_batch(cfg: &EnsembleConfig) -> Result<Batch> {
    cfg.validate()?;
    let done = AtomicUsize::new(0);
    let step = (cfg.count / 10).max(1);
    let results: Vec<(u64, Result<SpectrumSample>)> = (0..cfg.count as u64)
        .into_par_iter()
        .map(|i| {
            let r = run_draw(cfg, i);
            let k = done.fetch_add(1, Ordering::Relaxed) + 1;
            if k % step == 0 {
                log::info!("{k}/{} draws", cfg.count);
            }
            (i, r)
        })
        .collect();
    let mut samples = Vec::with_capacity(cfg.count);
    let mut failures = Vec::new();
    for (i, r) in results {
        match r {
            Ok(s) => samples.push(s),
            Err(e) => {
                log::warn!("draw {i} failed: {e}");
                failures.push((i, e));
            }
        }
    }
    if failures.len() as f64 > MAX_FAILURE_RATE * cfg.count as f64 {
        return Err(Error::BatchAborted {
            failed: failures.len(),
            total: cfg.count,
        });
    }
    let batch = Batch { samples, failures };
    log::info!(
        "batch done: {} draws, {} failed, {} resamples",
        batch.samples.len(),
        batch.failures.len(),
        batch.total_resamples()
    );
    Ok(batch)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialBin {
    pub r_lo: f64,
    pub r_hi: f64,
    pub count: u64,
}

impl RadialBin {
    pub fn area(&self) -> f64 {
        PI * (self.r_hi * self.r_hi - self.r_lo * self.r_lo)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialHistogram {
    pub bins: Vec<RadialBin>,
    pub total_eigs: u64,
    pub n: usize,
    pub draws: usize,
}

impl RadialHistogram {
    /// `count / (draws · area · N)`; sums against the bin areas to 1.
    pub fn empirical_density_over_n(&self, bin: usize) -> f64 {
        let b = &self.bins[bin];
        b.count as f64 / (self.draws as f64 * b.area() * self.n as f64)
    }
}

/// Equal-width bins of `|w|` on `[0, 1]`. Points that sit past the unit
/// circle by rounding go into the last bin.
pub fn radial_histogram(samples: &[SpectrumSample], n_bins: usize) -> Result<RadialHistogram> {
    if n_bins < 5 {
        return Err(Error::Config(format!("need at least 5 bins, got {n_bins}")));
    }
    let n = samples.first().map_or(0, |s| s.n);
    if let Some(s) = samples.iter().find(|s| s.n != n) {
        return Err(Error::Config(format!("mixed sizes in one histogram: {} and {n}", s.n)));
    }
    let width = 1.0 / n_bins as f64;
    let mut bins: Vec<RadialBin> = (0..n_bins)
        .map(|k| RadialBin {
            r_lo: k as f64 * width,
            r_hi: if k + 1 == n_bins { 1.0 } else { (k + 1) as f64 * width },
            count: 0,
        })
        .collect();
    let mut total = 0;
    for w in samples.iter().flat_map(|s| &s.ws) {
        let k = ((w.norm() * n_bins as f64) as usize).min(n_bins - 1);
        bins[k].count += 1;
        total += 1;
    }
    Ok(RadialHistogram {
        bins,
        total_eigs: total,
        n,
        draws: samples.len(),
    })
}

/// Which radial density the histogram is tested against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theory {
    FiniteN,
    /// The large-`N` form, used as a negative control.
    Limit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinComparison {
    pub r_lo: f64,
    pub r_hi: f64,
    pub count: u64,
    pub expected: f64,
    pub empirical: f64,
    pub theory: f64,
    pub std_error: f64,
    pub z_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub n: usize,
    pub draws: usize,
    pub bins: Vec<BinComparison>,
    pub sup_z: f64,
    pub frac_within_3se: f64,
    pub chi2: f64,
    pub dof: usize,
}

impl ComparisonReport {
    pub fn chi2_per_dof(&self) -> f64 {
        self.chi2 / self.dof as f64
    }
}

pub fn compare_to_theory(hist: &RadialHistogram, n: usize) -> Result<ComparisonReport> {
    compare_to_theory_with(hist, n, Theory::FiniteN)
}

/// Bin-by-bin test of the histogram. The theory value of a bin is its exact
/// mass `2π∫ rρ dr` over `N · area`, so steep bins near `r = 1` carry no
/// midpoint bias. Standard errors are Poisson in the expected count.
pub fn compare_to_theory_with(hist: &RadialHistogram, n: usize, theory: Theory) -> Result<ComparisonReport> {
    if hist.n != n {
        return Err(Error::Config(format!("histogram is for N={}, asked to compare with N={n}", hist.n)));
    }
    if hist.draws == 0 || hist.total_eigs == 0 {
        return Err(Error::Config("empty histogram".into()));
    }
    let c = EnsembleConstants::new(n)?;
    let tol = Tolerance::new(0.0, 1e-12);
    let draws = hist.draws as f64;
    let nf = n as f64;
    let mut bins = Vec::with_capacity(hist.bins.len());
    let mut chi2 = 0.0;
    let mut within = 0;
    let mut sup_z: f64 = 0.0;
    for (k, b) in hist.bins.iter().enumerate() {
        let radial = |r: f64| -> Result<f64> {
            Ok(2.0
                * PI
                * r
                * match theory {
                    Theory::FiniteN => density_radial(r, &c)?,
                    Theory::Limit => density_limit(Complex64::new(r, 0.0), n),
                })
        };
        let mass = try_integrate_1d(radial, b.r_lo, b.r_hi, tol)?.value;
        let area = b.area();
        let expected = draws * mass;
        let scale = draws * area * nf;
        let std_count = expected.sqrt();
        let z = if std_count > 0.0 {
            (b.count as f64 - expected) / std_count
        } else if b.count == 0 {
            0.0
        } else {
            f64::INFINITY
        };
        chi2 += z * z;
        if z.abs() <= 3.0 {
            within += 1;
        }
        sup_z = sup_z.max(z.abs());
        bins.push(BinComparison {
            r_lo: b.r_lo,
            r_hi: b.r_hi,
            count: b.count,
            expected,
            empirical: hist.empirical_density_over_n(k),
            theory: mass / (nf * area),
            std_error: std_count / scale,
            z_score: z,
        });
    }
    let nb = hist.bins.len();
    Ok(ComparisonReport {
        n,
        draws: hist.draws,
        bins,
        sup_z,
        frac_within_3se: within as f64 / nb as f64,
        chi2,
        // each draw contributes exactly N points, which fixes the total
        dof: nb - 1,
    })
}

/// Pearson χ² of `arg w` against a uniform law on `n_bins` equal sectors of
/// `(-π, π]`. Returns `(chi2, dof)`.
pub fn angular_chi2(samples: &[SpectrumSample], n_bins: usize) -> (f64, usize) {
    let mut counts = vec![0u64; n_bins];
    let mut total = 0u64;
    for w in samples.iter().flat_map(|s| &s.ws) {
        let t = (w.arg() + PI) / (2.0 * PI);
        let k = ((t * n_bins as f64) as usize).min(n_bins - 1);
        counts[k] += 1;
        total += 1;
    }
    let expected = total as f64 / n_bins as f64;
    let chi2 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    (chi2, n_bins - 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    /// `sup_{r ≤ 0.8} |ρ/N - 2/(π(1+r²)²)|` on the grid.
    pub sup_deviation: f64,
    pub r_at_sup: f64,
}

/// Points in the uniform grid on `[0, 0.8]` used by [`convergence_sweep`].
pub const SWEEP_GRID: usize = 801;

pub fn convergence_sweep(n_list: &[usize]) -> Result<Vec<SweepRow>> {
    n_list
        .iter()
        .map(|&n| {
            let c = EnsembleConstants::new(n)?;
            let nf = n as f64;
            let mut row = SweepRow {
                n,
                sup_deviation: 0.0,
                r_at_sup: 0.0,
            };
            for k in 0..SWEEP_GRID {
                let r = 0.8 * k as f64 / (SWEEP_GRID - 1) as f64;
                let dev = (density_radial(r, &c)? - density_limit(Complex64::new(r, 0.0), n)).abs() / nf;
                if dev > row.sup_deviation {
                    row.sup_deviation = dev;
                    row.r_at_sup = r;
                }
            }
            Ok(row)
        })
        .collect()
}

pub fn is_strictly_decreasing(rows: &[SweepRow]) -> bool {
    rows.windows(2).all(|p| p[1].sup_deviation < p[0].sup_deviation)
}
