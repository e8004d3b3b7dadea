use num_complex::Complex64;
use proptest::prelude::*;
use qsphere::analytics::kernel::{correlation_matrix, rho_n_points};
use qsphere::analytics::{density, kernel_d, kernel_i, kernel_s_integral, kernel_s_sum, rho_n, EnsembleConstants, KernelPoint};
use qsphere::harness::{compare_to_theory, radial_histogram, run_batch};
use qsphere::numerics::pfaffian::{pfaffian, SkewMatrix};
use qsphere::numerics::quadrature::Tolerance;
use qsphere::quaternion::ComplexBlockMatrix;
use qsphere::sampler::{eigenvalues, pair_reduce, run_draw, sample_spherical, Beta, EnsembleConfig};

fn disk_point() -> impl Strategy<Value = Complex64> {
    (0.0..0.97f64, -3.14..3.14f64).prop_map(|(r, t)| Complex64::from_polar(r.sqrt(), t))
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).norm() / b.norm()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kernel_sum_matches_integral(n in 1usize..=50, w in disk_point(), z in disk_point()) {
        let c = EnsembleConstants::new(n).unwrap();
        let s = kernel_s_sum(w, z, &c).unwrap();
        let si = kernel_s_integral(w, z, &c, Tolerance::new(0.0, 1e-12)).unwrap();
        prop_assert!(rel(s, si) <= 1e-8, "N={} {} vs {}", n, s, si);
    }

    #[test]
    fn kernel_is_hermitian_and_d_i_antisymmetric(n in 1usize..=30, w in disk_point(), z in disk_point()) {
        let c = EnsembleConstants::new(n).unwrap();
        let s = kernel_s_sum(w, z, &c).unwrap();
        let s_rev = kernel_s_sum(z, w, &c).unwrap();
        prop_assert!(rel(s_rev, s.conj()) <= 1e-10);
        let scale = s.norm().max(kernel_d(w, z, &c).unwrap().norm()).max(1e-300);
        let d_sum = kernel_d(w, z, &c).unwrap() + kernel_d(z, w, &c).unwrap();
        let i_sum = kernel_i(w, z, &c).unwrap() + kernel_i(z, w, &c).unwrap();
        prop_assert!(d_sum.norm() <= 1e-10 * scale);
        prop_assert!(i_sum.norm() <= 1e-10 * scale);
    }

    #[test]
    fn assembled_kernel_is_skew(n in 3usize..=20, ws in prop::collection::vec(disk_point(), 1..=3)) {
        let c = EnsembleConstants::new(n).unwrap();
        let pts: Vec<KernelPoint> = ws.iter().map(|&w| KernelPoint::new(w, &c).unwrap()).collect();
        prop_assert!(correlation_matrix(&pts, &c).is_ok());
    }

    #[test]
    fn rho_n_is_real_and_gauge_free(
        n in 3usize..=20,
        ws in prop::collection::vec(disk_point(), 1..=3),
        mask in 1u32..8,
    ) {
        let c = EnsembleConstants::new(n).unwrap();
        let pts: Vec<KernelPoint> = ws.iter().map(|&w| KernelPoint::new(w, &c).unwrap()).collect();
        let scale: f64 = ws.iter().map(|&w| density(w, &c).unwrap()).product();
        let base = rho_n_points(&pts, &c).unwrap();
        prop_assert!(base.im.abs() <= 1e-8 * scale);
        let alt: Vec<KernelPoint> = pts.iter().enumerate()
            .map(|(k, p)| if mask >> k & 1 == 1 { p.flipped() } else { *p })
            .collect();
        prop_assert!((rho_n_points(&alt, &c).unwrap() - base).norm() <= 1e-8 * scale);
    }

    #[test]
    fn one_point_function_is_density(n in 1usize..=60, w in disk_point()) {
        let c = EnsembleConstants::new(n).unwrap();
        let d = density(w, &c).unwrap();
        prop_assert!((rho_n(&[w], &c).unwrap() - d).abs() <= 1e-10 * d);
    }

    #[test]
    fn pfaffian_squares_to_determinant(dim in 1usize..=8, seed in any::<u64>()) {
        let dim = 2 * dim;
        let mut state = seed;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let m = SkewMatrix::from_upper(dim, |_, _| Complex64::new(next(), next()));
        let pf = pfaffian(&m);
        let det = ComplexBlockMatrix::new(dim, m.as_slice().to_vec()).unwrap().determinant();
        prop_assert!((pf * pf - det).norm() <= 1e-8 * det.norm());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn draws_pair_and_solve(n in 1usize..=16, seed in any::<u64>(), idx in 0u64..1000) {
        let cfg = EnsembleConfig::new(Beta::Quaternion, n, 1, seed);
        let d = sample_spherical(&cfg, idx).unwrap();
        prop_assert!(d.solve_residual() <= 1e-9);
        let eigs = eigenvalues(&d.y).unwrap();
        let scale = eigs.iter().map(|l| l.norm()).fold(0.0, f64::max);
        let p = pair_reduce(&eigs, 1e-6).unwrap();
        prop_assert_eq!(p.representatives.len(), n);
        prop_assert!(p.max_abs_residual <= 1e-8 * scale);
        let s1 = run_draw(&cfg, idx).unwrap();
        let s2 = run_draw(&cfg, idx).unwrap();
        prop_assert_eq!(&s1, &s2);
        prop_assert!(s1.ws.iter().all(|w| w.norm() <= 1.0 + 1e-9));
    }

    #[test]
    fn histogram_conserves_counts(n in 1usize..=8, count in 1usize..=20, bins in 5usize..=30, seed in any::<u64>()) {
        let cfg = EnsembleConfig::new(Beta::Quaternion, n, count, seed);
        let batch = run_batch(&cfg).unwrap();
        let h = radial_histogram(&batch.samples, bins).unwrap();
        prop_assert_eq!(h.bins.iter().map(|b| b.count).sum::<u64>(), (n * count) as u64);
        let total: f64 = (0..bins).map(|k| h.empirical_density_over_n(k) * h.bins[k].area()).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }
}

#[test]
fn comparison_is_deterministic() {
    let cfg = EnsembleConfig::new(Beta::Quaternion, 6, 64, 99);
    let report = || compare_to_theory(&radial_histogram(&run_batch(&cfg).unwrap().samples, 8).unwrap(), 6).unwrap();
    assert_eq!(report(), report());
}
