//! Independent oracles for the Hankel eigenstructure: power iteration with
//! deflation for the eigenvalues, brute-force grids for the reconstruction
//! bounds, and a trapezoid quadrature for the average-error identity.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use slip_core::spectral::{build_hankel, spectral_filter_bank, top_eigenpairs};

/// Power iteration with deflation: after extracting an eigenpair, the
/// operator is updated to H - sigma v v^T. Independent of the library's
/// eigensolver path.
fn power_iteration_eigenvalues(h: &DMatrix<f64>, count: usize) -> Vec<f64> {
    let n = h.nrows();
    let mut deflated = h.clone();
    let mut out = Vec::with_capacity(count);
    for j in 0..count {
        // deterministic start vector that is generic for this matrix family
        let mut v = DVector::from_fn(n, |i, _| 1.0 / ((i + j + 1) as f64));
        v /= v.norm();
        let mut lambda = 0.0;
        for _ in 0..20_000 {
            let w = &deflated * &v;
            let norm = w.norm();
            if norm < 1e-300 {
                break;
            }
            let next = w / norm;
            let next_lambda = next.dot(&(&deflated * &next));
            let delta = (next_lambda - lambda).abs();
            v = next;
            lambda = next_lambda;
            if delta <= 1e-13 * lambda.abs().max(1e-300) {
                break;
            }
        }
        out.push(lambda);
        deflated -= lambda * &v * v.transpose();
    }
    out
}

#[test]
fn top_eigenvalues_match_power_iteration_oracle_to_six_digits() {
    let t = 100;
    let h = build_hankel(t);
    let oracle = power_iteration_eigenvalues(&h, 10);
    let bank = spectral_filter_bank(t, 10).unwrap();
    for j in 0..10 {
        let rel = (bank.eigenvalues()[j] - oracle[j]).abs() / oracle[j].abs();
        assert!(
            rel < 5e-7,
            "sigma_{}: library {} vs oracle {} (rel {rel:e})",
            j + 1,
            bank.eigenvalues()[j],
            oracle[j]
        );
    }
}

#[test]
fn hankel_is_psd_and_sigma1_below_log_t_plus_one() {
    for t in [10usize, 50, 200, 500] {
        let h = build_hankel(t);
        let eig = h.symmetric_eigen().eigenvalues;
        let max = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min >= -1e-10 * max, "T = {t}: min eigenvalue {min:e}");
        assert!(
            max <= (t as f64).ln() + 1.0,
            "T = {t}: sigma_1 = {max} exceeds log T + 1"
        );
    }
}

#[test]
fn decay_bound_holds_with_positive_margin_at_t200() {
    let bank = spectral_filter_bank(200, 30).unwrap();
    let report = bank.verify_spectral_decay().unwrap();
    assert!(!report.rows.is_empty());
    for row in &report.rows {
        assert!(row.margin > 0.0, "index {}: margin {}", row.index, row.margin);
    }
}

#[test]
fn decay_bound_value_matches_direct_arithmetic_at_t1000_j10() {
    // bound from the printed constants: 1168 sigma_1 exp(pi^2/(4 log T))^{-2j}
    let bank = spectral_filter_bank(1000, 30).unwrap();
    let report = bank.verify_spectral_decay().unwrap();
    let row = report.rows.iter().find(|r| r.j == 10).unwrap();
    assert_eq!(row.index, 22);
    let sigma1 = bank.eigenvalues()[0];
    let expect = 1168.0 * sigma1
        * (std::f64::consts::PI.powi(2) / (4.0 * 1000.0_f64.ln()))
            .exp()
            .powi(-20);
    assert!((row.bound - expect).abs() <= 1e-12 * expect);
    assert!(row.sigma <= row.bound);
}

#[test]
fn reconstruction_error_is_non_increasing_in_k_on_grid() {
    let t = 100;
    let banks: Vec<_> = (1..=15)
        .map(|k| spectral_filter_bank(t, k).unwrap())
        .collect();
    for gi in 0..=200 {
        let lambda = -1.0 + 2.0 * gi as f64 / 200.0;
        let mut prev = f64::INFINITY;
        for bank in &banks {
            let e = bank.reconstruction_error(lambda).unwrap();
            assert!(
                e <= prev + 1e-10,
                "error increased at lambda = {lambda}, k = {}",
                bank.filter_count()
            );
            prev = e;
        }
    }
}

#[test]
fn uniform_reconstruction_bound_on_fine_grid() {
    // sup over the lambda grid vs 43 T sqrt(log T) exp(-pi^2 k / (8 log T))
    let t = 100;
    let logt = (t as f64).ln();
    for k in [5usize, 10, 15] {
        let bank = spectral_filter_bank(t, k).unwrap();
        let mut sup: f64 = 0.0;
        for gi in 0..=2000 {
            let lambda = -1.0 + 2.0 * gi as f64 / 2000.0;
            sup = sup.max(bank.reconstruction_error(lambda).unwrap());
        }
        let bound = 43.0 * t as f64 * logt.sqrt()
            * (-std::f64::consts::PI.powi(2) * k as f64 / (8.0 * logt)).exp();
        assert!(sup <= bound, "k = {k}: sup {sup:e} > bound {bound:e}");
    }
}

#[test]
fn average_error_identity_against_trapezoid_quadrature() {
    // (1/2) integral of the reconstruction error over [-1, 1] equals the
    // eigenvalue tail sum; 4001-point trapezoid rule, 1% relative.
    for (t, k) in [(40usize, 4usize), (80, 6), (120, 8)] {
        let full = top_eigenpairs(&build_hankel(t), t).unwrap();
        let bank = spectral_filter_bank(t, k).unwrap();
        let n = 4001;
        let mut integral = 0.0;
        for gi in 0..n {
            let lambda = -1.0 + 2.0 * gi as f64 / (n - 1) as f64;
            let w = if gi == 0 || gi == n - 1 { 0.5 } else { 1.0 };
            integral += w * bank.reconstruction_error(lambda).unwrap();
        }
        integral *= 2.0 / (n - 1) as f64;
        integral *= 0.5;
        let tail: f64 = full.eigenvalues()[k..].iter().sum();
        let rel = (integral - tail).abs() / tail;
        assert!(rel <= 0.01, "T = {t}, k = {k}: relative gap {rel:e}");
    }
}

#[test]
fn eigenvalue_sequence_is_strictly_positive_for_leading_indices() {
    let bank = spectral_filter_bank(64, 16).unwrap();
    for (j, s) in bank.eigenvalues().iter().enumerate() {
        assert!(*s > 0.0, "sigma_{} = {s}", j + 1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // eigendecomposition invariants on random PSD matrices: the full bank is
    // orthonormal, reproduces the matrix action, and the eigenvalues sum to
    // the trace
    #[test]
    fn full_eigendecomposition_of_random_psd_matrices(
        n in 2usize..=10,
        seed in 0u64..500,
    ) {
        let mut rng = slip_core::rng::rng_from_seed(seed);
        let l = DMatrix::from_fn(n, n, |_, _| {
            slip_core::rng::standard_normal_vector(&mut rng, 1)[0]
        });
        let h = &l * l.transpose();
        let bank = top_eigenpairs(&h, n).unwrap();
        let trace: f64 = (0..n).map(|i| h[(i, i)]).sum();
        let sum: f64 = bank.eigenvalues().iter().sum();
        prop_assert!((sum - trace).abs() <= 1e-10 * (1.0 + trace.abs()));
        for j in 0..n {
            let phi = DVector::from_column_slice(bank.filter_slice(j));
            let r = (&h * &phi - bank.eigenvalues()[j] * &phi).norm();
            prop_assert!(r <= 1e-10 * (1.0 + bank.eigenvalues()[0]));
        }
    }
}
