//! Relaxed-parameter exactness, covariance oracles, and small-ball probes.

use nalgebra::{dmatrix, DMatrix};
use slip_core::diagnostics::{
    bmsb_empirical, check_filter_condition, conditional_feature_covariance, filter_quadratic,
    relaxation_bias, relaxed_parameters,
};
use slip_core::features::{compute_features, SignalHistory};
use slip_core::harness::preset;
use slip_core::harness::verify::monte_carlo_gamma;
use slip_core::lds::{
    kalman_predict_recursive, simulate, solve_dare, InputSpec, KalmanSolution, LdsParams,
};
use slip_core::spectral::spectral_filter_bank;

fn scalar_system(a: f64, c: f64, q: f64, r: f64) -> (LdsParams, KalmanSolution) {
    let params = LdsParams::without_inputs(dmatrix![a], dmatrix![c], dmatrix![q], dmatrix![r])
        .unwrap();
    let sol = solve_dare(&params, 1e-14, 2_000_000).unwrap();
    (params, sol)
}

#[test]
fn full_basis_makes_the_relaxed_predictor_exact() {
    // k = T on a T = 8 toy: the projection is the identity, so
    // Theta~ f_t = m_t for every step (exact-projection oracle).
    for seed in 0..5u64 {
        let a = 0.15 * seed as f64 + 0.1;
        let (params, sol) = scalar_system(a, 1.0, 0.5, 0.8);
        let horizon = 8;
        let bank = spectral_filter_bank(horizon, horizon).unwrap();
        let rel = relaxed_parameters(&params, &sol, &bank).unwrap();
        let traj = simulate(&params, &sol, horizon, &InputSpec::None, 33 + seed).unwrap();
        let (oracle, _) = kalman_predict_recursive(&params, &sol, &traj).unwrap();
        let empty = SignalHistory::new(0);
        let ys = SignalHistory::from_vectors(1, &traj.observations).unwrap();
        for t in 1..=horizon {
            let f = compute_features(&bank, &empty, &ys, t).unwrap();
            let bias = relaxation_bias(&rel, &f, &oracle[t - 1]).unwrap();
            assert!(bias <= 1e-10, "seed {seed}, t = {t}: bias {bias:e}");
        }
    }
}

#[test]
fn relaxation_bias_decreases_geometrically_in_filter_count() {
    let cfg = preset("fig2-system2").unwrap();
    let sol = solve_dare(&cfg.system, 1e-12, 1_000_000).unwrap();
    let horizon = 300;
    let t_eval = 150;
    let ks = [4usize, 8, 12, 16, 20, 24];
    let banks: Vec<_> = ks
        .iter()
        .map(|&k| spectral_filter_bank(horizon, k).unwrap())
        .collect();
    let rels: Vec<_> = banks
        .iter()
        .map(|b| relaxed_parameters(&cfg.system, &sol, b).unwrap())
        .collect();
    let empty = SignalHistory::new(0);
    let trials = 10;
    let mut means = vec![0.0f64; ks.len()];
    for trial in 0..trials {
        let traj = simulate(&cfg.system, &sol, horizon, &InputSpec::None, 600 + trial).unwrap();
        let (oracle, _) = kalman_predict_recursive(&cfg.system, &sol, &traj).unwrap();
        let ys = SignalHistory::from_vectors(1, &traj.observations).unwrap();
        for (ki, bank) in banks.iter().enumerate() {
            let f = compute_features(bank, &empty, &ys, t_eval).unwrap();
            means[ki] += relaxation_bias(&rels[ki], &f, &oracle[t_eval - 1]).unwrap();
        }
    }
    for m in means.iter_mut() {
        *m /= trials as f64;
    }
    for w in means.windows(2) {
        assert!(
            w[1] <= 0.5 * w[0],
            "bias did not decrease geometrically: {means:?}"
        );
    }
}

#[test]
fn complex_closed_loop_spectrum_is_rejected() {
    // the third benchmark system has a complex G spectrum
    let cfg = preset("fig2-system3").unwrap();
    let sol = solve_dare(&cfg.system, 1e-12, 1_000_000).unwrap();
    let bank = spectral_filter_bank(16, 4).unwrap();
    let err = relaxed_parameters(&cfg.system, &sol, &bank).unwrap_err();
    assert!(matches!(
        err,
        slip_core::error::DiagnosticsError::ComplexSpectrum(_)
    ));
}

#[test]
fn gamma_is_monotone_in_the_psd_cone() {
    let cfg = preset("fig2-system2").unwrap();
    let bank = spectral_filter_bank(120, 8).unwrap();
    let mut prev = conditional_feature_covariance(&cfg.system, &bank, 1).unwrap();
    for i in 2..=51 {
        let cur = conditional_feature_covariance(&cfg.system, &bank, i).unwrap();
        let min_eig = (&cur - &prev)
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        assert!(
            min_eig >= -1e-10 * cur.norm(),
            "i = {i}: min eigenvalue {min_eig:e}"
        );
        prev = cur;
    }
}

#[test]
fn gamma_closed_form_matches_monte_carlo_at_two_conditioning_times() {
    // the closed form carries no conditioning time; Monte-Carlo estimates
    // from two different pasts must both match it
    let (params, sol) = scalar_system(0.7, 1.0, 0.3, 0.4);
    let bank = spectral_filter_bank(60, 2).unwrap();
    let gamma2 = conditional_feature_covariance(&params, &bank, 2).unwrap();
    for t in [15usize, 30] {
        let mc = monte_carlo_gamma(&params, &sol, &bank, 2, t, 10_000, 777 + t as u64);
        let rel = (&mc - &gamma2).norm() / gamma2.norm();
        assert!(rel <= 0.05, "t = {t}: Monte-Carlo gap {rel:e}");
    }
}

#[test]
fn omega_is_symmetric_psd_for_assorted_inputs() {
    let bank = spectral_filter_bank(40, 4).unwrap();
    for (d, scale) in [(1usize, 1.0), (2, 0.8), (3, -0.5)] {
        let a = DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                scale
            } else if i + 1 == j {
                0.3
            } else {
                0.0
            }
        });
        let omega = filter_quadratic(&bank, &a, 12).unwrap();
        assert!((&omega - omega.transpose()).norm() < 1e-12);
        let min_eig = omega
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        assert!(min_eig >= -1e-10, "d = {d}: min eigenvalue {min_eig:e}");
    }
}

#[test]
fn filter_condition_reports_margins_for_spectral_filters() {
    // scan with the long-memory system's transition matrix; report-only,
    // so just check the scan runs and the rows are well-formed
    let cfg = preset("fig2-system2").unwrap();
    let bank = spectral_filter_bank(300, 6).unwrap();
    let report = check_filter_condition(&bank, &cfg.system.a, 12, 20..=200).unwrap();
    assert_eq!(report.rows.len(), 181);
    assert!(report.rows.iter().all(|r| r.t >= 20 && r.trace.is_finite()));
}

#[test]
fn filter_condition_holds_for_basis_filters_past_the_threshold() {
    // basis filters with s > 2(k+1) and t of order k^2 log k
    let k = 4;
    let bank = slip_core::spectral::FilterBank::standard_basis(100, k).unwrap();
    let s = 2 * (k + 1) + 2;
    let a = dmatrix![1.0];
    let t0 = ((k * k) as f64 * (k as f64).ln()).ceil() as usize;
    let report = check_filter_condition(&bank, &a, s, t0..=80).unwrap();
    assert!(report.all_psd(), "rows: {:?}", report.rows.last());
}

#[test]
fn small_ball_per_step_probability_matches_gaussian_toy_bound() {
    // scalar Gaussian toy: for i >= s/2 the conditional variance dominates
    // the threshold, so P(|omega^T f| >= threshold) >= 0.3 up to MC error
    let (params, sol) = scalar_system(0.7, 1.0, 0.3, 0.4);
    let bank = spectral_filter_bank(80, 1).unwrap();
    let s = 6;
    let report = bmsb_empirical(&params, &sol, &bank, s, 40, 4000, 1, 99).unwrap();
    let dir = &report.per_direction[0];
    let mc_err = 3.0 / (4000f64).sqrt();
    for i in (s / 2)..s {
        assert!(
            dir.per_step[i] >= 0.3 - mc_err,
            "i = {}: per-step probability {}",
            i + 1,
            dir.per_step[i]
        );
    }
}

#[test]
fn small_ball_block_estimate_clears_the_theory_level() {
    let cfg = preset("fig2-system2").unwrap();
    let sol = solve_dare(&cfg.system, 1e-12, 1_000_000).unwrap();
    let bank = spectral_filter_bank(160, 12).unwrap();
    let report = bmsb_empirical(&cfg.system, &sol, &bank, 10, 80, 800, 20, 5).unwrap();
    let (est, se) = report.min_estimate();
    assert!(est >= 0.15 - 3.0 * se, "estimate {est}, stderr {se}");
}

#[test]
fn bmsb_rejects_systems_with_inputs() {
    let params = LdsParams::new(
        dmatrix![0.5],
        dmatrix![1.0],
        dmatrix![1.0],
        dmatrix![0.0],
        dmatrix![0.1],
        dmatrix![0.1],
    )
    .unwrap();
    let sol = solve_dare(&params, 1e-12, 100_000).unwrap();
    let bank = spectral_filter_bank(40, 2).unwrap();
    let err = bmsb_empirical(&params, &sol, &bank, 4, 10, 100, 2, 0).unwrap_err();
    assert!(matches!(
        err,
        slip_core::error::DiagnosticsError::Unsupported(_)
    ));
}
