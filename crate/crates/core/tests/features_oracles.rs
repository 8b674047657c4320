//! Feature construction against the literal Kronecker-product evaluation
//! and the structural properties (basis specialization, linearity).

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use slip_core::features::{compute_features, SignalHistory};
use slip_core::spectral::{spectral_filter_bank, FilterBank};

/// Literal (Psi_{t-1} (x) I_dim) applied to the stacked history: the oracle
/// route for the blockwise sums.
fn kronecker_oracle(
    bank: &FilterBank,
    history: &[DVector<f64>],
    t: usize,
    dim: usize,
) -> DVector<f64> {
    let k = bank.filter_count();
    // Psi_{t-1} = [psi_{t-1}, ..., psi_1], k x (t-1)
    let mut psi_mat = DMatrix::zeros(k, t - 1);
    for col in 0..(t - 1) {
        let psi = bank.psi_slice(t - 1 - col);
        for j in 0..k {
            psi_mat[(j, col)] = psi[j];
        }
    }
    // Kronecker with I_dim
    let mut big = DMatrix::zeros(k * dim, (t - 1) * dim);
    for r in 0..k {
        for c in 0..(t - 1) {
            for d in 0..dim {
                big[(r * dim + d, c * dim + d)] = psi_mat[(r, c)];
            }
        }
    }
    let mut stacked = DVector::zeros((t - 1) * dim);
    for (i, v) in history[..t - 1].iter().enumerate() {
        stacked.rows_mut(i * dim, dim).copy_from(v);
    }
    &big * stacked
}

fn random_history(dim: usize, steps: usize, seed: u64) -> Vec<DVector<f64>> {
    let mut rng = slip_core::rng::rng_from_seed(seed);
    (0..steps)
        .map(|_| slip_core::rng::standard_normal_vector(&mut rng, dim))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn blockwise_sums_equal_kronecker_product(
        m in 1usize..=3,
        n in 0usize..=3,
        k in 1usize..=4,
        t in 2usize..=12,
        seed in 0u64..1000,
    ) {
        let bank = spectral_filter_bank(12, k).unwrap();
        let ys = random_history(m, t - 1, seed);
        let xs = random_history(n, t, seed + 1);
        let yh = SignalHistory::from_vectors(m, &ys).unwrap();
        let xh = SignalHistory::from_vectors(n, &xs).unwrap();
        let f = compute_features(&bank, &xh, &yh, t).unwrap();

        let y_oracle = kronecker_oracle(&bank, &ys, t, m);
        for i in 0..m * k {
            prop_assert!((f.values[i] - y_oracle[i]).abs() <= 1e-12);
        }
        if n > 0 {
            let x_oracle = kronecker_oracle(&bank, &xs, t, n);
            for i in 0..n * k {
                prop_assert!((f.values[m * k + i] - x_oracle[i]).abs() <= 1e-12);
            }
            for i in 0..n {
                prop_assert_eq!(f.values[m * k + n * k + i], xs[t - 1][i]);
            }
        }
    }

    #[test]
    fn features_are_linear_in_history(
        t in 2usize..=10,
        seed in 0u64..1000,
    ) {
        let (m, k) = (2usize, 3usize);
        let bank = spectral_filter_bank(10, k).unwrap();
        let ya = random_history(m, t - 1, seed);
        let yb = random_history(m, t - 1, seed + 7);
        let xs = SignalHistory::new(0);
        let sum: Vec<DVector<f64>> = ya.iter().zip(yb.iter()).map(|(a, b)| a + b).collect();

        let fa = compute_features(&bank, &xs, &SignalHistory::from_vectors(m, &ya).unwrap(), t).unwrap();
        let fb = compute_features(&bank, &xs, &SignalHistory::from_vectors(m, &yb).unwrap(), t).unwrap();
        let fs = compute_features(&bank, &xs, &SignalHistory::from_vectors(m, &sum).unwrap(), t).unwrap();
        let gap = (&fa.values + &fb.values - &fs.values).amax();
        prop_assert!(gap <= 1e-12);
    }

    #[test]
    fn basis_filters_reproduce_raw_lookback(
        p in 1usize..=5,
        t in 2usize..=14,
        seed in 0u64..1000,
    ) {
        prop_assume!(t <= 14);
        let bank = FilterBank::standard_basis(14, p).unwrap();
        let ys = random_history(1, t - 1, seed);
        let yh = SignalHistory::from_vectors(1, &ys).unwrap();
        let xs = SignalHistory::new(0);
        let f = compute_features(&bank, &xs, &yh, t).unwrap();
        for j in 1..=p {
            let expect = if t > j { ys[t - j - 1][0] } else { 0.0 };
            prop_assert_eq!(f.values[j - 1], expect);
        }
    }
}

#[test]
fn scalar_kronecker_example_with_named_coefficients() {
    // m = 1, n = 0, k = 1, t = 4, phi(1:3) = (a, b, c), y = (y1, y2, y3):
    // f_4 = a y3 + b y2 + c y1.
    let bank = spectral_filter_bank(8, 1).unwrap();
    let phi = bank.filter_slice(0);
    let (a, b, c) = (phi[0], phi[1], phi[2]);
    let ys = vec![
        DVector::from_element(1, 2.0),
        DVector::from_element(1, -1.0),
        DVector::from_element(1, 0.5),
    ];
    let yh = SignalHistory::from_vectors(1, &ys).unwrap();
    let xs = SignalHistory::new(0);
    let f = compute_features(&bank, &xs, &yh, 4).unwrap();
    let expect = a * 0.5 + b * (-1.0) + c * 2.0;
    assert!((f.values[0] - expect).abs() < 1e-15);
    let oracle = kronecker_oracle(&bank, &ys, 4, 1);
    assert!((f.values[0] - oracle[0]).abs() < 1e-15);
}
