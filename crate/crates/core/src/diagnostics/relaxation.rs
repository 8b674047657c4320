//! The relaxed (improper) parameter matrix.
//!
//! When the closed-loop matrix G is diagonalizable with real eigenvalues
//! `lambda_i` and eigenvector pairs `(v_i, w_i^T)`, the optimal predictor's
//! coefficient blocks can be projected onto the spectral filters, giving one
//! fixed parameter matrix
//!
//! ```text
//!   Theta~ = [ sum_i <mu(lambda_i), phi_j> C v_i w_i^T K            ]_{j=1..k}
//!          | [ sum_i <mu(lambda_i), phi_j> C v_i w_i^T (B - K D)    ]_{j=1..k}
//!          | D
//! ```
//!
//! applied to the same feature vectors the online learner uses. The inner
//! product pairs the full T-length moment vector `mu(lambda) = [1, lambda,
//! ..., lambda^{T-1}]` with the full filter, while per-step features use the
//! truncated filter prefix; the truncation residual is part of the measured
//! bias, not corrected.

use nalgebra::{DMatrix, DVector};

use crate::error::DiagnosticsError;
use crate::features::FeatureVector;
use crate::lds::{KalmanSolution, LdsParams};
use crate::spectral::FilterBank;

#[derive(Debug, Clone)]
pub struct RelaxedParams {
    /// m x (mk + nk + n), laid out like the feature vector.
    pub theta_tilde: DMatrix<f64>,
    /// Real eigenvalues of G, in the order of the eigenvector columns.
    pub eigenvalues: Vec<f64>,
    /// Right eigenvectors as columns.
    pub right_vectors: DMatrix<f64>,
    /// Left eigenvectors as rows (the inverse of `right_vectors`).
    pub left_vectors: DMatrix<f64>,
}

/// Real spectral decomposition of G; eigenvalues with imaginary parts above
/// the tolerance abort with `ComplexSpectrum`, a failed inversion or residual
/// with `NotDiagonalizable`.
fn real_eigen_decomposition(
    g: &DMatrix<f64>,
) -> Result<(Vec<f64>, DMatrix<f64>, DMatrix<f64>), DiagnosticsError> {
    let d = g.nrows();
    let complex_eigs = g.clone().complex_eigenvalues();
    let rho = complex_eigs
        .iter()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max);
    let max_im = complex_eigs
        .iter()
        .map(|z| z.im.abs())
        .fold(0.0f64, f64::max);
    if max_im > 1e-9 * (rho + 1e-12) {
        return Err(DiagnosticsError::ComplexSpectrum(max_im));
    }
    let mut eigenvalues: Vec<f64> = complex_eigs.iter().map(|z| z.re).collect();
    eigenvalues.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));

    // Group near-equal eigenvalues and take an orthogonal basis of each
    // near-nullspace from the SVD of (G - lambda I).
    let scale = rho.max(1e-12);
    let mut right = DMatrix::zeros(d, d);
    let mut col = 0usize;
    let mut idx = 0usize;
    while idx < d {
        let mut group_end = idx + 1;
        while group_end < d && (eigenvalues[group_end] - eigenvalues[idx]).abs() <= 1e-8 * scale {
            group_end += 1;
        }
        let geo = group_end - idx;
        let lambda = eigenvalues[idx..group_end].iter().sum::<f64>() / geo as f64;
        let shifted = g - DMatrix::identity(d, d) * lambda;
        let svd = shifted.svd(false, true);
        let v_t = svd
            .v_t
            .as_ref()
            .ok_or_else(|| DiagnosticsError::NotDiagonalizable("SVD failed".into()))?;
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| {
            svd.singular_values[a]
                .partial_cmp(&svd.singular_values[b])
                .expect("finite singular values")
        });
        for g_idx in 0..geo {
            let row = order[g_idx];
            for r in 0..d {
                right[(r, col)] = v_t[(row, r)];
            }
            col += 1;
        }
        idx = group_end;
    }

    let left = right
        .clone()
        .try_inverse()
        .ok_or_else(|| DiagnosticsError::NotDiagonalizable("eigenvector matrix is singular".into()))?;

    // Residual checks: G v = lambda v and w^T G = lambda w^T.
    let gnorm = g.norm().max(1e-12);
    for i in 0..d {
        let v = right.column(i);
        let r = (g * v - eigenvalues[i] * v).norm();
        if r > 1e-8 * gnorm {
            return Err(DiagnosticsError::NotDiagonalizable(format!(
                "right eigenvector residual {r:e} at eigenvalue {}",
                eigenvalues[i]
            )));
        }
        let w = left.row(i);
        let rl = (w * g - eigenvalues[i] * w).norm();
        if rl > 1e-6 * gnorm * left.norm() {
            return Err(DiagnosticsError::NotDiagonalizable(format!(
                "left eigenvector residual {rl:e} at eigenvalue {}",
                eigenvalues[i]
            )));
        }
    }
    Ok((eigenvalues, right, left))
}

/// <mu(lambda), phi> = sum_{s=1}^T lambda^{s-1} phi(s).
fn moment_inner_product(lambda: f64, phi: &[f64]) -> f64 {
    let mut acc = 0.0;
    let mut pow = 1.0;
    for &p in phi {
        acc += pow * p;
        pow *= lambda;
    }
    acc
}

/// Assembles the relaxed parameter matrix for the given system and filters.
pub fn relaxed_parameters(
    params: &LdsParams,
    sol: &KalmanSolution,
    bank: &FilterBank,
) -> Result<RelaxedParams, DiagnosticsError> {
    let (eigenvalues, right, left) = real_eigen_decomposition(&sol.g)?;
    let d = params.state_dim();
    let m = params.obs_dim();
    let n = params.input_dim();
    let k = bank.filter_count();

    // Per-eigenvalue rank-one factors C v_i (m x 1) and w_i^T K (1 x m),
    // w_i^T (B - K D) (1 x n).
    let bkd = &params.b - &sol.k * &params.d;
    let mut cv = Vec::with_capacity(d);
    let mut wk = Vec::with_capacity(d);
    let mut wb = Vec::with_capacity(d);
    for i in 0..d {
        let v = right.column(i).into_owned();
        let w = left.row(i).into_owned();
        cv.push(&params.c * v);
        wk.push(&w * &sol.k);
        wb.push(&w * &bkd);
    }

    let l = m * k + n * k + n;
    let mut theta = DMatrix::zeros(m, l);
    for j in 0..k {
        let phi = bank.filter_slice(j);
        for i in 0..d {
            let coeff = moment_inner_product(eigenvalues[i], phi);
            if coeff == 0.0 {
                continue;
            }
            theta
                .view_mut((0, j * m), (m, m))
                .ger(coeff, &cv[i], &wk[i].transpose(), 1.0);
            if n > 0 {
                theta
                    .view_mut((0, m * k + j * n), (m, n))
                    .ger(coeff, &cv[i], &wb[i].transpose(), 1.0);
            }
        }
    }
    if n > 0 {
        theta.view_mut((0, m * k + n * k), (m, n)).copy_from(&params.d);
    }

    Ok(RelaxedParams {
        theta_tilde: theta,
        eigenvalues,
        right_vectors: right,
        left_vectors: left,
    })
}

/// ||Theta~ f_t - m_t||^2.
pub fn relaxation_bias(
    rel: &RelaxedParams,
    f_t: &FeatureVector,
    m_t: &DVector<f64>,
) -> Result<f64, DiagnosticsError> {
    if f_t.values.len() != rel.theta_tilde.ncols() {
        return Err(DiagnosticsError::DimensionMismatch(format!(
            "feature length {} does not match Theta~ width {}",
            f_t.values.len(),
            rel.theta_tilde.ncols()
        )));
    }
    if m_t.len() != rel.theta_tilde.nrows() {
        return Err(DiagnosticsError::DimensionMismatch(format!(
            "oracle prediction length {} does not match Theta~ height {}",
            m_t.len(),
            rel.theta_tilde.nrows()
        )));
    }
    Ok((&rel.theta_tilde * &f_t.values - m_t).norm_squared())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::spectral_filter_bank;
    use nalgebra::dmatrix;

    #[test]
    fn zero_closed_loop_reduces_to_first_filter_entries() {
        // G = 0 (d = 1): mu(0) = e_1, so the output block collapses to
        // phi_j(1) * C K per filter.
        let params = crate::lds::LdsParams::without_inputs(
            dmatrix![0.4],
            dmatrix![1.3],
            dmatrix![1.0],
            dmatrix![1.0],
        )
        .unwrap();
        let sol = crate::lds::KalmanSolution {
            p: dmatrix![1.0],
            k: dmatrix![0.25],
            g: dmatrix![0.0],
            v: dmatrix![1.0],
        };
        let bank = spectral_filter_bank(12, 3).unwrap();
        let rel = relaxed_parameters(&params, &sol, &bank).unwrap();
        for j in 0..3 {
            let expect = bank.filter_slice(j)[0] * 1.3 * 0.25;
            assert!((rel.theta_tilde[(0, j)] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn complex_spectrum_is_detected() {
        let params = crate::lds::LdsParams::without_inputs(
            dmatrix![0.0, 1.0; -1.0, 0.0],
            dmatrix![1.0, 0.0],
            DMatrix::identity(2, 2),
            dmatrix![1.0],
        )
        .unwrap();
        let sol = crate::lds::KalmanSolution {
            p: DMatrix::identity(2, 2),
            k: DMatrix::zeros(2, 1),
            g: dmatrix![0.0, 0.9; -0.9, 0.0],
            v: dmatrix![1.0],
        };
        let bank = spectral_filter_bank(8, 2).unwrap();
        assert!(matches!(
            relaxed_parameters(&params, &sol, &bank),
            Err(DiagnosticsError::ComplexSpectrum(_))
        ));
    }

    #[test]
    fn repeated_eigenvalues_on_diagonal_g_are_handled() {
        let params = crate::lds::LdsParams::without_inputs(
            dmatrix![0.5, 0.0; 0.0, 0.5],
            dmatrix![1.0, 1.0],
            DMatrix::identity(2, 2),
            dmatrix![1.0],
        )
        .unwrap();
        let sol = crate::lds::KalmanSolution {
            p: DMatrix::identity(2, 2),
            k: DMatrix::zeros(2, 1),
            g: dmatrix![0.5, 0.0; 0.0, 0.5],
            v: dmatrix![1.0],
        };
        let bank = spectral_filter_bank(8, 2).unwrap();
        let rel = relaxed_parameters(&params, &sol, &bank).unwrap();
        assert_eq!(rel.eigenvalues.len(), 2);
        assert!((rel.eigenvalues[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bias_of_zero_feature_and_zero_oracle_is_zero() {
        let params = crate::lds::LdsParams::without_inputs(
            dmatrix![0.4],
            dmatrix![1.0],
            dmatrix![1.0],
            dmatrix![1.0],
        )
        .unwrap();
        let sol = crate::lds::solve_dare(&params, 1e-13, 100_000).unwrap();
        let bank = spectral_filter_bank(8, 2).unwrap();
        let rel = relaxed_parameters(&params, &sol, &bank).unwrap();
        let f = FeatureVector {
            t: 1,
            values: DVector::zeros(2),
        };
        let bias = relaxation_bias(&rel, &f, &DVector::zeros(1)).unwrap();
        assert_eq!(bias, 0.0);
    }
}
