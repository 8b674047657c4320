//! Stationary Riccati fixed point and the predictive Kalman gain.

use nalgebra::DMatrix;

use super::{KalmanSolution, LdsParams};
use crate::error::LdsError;

pub const DEFAULT_DARE_TOL: f64 = 1e-12;
pub const DEFAULT_DARE_MAX_ITER: usize = 1_000_000;

/// One application of the Riccati map
/// `P -> A P A^T - A P C^T (C P C^T + R)^{-1} C P A^T + Q`.
pub(crate) fn riccati_step(params: &LdsParams, p: &DMatrix<f64>) -> DMatrix<f64> {
    let apct = &params.a * p * params.c.transpose();
    let s = &params.c * p * params.c.transpose() + &params.r;
    // S = C P C^T + R stays symmetric PD along the iteration when R is PD;
    // fall back to LU if rounding pushes it off the cone.
    let sinv_cpat = solve_spd(&s, &(apct.transpose()));
    let next = &params.a * p * params.a.transpose() - &apct * sinv_cpat + &params.q;
    symmetrize(next)
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    let mt = m.transpose();
    (m + mt) * 0.5
}

/// Solves S X = B for symmetric S, preferring Cholesky.
fn solve_spd(s: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    if let Some(chol) = s.clone().cholesky() {
        chol.solve(b)
    } else {
        s.clone()
            .lu()
            .solve(b)
            .unwrap_or_else(|| DMatrix::zeros(b.nrows(), b.ncols()))
    }
}

/// Fixed-point iteration for the discrete algebraic Riccati equation,
/// started from P_0 = Q. Convergence slows as the closed-loop spectral
/// radius approaches one, hence the large default iteration budget.
///
/// Returns `(P, K, G, V)` with `K = A P C^T (C P C^T + R)^{-1}`,
/// `G = A - K C` and `V = C P C^T + R`.
pub fn solve_dare(
    params: &LdsParams,
    tol: f64,
    max_iter: usize,
) -> Result<KalmanSolution, LdsError> {
    let mut p = params.q.clone();
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let next = riccati_step(params, &p);
        residual = (&next - &p).norm();
        p = next;
        if residual <= tol * (1.0 + p.norm()) {
            return Ok(assemble(params, p));
        }
    }
    Err(LdsError::NonConvergence {
        residual,
        tol,
        iterations: max_iter,
    })
}

fn assemble(params: &LdsParams, p: DMatrix<f64>) -> KalmanSolution {
    let s = &params.c * &p * params.c.transpose() + &params.r;
    let apct = &params.a * &p * params.c.transpose();
    // K = A P C^T S^{-1}, computed as a solve against S^T = S.
    let k = solve_spd(&s, &apct.transpose()).transpose();
    let g = &params.a - &k * &params.c;
    KalmanSolution { p, k, g, v: s }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn scalar(a: f64, c: f64, q: f64, r: f64) -> LdsParams {
        LdsParams::without_inputs(dmatrix![a], dmatrix![c], dmatrix![q], dmatrix![r]).unwrap()
    }

    #[test]
    fn zero_transition_collapses_in_one_step() {
        // A = 0 makes the recursion collapse: P = Q, K = 0, G = 0, V = Q + R.
        let params = scalar(0.0, 1.0, 0.3, 0.7);
        let sol = solve_dare(&params, 1e-14, 100).unwrap();
        assert!((sol.p[(0, 0)] - 0.3).abs() < 1e-12);
        assert!(sol.k[(0, 0)].abs() < 1e-12);
        assert!(sol.g[(0, 0)].abs() < 1e-12);
        assert!((sol.v[(0, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn long_memory_scalar_system_matches_reported_gain() {
        // A = 1, C = 0.001, Q = R = 0.001 has closed loop G close to 0.999.
        let params = scalar(1.0, 0.001, 0.001, 0.001);
        let sol = solve_dare(&params, 1e-12, 1_000_000).unwrap();
        assert!((sol.g[(0, 0)] - 0.999).abs() < 1e-3, "G = {}", sol.g[(0, 0)]);
        assert!(sol.riccati_residual(&params) <= 1e-9 * (1.0 + sol.p.norm()));
    }

    #[test]
    fn matches_scalar_bisection_oracle() {
        // Independent oracle: bisection on p = a^2 p - a^2 p^2 / (p + r) + q.
        let (a, q, r) = (0.5, 1.0, 1.0);
        let f = |p: f64| a * a * p - a * a * p * p / (p + r) + q - p;
        let (mut lo, mut hi) = (0.0, 100.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        let params = scalar(a, 1.0, q, r);
        let sol = solve_dare(&params, 1e-14, 100_000).unwrap();
        assert!(
            (sol.p[(0, 0)] - oracle).abs() < 1e-10,
            "P = {}, oracle = {oracle}",
            sol.p[(0, 0)]
        );
    }

    #[test]
    fn multivariate_solution_satisfies_invariants() {
        let params = LdsParams::without_inputs(
            dmatrix![-1.0, 0.0; 0.0, 1.0],
            dmatrix![0.1, 0.5],
            dmatrix![4e-3, 6e-3; 6e-3, 1e-2],
            dmatrix![0.5],
        )
        .unwrap();
        let sol = solve_dare(&params, 1e-12, 1_000_000).unwrap();
        assert!(sol.riccati_residual(&params) <= 1e-9 * (1.0 + sol.p.norm()));
        // G = A - K C exactly by construction.
        assert_eq!(sol.g, &params.a - &sol.k * &params.c);
        // V = C P C^T + R, symmetric positive definite.
        let v_expect = &params.c * &sol.p * params.c.transpose() + &params.r;
        assert!((&sol.v - v_expect).norm() < 1e-14);
        assert!(sol.v.clone().cholesky().is_some());
        // P symmetric PSD.
        assert!((&sol.p - sol.p.transpose()).norm() < 1e-12);
        let min_eig = sol
            .p
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        assert!(min_eig > -1e-12);
    }

    #[test]
    fn non_convergence_is_reported() {
        // Unobservable marginally stable mode: C = 0 row keeps the residual alive.
        let params = LdsParams::without_inputs(
            dmatrix![1.0],
            dmatrix![0.0],
            dmatrix![1.0],
            dmatrix![1.0],
        )
        .unwrap();
        let err = solve_dare(&params, 1e-12, 50).unwrap_err();
        assert!(matches!(err, LdsError::NonConvergence { .. }));
    }
}
