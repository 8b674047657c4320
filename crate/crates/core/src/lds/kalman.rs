//! The stationary Kalman predictor: recursive state form and unrolled
//! coefficient form.

use nalgebra::{DMatrix, DVector};

use super::{KalmanSolution, LdsParams, Trajectory};
use crate::error::LdsError;

fn check_traj(params: &LdsParams, traj: &Trajectory) -> Result<(), LdsError> {
    let n = params.input_dim();
    let m = params.obs_dim();
    if traj.observations.iter().any(|y| y.len() != m) {
        return Err(LdsError::DimensionMismatch(
            "observation dimension does not match the system".into(),
        ));
    }
    if traj.inputs.len() != traj.observations.len() || traj.inputs.iter().any(|x| x.len() != n) {
        return Err(LdsError::DimensionMismatch(
            "input history does not match the system".into(),
        ));
    }
    Ok(())
}

/// Recursive one-step predictor started from hhat_{1|0} = 0:
///
/// ```text
///   m_t = C hhat_{t|t-1} + D x_t
///   hhat_{t+1|t} = (A - K C) hhat_{t|t-1} + K y_t + (B - K D) x_t
/// ```
///
/// Returns the predictions m_1..m_T and innovations e_t = y_t - m_t.
pub fn kalman_predict_recursive(
    params: &LdsParams,
    sol: &KalmanSolution,
    traj: &Trajectory,
) -> Result<(Vec<DVector<f64>>, Vec<DVector<f64>>), LdsError> {
    check_traj(params, traj)?;
    let horizon = traj.horizon();
    let d = params.state_dim();
    let bkd = &params.b - &sol.k * &params.d;
    let mut hhat = DVector::zeros(d);
    let mut preds = Vec::with_capacity(horizon);
    let mut innovations = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let x = &traj.inputs[t];
        let y = &traj.observations[t];
        let m = &params.c * &hhat + &params.d * x;
        innovations.push(y - &m);
        preds.push(m);
        hhat = &sol.g * hhat + &sol.k * y + &bkd * x;
    }
    Ok((preds, innovations))
}

/// Observation matrix `O_t = [C G^{t-1} K | C G^{t-2} K | ... | C K]`,
/// of shape m x (m t). Powers of G are accumulated by one multiplication
/// per block, never by explicit matrix powers.
pub fn observation_matrix(
    params: &LdsParams,
    sol: &KalmanSolution,
    t: usize,
) -> Result<DMatrix<f64>, LdsError> {
    coefficient_matrix(params, sol, t, &sol.k)
}

/// Control matrix `C_t = [C G^{t-1} (B - K D) | ... | C (B - K D)]`,
/// of shape m x (n t).
pub fn control_matrix(
    params: &LdsParams,
    sol: &KalmanSolution,
    t: usize,
) -> Result<DMatrix<f64>, LdsError> {
    let bkd = &params.b - &sol.k * &params.d;
    coefficient_matrix(params, sol, t, &bkd)
}

fn coefficient_matrix(
    params: &LdsParams,
    sol: &KalmanSolution,
    t: usize,
    tail: &DMatrix<f64>,
) -> Result<DMatrix<f64>, LdsError> {
    if t < 1 {
        return Err(LdsError::IndexOutOfRange("t must be >= 1".into()));
    }
    let m = params.obs_dim();
    let w = tail.ncols();
    let mut out = DMatrix::zeros(m, w * t);
    // cgj = C G^j, starting with j = 0 at the rightmost block.
    let mut cgj = params.c.clone();
    for j in 0..t {
        let block = &cgj * tail;
        out.view_mut((0, (t - 1 - j) * w), (m, w)).copy_from(&block);
        if j + 1 < t {
            cgj *= &sol.g;
        }
    }
    Ok(out)
}

/// Unrolled predictor `m_{t+1} = O_t y_{1:t} + C_t x_{1:t} + D x_{t+1}`,
/// evaluated literally through the coefficient matrices (a second algebraic
/// route, independent of the recursion above).
pub fn kalman_predict_unrolled(
    params: &LdsParams,
    sol: &KalmanSolution,
    traj: &Trajectory,
    t: usize,
) -> Result<DVector<f64>, LdsError> {
    check_traj(params, traj)?;
    if t < 1 || t >= traj.horizon() {
        return Err(LdsError::IndexOutOfRange(format!(
            "need 1 <= t < T, got t = {t}, T = {}",
            traj.horizon()
        )));
    }
    let m = params.obs_dim();
    let n = params.input_dim();
    let obs_mat = observation_matrix(params, sol, t)?;
    let stacked_y = stack(&traj.observations[..t], m);
    let mut pred = &obs_mat * stacked_y;
    if n > 0 {
        let ctrl_mat = control_matrix(params, sol, t)?;
        let stacked_x = stack(&traj.inputs[..t], n);
        pred += &ctrl_mat * stacked_x;
        pred += &params.d * &traj.inputs[t];
    }
    Ok(pred)
}

fn stack(vectors: &[DVector<f64>], dim: usize) -> DVector<f64> {
    let mut out = DVector::zeros(dim * vectors.len());
    for (i, v) in vectors.iter().enumerate() {
        out.rows_mut(i * dim, dim).copy_from(v);
    }
    out
}
