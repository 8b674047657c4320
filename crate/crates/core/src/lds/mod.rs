//! Linear dynamical systems: definition, simulation, optimal filtering.
//!
//! The generative model is
//!
//! ```text
//!   h_{t+1} = A h_t + B x_t + eta_t,      eta_t ~ N(0, Q)
//!   y_t     = C h_t + D x_t + zeta_t,     zeta_t ~ N(0, R)
//! ```
//!
//! with latent states `h_t` in R^d, inputs `x_t` in R^n (n may be 0) and
//! observations `y_t` in R^m. The stationary Kalman filter for the model is
//! obtained from the fixed point of the discrete Riccati equation
//! ([`solve_dare`]) and drives both the recursive predictor
//! ([`kalman_predict_recursive`]) and its unrolled coefficient form
//! ([`kalman_predict_unrolled`]).

mod kalman;
mod riccati;
mod sim;

pub use kalman::{
    control_matrix, kalman_predict_recursive, kalman_predict_unrolled, observation_matrix,
};
pub use riccati::{solve_dare, DEFAULT_DARE_MAX_ITER, DEFAULT_DARE_TOL};
pub use sim::{simulate, simulate_with_initial_state};

pub(crate) use sim::psd_sqrt as sim_psd_sqrt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::LdsError;

/// System matrices and noise covariances of a linear dynamical system.
#[derive(Debug, Clone)]
pub struct LdsParams {
    /// State transition, d x d.
    pub a: DMatrix<f64>,
    /// Input map, d x n (d x 0 for input-free systems).
    pub b: DMatrix<f64>,
    /// Observation map, m x d.
    pub c: DMatrix<f64>,
    /// Feedthrough, m x n.
    pub d: DMatrix<f64>,
    /// Process noise covariance, d x d, symmetric PSD.
    pub q: DMatrix<f64>,
    /// Measurement noise covariance, m x m, symmetric PSD
    /// (positive definite whenever a Kalman solution is requested).
    pub r: DMatrix<f64>,
}

impl LdsParams {
    /// Validates dimensional consistency and noise-covariance invariants.
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        d: DMatrix<f64>,
        q: DMatrix<f64>,
        r: DMatrix<f64>,
    ) -> Result<Self, LdsError> {
        let sd = a.nrows();
        let od = c.nrows();
        let id = b.ncols();
        if sd == 0 || od == 0 {
            return Err(LdsError::DimensionMismatch(
                "state and observation dimensions must be positive".into(),
            ));
        }
        if a.ncols() != sd {
            return Err(LdsError::DimensionMismatch(format!(
                "A must be square, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if b.nrows() != sd {
            return Err(LdsError::DimensionMismatch(format!(
                "B must have {} rows, got {}",
                sd,
                b.nrows()
            )));
        }
        if c.ncols() != sd {
            return Err(LdsError::DimensionMismatch(format!(
                "C must have {} columns, got {}",
                sd,
                c.ncols()
            )));
        }
        if d.nrows() != od || d.ncols() != id {
            return Err(LdsError::DimensionMismatch(format!(
                "D must be {}x{}, got {}x{}",
                od,
                id,
                d.nrows(),
                d.ncols()
            )));
        }
        if q.nrows() != sd || q.ncols() != sd {
            return Err(LdsError::DimensionMismatch(format!(
                "Q must be {sd}x{sd}"
            )));
        }
        if r.nrows() != od || r.ncols() != od {
            return Err(LdsError::DimensionMismatch(format!(
                "R must be {od}x{od}"
            )));
        }
        check_psd("Q", &q)?;
        check_psd("R", &r)?;
        Ok(Self { a, b, c, d, q, r })
    }

    /// Input-free system (n = 0); B and D are empty.
    pub fn without_inputs(
        a: DMatrix<f64>,
        c: DMatrix<f64>,
        q: DMatrix<f64>,
        r: DMatrix<f64>,
    ) -> Result<Self, LdsError> {
        let sd = a.nrows();
        let od = c.nrows();
        Self::new(a, DMatrix::zeros(sd, 0), c, DMatrix::zeros(od, 0), q, r)
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    pub fn obs_dim(&self) -> usize {
        self.c.nrows()
    }

    pub fn has_inputs(&self) -> bool {
        self.input_dim() > 0
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(LdsParamsJson::from(self)).expect("LdsParams serialization")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self, LdsError> {
        let raw: LdsParamsJson = serde_json::from_value(value.clone())
            .map_err(|e| LdsError::DimensionMismatch(format!("bad system JSON: {e}")))?;
        raw.into_params()
    }
}

/// Symmetry plus min eigenvalue >= -1e-10 * ||M||_2.
fn check_psd(name: &'static str, m: &DMatrix<f64>) -> Result<(), LdsError> {
    let asym = (m - m.transpose()).norm();
    if asym > 1e-10 * (1.0 + m.norm()) {
        return Err(LdsError::NotPositiveSemiDefinite {
            name,
            min_eig: f64::NAN,
        });
    }
    let eigs = m.clone().symmetric_eigen().eigenvalues;
    let min_eig = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_abs = eigs.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    if min_eig < -1e-10 * max_abs.max(1e-300) {
        return Err(LdsError::NotPositiveSemiDefinite { name, min_eig });
    }
    Ok(())
}

/// JSON sub-schema: explicit dims plus row-major matrix arrays.
#[derive(Debug, Serialize, Deserialize)]
struct LdsParamsJson {
    d: usize,
    n: usize,
    m: usize,
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B", default)]
    b: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    c: Vec<Vec<f64>>,
    #[serde(rename = "D", default)]
    dmat: Vec<Vec<f64>>,
    #[serde(rename = "Q")]
    q: Vec<Vec<f64>>,
    #[serde(rename = "R")]
    r: Vec<Vec<f64>>,
}

fn rows_to_matrix(rows: &[Vec<f64>], nrows: usize, ncols: usize, name: &str) -> Result<DMatrix<f64>, LdsError> {
    if nrows == 0 || ncols == 0 {
        if !rows.is_empty() && rows.iter().any(|r| !r.is_empty()) {
            return Err(LdsError::DimensionMismatch(format!(
                "{name} must be empty for a {nrows}x{ncols} matrix"
            )));
        }
        return Ok(DMatrix::zeros(nrows, ncols));
    }
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return Err(LdsError::DimensionMismatch(format!(
            "{name} must be {nrows}x{ncols} row-major"
        )));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

impl From<&LdsParams> for LdsParamsJson {
    fn from(p: &LdsParams) -> Self {
        Self {
            d: p.state_dim(),
            n: p.input_dim(),
            m: p.obs_dim(),
            a: matrix_to_rows(&p.a),
            b: matrix_to_rows(&p.b),
            c: matrix_to_rows(&p.c),
            dmat: matrix_to_rows(&p.d),
            q: matrix_to_rows(&p.q),
            r: matrix_to_rows(&p.r),
        }
    }
}

impl LdsParamsJson {
    fn into_params(self) -> Result<LdsParams, LdsError> {
        let a = rows_to_matrix(&self.a, self.d, self.d, "A")?;
        let b = rows_to_matrix(&self.b, self.d, self.n, "B")?;
        let c = rows_to_matrix(&self.c, self.m, self.d, "C")?;
        let dm = rows_to_matrix(&self.dmat, self.m, self.n, "D")?;
        let q = rows_to_matrix(&self.q, self.d, self.d, "Q")?;
        let r = rows_to_matrix(&self.r, self.m, self.m, "R")?;
        LdsParams::new(a, b, c, dm, q, r)
    }
}

impl Serialize for LdsParams {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        LdsParamsJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for LdsParams {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = LdsParamsJson::deserialize(d)?;
        raw.into_params().map_err(serde::de::Error::custom)
    }
}

/// Stationary Kalman filter quantities.
#[derive(Debug, Clone)]
pub struct KalmanSolution {
    /// Stationary predictive state covariance, fixed point of the Riccati map.
    pub p: DMatrix<f64>,
    /// Predictive Kalman gain K = A P C^T (C P C^T + R)^{-1}.
    pub k: DMatrix<f64>,
    /// Closed-loop matrix G = A - K C.
    pub g: DMatrix<f64>,
    /// Stationary innovation covariance V = C P C^T + R.
    pub v: DMatrix<f64>,
}

impl KalmanSolution {
    /// Frobenius norm of P - (A P A^T - A P C^T (C P C^T + R)^{-1} C P A^T + Q).
    pub fn riccati_residual(&self, params: &LdsParams) -> f64 {
        let step = riccati::riccati_step(params, &self.p);
        (&self.p - step).norm()
    }
}

/// How inputs x_t are generated during simulation.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum InputSpec {
    None,
    IidGaussian { sigma: f64 },
    IidUniform { lo: f64, hi: f64 },
    /// Pre-specified sequence of flattened n-vectors, one per step.
    Fixed { values: Vec<Vec<f64>> },
}

impl InputSpec {
    pub fn requires_inputs(&self) -> bool {
        !matches!(self, InputSpec::None)
    }
}

/// A simulated (or recorded) run of the system.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// x_1..x_T, each of dimension n (empty vectors when n = 0).
    pub inputs: Vec<DVector<f64>>,
    /// y_1..y_T.
    pub observations: Vec<DVector<f64>>,
    /// h_1..h_T, retained for tests.
    pub latents: Option<Vec<DVector<f64>>>,
    /// Stationary Kalman one-step predictions m_1..m_T.
    pub kalman_predictions: Option<Vec<DVector<f64>>>,
    /// Innovations e_t = y_t - m_t.
    pub innovations: Option<Vec<DVector<f64>>>,
}

impl Trajectory {
    pub fn horizon(&self) -> usize {
        self.observations.len()
    }

    /// Runs the recursive stationary Kalman predictor and attaches
    /// `kalman_predictions` and `innovations` (e_t = y_t - m_t by construction).
    pub fn with_kalman_oracle(
        mut self,
        params: &LdsParams,
        sol: &KalmanSolution,
    ) -> Result<Self, LdsError> {
        let (m, e) = kalman_predict_recursive(params, sol, &self)?;
        self.kalman_predictions = Some(m);
        self.innovations = Some(e);
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn rejects_inconsistent_shapes() {
        let a = dmatrix![1.0, 0.0; 0.0, 1.0];
        let bad_c = dmatrix![1.0];
        let q = DMatrix::identity(2, 2);
        let r = DMatrix::identity(1, 1);
        let err = LdsParams::without_inputs(a, bad_c, q, r).unwrap_err();
        assert!(matches!(err, LdsError::DimensionMismatch(_)));
    }

    #[test]
    fn rejects_indefinite_r() {
        let a = dmatrix![0.5];
        let c = dmatrix![1.0];
        let q = dmatrix![1.0];
        let r = dmatrix![-0.5];
        let err = LdsParams::without_inputs(a, c, q, r).unwrap_err();
        assert!(matches!(err, LdsError::NotPositiveSemiDefinite { name: "R", .. }));
    }

    #[test]
    fn json_round_trip_preserves_matrices() {
        let p = LdsParams::new(
            dmatrix![1.0, 0.0; 0.1, 1.0],
            dmatrix![1.0; 1.0],
            dmatrix![0.0, 0.1; 0.1, 1.0],
            dmatrix![1.0; 1.0],
            DMatrix::identity(2, 2) * 1e-3,
            DMatrix::identity(2, 2),
        )
        .unwrap();
        let v = p.to_json();
        assert_eq!(v["d"], 2);
        assert_eq!(v["n"], 1);
        assert_eq!(v["m"], 2);
        let q = LdsParams::from_json(&v).unwrap();
        assert_eq!(p.a, q.a);
        assert_eq!(p.b, q.b);
        assert_eq!(p.c, q.c);
        assert_eq!(p.d, q.d);
        assert_eq!(p.q, q.q);
        assert_eq!(p.r, q.r);
    }

    #[test]
    fn input_free_json_omits_b_and_d() {
        let p = LdsParams::without_inputs(
            dmatrix![0.9],
            dmatrix![1.0],
            dmatrix![0.1],
            dmatrix![1.0],
        )
        .unwrap();
        let v = p.to_json();
        let q = LdsParams::from_json(&v).unwrap();
        assert_eq!(q.input_dim(), 0);
    }
}
