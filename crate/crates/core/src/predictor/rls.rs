//! Regularized recursive least squares over feature vectors.
//!
//! The parameter matrix solves the ridge normal equations at every step:
//!
//! ```text
//!   Theta^{(t+1)} = (sum_i y_i f_i^T) (sum_i f_i f_i^T + alpha I)^{-1}
//! ```
//!
//! Theta is recomputed by a symmetric positive-definite solve each update
//! rather than a rank-one inverse recursion; l stays small (<= ~90 at
//! k = 20), and the direct solve cannot drift over 10^4 steps.

use nalgebra::{DMatrix, DVector};

use crate::error::PredictorError;
use crate::features::{feature_len, FeatureVector};
use crate::spectral::FilterBank;

#[derive(Debug, Clone)]
pub struct PredictorState {
    /// Theta, m x l.
    theta: DMatrix<f64>,
    /// Z_t = alpha I + sum f_i f_i^T, l x l.
    gram: DMatrix<f64>,
    /// sum y_i f_i^T, m x l.
    cross: DMatrix<f64>,
    step: usize,
    alpha: f64,
}

impl PredictorState {
    pub fn new(l: usize, m: usize, alpha: f64) -> Result<Self, PredictorError> {
        if !(alpha > 0.0) {
            return Err(PredictorError::InvalidAlpha(alpha));
        }
        Ok(Self {
            theta: DMatrix::zeros(m, l),
            gram: DMatrix::identity(l, l) * alpha,
            cross: DMatrix::zeros(m, l),
            step: 0,
            alpha,
        })
    }

    pub fn feature_dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn obs_dim(&self) -> usize {
        self.theta.nrows()
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn theta(&self) -> &DMatrix<f64> {
        &self.theta
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn cross(&self) -> &DMatrix<f64> {
        &self.cross
    }

    /// mhat = Theta f.
    pub fn predict(&self, f: &DVector<f64>) -> Result<DVector<f64>, PredictorError> {
        if f.len() != self.feature_dim() {
            return Err(PredictorError::DimensionMismatch(format!(
                "feature has length {}, state expects {}",
                f.len(),
                self.feature_dim()
            )));
        }
        Ok(&self.theta * f)
    }

    /// Rank-one accumulation followed by the normal-equations solve.
    pub fn update(&mut self, f: &DVector<f64>, y: &DVector<f64>) -> Result<(), PredictorError> {
        if f.len() != self.feature_dim() || y.len() != self.obs_dim() {
            return Err(PredictorError::DimensionMismatch(format!(
                "update with f of length {} and y of length {}, state is {}x{}",
                f.len(),
                y.len(),
                self.obs_dim(),
                self.feature_dim()
            )));
        }
        self.gram.ger(1.0, f, f, 1.0);
        self.cross.ger(1.0, y, f, 1.0);
        let chol = self
            .gram
            .clone()
            .cholesky()
            .ok_or(PredictorError::SolveFailure)?;
        self.theta = chol.solve(&self.cross.transpose()).transpose();
        self.step += 1;
        Ok(())
    }
}

/// Fresh state for a feature bank: l = mk + nk + n, Theta = 0, Z = alpha I.
pub fn slip_init(
    bank: &FilterBank,
    m: usize,
    n: usize,
    alpha: f64,
) -> Result<PredictorState, PredictorError> {
    PredictorState::new(feature_len(bank.filter_count(), m, n), m, alpha)
}

pub fn slip_predict(
    state: &PredictorState,
    f: &FeatureVector,
) -> Result<DVector<f64>, PredictorError> {
    state.predict(&f.values)
}

pub fn slip_update(
    state: &mut PredictorState,
    f: &FeatureVector,
    y: &DVector<f64>,
) -> Result<(), PredictorError> {
    state.update(&f.values, y)
}
