//! The exact stationary Kalman predictor, run as just another strategy.

use nalgebra::{DMatrix, DVector};
use std::sync::Arc;

use super::OnlinePredictor;
use crate::error::PredictorError;
use crate::features::SignalHistory;
use crate::lds::{KalmanSolution, LdsParams};

pub struct KalmanOraclePredictor {
    params: Arc<LdsParams>,
    sol: Arc<KalmanSolution>,
    bkd: DMatrix<f64>,
    hhat: DVector<f64>,
}

impl KalmanOraclePredictor {
    pub fn new(params: Arc<LdsParams>, sol: Arc<KalmanSolution>) -> Self {
        let bkd = &params.b - &sol.k * &params.d;
        let d = params.state_dim();
        Self {
            params,
            sol,
            bkd,
            hhat: DVector::zeros(d),
        }
    }
}

impl OnlinePredictor for KalmanOraclePredictor {
    fn name(&self) -> &str {
        "kalman"
    }

    fn predict(
        &mut self,
        inputs: &SignalHistory,
        _observations: &SignalHistory,
        t: usize,
    ) -> Result<DVector<f64>, PredictorError> {
        let mut pred = &self.params.c * &self.hhat;
        if self.params.has_inputs() {
            if inputs.len() < t {
                return Err(PredictorError::DimensionMismatch(format!(
                    "predict at step {t} requires x_t"
                )));
            }
            pred += &self.params.d * inputs.to_vector(t);
        }
        Ok(pred)
    }

    fn observe(
        &mut self,
        inputs: &SignalHistory,
        observations: &SignalHistory,
        t: usize,
    ) -> Result<(), PredictorError> {
        if observations.len() < t {
            return Err(PredictorError::DimensionMismatch(format!(
                "observe at step {t} requires y_t"
            )));
        }
        let y = observations.to_vector(t);
        self.hhat = &self.sol.g * &self.hhat + &self.sol.k * y;
        if self.params.has_inputs() {
            self.hhat += &self.bkd * inputs.to_vector(t);
        }
        Ok(())
    }
}
