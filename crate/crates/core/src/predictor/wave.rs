//! Input-driven spectral filtering baseline ("wave filter").
//!
//! Features at step t: the k input convolutions with the wave filters
//! (eigenvectors of the kernel `2/((i+j)^3 - (i+j))`), each scaled by
//! sigma_j^{1/4}, followed by x_{t-1}, x_t and y_{t-1} (zero-padded at
//! t = 1). Learned with follow-the-regularized-leader on the linearized
//! squared loss, i.e. projected online gradient descent with step size
//! lr / sqrt(t) and a Frobenius-ball projection. Experimental comparison
//! baseline; requires inputs.

use nalgebra::{DMatrix, DVector};
use std::sync::Arc;

use super::{OnlinePredictor, PredictorContext};
use crate::error::PredictorError;
use crate::features::SignalHistory;
use crate::lds::LdsParams;
use crate::spectral::{wave_filter_bank, FilterBank};

#[derive(Debug, Clone, Copy)]
pub struct WaveLearningParams {
    /// Base step size; the step at round t is `learning_rate / sqrt(t)`.
    pub learning_rate: f64,
    /// Frobenius-norm radius of the parameter ball.
    pub radius: f64,
}

impl Default for WaveLearningParams {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            radius: 100.0,
        }
    }
}

pub struct WavePredictor {
    bank: Arc<FilterBank>,
    scales: Vec<f64>,
    weights: DMatrix<f64>,
    learn: WaveLearningParams,
    step: usize,
    obs_dim: usize,
    input_dim: usize,
    pending: Option<(usize, DVector<f64>, DVector<f64>)>,
}

impl WavePredictor {
    pub fn new(
        params: &LdsParams,
        horizon: usize,
        k: usize,
        learn: WaveLearningParams,
    ) -> Result<Self, PredictorError> {
        if !params.has_inputs() {
            return Err(PredictorError::Unsupported {
                name: "wave".into(),
                reason: "wave filtering is input-driven; the system has no inputs".into(),
            });
        }
        let bank = Arc::new(wave_filter_bank(horizon, k)?);
        Self::with_bank(params, bank, learn)
    }

    pub fn with_bank(
        params: &LdsParams,
        bank: Arc<FilterBank>,
        learn: WaveLearningParams,
    ) -> Result<Self, PredictorError> {
        if !params.has_inputs() {
            return Err(PredictorError::Unsupported {
                name: "wave".into(),
                reason: "wave filtering is input-driven; the system has no inputs".into(),
            });
        }
        if !(learn.learning_rate > 0.0) || !(learn.radius > 0.0) {
            return Err(PredictorError::InvalidAlpha(learn.learning_rate));
        }
        let n = params.input_dim();
        let m = params.obs_dim();
        let k = bank.filter_count();
        let scales: Vec<f64> = bank
            .eigenvalues()
            .iter()
            .map(|s| s.max(0.0).powf(0.25))
            .collect();
        let l = n * k + 2 * n + m;
        Ok(Self {
            bank,
            scales,
            weights: DMatrix::zeros(m, l),
            learn,
            step: 0,
            obs_dim: m,
            input_dim: n,
            pending: None,
        })
    }

    pub fn from_context(ctx: &PredictorContext) -> Result<Self, PredictorError> {
        let learn = ctx.wave_learning;
        match &ctx.wave_bank {
            Some(bank) => Self::with_bank(&ctx.params, bank.clone(), learn),
            None => Self::new(
                &ctx.params,
                ctx.bank.horizon(),
                ctx.bank.filter_count(),
                learn,
            ),
        }
    }

    fn features(
        &self,
        inputs: &SignalHistory,
        observations: &SignalHistory,
        t: usize,
    ) -> Result<DVector<f64>, PredictorError> {
        if t > self.bank.horizon() {
            return Err(PredictorError::DimensionMismatch(format!(
                "step {t} exceeds the wave filter horizon {}",
                self.bank.horizon()
            )));
        }
        if inputs.len() < t || observations.len() < t - 1 {
            return Err(PredictorError::DimensionMismatch(
                "wave features need x_1..x_t and y_1..y_{t-1}".into(),
            ));
        }
        let n = self.input_dim;
        let m = self.obs_dim;
        let k = self.bank.filter_count();
        let mut f = DVector::zeros(n * k + 2 * n + m);
        {
            let out = f.as_mut_slice();
            for s in 1..t {
                let psi = self.bank.psi_slice(s);
                let x = inputs.step(t - s);
                for (j, w) in psi.iter().enumerate() {
                    let dst = &mut out[j * n..(j + 1) * n];
                    for (d, v) in dst.iter_mut().zip(x.iter()) {
                        *d += w * v;
                    }
                }
            }
            for j in 0..k {
                for d in out[j * n..(j + 1) * n].iter_mut() {
                    *d *= self.scales[j];
                }
            }
            let base = n * k;
            if t > 1 {
                out[base..base + n].copy_from_slice(inputs.step(t - 1));
            }
            out[base + n..base + 2 * n].copy_from_slice(inputs.step(t));
            if t > 1 {
                out[base + 2 * n..].copy_from_slice(observations.step(t - 1));
            }
        }
        Ok(f)
    }
}

impl OnlinePredictor for WavePredictor {
    fn name(&self) -> &str {
        "wave"
    }

    fn predict(
        &mut self,
        inputs: &SignalHistory,
        observations: &SignalHistory,
        t: usize,
    ) -> Result<DVector<f64>, PredictorError> {
        let f = self.features(inputs, observations, t)?;
        let pred = &self.weights * &f;
        self.pending = Some((t, f, pred.clone()));
        Ok(pred)
    }

    fn observe(
        &mut self,
        _inputs: &SignalHistory,
        observations: &SignalHistory,
        t: usize,
    ) -> Result<(), PredictorError> {
        if observations.len() < t {
            return Err(PredictorError::DimensionMismatch(format!(
                "observe at step {t} requires y_t"
            )));
        }
        let (step, f, pred) = match self.pending.take() {
            Some(p) if p.0 == t => p,
            _ => {
                return Err(PredictorError::DimensionMismatch(
                    "wave observe without a matching predict".into(),
                ))
            }
        };
        let y = observations.to_vector(t);
        self.step = step;
        let residual = &pred - &y;
        let eta = self.learn.learning_rate / (step as f64).sqrt();
        // gradient of ||W f - y||^2 is 2 (W f - y) f^T
        self.weights.ger(-2.0 * eta, &residual, &f, 1.0);
        let norm = self.weights.norm();
        if norm > self.learn.radius {
            self.weights *= self.learn.radius / norm;
        }
        Ok(())
    }
}
