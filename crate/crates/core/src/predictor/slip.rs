//! The spectral-feature online learner, and its truncated-lookback special
//! case (standard-basis filters).

use nalgebra::DVector;
use std::sync::Arc;

use super::rls::PredictorState;
use super::OnlinePredictor;
use crate::error::PredictorError;
use crate::features::{compute_features, FeatureVector, SignalHistory};
use crate::spectral::FilterBank;

pub struct SlipPredictor {
    name: &'static str,
    bank: Arc<FilterBank>,
    state: PredictorState,
    obs_dim: usize,
    input_dim: usize,
    /// Feature vector computed at predict time, consumed by the update.
    pending: Option<FeatureVector>,
}

impl SlipPredictor {
    pub fn slip(
        bank: Arc<FilterBank>,
        obs_dim: usize,
        input_dim: usize,
        alpha: f64,
    ) -> Result<Self, PredictorError> {
        let state = super::rls::slip_init(&bank, obs_dim, input_dim, alpha)?;
        Ok(Self {
            name: "slip",
            bank,
            state,
            obs_dim,
            input_dim,
            pending: None,
        })
    }

    /// Identical machinery with filters e_1..e_p: features are the raw last-p
    /// signal values, zero-padded while t <= p.
    pub fn truncated(
        horizon: usize,
        lookback: usize,
        obs_dim: usize,
        input_dim: usize,
        alpha: f64,
    ) -> Result<Self, PredictorError> {
        let bank = Arc::new(FilterBank::standard_basis(horizon, lookback)?);
        let state = super::rls::slip_init(&bank, obs_dim, input_dim, alpha)?;
        Ok(Self {
            name: "truncated",
            bank,
            state,
            obs_dim,
            input_dim,
            pending: None,
        })
    }

    pub fn state(&self) -> &PredictorState {
        &self.state
    }

    fn features(
        &self,
        inputs: &SignalHistory,
        observations: &SignalHistory,
        t: usize,
    ) -> Result<FeatureVector, PredictorError> {
        if inputs.dim() != self.input_dim || observations.dim() != self.obs_dim {
            return Err(PredictorError::DimensionMismatch(format!(
                "histories are {}/{}-dimensional, predictor expects {}/{}",
                inputs.dim(),
                observations.dim(),
                self.input_dim,
                self.obs_dim
            )));
        }
        Ok(compute_features(&self.bank, inputs, observations, t)?)
    }
}

impl OnlinePredictor for SlipPredictor {
    fn name(&self) -> &str {
        self.name
    }

    fn predict(
        &mut self,
        inputs: &SignalHistory,
        observations: &SignalHistory,
        t: usize,
    ) -> Result<DVector<f64>, PredictorError> {
        let f = self.features(inputs, observations, t)?;
        let pred = self.state.predict(&f.values)?;
        self.pending = Some(f);
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
                "observe at step {t} requires y_t in the history"
            )));
        }
        let f = match self.pending.take() {
            Some(f) if f.t == t => f,
            // predict was skipped or ran for another step; rebuild from history
            _ => {
                let truncated = truncated_view(observations, t - 1);
                self.features(inputs, &truncated, t)?
            }
        };
        let y = observations.to_vector(t);
        self.state.update(&f.values, &y)
    }
}

fn truncated_view(h: &SignalHistory, steps: usize) -> SignalHistory {
    let mut out = SignalHistory::with_capacity(h.dim(), steps);
    for i in 1..=steps {
        out.push(&h.to_vector(i)).expect("dims match");
    }
    out
}
