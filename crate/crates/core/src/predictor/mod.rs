//! Online predictors behind a common trait, selected by name at runtime.
//!
//! Each algorithm is a strategy implementing [`OnlinePredictor`] and is
//! created through the [`PredictorRegistry`] from a shared
//! [`PredictorContext`]. Built-in strategies:
//!
//! * `"slip"` — regularized recursive least squares over spectral features;
//! * `"truncated"` — the same machinery with standard-basis filters, i.e.
//!   plain lookback regression over the last p signal values;
//! * `"wave"` — input-driven spectral filtering baseline (experimental);
//! * `"kalman"` — the exact stationary Kalman predictor (oracle reference).
//!
//! The online protocol is strict: at step t a predictor sees inputs x_{1:t}
//! and observations y_{1:t-1}, commits to a prediction, and only then is
//! y_t revealed.

mod kalman_oracle;
mod rls;
mod slip;
mod trace;
mod wave;

pub use kalman_oracle::KalmanOraclePredictor;
pub use rls::{slip_init, slip_predict, slip_update, PredictorState};
pub use slip::SlipPredictor;
pub use trace::{PredictorSeries, RegretTrace, SeriesStatus, KALMAN_NAME};
pub use wave::{WaveLearningParams, WavePredictor};

use nalgebra::DVector;
use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::PredictorError;
use crate::features::SignalHistory;
use crate::lds::{KalmanSolution, LdsParams, Trajectory};
use crate::spectral::FilterBank;

pub trait OnlinePredictor: Send {
    fn name(&self) -> &str;

    /// One-step-ahead prediction of y_t given x_{1:t} and y_{1:t-1}.
    fn predict(
        &mut self,
        inputs: &SignalHistory,
        observations: &SignalHistory,
        t: usize,
    ) -> Result<DVector<f64>, PredictorError>;

    /// Reveal y_t (the last entry of `observations`) after the step-t
    /// prediction has been made.
    fn observe(
        &mut self,
        inputs: &SignalHistory,
        observations: &SignalHistory,
        t: usize,
    ) -> Result<(), PredictorError>;
}

/// Everything a factory may need to build a predictor for one trajectory.
#[derive(Clone)]
pub struct PredictorContext {
    pub params: Arc<LdsParams>,
    pub solution: Arc<KalmanSolution>,
    pub bank: Arc<FilterBank>,
    /// Filter bank for the wave baseline; built on demand when absent.
    pub wave_bank: Option<Arc<FilterBank>>,
    pub wave_learning: WaveLearningParams,
    pub alpha: f64,
    pub lookback: usize,
}

impl PredictorContext {
    pub fn new(
        params: Arc<LdsParams>,
        solution: Arc<KalmanSolution>,
        bank: Arc<FilterBank>,
        alpha: f64,
        lookback: usize,
    ) -> Self {
        Self {
            params,
            solution,
            bank,
            wave_bank: None,
            wave_learning: WaveLearningParams::default(),
            alpha,
            lookback,
        }
    }

    pub fn with_wave_bank(mut self, bank: Arc<FilterBank>) -> Self {
        self.wave_bank = Some(bank);
        self
    }
}

pub type PredictorFactory =
    fn(&PredictorContext) -> Result<Box<dyn OnlinePredictor>, PredictorError>;

/// Name-keyed factory table for predictor strategies.
pub struct PredictorRegistry {
    entries: BTreeMap<String, PredictorFactory>,
}

impl PredictorRegistry {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    /// Registry holding the four built-in strategies.
    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register("slip", |ctx| {
            Ok(Box::new(SlipPredictor::slip(
                ctx.bank.clone(),
                ctx.params.obs_dim(),
                ctx.params.input_dim(),
                ctx.alpha,
            )?))
        });
        r.register("truncated", |ctx| {
            Ok(Box::new(SlipPredictor::truncated(
                ctx.bank.horizon(),
                ctx.lookback,
                ctx.params.obs_dim(),
                ctx.params.input_dim(),
                ctx.alpha,
            )?))
        });
        r.register("wave", |ctx| Ok(Box::new(WavePredictor::from_context(ctx)?)));
        r.register("kalman", |ctx| {
            Ok(Box::new(KalmanOraclePredictor::new(
                ctx.params.clone(),
                ctx.solution.clone(),
            )))
        });
        r
    }

    /// Registers (or replaces) a strategy under `name`.
    pub fn register(&mut self, name: impl Into<String>, factory: PredictorFactory) {
        self.entries.insert(name.into(), factory);
    }

    pub fn create(
        &self,
        name: &str,
        ctx: &PredictorContext,
    ) -> Result<Box<dyn OnlinePredictor>, PredictorError> {
        let factory = self
            .entries
            .get(name)
            .ok_or_else(|| PredictorError::UnknownPredictor(name.to_string()))?;
        factory(ctx)
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.keys().map(|s| s.as_str()).collect()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }
}

/// Per-step records of one predictor against one trajectory.
#[derive(Debug, Clone)]
pub struct OnlineRun {
    pub predictions: Vec<DVector<f64>>,
    /// ||y_t - mhat_t||^2
    pub err_vs_obs: Vec<f64>,
    /// ||mhat_t - m_t||^2 against the Kalman oracle
    pub err_vs_kalman: Vec<f64>,
    /// e_t^T (mhat_t - m_t), the innovation cross term
    pub innovation_cross: Vec<f64>,
}

/// Drives one predictor through the strict online protocol.
///
/// `oracle` and `innovations` are the stationary Kalman predictions m_t and
/// innovations e_t = y_t - m_t for the same trajectory.
pub fn run_online(
    predictor: &mut dyn OnlinePredictor,
    traj: &Trajectory,
    oracle: &[DVector<f64>],
    innovations: &[DVector<f64>],
) -> Result<OnlineRun, PredictorError> {
    let horizon = traj.horizon();
    if oracle.len() != horizon || innovations.len() != horizon {
        return Err(PredictorError::DimensionMismatch(
            "oracle series length does not match the trajectory".into(),
        ));
    }
    let n = traj.inputs.first().map_or(0, |x| x.len());
    let m = traj
        .observations
        .first()
        .map_or(0, |y| y.len());
    let mut xs = SignalHistory::with_capacity(n, horizon);
    let mut ys = SignalHistory::with_capacity(m, horizon);
    let mut run = OnlineRun {
        predictions: Vec::with_capacity(horizon),
        err_vs_obs: Vec::with_capacity(horizon),
        err_vs_kalman: Vec::with_capacity(horizon),
        innovation_cross: Vec::with_capacity(horizon),
    };
    for t in 1..=horizon {
        xs.push(&traj.inputs[t - 1])?;
        let pred = predictor.predict(&xs, &ys, t)?;
        if pred.len() != m {
            return Err(PredictorError::DimensionMismatch(format!(
                "prediction at step {t} has dimension {}, expected {m}",
                pred.len()
            )));
        }
        let y = &traj.observations[t - 1];
        let diff_oracle = &pred - &oracle[t - 1];
        run.err_vs_obs.push((y - &pred).norm_squared());
        run.err_vs_kalman.push(diff_oracle.norm_squared());
        run.innovation_cross.push(innovations[t - 1].dot(&diff_oracle));
        run.predictions.push(pred);
        ys.push(y)?;
        predictor.observe(&xs, &ys, t)?;
    }
    Ok(run)
}

/// Runs the spectral-feature learner on one trajectory.
pub fn run_slip(
    params: &LdsParams,
    sol: &KalmanSolution,
    bank: &Arc<FilterBank>,
    traj: &Trajectory,
    alpha: f64,
) -> Result<OnlineRun, PredictorError> {
    if bank.horizon() < traj.horizon() {
        return Err(PredictorError::DimensionMismatch(format!(
            "filter bank horizon {} is shorter than the trajectory {}",
            bank.horizon(),
            traj.horizon()
        )));
    }
    let (oracle, innovations) = crate::lds::kalman_predict_recursive(params, sol, traj)?;
    let mut p = SlipPredictor::slip(bank.clone(), params.obs_dim(), params.input_dim(), alpha)?;
    run_online(&mut p, traj, &oracle, &innovations)
}

/// Runs the fixed-lookback baseline (basis filters e_1..e_p).
pub fn run_truncated(
    params: &LdsParams,
    sol: &KalmanSolution,
    traj: &Trajectory,
    lookback: usize,
    alpha: f64,
) -> Result<OnlineRun, PredictorError> {
    let (oracle, innovations) = crate::lds::kalman_predict_recursive(params, sol, traj)?;
    let mut p = SlipPredictor::truncated(
        traj.horizon(),
        lookback,
        params.obs_dim(),
        params.input_dim(),
        alpha,
    )?;
    run_online(&mut p, traj, &oracle, &innovations)
}

/// Runs the wave-filter baseline; errors with `Unsupported` on input-free systems.
pub fn run_wave(
    params: &LdsParams,
    sol: &KalmanSolution,
    traj: &Trajectory,
    k: usize,
    learn: WaveLearningParams,
) -> Result<OnlineRun, PredictorError> {
    let (oracle, innovations) = crate::lds::kalman_predict_recursive(params, sol, traj)?;
    let mut p = WavePredictor::new(params, traj.horizon(), k, learn)?;
    run_online(&mut p, traj, &oracle, &innovations)
}
