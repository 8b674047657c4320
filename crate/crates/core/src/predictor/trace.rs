//! Per-step error series and cumulative regret for a set of predictors on
//! one trajectory.

use std::collections::BTreeMap;

use super::OnlineRun;

pub const KALMAN_NAME: &str = "kalman";

#[derive(Debug, Clone, PartialEq)]
pub enum SeriesStatus {
    Present,
    /// The predictor could not run (e.g. wave on an input-free system).
    Absent { reason: String },
}

#[derive(Debug, Clone)]
pub struct PredictorSeries {
    pub status: SeriesStatus,
    /// ||y_t - mhat_t||^2 per step.
    pub err_vs_obs: Vec<f64>,
    /// ||mhat_t - m_t||^2 per step.
    pub err_vs_kalman: Vec<f64>,
    /// e_t^T (mhat_t - m_t) per step.
    pub innovation_cross: Vec<f64>,
    /// regret[t] = sum_{i<=t} (err_vs_obs[i] - err_vs_obs_kalman[i]).
    pub cum_regret: Vec<f64>,
}

impl PredictorSeries {
    pub fn is_present(&self) -> bool {
        matches!(self.status, SeriesStatus::Present)
    }
}

#[derive(Debug, Clone)]
pub struct RegretTrace {
    horizon: usize,
    series: BTreeMap<String, PredictorSeries>,
}

impl RegretTrace {
    pub fn new(horizon: usize) -> Self {
        Self {
            horizon,
            series: BTreeMap::new(),
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn insert_run(&mut self, name: impl Into<String>, run: OnlineRun) {
        self.series.insert(
            name.into(),
            PredictorSeries {
                status: SeriesStatus::Present,
                err_vs_obs: run.err_vs_obs,
                err_vs_kalman: run.err_vs_kalman,
                innovation_cross: run.innovation_cross,
                cum_regret: Vec::new(),
            },
        );
    }

    pub fn insert_absent(&mut self, name: impl Into<String>, reason: impl Into<String>) {
        self.series.insert(
            name.into(),
            PredictorSeries {
                status: SeriesStatus::Absent {
                    reason: reason.into(),
                },
                err_vs_obs: Vec::new(),
                err_vs_kalman: Vec::new(),
                innovation_cross: Vec::new(),
                cum_regret: Vec::new(),
            },
        );
    }

    /// Fills `cum_regret` for every present series from the summation
    /// identity against the oracle's observation errors. No-op for series
    /// recorded before the oracle is present.
    pub fn compute_regrets(&mut self) {
        let oracle_obs = match self.series.get(KALMAN_NAME) {
            Some(s) if s.is_present() => s.err_vs_obs.clone(),
            _ => return,
        };
        for entry in self.series.values_mut() {
            if !entry.is_present() {
                continue;
            }
            let mut acc = 0.0;
            entry.cum_regret = entry
                .err_vs_obs
                .iter()
                .zip(oracle_obs.iter())
                .map(|(a, b)| {
                    acc += a - b;
                    acc
                })
                .collect();
        }
    }

    pub fn names(&self) -> Vec<&str> {
        self.series.keys().map(|s| s.as_str()).collect()
    }

    pub fn series(&self, name: &str) -> Option<&PredictorSeries> {
        self.series.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &PredictorSeries)> {
        self.series.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn total_regret(&self, name: &str) -> Option<f64> {
        self.series
            .get(name)
            .filter(|s| s.is_present())
            .and_then(|s| s.cum_regret.last().copied())
    }

    /// Relative residual of the decomposition
    /// `Regret(T) = sum ||mhat - m||^2 - 2 sum e^T (mhat - m)`.
    pub fn decomposition_residual(&self, name: &str) -> Option<f64> {
        let s = self.series.get(name).filter(|s| s.is_present())?;
        let regret = *s.cum_regret.last()?;
        let loss: f64 = s.err_vs_kalman.iter().sum();
        let cross: f64 = s.innovation_cross.iter().sum();
        let rhs = loss - 2.0 * cross;
        Some((regret - rhs).abs() / (1.0 + regret.abs().max(rhs.abs())))
    }
}
