//! Experiment configuration, loadable from JSON.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::error::HarnessError;
use crate::lds::{InputSpec, LdsParams};

fn default_filters() -> usize {
    20
}

fn default_alpha() -> f64 {
    1e-6
}

fn default_lookback() -> usize {
    20
}

fn default_trials() -> usize {
    100
}

fn default_input() -> InputSpec {
    InputSpec::None
}

fn default_predictors() -> Vec<String> {
    vec!["slip".into(), "truncated".into(), "kalman".into()]
}

/// Full description of one benchmark run.
///
/// The regularizer default of 1e-6 is a tiny constant: theory scales alpha
/// with 1/(R_Theta k T^beta) but with unknown constants, and in practice any
/// small positive value only matters while the empirical feature covariance
/// is still singular.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Optional label used in output metadata.
    #[serde(default)]
    pub name: Option<String>,
    pub system: LdsParams,
    pub horizon: usize,
    /// Number of spectral filters k.
    #[serde(default = "default_filters")]
    pub filters: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Lookback p of the truncated baseline.
    #[serde(default = "default_lookback")]
    pub lookback: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_input", rename = "input")]
    pub input_spec: InputSpec,
    #[serde(default = "default_predictors")]
    pub predictors: Vec<String>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    /// Also write a self-contained SVG chart next to the CSV outputs.
    #[serde(default)]
    pub emit_svg: bool,
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| HarnessError::ConfigInvalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.horizon < 10 {
            return Err(HarnessError::ConfigInvalid(format!(
                "horizon must be at least 10, got {}",
                self.horizon
            )));
        }
        if self.filters < 1 || self.filters > self.horizon {
            return Err(HarnessError::ConfigInvalid(format!(
                "filters must lie in 1..=horizon, got {}",
                self.filters
            )));
        }
        if self.lookback < 1 || self.lookback > self.horizon {
            return Err(HarnessError::ConfigInvalid(format!(
                "lookback must lie in 1..=horizon, got {}",
                self.lookback
            )));
        }
        if self.trials < 1 {
            return Err(HarnessError::ConfigInvalid("trials must be >= 1".into()));
        }
        if !(self.alpha > 0.0) {
            return Err(HarnessError::ConfigInvalid(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        if self.predictors.is_empty() {
            return Err(HarnessError::ConfigInvalid(
                "at least one predictor must be enabled".into(),
            ));
        }
        if self.input_spec.requires_inputs() && !self.system.has_inputs() {
            return Err(HarnessError::ConfigInvalid(
                "input generator given but the system is input-free".into(),
            ));
        }
        if !self.input_spec.requires_inputs() && self.system.has_inputs() {
            return Err(HarnessError::ConfigInvalid(
                "the system takes inputs but no input generator is configured".into(),
            ));
        }
        if let InputSpec::Fixed { values } = &self.input_spec {
            if values.len() < self.horizon {
                return Err(HarnessError::ConfigInvalid(format!(
                    "fixed input sequence has {} steps, horizon is {}",
                    values.len(),
                    self.horizon
                )));
            }
        }
        Ok(())
    }

    /// Predictor list with the oracle reference always included.
    pub fn predictor_names(&self) -> Vec<String> {
        let mut names = self.predictors.clone();
        if !names.iter().any(|n| n == crate::predictor::KALMAN_NAME) {
            names.push(crate::predictor::KALMAN_NAME.to_string());
        }
        names
    }
}
