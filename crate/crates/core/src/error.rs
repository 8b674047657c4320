//! Error types, one enum per subsystem.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LdsError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid horizon {0} (must be >= 1)")]
    InvalidHorizon(usize),
    #[error("matrix {name} must be symmetric positive semi-definite (min eigenvalue {min_eig:e})")]
    NotPositiveSemiDefinite { name: &'static str, min_eig: f64 },
    #[error("Riccati iteration did not converge: residual {residual:e} > tol {tol:e} after {iterations} iterations")]
    NonConvergence {
        residual: f64,
        tol: f64,
        iterations: usize,
    },
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
}

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("invalid horizon {0} (must be >= 1)")]
    InvalidHorizon(usize),
    #[error("eigensolver failed: {0}")]
    EigenFailure(String),
    #[error("lambda {0} outside [-1, 1]")]
    LambdaOutOfRange(f64),
    #[error("filter count {k} out of range for horizon {t}")]
    FilterCountOutOfRange { k: usize, t: usize },
}

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("history length mismatch: {0}")]
    HistoryLengthMismatch(String),
    #[error("step {t} exceeds filter horizon {horizon}")]
    IndexOutOfRange { t: usize, horizon: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

#[derive(Debug, Error)]
pub enum PredictorError {
    #[error("regularization alpha must be positive, got {0}")]
    InvalidAlpha(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("symmetric solve failed; gram matrix is numerically corrupted")]
    SolveFailure,
    #[error("predictor '{name}' is unsupported here: {reason}")]
    Unsupported { name: String, reason: String },
    #[error("unknown predictor '{0}'")]
    UnknownPredictor(String),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Lds(#[from] LdsError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("closed-loop matrix has complex spectrum: max |Im| = {0:e}")]
    ComplexSpectrum(f64),
    #[error("closed-loop matrix is not diagonalizable: {0}")]
    NotDiagonalizable(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Lds(#[from] LdsError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Lds(#[from] LdsError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Predictor(#[from] PredictorError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
}
