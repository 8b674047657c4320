//! Online prediction for partially observed linear dynamical systems.
//!
//! The crate provides:
//!
//! * [`lds`] — system definition, seeded simulation, the stationary Riccati
//!   solver and the exact Kalman predictor in recursive and unrolled form;
//! * [`spectral`] — the Hankel matrix whose top eigenvectors serve as fixed
//!   convolution filters, plus reconstruction-error diagnostics;
//! * [`features`] — spectral feature vectors built from raw signal history;
//! * [`predictor`] — the online regularized least-squares learner over
//!   spectral features and the baseline predictors, all behind a common
//!   [`predictor::OnlinePredictor`] trait with a name-keyed registry;
//! * [`diagnostics`] — relaxed parameter matrices, filter quadratic
//!   functions, conditional feature covariances and small-ball probes;
//! * [`harness`] — experiment configs, seeded multi-trial runs, CSV/SVG
//!   reporting and the invariant verification battery.

pub mod diagnostics;
pub mod error;
pub mod features;
pub mod harness;
pub mod lds;
pub mod predictor;
pub mod rng;
pub mod spectral;

pub use error::{
    DiagnosticsError, FeatureError, HarnessError, LdsError, PredictorError, SpectralError,
};
pub use features::{compute_features, FeatureVector, SignalHistory};
pub use lds::{
    control_matrix, kalman_predict_recursive, kalman_predict_unrolled, observation_matrix,
    simulate, solve_dare, InputSpec, KalmanSolution, LdsParams, Trajectory,
};
pub use predictor::{OnlinePredictor, PredictorContext, PredictorRegistry, RegretTrace};
pub use spectral::{build_hankel, spectral_filter_bank, top_eigenpairs, FilterBank};
