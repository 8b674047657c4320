//! Built-in benchmark systems.

use nalgebra::{dmatrix, DMatrix};

use super::config::ExperimentConfig;
use crate::lds::{InputSpec, LdsParams};

pub fn preset_names() -> Vec<&'static str> {
    vec![
        "fig2-system1",
        "fig2-system2",
        "fig2-system3",
        "sweep-scalar",
    ]
}

/// Returns the named builtin config, or None for an unknown name.
///
/// All presets run 10^4 steps with k = 20 filters, lookback 20 and 100
/// trials; horizon, trial count and hyperparameters can be overridden after
/// loading.
pub fn preset(name: &str) -> Option<ExperimentConfig> {
    let (system, input_spec, predictors, base_seed): (LdsParams, InputSpec, Vec<String>, u64) =
        match name {
            // scalar long-memory system: A = B = D = 1, C = Q = R = 1e-3,
            // x_t ~ N(0, 2); closed loop G ~ 0.999
            "fig2-system1" => (
                LdsParams::new(
                    dmatrix![1.0],
                    dmatrix![1.0],
                    dmatrix![0.001],
                    dmatrix![1.0],
                    dmatrix![0.001],
                    dmatrix![0.001],
                )
                .expect("valid preset"),
                InputSpec::IidGaussian {
                    sigma: 2.0_f64.sqrt(),
                },
                vec![
                    "slip".into(),
                    "truncated".into(),
                    "wave".into(),
                    "kalman".into(),
                ],
                1000,
            ),
            // marginally stable two-state system without inputs;
            // G has long forecast memory (eigenvalue magnitudes ~0.99, 0.93)
            "fig2-system2" => (
                LdsParams::without_inputs(
                    dmatrix![-1.0, 0.0; 0.0, 1.0],
                    dmatrix![0.1, 0.5],
                    dmatrix![4e-3, 6e-3; 6e-3, 1e-2],
                    dmatrix![0.5],
                )
                .expect("valid preset"),
                InputSpec::None,
                vec![
                    "slip".into(),
                    "truncated".into(),
                    "wave".into(),
                    "kalman".into(),
                ],
                2000,
            ),
            // non-symmetric A with rho(A) = 1 but ||A||_2 > 1: observations
            // grow polynomially
            "fig2-system3" => (
                LdsParams::new(
                    dmatrix![1.0, 0.0; 0.1, 1.0],
                    dmatrix![1.0; 1.0],
                    dmatrix![0.0, 0.1; 0.1, 1.0],
                    dmatrix![1.0; 1.0],
                    DMatrix::identity(2, 2) * 1e-3,
                    DMatrix::identity(2, 2),
                )
                .expect("valid preset"),
                InputSpec::IidUniform {
                    lo: -0.01,
                    hi: 0.01,
                },
                vec![
                    "slip".into(),
                    "truncated".into(),
                    "wave".into(),
                    "kalman".into(),
                ],
                3000,
            ),
            // scalar system for the filter-count sweep: A = B = C = D = 1,
            // Q = R = 1e-3, x_t ~ N(0, 0.5)
            "sweep-scalar" => (
                LdsParams::new(
                    dmatrix![1.0],
                    dmatrix![1.0],
                    dmatrix![1.0],
                    dmatrix![1.0],
                    dmatrix![0.001],
                    dmatrix![0.001],
                )
                .expect("valid preset"),
                InputSpec::IidGaussian {
                    sigma: 0.5_f64.sqrt(),
                },
                vec!["slip".into(), "truncated".into(), "kalman".into()],
                4000,
            ),
            _ => return None,
        };
    Some(ExperimentConfig {
        name: Some(name.to_string()),
        system,
        horizon: 10_000,
        filters: 20,
        alpha: 1e-6,
        lookback: 20,
        trials: 100,
        base_seed,
        input_spec,
        predictors,
        out_dir: None,
        emit_svg: false,
    })
}
