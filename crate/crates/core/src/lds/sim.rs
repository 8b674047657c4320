//! Seeded trajectory simulation.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{InputSpec, KalmanSolution, LdsParams, Trajectory};
use crate::error::LdsError;
use crate::rng::{rng_from_seed, standard_normal_vector};

/// Square root factor L with L L^T = M for symmetric PSD M: Cholesky when M is
/// positive definite, otherwise the eigendecomposition square root with
/// negative eigenvalues clamped at zero.
pub(crate) fn psd_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    if let Some(chol) = m.clone().cholesky() {
        return chol.l();
    }
    let eig = m.clone().symmetric_eigen();
    let scaled = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        eig.eigenvectors[(i, j)] * eig.eigenvalues[j].max(0.0).sqrt()
    });
    scaled
}

fn draw_input(
    spec: &InputSpec,
    n: usize,
    t: usize,
    rng: &mut ChaCha8Rng,
) -> Result<DVector<f64>, LdsError> {
    match spec {
        InputSpec::None => Ok(DVector::zeros(n)),
        InputSpec::IidGaussian { sigma } => Ok(standard_normal_vector(rng, n) * *sigma),
        InputSpec::IidUniform { lo, hi } => {
            Ok(DVector::from_fn(n, |_, _| rng.gen_range(*lo..*hi)))
        }
        InputSpec::Fixed { values } => {
            let row = values.get(t).ok_or_else(|| {
                LdsError::IndexOutOfRange(format!("fixed input sequence shorter than step {}", t + 1))
            })?;
            if row.len() != n {
                return Err(LdsError::DimensionMismatch(format!(
                    "fixed input at step {} has length {}, expected {n}",
                    t + 1,
                    row.len()
                )));
            }
            Ok(DVector::from_column_slice(row))
        }
    }
}

/// Simulates `T` steps of the system, deterministic given `seed`.
///
/// The initial state is drawn as h_1 ~ N(0, P) with P taken from `sol`
/// (the stationary predictive covariance), so the innovation process is
/// stationary from the first step. Draw order per run: h_1 first, then for
/// each step t the input x_t, the measurement noise zeta_t and the process
/// noise eta_t, in that order.
pub fn simulate(
    params: &LdsParams,
    sol: &KalmanSolution,
    horizon: usize,
    input_gen: &InputSpec,
    seed: u64,
) -> Result<Trajectory, LdsError> {
    simulate_with_initial_state(params, sol, horizon, input_gen, seed, None)
}

/// [`simulate`] with an explicit initial latent state instead of the N(0, P) draw.
pub fn simulate_with_initial_state(
    params: &LdsParams,
    sol: &KalmanSolution,
    horizon: usize,
    input_gen: &InputSpec,
    seed: u64,
    initial_state: Option<&DVector<f64>>,
) -> Result<Trajectory, LdsError> {
    if horizon < 1 {
        return Err(LdsError::InvalidHorizon(horizon));
    }
    let d = params.state_dim();
    let n = params.input_dim();
    let m = params.obs_dim();
    if input_gen.requires_inputs() && n == 0 {
        return Err(LdsError::DimensionMismatch(
            "input generator given but the system is input-free".into(),
        ));
    }
    if sol.p.nrows() != d {
        return Err(LdsError::DimensionMismatch(
            "Kalman solution does not match system dimensions".into(),
        ));
    }
    if let Some(h1) = initial_state {
        if h1.len() != d {
            return Err(LdsError::DimensionMismatch(format!(
                "initial state must have dimension {d}"
            )));
        }
    }

    let mut rng = rng_from_seed(seed);
    let p_sqrt = psd_sqrt(&sol.p);
    let q_sqrt = psd_sqrt(&params.q);
    let r_sqrt = psd_sqrt(&params.r);

    let mut h = match initial_state {
        Some(h1) => h1.clone(),
        None => &p_sqrt * standard_normal_vector(&mut rng, d),
    };

    let mut inputs = Vec::with_capacity(horizon);
    let mut observations = Vec::with_capacity(horizon);
    let mut latents = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let x = draw_input(input_gen, n, t, &mut rng)?;
        let zeta = &r_sqrt * standard_normal_vector(&mut rng, m);
        let eta = &q_sqrt * standard_normal_vector(&mut rng, d);
        let y = &params.c * &h + &params.d * &x + zeta;
        latents.push(h.clone());
        observations.push(y);
        let next = &params.a * &h + &params.b * &x + eta;
        inputs.push(x);
        h = next;
    }

    Ok(Trajectory {
        inputs,
        observations,
        latents: Some(latents),
        kalman_predictions: None,
        innovations: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lds::solve_dare;
    use nalgebra::dmatrix;

    #[test]
    fn noiseless_zero_initialized_system_is_identically_zero() {
        let params = LdsParams::without_inputs(
            dmatrix![0.9],
            dmatrix![1.0],
            dmatrix![0.0],
            dmatrix![0.0],
        )
        .unwrap();
        let sol = KalmanSolution {
            p: dmatrix![0.0],
            k: dmatrix![0.0],
            g: dmatrix![0.9],
            v: dmatrix![0.0],
        };
        let traj = simulate(&params, &sol, 20, &InputSpec::None, 1).unwrap();
        assert!(traj.observations.iter().all(|y| y[0] == 0.0));
    }

    #[test]
    fn pure_integrator_holds_initial_state() {
        // d = m = 1, A = C = 1, no noise, h_1 forced to 1: y_t = 1 forever.
        let params = LdsParams::without_inputs(
            dmatrix![1.0],
            dmatrix![1.0],
            dmatrix![0.0],
            dmatrix![0.0],
        )
        .unwrap();
        let sol = KalmanSolution {
            p: dmatrix![0.0],
            k: dmatrix![0.0],
            g: dmatrix![1.0],
            v: dmatrix![0.0],
        };
        let h1 = DVector::from_element(1, 1.0);
        let traj =
            simulate_with_initial_state(&params, &sol, 50, &InputSpec::None, 3, Some(&h1)).unwrap();
        assert!(traj.observations.iter().all(|y| y[0] == 1.0));
    }

    #[test]
    fn same_seed_gives_bitwise_identical_trajectories() {
        let params = LdsParams::new(
            dmatrix![1.0],
            dmatrix![1.0],
            dmatrix![0.001],
            dmatrix![1.0],
            dmatrix![0.001],
            dmatrix![0.001],
        )
        .unwrap();
        let sol = solve_dare(&params, 1e-12, 1_000_000).unwrap();
        let spec = InputSpec::IidGaussian { sigma: 2.0_f64.sqrt() };
        let a = simulate(&params, &sol, 100, &spec, 77).unwrap();
        let b = simulate(&params, &sol, 100, &spec, 77).unwrap();
        for t in 0..100 {
            assert_eq!(a.observations[t], b.observations[t]);
            assert_eq!(a.inputs[t], b.inputs[t]);
        }
        let c = simulate(&params, &sol, 100, &spec, 78).unwrap();
        assert_ne!(a.observations[0], c.observations[0]);
    }

    #[test]
    fn invalid_horizon_is_rejected() {
        let params = LdsParams::without_inputs(
            dmatrix![0.5],
            dmatrix![1.0],
            dmatrix![1.0],
            dmatrix![1.0],
        )
        .unwrap();
        let sol = solve_dare(&params, 1e-12, 10_000).unwrap();
        assert!(matches!(
            simulate(&params, &sol, 0, &InputSpec::None, 0),
            Err(LdsError::InvalidHorizon(0))
        ));
    }

    #[test]
    fn fixed_inputs_are_used_verbatim() {
        let params = LdsParams::new(
            dmatrix![0.0],
            dmatrix![0.0],
            dmatrix![0.0],
            dmatrix![1.0],
            dmatrix![0.0],
            dmatrix![0.0],
        )
        .unwrap();
        let sol = KalmanSolution {
            p: dmatrix![0.0],
            k: dmatrix![0.0],
            g: dmatrix![0.0],
            v: dmatrix![0.0],
        };
        let spec = InputSpec::Fixed {
            values: vec![vec![1.5], vec![-2.0], vec![0.25]],
        };
        let traj = simulate(&params, &sol, 3, &spec, 0).unwrap();
        // y_t = D x_t with D = 1 and everything else zeroed.
        assert_eq!(traj.observations[0][0], 1.5);
        assert_eq!(traj.observations[1][0], -2.0);
        assert_eq!(traj.observations[2][0], 0.25);
    }
}
