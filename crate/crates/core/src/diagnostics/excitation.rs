//! Excitation diagnostics: the filter quadratic function, the conditional
//! feature covariance, and an empirical block martingale small-ball probe.

use nalgebra::DMatrix;

use crate::error::DiagnosticsError;
use crate::features::{compute_features, SignalHistory};
use crate::lds::{KalmanSolution, LdsParams};
use crate::rng::{derive_seed, rng_from_seed, standard_normal_vector, unit_sphere_direction};
use crate::spectral::FilterBank;

/// psi_i (x) I_dim as a (k*dim) x dim matrix.
fn psi_kron_identity(psi: &[f64], dim: usize) -> DMatrix<f64> {
    let k = psi.len();
    let mut out = DMatrix::zeros(k * dim, dim);
    for (j, w) in psi.iter().enumerate() {
        for r in 0..dim {
            out[(j * dim + r, r)] = *w;
        }
    }
    out
}

/// Filter quadratic function
/// `Omega_t(A; psi) = sum_{tau=1}^{t-1} S_tau S_tau^T` with
/// `S_tau = psi_tau^{(d)} + psi_{tau-1}^{(d)} A + ... + psi_1^{(d)} A^{tau-1}`,
/// accumulated through the recurrence `S_tau = psi_tau^{(d)} + S_{tau-1} A`
/// (no explicit matrix powers). Returns a kd x kd PSD matrix.
pub fn filter_quadratic(
    bank: &FilterBank,
    a: &DMatrix<f64>,
    t: usize,
) -> Result<DMatrix<f64>, DiagnosticsError> {
    if a.nrows() != a.ncols() {
        return Err(DiagnosticsError::DimensionMismatch(
            "A must be square".into(),
        ));
    }
    if t < 2 {
        return Err(DiagnosticsError::InvalidArgument(
            "filter quadratic function needs t >= 2".into(),
        ));
    }
    if t - 1 > bank.horizon() {
        return Err(DiagnosticsError::InvalidArgument(format!(
            "t = {t} exceeds the filter horizon {}",
            bank.horizon()
        )));
    }
    let d = a.nrows();
    let k = bank.filter_count();
    let mut omega = DMatrix::zeros(k * d, k * d);
    let mut s = psi_kron_identity(bank.psi_slice(1), d);
    omega += &s * s.transpose();
    for tau in 2..t {
        s = psi_kron_identity(bank.psi_slice(tau), d) + &s * a;
        omega += &s * s.transpose();
    }
    let omega_t = omega.transpose();
    Ok((omega + omega_t) * 0.5)
}

#[derive(Debug, Clone)]
pub struct FilterConditionRow {
    pub t: usize,
    pub min_eigenvalue: f64,
    pub trace: f64,
    /// PSD up to rounding: min eigenvalue >= -1e-9 * trace.
    pub psd: bool,
}

#[derive(Debug, Clone)]
pub struct FilterConditionReport {
    pub s: usize,
    pub rows: Vec<FilterConditionRow>,
}

impl FilterConditionReport {
    pub fn all_psd(&self) -> bool {
        self.rows.iter().all(|r| r.psd)
    }
}

/// Minimum eigenvalues of `t * Omega_{s/2}(A; psi) - Omega_{t+1}(A; psi)`
/// for every t in `t_range`. Report-only: rows record the margin, nothing
/// fails.
pub fn check_filter_condition(
    bank: &FilterBank,
    a: &DMatrix<f64>,
    s: usize,
    t_range: std::ops::RangeInclusive<usize>,
) -> Result<FilterConditionReport, DiagnosticsError> {
    if s % 2 != 0 || s < 4 {
        return Err(DiagnosticsError::InvalidArgument(format!(
            "s must be even and >= 4, got {s}"
        )));
    }
    let (t_lo, t_hi) = (*t_range.start(), *t_range.end());
    if t_lo < 2 || t_hi < t_lo {
        return Err(DiagnosticsError::InvalidArgument(
            "t range must start at 2 or later and be non-empty".into(),
        ));
    }
    if t_hi > bank.horizon() {
        return Err(DiagnosticsError::InvalidArgument(format!(
            "t range end {t_hi} exceeds the filter horizon {}",
            bank.horizon()
        )));
    }
    let d = a.nrows();
    let omega_half = filter_quadratic(bank, a, s / 2)?;

    // grow Omega_{t+1} incrementally across the scan
    let mut rows = Vec::new();
    let mut srun = psi_kron_identity(bank.psi_slice(1), d);
    let mut omega = &srun * srun.transpose();
    for tau in 2..=t_hi {
        srun = psi_kron_identity(bank.psi_slice(tau), d) + &srun * a;
        omega += &srun * srun.transpose();
        let t = tau; // omega now equals Omega_{t+1}
        if t < t_lo {
            continue;
        }
        let m = &omega_half * (t as f64) - &omega;
        let m = (&m + m.transpose()) * 0.5;
        let eigs = m.clone().symmetric_eigen().eigenvalues;
        let min_eigenvalue = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        let trace = m.trace();
        rows.push(FilterConditionRow {
            t,
            min_eigenvalue,
            trace,
            psd: min_eigenvalue >= -1e-9 * trace.abs().max(1e-300),
        });
    }
    Ok(FilterConditionReport { s, rows })
}

/// Conditional feature covariance `Gamma_i = cov(f_{t+i} | F_t)` for the
/// output-feature process of an input-free system; independent of t.
///
/// ```text
///   Gamma_i = sum_{tau=1}^{i-1} Sc_tau Q Sc_tau^T
///           + sum_{tau=1}^{i-1} (psi_tau psi_tau^T) (x) R
/// ```
///
/// with `Sc_tau = psi_tau^{(m)} C + Sc_{tau-1} A`. Returns an mk x mk PSD
/// matrix; `Gamma_1 = 0` (f_{t+1} is F_t-measurable).
pub fn conditional_feature_covariance(
    params: &LdsParams,
    bank: &FilterBank,
    i: usize,
) -> Result<DMatrix<f64>, DiagnosticsError> {
    if params.has_inputs() {
        return Err(DiagnosticsError::Unsupported(
            "conditional feature covariance is defined for input-free systems".into(),
        ));
    }
    if i < 1 {
        return Err(DiagnosticsError::InvalidArgument("i must be >= 1".into()));
    }
    if i > 1 && i - 1 > bank.horizon() {
        return Err(DiagnosticsError::InvalidArgument(format!(
            "i = {i} exceeds the filter horizon {}",
            bank.horizon()
        )));
    }
    let m = params.obs_dim();
    let k = bank.filter_count();
    let mut gamma = DMatrix::zeros(m * k, m * k);
    if i == 1 {
        return Ok(gamma);
    }
    let mut sc: Option<DMatrix<f64>> = None;
    for tau in 1..i {
        let psi = bank.psi_slice(tau);
        let psi_c = psi_kron_identity(psi, m) * &params.c;
        let cur = match sc.take() {
            None => psi_c,
            Some(prev) => psi_c + prev * &params.a,
        };
        gamma += &cur * &params.q * cur.transpose();
        // (psi_tau psi_tau^T) (x) R
        for ja in 0..k {
            for jb in 0..k {
                let w = psi[ja] * psi[jb];
                if w != 0.0 {
                    for ra in 0..m {
                        for rb in 0..m {
                            gamma[(ja * m + ra, jb * m + rb)] += w * params.r[(ra, rb)];
                        }
                    }
                }
            }
        }
        sc = Some(cur);
    }
    let gamma_t = gamma.transpose();
    Ok((gamma + gamma_t) * 0.5)
}

#[derive(Debug, Clone)]
pub struct BmsbDirection {
    /// Block estimate (1/s) sum_i Phat_i.
    pub estimate: f64,
    pub stderr: f64,
    /// Phat_i = empirical P(|omega^T f_{t+i}| >= threshold) for i = 1..s.
    pub per_step: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct BmsbReport {
    pub s: usize,
    pub conditioning_step: usize,
    pub num_draws: usize,
    pub per_direction: Vec<BmsbDirection>,
}

impl BmsbReport {
    /// Direction with the smallest estimated small-ball probability.
    pub fn min_estimate(&self) -> (f64, f64) {
        self.per_direction
            .iter()
            .map(|d| (d.estimate, d.stderr))
            .min_by(|a, b| a.0.partial_cmp(&b.0).expect("finite estimates"))
            .expect("at least one direction")
    }
}

/// Monte-Carlo estimate of the block small-ball probability
/// `min_omega (1/s) sum_{i=1}^s P(|omega^T f_{t+i}| >= sqrt(omega^T Gamma_{s/2} omega) | F_t)`
/// over random unit directions, conditioning on one sampled past and drawing
/// fresh future noise. Input-free systems only.
pub fn bmsb_empirical(
    params: &LdsParams,
    sol: &KalmanSolution,
    bank: &FilterBank,
    s: usize,
    t: usize,
    num_mc: usize,
    num_directions: usize,
    seed: u64,
) -> Result<BmsbReport, DiagnosticsError> {
    if params.has_inputs() {
        return Err(DiagnosticsError::Unsupported(
            "the small-ball probe is defined for input-free systems".into(),
        ));
    }
    if s % 2 != 0 || s < 2 {
        return Err(DiagnosticsError::InvalidArgument(format!(
            "s must be even and >= 2, got {s}"
        )));
    }
    if t + s > bank.horizon() {
        return Err(DiagnosticsError::InvalidArgument(format!(
            "t + s = {} exceeds the filter horizon {}",
            t + s,
            bank.horizon()
        )));
    }
    if num_mc < 2 || num_directions < 1 {
        return Err(DiagnosticsError::InvalidArgument(
            "need at least 2 draws and 1 direction".into(),
        ));
    }
    let d = params.state_dim();
    let m = params.obs_dim();
    let k = bank.filter_count();
    let dim = m * k;

    let gamma = conditional_feature_covariance(params, bank, s / 2)?;

    let p_sqrt = crate::lds::sim_psd_sqrt(&sol.p);
    let q_sqrt = crate::lds::sim_psd_sqrt(&params.q);
    let r_sqrt = crate::lds::sim_psd_sqrt(&params.r);

    // one sampled past: h_1 ~ N(0, P), then t observation steps
    let mut rng = rng_from_seed(derive_seed(seed, 0));
    let mut h = &p_sqrt * standard_normal_vector(&mut rng, d);
    let mut past = SignalHistory::with_capacity(m, t + s);
    for _ in 0..t {
        let y = &params.c * &h + &r_sqrt * standard_normal_vector(&mut rng, m);
        past.push(&y).expect("dims match");
        h = &params.a * &h + &q_sqrt * standard_normal_vector(&mut rng, d);
    }
    let h_after_past = h;

    // fresh futures, shared across all directions
    let empty_inputs = SignalHistory::new(0);
    let mut features = Vec::with_capacity(num_mc);
    for draw in 0..num_mc {
        let mut draw_rng = rng_from_seed(derive_seed(seed, 1 + draw as u64));
        let mut ys = past.clone();
        let mut h = h_after_past.clone();
        // f_{t+i} needs y up to index t+i-1; extend through t+s-1
        for _ in 0..(s - 1) {
            let y = &params.c * &h + &r_sqrt * standard_normal_vector(&mut draw_rng, m);
            ys.push(&y).expect("dims match");
            h = &params.a * &h + &q_sqrt * standard_normal_vector(&mut draw_rng, d);
        }
        let mut per_i = Vec::with_capacity(s);
        for i in 1..=s {
            let f = compute_features(bank, &empty_inputs, &ys, t + i)?;
            per_i.push(f.values);
        }
        features.push(per_i);
    }

    let mut dir_rng = rng_from_seed(derive_seed(seed, 0x_d1_5e_c7));
    let mut per_direction = Vec::with_capacity(num_directions);
    for _ in 0..num_directions {
        let omega = unit_sphere_direction(&mut dir_rng, dim);
        let threshold = (omega.dot(&(&gamma * &omega))).max(0.0).sqrt();
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let mut step_hits = vec![0usize; s];
        for per_i in &features {
            let mut hits = 0usize;
            for (i, f) in per_i.iter().enumerate() {
                if omega.dot(f).abs() >= threshold {
                    hits += 1;
                    step_hits[i] += 1;
                }
            }
            let frac = hits as f64 / s as f64;
            sum += frac;
            sum_sq += frac * frac;
        }
        let nmc = num_mc as f64;
        let mean = sum / nmc;
        let var = ((sum_sq - nmc * mean * mean) / (nmc - 1.0)).max(0.0);
        per_direction.push(BmsbDirection {
            estimate: mean,
            stderr: (var / nmc).sqrt(),
            per_step: step_hits.iter().map(|&h| h as f64 / nmc).collect(),
        });
    }

    Ok(BmsbReport {
        s,
        conditioning_step: t,
        num_draws: num_mc,
        per_direction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::spectral_filter_bank;
    use nalgebra::dmatrix;

    #[test]
    fn omega_at_t2_is_first_rank_one_term() {
        let bank = spectral_filter_bank(10, 2).unwrap();
        let a = dmatrix![0.5];
        let omega = filter_quadratic(&bank, &a, 2).unwrap();
        let psi1 = psi_kron_identity(bank.psi_slice(1), 1);
        let expect = &psi1 * psi1.transpose();
        assert!((omega - expect).norm() < 1e-14);
    }

    #[test]
    fn omega_with_zero_a_drops_cross_terms() {
        // A = 0: Omega_t = sum_{tau<t} psi_tau psi_tau^T (x) I_d.
        let bank = spectral_filter_bank(10, 3).unwrap();
        let a = DMatrix::zeros(2, 2);
        let t = 6;
        let omega = filter_quadratic(&bank, &a, t).unwrap();
        let mut expect = DMatrix::zeros(6, 6);
        for tau in 1..t {
            let p = psi_kron_identity(bank.psi_slice(tau), 2);
            expect += &p * p.transpose();
        }
        assert!((omega - expect).norm() < 1e-13);
    }

    #[test]
    fn omega_closed_form_for_constant_filter() {
        // d = 1, k = 1, phi = (1,..,1)/sqrt(T), A = 1:
        // S_tau = tau / sqrt(T), so Omega_t = sum_{tau<t} tau^2 / T.
        let t_horizon = 16usize;
        let inv = 1.0 / (t_horizon as f64).sqrt();
        let mut filters = DMatrix::zeros(t_horizon, 1);
        for i in 0..t_horizon {
            filters[(i, 0)] = inv;
        }
        // hand-built bank through the basis constructor path is not possible
        // here, so emulate the recurrence directly
        let a = dmatrix![1.0];
        let mut s_val = 0.0;
        let mut expect = 0.0;
        for _tau in 1..8 {
            s_val += inv;
            expect += s_val * s_val;
        }
        // same computation through filter_quadratic on a synthetic bank
        let bank = synthetic_bank(filters);
        let omega = filter_quadratic(&bank, &a, 8).unwrap();
        assert!((omega[(0, 0)] - expect).abs() < 1e-12);
    }

    fn synthetic_bank(filters: DMatrix<f64>) -> FilterBank {
        // orthonormal single column; go through the public eigen path of an
        // outer-product matrix whose top eigenvector is the given filter
        let h = &filters * filters.transpose();
        crate::spectral::top_eigenpairs(&h, 1).unwrap()
    }

    #[test]
    fn gamma_one_is_zero_and_gamma_two_matches_formula() {
        let params = crate::lds::LdsParams::without_inputs(
            dmatrix![0.7],
            dmatrix![1.0],
            dmatrix![0.3],
            dmatrix![0.4],
        )
        .unwrap();
        let bank = spectral_filter_bank(12, 2).unwrap();
        let g1 = conditional_feature_covariance(&params, &bank, 1).unwrap();
        assert_eq!(g1.norm(), 0.0);
        let g2 = conditional_feature_covariance(&params, &bank, 2).unwrap();
        // Gamma_2 = (psi_1 C) Q (psi_1 C)^T + psi_1 R psi_1^T for m = d = 1
        let psi1 = bank.psi_slice(1);
        let mut expect = DMatrix::zeros(2, 2);
        for a in 0..2 {
            for b in 0..2 {
                expect[(a, b)] = psi1[a] * psi1[b] * (1.0 * 0.3 * 1.0 + 0.4);
            }
        }
        assert!((g2 - expect).norm() < 1e-14);
    }

    #[test]
    fn inputs_make_gamma_unsupported() {
        let params = crate::lds::LdsParams::new(
            dmatrix![0.5],
            dmatrix![1.0],
            dmatrix![1.0],
            dmatrix![0.0],
            dmatrix![0.1],
            dmatrix![0.1],
        )
        .unwrap();
        let bank = spectral_filter_bank(8, 2).unwrap();
        assert!(matches!(
            conditional_feature_covariance(&params, &bank, 3),
            Err(DiagnosticsError::Unsupported(_))
        ));
    }

    #[test]
    fn filter_condition_with_zero_a_and_wide_s_holds() {
        // A = 0 and s/2 > k: the left term dominates by counting.
        let bank = spectral_filter_bank(64, 3).unwrap();
        let a = DMatrix::zeros(1, 1);
        let report = check_filter_condition(&bank, &a, 10, 10..=40).unwrap();
        assert!(report.all_psd());
    }
}
