//! Feature vectors over filtered signal history.
//!
//! At step t the feature vector is
//!
//! ```text
//!   f_t = [ ytilde_{t-1}(1) | .. | ytilde_{t-1}(k)      (mk output entries)
//!         | xtilde_{t-1}(1) | .. | xtilde_{t-1}(k)      (nk input entries)
//!         | x_t ]                                       (n entries)
//! ```
//!
//! with `ytilde_{t-1}(j) = sum_{i=1}^{t-1} phi_j(t-i) y_i` and the analogous
//! input blocks. Features are recomputed from raw history each step; the
//! weight attached to y_i changes with t, so no constant-time update exists,
//! and the O(t k (m+n)) rebuild keeps the history buffer as the only state.

use nalgebra::DVector;

use crate::error::FeatureError;
use crate::spectral::FilterBank;

/// Contiguous column-major buffer of fixed-dimension signal vectors.
#[derive(Debug, Clone)]
pub struct SignalHistory {
    dim: usize,
    data: Vec<f64>,
}

impl SignalHistory {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            data: Vec::new(),
        }
    }

    pub fn with_capacity(dim: usize, steps: usize) -> Self {
        Self {
            dim,
            data: Vec::with_capacity(dim * steps),
        }
    }

    pub fn from_vectors(dim: usize, vectors: &[DVector<f64>]) -> Result<Self, FeatureError> {
        let mut h = Self::with_capacity(dim, vectors.len());
        for v in vectors {
            h.push(v)?;
        }
        Ok(h)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored steps.
    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.data.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn push(&mut self, v: &DVector<f64>) -> Result<(), FeatureError> {
        if v.len() != self.dim {
            return Err(FeatureError::DimensionMismatch(format!(
                "pushed vector has dimension {}, history holds {}",
                v.len(),
                self.dim
            )));
        }
        self.data.extend_from_slice(v.as_slice());
        Ok(())
    }

    /// The i-th stored vector, 1-based.
    pub fn step(&self, i: usize) -> &[f64] {
        &self.data[(i - 1) * self.dim..i * self.dim]
    }

    pub fn to_vector(&self, i: usize) -> DVector<f64> {
        DVector::from_column_slice(self.step(i))
    }
}

/// Feature vector of length `l = mk + nk + n`, laid out as
/// `[ytilde blocks | xtilde blocks | x_t]`.
#[derive(Debug, Clone)]
pub struct FeatureVector {
    pub t: usize,
    pub values: DVector<f64>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn feature_len(k: usize, m: usize, n: usize) -> usize {
    m * k + n * k + n
}

/// Builds `f_t` from inputs x_1..x_t and observations y_1..y_{t-1}.
///
/// Histories may hold more steps than needed; only the prefixes named above
/// are read. For t = 1 both filtered blocks are exactly zero.
pub fn compute_features(
    bank: &FilterBank,
    inputs: &SignalHistory,
    observations: &SignalHistory,
    t: usize,
) -> Result<FeatureVector, FeatureError> {
    if t < 1 {
        return Err(FeatureError::HistoryLengthMismatch(
            "step index t must be >= 1".into(),
        ));
    }
    if t > bank.horizon() {
        return Err(FeatureError::IndexOutOfRange {
            t,
            horizon: bank.horizon(),
        });
    }
    let m = observations.dim();
    let n = inputs.dim();
    let k = bank.filter_count();
    if observations.len() < t - 1 {
        return Err(FeatureError::HistoryLengthMismatch(format!(
            "need y_1..y_{}, have {} observations",
            t - 1,
            observations.len()
        )));
    }
    if n > 0 && inputs.len() < t {
        return Err(FeatureError::HistoryLengthMismatch(format!(
            "need x_1..x_{t}, have {} inputs",
            inputs.len()
        )));
    }

    let l = feature_len(k, m, n);
    let mut values = DVector::zeros(l);
    {
        let out = values.as_mut_slice();
        // s runs over filter positions: weight phi_j(s) multiplies the signal
        // at step t - s, for s = 1..t-1.
        for s in 1..t {
            let psi = bank.psi_slice(s);
            let y = observations.step(t - s);
            accumulate_block(&mut out[..m * k], psi, y, m);
        }
        if n > 0 {
            let (_, rest) = out.split_at_mut(m * k);
            let (xt_block, last) = rest.split_at_mut(n * k);
            for s in 1..t {
                let psi = bank.psi_slice(s);
                let x = inputs.step(t - s);
                accumulate_block(xt_block, psi, x, n);
            }
            last.copy_from_slice(inputs.step(t));
        }
    }
    Ok(FeatureVector { t, values })
}

#[inline]
fn accumulate_block(out: &mut [f64], psi: &[f64], signal: &[f64], dim: usize) {
    if dim == 1 {
        let v = signal[0];
        for (o, w) in out.iter_mut().zip(psi.iter()) {
            *o += w * v;
        }
    } else {
        for (j, w) in psi.iter().enumerate() {
            let dst = &mut out[j * dim..(j + 1) * dim];
            for (d, s) in dst.iter_mut().zip(signal.iter()) {
                *d += w * s;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{spectral_filter_bank, FilterBank};

    fn history_1d(values: &[f64]) -> SignalHistory {
        let vecs: Vec<DVector<f64>> = values
            .iter()
            .map(|&v| DVector::from_element(1, v))
            .collect();
        SignalHistory::from_vectors(1, &vecs).unwrap()
    }

    #[test]
    fn first_step_has_zero_filtered_blocks() {
        let bank = spectral_filter_bank(8, 3).unwrap();
        let xs = history_1d(&[2.5]);
        let ys = SignalHistory::new(1);
        let f = compute_features(&bank, &xs, &ys, 1).unwrap();
        // layout [ytilde (3) | xtilde (3) | x_1]
        assert_eq!(f.len(), 7);
        for i in 0..6 {
            assert_eq!(f.values[i], 0.0);
        }
        assert_eq!(f.values[6], 2.5);
    }

    #[test]
    fn second_step_is_single_term_sum() {
        // t = 2: ytilde_1(j) = phi_j(1) * y_1.
        let bank = spectral_filter_bank(8, 3).unwrap();
        let xs = SignalHistory::new(0);
        let ys = history_1d(&[4.0]);
        let f = compute_features(&bank, &xs, &ys, 2).unwrap();
        for j in 0..3 {
            assert!((f.values[j] - bank.filter_slice(j)[0] * 4.0).abs() < 1e-15);
        }
    }

    #[test]
    fn matches_kronecker_oracle_on_scalar_case() {
        // m = 1, n = 0, k = 1, t = 4: f_4 = phi(1) y_3 + phi(2) y_2 + phi(3) y_1,
        // checked against the literal (phi^T(3:1) (x) I_1) y_{1:3} product.
        let bank = spectral_filter_bank(6, 1).unwrap();
        let phi = bank.filter_slice(0);
        let (a, b, c) = (phi[0], phi[1], phi[2]);
        let ys = history_1d(&[1.5, -2.0, 0.5]);
        let xs = SignalHistory::new(0);
        let f = compute_features(&bank, &xs, &ys, 4).unwrap();
        // reversed filter prefix times stacked history
        let oracle = c * 1.5 + b * (-2.0) + a * 0.5;
        assert!((f.values[0] - oracle).abs() < 1e-15);
        assert!((f.values[0] - (a * 0.5 + b * (-2.0) + c * 1.5)).abs() < 1e-15);
    }

    #[test]
    fn basis_filters_select_raw_lags() {
        // phi_j = e_j: ytilde_{t-1}(j) = y_{t-j} for t > j.
        let bank = FilterBank::standard_basis(10, 4).unwrap();
        let ys = history_1d(&[10.0, 20.0, 30.0, 40.0, 50.0, 60.0]);
        let xs = SignalHistory::new(0);
        let t = 7;
        let f = compute_features(&bank, &xs, &ys, t).unwrap();
        for j in 1..=4 {
            assert_eq!(f.values[j - 1], ys.step(t - j)[0]);
        }
    }

    #[test]
    fn step_beyond_filter_horizon_is_rejected() {
        let bank = spectral_filter_bank(4, 2).unwrap();
        let ys = history_1d(&[1.0, 2.0, 3.0, 4.0]);
        let xs = SignalHistory::new(0);
        assert!(matches!(
            compute_features(&bank, &xs, &ys, 5),
            Err(FeatureError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn short_history_is_rejected() {
        let bank = spectral_filter_bank(8, 2).unwrap();
        let ys = history_1d(&[1.0]);
        let xs = SignalHistory::new(0);
        assert!(matches!(
            compute_features(&bank, &xs, &ys, 4),
            Err(FeatureError::HistoryLengthMismatch(_))
        ));
    }
}
