//! Streaming aggregation of per-trial series into summary statistics.

use std::collections::BTreeMap;

use crate::predictor::{RegretTrace, SeriesStatus};

/// 99% two-sided normal quantile.
const Z99: f64 = 2.576;

/// Up to `points` logarithmically spaced integer steps in [1, horizon],
/// deduplicated, always ending exactly at the horizon.
pub fn log_grid(horizon: usize, points: usize) -> Vec<usize> {
    assert!(horizon >= 1 && points >= 2);
    let lo = 0.0f64;
    let hi = (horizon as f64).ln();
    let mut grid: Vec<usize> = (0..points)
        .map(|i| {
            let f = lo + (hi - lo) * i as f64 / (points - 1) as f64;
            f.exp().round().clamp(1.0, horizon as f64) as usize
        })
        .collect();
    grid.dedup();
    grid
}

#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub predictor: String,
    pub t: usize,
    /// Mean of ||mhat_t - m_t||^2 across trials at this step.
    pub mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Debug, Clone)]
pub struct PredictorSummary {
    /// Trials in which the predictor produced a series.
    pub present_trials: usize,
    /// First failure reason observed, if any trial was absent.
    pub absent_reason: Option<String>,
    /// Mean error over the final decade t in (T/10, T].
    pub final_decade_mean: f64,
    /// Mean error against the oracle over the final window t in [T/2, T].
    pub final_window_mean: f64,
    /// Mean error against the observations over the same window.
    pub final_window_mean_vs_obs: f64,
    /// Per-trial cumulative regret at the horizon.
    pub regret_at_horizon: Vec<f64>,
    /// Per-trial cumulative loss L(t) = sum ||mhat - m||^2 at T/2 and T.
    pub loss_at_half: Vec<f64>,
    pub loss_at_horizon: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SummaryTable {
    pub horizon: usize,
    pub trials: usize,
    pub grid: Vec<usize>,
    pub rows: Vec<SummaryRow>,
    pub per_predictor: BTreeMap<String, PredictorSummary>,
}

impl SummaryTable {
    pub fn row(&self, predictor: &str, t: usize) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.predictor == predictor && r.t == t)
    }

    pub fn final_grid_point(&self) -> usize {
        *self.grid.last().expect("non-empty grid")
    }
}

struct PredictorAcc {
    grid_sum: Vec<f64>,
    grid_sumsq: Vec<f64>,
    decade_sum: f64,
    decade_count: usize,
    window_sum: f64,
    window_obs_sum: f64,
    window_count: usize,
    regret_at_horizon: Vec<f64>,
    loss_at_half: Vec<f64>,
    loss_at_horizon: Vec<f64>,
    present_trials: usize,
    absent_reason: Option<String>,
}

impl PredictorAcc {
    fn new(grid_len: usize) -> Self {
        Self {
            grid_sum: vec![0.0; grid_len],
            grid_sumsq: vec![0.0; grid_len],
            decade_sum: 0.0,
            decade_count: 0,
            window_sum: 0.0,
            window_obs_sum: 0.0,
            window_count: 0,
            regret_at_horizon: Vec::new(),
            loss_at_half: Vec::new(),
            loss_at_horizon: Vec::new(),
            present_trials: 0,
            absent_reason: None,
        }
    }
}

/// Folds traces trial by trial; trial order must be deterministic for the
/// resulting floating-point sums to be reproducible.
pub struct SummaryAccumulator {
    horizon: usize,
    trials_seen: usize,
    grid: Vec<usize>,
    accs: BTreeMap<String, PredictorAcc>,
}

impl SummaryAccumulator {
    pub fn new(horizon: usize, names: &[String]) -> Self {
        let grid = log_grid(horizon, 100);
        let accs = names
            .iter()
            .map(|n| (n.clone(), PredictorAcc::new(grid.len())))
            .collect();
        Self {
            horizon,
            trials_seen: 0,
            grid,
            accs,
        }
    }

    pub fn fold(&mut self, trace: &RegretTrace) {
        self.trials_seen += 1;
        let horizon = self.horizon;
        let decade_start = horizon / 10; // exclusive
        let window_start = horizon / 2; // inclusive
        for (name, series) in trace.iter() {
            let Some(acc) = self.accs.get_mut(name) else {
                continue;
            };
            match &series.status {
                SeriesStatus::Absent { reason } => {
                    if acc.absent_reason.is_none() {
                        acc.absent_reason = Some(reason.clone());
                    }
                    continue;
                }
                SeriesStatus::Present => {}
            }
            acc.present_trials += 1;
            let err = &series.err_vs_kalman;
            for (gi, &t) in self.grid.iter().enumerate() {
                let v = err[t - 1];
                acc.grid_sum[gi] += v;
                acc.grid_sumsq[gi] += v * v;
            }
            let mut half_loss = 0.0;
            let mut full_loss = 0.0;
            for (idx, &v) in err.iter().enumerate() {
                let t = idx + 1;
                full_loss += v;
                if t == horizon / 2 {
                    half_loss = full_loss;
                }
                if t > decade_start {
                    acc.decade_sum += v;
                    acc.decade_count += 1;
                }
                if t >= window_start {
                    acc.window_sum += v;
                    acc.window_obs_sum += series.err_vs_obs[idx];
                    acc.window_count += 1;
                }
            }
            acc.loss_at_half.push(half_loss);
            acc.loss_at_horizon.push(full_loss);
            acc.regret_at_horizon
                .push(series.cum_regret.last().copied().unwrap_or(0.0));
        }
    }

    pub fn finish(self) -> SummaryTable {
        let mut rows = Vec::new();
        let mut per_predictor = BTreeMap::new();
        for (name, acc) in self.accs {
            let n = acc.present_trials;
            if n > 0 {
                for (gi, &t) in self.grid.iter().enumerate() {
                    let mean = acc.grid_sum[gi] / n as f64;
                    let half = ci_half_width(acc.grid_sum[gi], acc.grid_sumsq[gi], n);
                    rows.push(SummaryRow {
                        predictor: name.clone(),
                        t,
                        mean,
                        ci_lo: mean - half,
                        ci_hi: mean + half,
                    });
                }
            }
            per_predictor.insert(
                name,
                PredictorSummary {
                    present_trials: n,
                    absent_reason: acc.absent_reason,
                    final_decade_mean: mean_or_nan(acc.decade_sum, acc.decade_count),
                    final_window_mean: mean_or_nan(acc.window_sum, acc.window_count),
                    final_window_mean_vs_obs: mean_or_nan(acc.window_obs_sum, acc.window_count),
                    regret_at_horizon: acc.regret_at_horizon,
                    loss_at_half: acc.loss_at_half,
                    loss_at_horizon: acc.loss_at_horizon,
                },
            );
        }
        SummaryTable {
            horizon: self.horizon,
            trials: self.trials_seen,
            grid: self.grid,
            rows,
            per_predictor,
        }
    }
}

fn mean_or_nan(sum: f64, count: usize) -> f64 {
    if count == 0 {
        f64::NAN
    } else {
        sum / count as f64
    }
}

/// Half-width 2.576 * sd / sqrt(n) with the sample standard deviation.
fn ci_half_width(sum: f64, sumsq: f64, n: usize) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = ((sumsq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    Z99 * (var / nf).sqrt()
}

pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
