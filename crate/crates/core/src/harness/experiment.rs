//! Seeded multi-trial experiment execution.

use rayon::prelude::*;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::sync::Arc;

use super::config::ExperimentConfig;
use super::report;
use super::summary::{SummaryAccumulator, SummaryTable};
use crate::error::HarnessError;
use crate::lds::{
    kalman_predict_recursive, simulate, solve_dare, KalmanSolution, LdsParams,
    DEFAULT_DARE_MAX_ITER, DEFAULT_DARE_TOL,
};
use crate::predictor::{run_online, PredictorContext, PredictorRegistry, RegretTrace};
use crate::spectral::{spectral_filter_bank, wave_filter_bank, FilterBank};

/// Trials processed per parallel batch before sequential aggregation; bounds
/// peak memory at a few full series regardless of the trial count.
const TRIAL_CHUNK: usize = 8;

#[derive(Debug)]
pub struct ExperimentResult {
    pub summary: SummaryTable,
    /// Directory the CSV/JSON/SVG artifacts were written to, when configured.
    pub out_dir: Option<PathBuf>,
}

/// Runs one trial: simulate with `seed`, run every named predictor online,
/// and assemble the regret trace. Predictor failures mark that series absent;
/// a simulation failure marks the whole trial absent.
pub fn run_single_trial(
    cfg: &ExperimentConfig,
    params: &Arc<LdsParams>,
    sol: &Arc<KalmanSolution>,
    bank: &Arc<FilterBank>,
    wave_bank: &Option<Arc<FilterBank>>,
    registry: &PredictorRegistry,
    names: &[String],
    seed: u64,
) -> RegretTrace {
    let mut trace = RegretTrace::new(cfg.horizon);
    let traj = match simulate(params, sol, cfg.horizon, &cfg.input_spec, seed) {
        Ok(t) => t,
        Err(e) => {
            for name in names {
                trace.insert_absent(name.clone(), format!("simulation failed: {e}"));
            }
            return trace;
        }
    };
    let (oracle, innovations) = match kalman_predict_recursive(params, sol, &traj) {
        Ok(pair) => pair,
        Err(e) => {
            for name in names {
                trace.insert_absent(name.clone(), format!("oracle failed: {e}"));
            }
            return trace;
        }
    };
    let mut ctx = PredictorContext::new(
        params.clone(),
        sol.clone(),
        bank.clone(),
        cfg.alpha,
        cfg.lookback,
    );
    if let Some(wb) = wave_bank {
        ctx = ctx.with_wave_bank(wb.clone());
    }
    for name in names {
        match registry.create(name, &ctx) {
            Ok(mut predictor) => {
                match run_online(predictor.as_mut(), &traj, &oracle, &innovations) {
                    Ok(run) => trace.insert_run(name.clone(), run),
                    Err(e) => trace.insert_absent(name.clone(), e.to_string()),
                }
            }
            Err(e) => trace.insert_absent(name.clone(), e.to_string()),
        }
    }
    trace.compute_regrets();
    trace
}

/// Runs the configured number of trials (seed = base_seed + j for trial j),
/// aggregates summary statistics, and writes `trials.csv`, `summary.csv`,
/// `run_metadata.json` (and optionally `summary.svg`) when an output
/// directory is configured. Deterministic end-to-end for a fixed config.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult, HarnessError> {
    cfg.validate()?;
    let registry = PredictorRegistry::builtin();
    for name in &cfg.predictors {
        if !registry.contains(name) {
            return Err(HarnessError::ConfigInvalid(format!(
                "unknown predictor '{name}' (available: {:?})",
                registry.names()
            )));
        }
    }
    let names = cfg.predictor_names();
    let params = Arc::new(cfg.system.clone());
    let sol = Arc::new(solve_dare(&params, DEFAULT_DARE_TOL, DEFAULT_DARE_MAX_ITER)?);
    let bank = Arc::new(spectral_filter_bank(cfg.horizon, cfg.filters)?);
    let wave_bank = if names.iter().any(|n| n == "wave") && params.has_inputs() {
        Some(Arc::new(wave_filter_bank(cfg.horizon, cfg.filters)?))
    } else {
        None
    };

    let mut acc = SummaryAccumulator::new(cfg.horizon, &names);
    let mut trial_writer = match &cfg.out_dir {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let file = fs::File::create(dir.join("trials.csv"))?;
            let mut w = BufWriter::new(file);
            w.write_all(report::TRIAL_CSV_HEADER.as_bytes())?;
            w.write_all(b"\n")?;
            Some(w)
        }
        None => None,
    };

    let trial_ids: Vec<usize> = (0..cfg.trials).collect();
    for chunk in trial_ids.chunks(TRIAL_CHUNK) {
        let traces: Vec<(usize, RegretTrace)> = chunk
            .par_iter()
            .map(|&j| {
                let seed = cfg.base_seed.wrapping_add(j as u64);
                (
                    j,
                    run_single_trial(cfg, &params, &sol, &bank, &wave_bank, &registry, &names, seed),
                )
            })
            .collect();
        for (j, trace) in &traces {
            acc.fold(trace);
            if let Some(w) = trial_writer.as_mut() {
                report::write_trial_rows(w, *j, trace)?;
            }
        }
    }
    if let Some(mut w) = trial_writer.take() {
        w.flush()?;
    }

    let summary = acc.finish();
    if let Some(dir) = &cfg.out_dir {
        report::emit_summary(&summary, &dir.join("summary.csv"))?;
        let metadata = serde_json::json!({
            "config": cfg,
            "ci_method": "normal approximation; 99% two-sided half-width 2.576*sd/sqrt(N)",
            "grid": summary.grid,
            "predictors": names,
        });
        fs::write(
            dir.join("run_metadata.json"),
            serde_json::to_string_pretty(&metadata)? + "\n",
        )?;
        if cfg.emit_svg {
            report::emit_svg(&summary, &dir.join("summary.svg"))?;
        }
    }
    Ok(ExperimentResult {
        summary,
        out_dir: cfg.out_dir.clone(),
    })
}

/// Sets up solver, banks and registry for `cfg` and runs the single trial
/// with seed `base_seed + trial`. Convenience for tests and diagnostics.
pub fn run_experiment_trace(
    cfg: &ExperimentConfig,
    trial: usize,
) -> Result<RegretTrace, HarnessError> {
    cfg.validate()?;
    let registry = PredictorRegistry::builtin();
    let names = cfg.predictor_names();
    let params = Arc::new(cfg.system.clone());
    let sol = Arc::new(solve_dare(&params, DEFAULT_DARE_TOL, DEFAULT_DARE_MAX_ITER)?);
    let bank = Arc::new(spectral_filter_bank(cfg.horizon, cfg.filters)?);
    let wave_bank = if names.iter().any(|n| n == "wave") && params.has_inputs() {
        Some(Arc::new(wave_filter_bank(cfg.horizon, cfg.filters)?))
    } else {
        None
    };
    let seed = cfg.base_seed.wrapping_add(trial as u64);
    Ok(run_single_trial(
        cfg, &params, &sol, &bank, &wave_bank, &registry, &names, seed,
    ))
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub k: usize,
    pub predictor: String,
    /// Mean ||mhat_t - m_t||^2 over trials and t in [T/2, T].
    pub final_window_mean: f64,
    /// Mean ||y_t - mhat_t||^2 over the same window.
    pub final_window_mean_vs_obs: f64,
}

#[derive(Debug, Clone)]
pub struct SweepTable {
    pub k_values: Vec<usize>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn row(&self, k: usize, predictor: &str) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.k == k && r.predictor == predictor)
    }
}

/// One [`run_experiment`] per filter count, sharing the base seed so that
/// trajectories are identical across k and differences are attributable to
/// the filter count alone.
pub fn sweep_filters(
    cfg: &ExperimentConfig,
    k_values: &[usize],
) -> Result<SweepTable, HarnessError> {
    if k_values.is_empty() {
        return Err(HarnessError::ConfigInvalid(
            "sweep needs at least one filter count".into(),
        ));
    }
    for &k in k_values {
        if k < 1 || k > cfg.horizon {
            return Err(HarnessError::ConfigInvalid(format!(
                "swept filter count {k} outside 1..=horizon"
            )));
        }
    }
    let mut rows = Vec::new();
    for &k in k_values {
        let mut sub = cfg.clone();
        sub.filters = k;
        sub.out_dir = None;
        sub.emit_svg = false;
        let result = run_experiment(&sub)?;
        for (name, ps) in &result.summary.per_predictor {
            if ps.present_trials > 0 {
                rows.push(SweepRow {
                    k,
                    predictor: name.clone(),
                    final_window_mean: ps.final_window_mean,
                    final_window_mean_vs_obs: ps.final_window_mean_vs_obs,
                });
            }
        }
    }
    Ok(SweepTable {
        k_values: k_values.to_vec(),
        rows,
    })
}
