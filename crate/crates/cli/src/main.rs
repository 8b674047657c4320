//! `slip` — benchmark harness CLI.
//!
//! Subcommands: `simulate` (one trajectory as CSV), `run` (seeded
//! multi-trial experiment), `sweep` (filter-count sweep), `spectra`
//! (Hankel spectrum diagnostics) and `verify` (invariant battery).
//! Exit codes: 0 success, 1 config error, 2 verification failure.

use clap::{Args, Parser, Subcommand};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use slip_core::harness::{
    emit_sweep_csv, preset, preset_names, run_experiment, sweep_filters,
    verify::run_verification_battery, ExperimentConfig,
};
use slip_core::lds::{kalman_predict_recursive, simulate, solve_dare};
use slip_core::spectral::spectral_filter_bank;

#[derive(Parser)]
#[command(
    name = "slip",
    about = "Online prediction benchmarks for partially observed linear dynamical systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigSource {
    /// Path to an experiment config JSON.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Builtin preset name (see --list-presets on `run`).
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Args, Clone)]
struct Overrides {
    /// Number of trials.
    #[arg(long)]
    trials: Option<usize>,
    /// Base seed; trial j runs with seed base_seed + j.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of spectral filters k.
    #[arg(long)]
    k: Option<usize>,
    /// Ridge regularizer.
    #[arg(long)]
    alpha: Option<f64>,
    /// Lookback p of the truncated baseline.
    #[arg(long)]
    lookback: Option<usize>,
    /// Comma-separated predictor list, e.g. slip,truncated,kalman.
    #[arg(long)]
    predictors: Option<String>,
    /// Horizon override.
    #[arg(long)]
    horizon: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one trajectory and emit it as CSV (t, inputs, observations,
    /// Kalman predictions, innovations).
    Simulate {
        #[command(flatten)]
        source: ConfigSource,
        /// Simulation seed (defaults to the config base seed).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        horizon: Option<usize>,
        /// Output directory (writes trajectory.csv); stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a seeded multi-trial experiment and aggregate summaries.
    Run {
        #[command(flatten)]
        source: ConfigSource,
        #[command(flatten)]
        overrides: Overrides,
        /// Output directory for trials.csv, summary.csv, run_metadata.json.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a self-contained summary.svg chart.
        #[arg(long)]
        svg: bool,
        /// List builtin preset names and exit.
        #[arg(long)]
        list_presets: bool,
    },
    /// Sweep the filter count k, sharing seeds across values.
    Sweep {
        #[command(flatten)]
        source: ConfigSource,
        #[command(flatten)]
        overrides: Overrides,
        /// Comma-separated filter counts (default 5,10,15,20,25,30,35).
        #[arg(long)]
        k_values: Option<String>,
        /// Output directory (writes sweep.csv); stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print (index, eigenvalue, decay bound, margin) of the Hankel spectrum.
    Spectra {
        /// Hankel horizon T.
        #[arg(long, default_value_t = 200)]
        horizon: usize,
        /// Number of leading eigenvalues.
        #[arg(long, default_value_t = 30)]
        k: usize,
    },
    /// Run the invariant verification battery and print a pass/fail table.
    Verify {
        /// Only run checks whose group name contains this substring.
        #[arg(long)]
        filter: Option<String>,
    },
}

fn load_config(source: &ConfigSource) -> Result<ExperimentConfig, String> {
    match (&source.config, &source.preset) {
        (Some(path), None) => ExperimentConfig::from_json_file(path).map_err(|e| e.to_string()),
        (None, Some(name)) => {
            preset(name).ok_or_else(|| format!("unknown preset '{name}' (try {:?})", preset_names()))
        }
        (None, None) => Err("one of --config or --preset is required".into()),
        (Some(_), Some(_)) => Err("--config and --preset are mutually exclusive".into()),
    }
}

fn apply_overrides(cfg: &mut ExperimentConfig, o: &Overrides) -> Result<(), String> {
    if let Some(t) = o.trials {
        cfg.trials = t;
    }
    if let Some(s) = o.seed {
        cfg.base_seed = s;
    }
    if let Some(k) = o.k {
        cfg.filters = k;
    }
    if let Some(a) = o.alpha {
        cfg.alpha = a;
    }
    if let Some(p) = o.lookback {
        cfg.lookback = p;
    }
    if let Some(h) = o.horizon {
        cfg.horizon = h;
    }
    if let Some(list) = &o.predictors {
        cfg.predictors = list
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
        if cfg.predictors.is_empty() {
            return Err("--predictors list is empty".into());
        }
    }
    cfg.validate().map_err(|e| e.to_string())
}

fn cmd_simulate(
    source: &ConfigSource,
    seed: Option<u64>,
    horizon: Option<usize>,
    out: Option<PathBuf>,
) -> Result<(), String> {
    let mut cfg = load_config(source)?;
    if let Some(h) = horizon {
        cfg.horizon = h;
        cfg.validate().map_err(|e| e.to_string())?;
    }
    let seed = seed.unwrap_or(cfg.base_seed);
    let sol = solve_dare(&cfg.system, 1e-12, 1_000_000).map_err(|e| e.to_string())?;
    let traj = simulate(&cfg.system, &sol, cfg.horizon, &cfg.input_spec, seed)
        .map_err(|e| e.to_string())?;
    let (preds, innov) = kalman_predict_recursive(&cfg.system, &sol, &traj)
        .map_err(|e| e.to_string())?;

    let n = cfg.system.input_dim();
    let m = cfg.system.obs_dim();
    let mut text = String::new();
    text.push('t');
    for i in 1..=n {
        text.push_str(&format!(",x{i}"));
    }
    for i in 1..=m {
        text.push_str(&format!(",y{i}"));
    }
    for i in 1..=m {
        text.push_str(&format!(",m{i}"));
    }
    for i in 1..=m {
        text.push_str(&format!(",e{i}"));
    }
    text.push('\n');
    for t in 0..cfg.horizon {
        text.push_str(&format!("{}", t + 1));
        for i in 0..n {
            text.push_str(&format!(",{}", traj.inputs[t][i]));
        }
        for i in 0..m {
            text.push_str(&format!(",{}", traj.observations[t][i]));
        }
        for i in 0..m {
            text.push_str(&format!(",{}", preds[t][i]));
        }
        for i in 0..m {
            text.push_str(&format!(",{}", innov[t][i]));
        }
        text.push('\n');
    }
    match out {
        Some(dir) => {
            std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
            std::fs::write(dir.join("trajectory.csv"), text).map_err(|e| e.to_string())?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_run(
    source: &ConfigSource,
    overrides: &Overrides,
    out: Option<PathBuf>,
    svg: bool,
) -> Result<(), String> {
    let mut cfg = load_config(source)?;
    apply_overrides(&mut cfg, overrides)?;
    cfg.out_dir = out;
    cfg.emit_svg = svg;
    let result = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let summary = &result.summary;
    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(
        stdout,
        "# {} trials over horizon {}",
        summary.trials, summary.horizon
    );
    let _ = writeln!(
        stdout,
        "predictor,present_trials,final_decade_mean_err_vs_kalman,mean_regret_at_T"
    );
    for (name, ps) in &summary.per_predictor {
        if ps.present_trials == 0 {
            let reason = ps.absent_reason.as_deref().unwrap_or("unknown");
            let _ = writeln!(stdout, "{name},0,absent: {reason},");
            continue;
        }
        let mean_regret: f64 =
            ps.regret_at_horizon.iter().sum::<f64>() / ps.regret_at_horizon.len() as f64;
        let _ = writeln!(
            stdout,
            "{name},{},{},{}",
            ps.present_trials, ps.final_decade_mean, mean_regret
        );
    }
    if let Some(dir) = &result.out_dir {
        let _ = writeln!(stdout, "# artifacts written to {}", dir.display());
    }
    Ok(())
}

fn parse_k_values(text: Option<&str>) -> Result<Vec<usize>, String> {
    match text {
        None => Ok(vec![5, 10, 15, 20, 25, 30, 35]),
        Some(t) => {
            let mut out = Vec::new();
            for item in t.split(',') {
                let item = item.trim();
                if item.is_empty() {
                    continue;
                }
                out.push(item.parse::<usize>().map_err(|e| format!("bad k '{item}': {e}"))?);
            }
            if out.is_empty() {
                return Err("--k-values list is empty".into());
            }
            Ok(out)
        }
    }
}

fn cmd_sweep(
    source: &ConfigSource,
    overrides: &Overrides,
    k_values: Option<String>,
    out: Option<PathBuf>,
) -> Result<(), String> {
    let mut cfg = load_config(source)?;
    apply_overrides(&mut cfg, overrides)?;
    let ks = parse_k_values(k_values.as_deref())?;
    let table = sweep_filters(&cfg, &ks).map_err(|e| e.to_string())?;
    match out {
        Some(dir) => {
            std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
            emit_sweep_csv(&table, &dir.join("sweep.csv")).map_err(|e| e.to_string())?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            let _ = writeln!(stdout, "k,predictor,final_window_mean,final_window_mean_vs_obs");
            for row in &table.rows {
                let _ = writeln!(
                    stdout,
                    "{},{},{},{}",
                    row.k, row.predictor, row.final_window_mean, row.final_window_mean_vs_obs
                );
            }
        }
    }
    Ok(())
}

fn cmd_spectra(horizon: usize, k: usize) -> Result<(), String> {
    let bank = spectral_filter_bank(horizon, k.min(horizon)).map_err(|e| e.to_string())?;
    let report = if horizon >= 10 {
        Some(bank.verify_spectral_decay().map_err(|e| e.to_string())?)
    } else {
        None
    };
    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(stdout, "j,sigma_j,decay_bound,margin");
    for (idx, sigma) in bank.eigenvalues().iter().enumerate() {
        let index = idx + 1;
        let row = report
            .as_ref()
            .and_then(|r| r.rows.iter().find(|row| row.index == index));
        match row {
            Some(r) => {
                let _ = writeln!(stdout, "{index},{sigma},{},{}", r.bound, r.margin);
            }
            None => {
                let _ = writeln!(stdout, "{index},{sigma},,");
            }
        }
    }
    Ok(())
}

fn cmd_verify(filter: Option<&str>) -> ExitCode {
    let rows = run_verification_battery(filter);
    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(stdout, "check,value,bound,margin,pass");
    let mut all_pass = true;
    for row in &rows {
        all_pass &= row.pass;
        let _ = writeln!(
            stdout,
            "{},{},{},{},{}",
            row.name, row.value, row.bound, row.margin, row.pass
        );
    }
    if rows.is_empty() {
        let _ = writeln!(stdout, "# no checks matched the filter");
        return ExitCode::from(1);
    }
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not errors
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome: Result<(), String> = match cli.command {
        Command::Simulate {
            source,
            seed,
            horizon,
            out,
        } => cmd_simulate(&source, seed, horizon, out),
        Command::Run {
            source,
            overrides,
            out,
            svg,
            list_presets,
        } => {
            if list_presets {
                for name in preset_names() {
                    println!("{name}");
                }
                Ok(())
            } else {
                cmd_run(&source, &overrides, out, svg)
            }
        }
        Command::Sweep {
            source,
            overrides,
            k_values,
            out,
        } => cmd_sweep(&source, &overrides, k_values, out),
        Command::Spectra { horizon, k } => cmd_spectra(horizon, k),
        Command::Verify { filter } => return cmd_verify(filter.as_deref()),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
