//! CSV and SVG artifacts. All CSV files are UTF-8 with a header row,
//! '.' decimal separator and '\n' line endings.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::summary::SummaryTable;
use crate::error::HarnessError;
use crate::predictor::RegretTrace;

pub const TRIAL_CSV_HEADER: &str = "trial,t,predictor,err_vs_obs,err_vs_kalman,cum_regret";

/// Appends the rows of one trial (present series only) to a per-trial CSV.
pub fn write_trial_rows<W: Write>(
    w: &mut W,
    trial: usize,
    trace: &RegretTrace,
) -> Result<(), HarnessError> {
    for (name, series) in trace.iter() {
        if !series.is_present() {
            continue;
        }
        for t in 1..=trace.horizon() {
            let regret = series.cum_regret.get(t - 1).copied().unwrap_or(0.0);
            writeln!(
                w,
                "{trial},{t},{name},{},{},{}",
                series.err_vs_obs[t - 1],
                series.err_vs_kalman[t - 1],
                regret
            )?;
        }
    }
    Ok(())
}

/// Writes a complete per-trial CSV for a batch of traces. An empty batch
/// produces a header-only file.
pub fn emit_csv(traces: &[RegretTrace], path: &Path) -> Result<(), HarnessError> {
    let file = fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    w.write_all(TRIAL_CSV_HEADER.as_bytes())?;
    w.write_all(b"\n")?;
    for (j, trace) in traces.iter().enumerate() {
        write_trial_rows(&mut w, j, trace)?;
    }
    w.flush()?;
    Ok(())
}

/// Summary CSV: predictor, grid step, mean error against the oracle, CI.
pub fn emit_summary(summary: &SummaryTable, path: &Path) -> Result<(), HarnessError> {
    let file = fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "predictor,t,mean,ci_lo,ci_hi")?;
    for row in &summary.rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            row.predictor, row.t, row.mean, row.ci_lo, row.ci_hi
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Sweep CSV: filter count, predictor, final-window mean error.
pub fn emit_sweep_csv(table: &super::SweepTable, path: &Path) -> Result<(), HarnessError> {
    let file = fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "k,predictor,final_window_mean,final_window_mean_vs_obs")?;
    for row in &table.rows {
        writeln!(
            w,
            "{},{},{},{}",
            row.k, row.predictor, row.final_window_mean, row.final_window_mean_vs_obs
        )?;
    }
    w.flush()?;
    Ok(())
}

const SVG_COLORS: &[&str] = &["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"];

/// Self-contained SVG log-log chart of the mean error per predictor with
/// shaded 99% confidence bands. No external renderer involved.
pub fn emit_svg(summary: &SummaryTable, path: &Path) -> Result<(), HarnessError> {
    let (width, height) = (760.0, 520.0);
    let (ml, mr, mt, mb) = (70.0, 20.0, 20.0, 50.0);
    let plot_w = width - ml - mr;
    let plot_h = height - mt - mb;

    let predictors: Vec<&str> = summary
        .per_predictor
        .iter()
        .filter(|(name, ps)| ps.present_trials > 0 && *name != "kalman")
        .map(|(name, _)| name.as_str())
        .collect();

    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for row in &summary.rows {
        if row.predictor == "kalman" {
            continue;
        }
        if row.mean > 0.0 {
            y_min = y_min.min(row.mean);
            y_max = y_max.max(row.ci_hi.max(row.mean));
        }
    }
    if !y_min.is_finite() || !y_max.is_finite() || y_min <= 0.0 {
        y_min = 1e-12;
        y_max = 1.0;
    }
    let (ly0, ly1) = (y_min.log10().floor(), y_max.log10().ceil());
    let (lx0, lx1) = (0.0f64, (summary.horizon as f64).log10().ceil().max(1.0));
    let x_of = |t: f64| ml + plot_w * (t.log10() - lx0) / (lx1 - lx0);
    let y_of = |v: f64| {
        let lv = v.max(10f64.powf(ly0)).log10();
        mt + plot_h * (1.0 - (lv - ly0) / (ly1 - ly0))
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<rect x=\"{ml}\" y=\"{mt}\" width=\"{plot_w}\" height=\"{plot_h}\" fill=\"none\" stroke=\"#333\"/>\n"
    ));
    // decade grid lines and labels
    let mut dec = lx0 as i64;
    while dec <= lx1 as i64 {
        let x = x_of(10f64.powi(dec as i32).max(1.0));
        svg.push_str(&format!(
            "<line x1=\"{x}\" y1=\"{mt}\" x2=\"{x}\" y2=\"{}\" stroke=\"#ddd\"/>\n",
            mt + plot_h
        ));
        svg.push_str(&format!(
            "<text x=\"{x}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">1e{dec}</text>\n",
            mt + plot_h + 18.0
        ));
        dec += 1;
    }
    let mut dec = ly0 as i64;
    while dec <= ly1 as i64 {
        let y = y_of(10f64.powi(dec as i32));
        svg.push_str(&format!(
            "<line x1=\"{ml}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"#ddd\"/>\n",
            ml + plot_w
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"end\">1e{dec}</text>\n",
            ml - 6.0,
            y + 4.0
        ));
        dec += 1;
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\">t</text>\n",
        ml + plot_w / 2.0,
        height - 12.0
    ));

    for (pi, name) in predictors.iter().enumerate() {
        let color = SVG_COLORS[pi % SVG_COLORS.len()];
        let rows: Vec<_> = summary.rows.iter().filter(|r| r.predictor == *name).collect();
        if rows.is_empty() {
            continue;
        }
        let mut band = String::from("<path d=\"M");
        for r in &rows {
            band.push_str(&format!("{:.2},{:.2} L", x_of(r.t as f64), y_of(r.ci_hi)));
        }
        for r in rows.iter().rev() {
            band.push_str(&format!(
                "{:.2},{:.2} L",
                x_of(r.t as f64),
                y_of(r.ci_lo.max(10f64.powf(ly0)))
            ));
        }
        band.truncate(band.len() - 2);
        band.push_str(&format!("Z\" fill=\"{color}\" opacity=\"0.15\" stroke=\"none\"/>\n"));
        svg.push_str(&band);

        let mut line = String::from("<polyline fill=\"none\" points=\"");
        for r in &rows {
            line.push_str(&format!("{:.2},{:.2} ", x_of(r.t as f64), y_of(r.mean)));
        }
        line.push_str(&format!("\" stroke=\"{color}\" stroke-width=\"1.6\"/>\n"));
        svg.push_str(&line);

        let ly = mt + 18.0 + 16.0 * pi as f64;
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            ml + 10.0,
            ml + 34.0
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\">{name}</text>\n",
            ml + 40.0,
            ly + 4.0
        ));
    }
    svg.push_str("</svg>\n");
    fs::write(path, svg)?;
    Ok(())
}
