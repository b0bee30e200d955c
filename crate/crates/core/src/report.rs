//! CSV emission for a finished run: per-session rows, metric CDFs, the
//! backlog time series and the mobile user's serving-helper trace.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::ModelError;
use crate::sim::MetricsReport;

fn write_file(path: &Path, content: &str) -> Result<(), ModelError> {
    let mut f = fs::File::create(path)?;
    f.write_all(content.as_bytes())?;
    Ok(())
}

/// Empirical CDF rows (value, fraction <= value) over sorted samples.
pub fn empirical_cdf(samples: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted: Vec<f64> = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, (i + 1) as f64 / n))
        .collect()
}

fn cdf_csv(samples: &[f64]) -> String {
    let mut out = String::from("value,cum_fraction\n");
    for (v, f) in empirical_cdf(samples) {
        out.push_str(&format!("{v},{f}\n"));
    }
    out
}

/// Writes sessions.csv, cdf_<metric>.csv, timeseries.csv and (when a mobile
/// user exists) helper_trace.csv into `dir`, creating it if needed.
pub fn emit_reports(report: &MetricsReport, dir: &Path) -> Result<(), ModelError> {
    fs::create_dir_all(dir)?;

    let mut sessions = String::from("user,prebuf_slots,skipped_pct,mean_ssim,rebuf_frac,underrun_rate\n");
    for row in &report.sessions {
        let m = &row.metrics;
        sessions.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.user, m.prebuf_slots, m.skipped_pct, m.mean_ssim, m.rebuf_frac, m.underrun_rate
        ));
    }
    write_file(&dir.join("sessions.csv"), &sessions)?;

    if !report.sessions.is_empty() {
        let pick = |f: &dyn Fn(&crate::playback::SessionMetrics) -> f64| -> Vec<f64> {
            report.sessions.iter().map(|r| f(&r.metrics)).collect()
        };
        let metrics: [(&str, Vec<f64>); 4] = [
            ("prebuf_slots", pick(&|m| m.prebuf_slots as f64)),
            ("skipped_pct", pick(&|m| m.skipped_pct)),
            ("mean_ssim", pick(&|m| m.mean_ssim)),
            ("underrun_rate", pick(&|m| m.underrun_rate)),
        ];
        for (name, samples) in metrics {
            write_file(&dir.join(format!("cdf_{name}.csv")), &cdf_csv(&samples))?;
        }
    }

    let mut ts = String::from("slot,total_backlog\n");
    for (slot, backlog) in &report.timeseries {
        ts.push_str(&format!("{slot},{backlog}\n"));
    }
    write_file(&dir.join("timeseries.csv"), &ts)?;

    if !report.helper_trace.is_empty() {
        let mut tr = String::from("chunk,helper\n");
        for (k, h) in &report.helper_trace {
            tr.push_str(&format!("{k},{h}\n"));
        }
        write_file(&dir.join("helper_trace.csv"), &tr)?;
    }
    Ok(())
}
