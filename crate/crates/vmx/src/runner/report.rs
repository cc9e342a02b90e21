//! Report emission: channel CSV, verdict CSV, config echo and a plain-text
//! summary. Reports are a pure function of the artifacts (no timestamps), so
//! regeneration is byte-identical.

use std::fs;
use std::path::{Path, PathBuf};

use crate::diagnostics::{DiagnosticSeries, Verdict};
use crate::error::{Result, VmxError};
use crate::io::{format_f64, CsvWriter};

use super::RunArtifacts;

pub fn emit_report(artifacts: &RunArtifacts, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| VmxError::io(dir.display().to_string(), e))?;
    let mut written = Vec::new();

    // channels.csv: t plus every channel in sorted order
    let channels_path = dir.join("channels.csv");
    {
        let names: Vec<&str> =
            artifacts.series.channels.keys().map(|s| s.as_str()).collect();
        let mut header = vec!["t"];
        header.extend_from_slice(&names);
        let mut w = CsvWriter::create(&channels_path, &header)?;
        for (i, t) in artifacts.series.times.iter().enumerate() {
            let mut row = vec![*t];
            for name in &names {
                row.push(artifacts.series.channels[*name][i]);
            }
            w.write_row(&row)?;
        }
        w.flush()?;
    }
    written.push(channels_path);

    // verdicts.csv
    let verdicts_path = dir.join("verdicts.csv");
    {
        let mut w = CsvWriter::create(
            &verdicts_path,
            &["name", "fitted_constant", "max_violation", "pass", "detail"],
        )?;
        for v in &artifacts.verdicts {
            w.write_mixed_row(&[
                v.name.clone(),
                format_f64(v.fitted_constant),
                format_f64(v.max_violation),
                if v.pass { "1".into() } else { "0".into() },
                v.detail.replace(',', ";"),
            ])?;
        }
        w.flush()?;
    }
    written.push(verdicts_path);

    // config echo (provenance)
    let config_path = dir.join("config.txt");
    fs::write(&config_path, artifacts.config.echo())
        .map_err(|e| VmxError::io(config_path.display().to_string(), e))?;
    written.push(config_path);

    // plain-text summary
    let summary_path = dir.join("summary.txt");
    fs::write(&summary_path, render_summary(artifacts))
        .map_err(|e| VmxError::io(summary_path.display().to_string(), e))?;
    written.push(summary_path);

    Ok(written)
}

pub fn render_summary(artifacts: &RunArtifacts) -> String {
    let mut s = String::new();
    s.push_str("vmx run summary\n");
    s.push_str("===============\n");
    s.push_str(&format!("code version : {}\n", artifacts.code_version));
    s.push_str(&format!("config crc32 : {:08x}\n", artifacts.config_crc));
    match &artifacts.failure {
        None => s.push_str("status       : completed\n"),
        Some(reason) => {
            let last_t = artifacts.series.times.last().copied().unwrap_or(0.0);
            s.push_str(&format!(
                "status       : FAILED ({reason}); last good diagnostic at t = {last_t}\n"
            ));
        }
    }
    s.push('\n');
    s.push_str("criterion_sup trajectory (t, sup ||sigma_-1||_L2):\n");
    if let Some(sup) = artifacts.series.channel("criterion_sup") {
        for (t, v) in artifacts.series.times.iter().zip(sup) {
            s.push_str(&format!("  {:>10}  {}\n", format_f64(*t), format_f64(*v)));
        }
    } else {
        s.push_str("  (not recorded)\n");
    }
    s.push('\n');
    s.push_str("bound checks:\n");
    s.push_str(&format!(
        "  {:<24} {:>14} {:>14}  {:<6} detail\n",
        "name", "fitted C", "violation", "pass"
    ));
    for v in &artifacts.verdicts {
        s.push_str(&format!(
            "  {:<24} {:>14} {:>14}  {:<6} {}\n",
            v.name,
            format_f64(v.fitted_constant),
            format_f64(v.max_violation),
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        ));
    }
    s
}

/// Reload the diagnostic series from channels.csv (for report regeneration).
pub fn load_series(dir: &Path) -> Result<DiagnosticSeries> {
    let path = dir.join("channels.csv");
    let text = std::fs::read_to_string(&path)
        .map_err(|e| VmxError::io(path.display().to_string(), e))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| VmxError::SnapshotFormat("empty channels.csv".into()))?;
    let names: Vec<&str> = header.split(',').collect();
    if names.first() != Some(&"t") {
        return Err(VmxError::SnapshotFormat("channels.csv must start with t".into()));
    }
    let mut series = DiagnosticSeries::default();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<f64> = line
            .split(',')
            .map(|c| c.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| VmxError::SnapshotFormat(format!("bad channels row `{line}`")))?;
        if cells.len() != names.len() {
            return Err(VmxError::SnapshotFormat("ragged channels.csv".into()));
        }
        let row: Vec<(&str, f64)> =
            names[1..].iter().zip(&cells[1..]).map(|(n, v)| (*n, *v)).collect();
        series.push_row(cells[0], &row);
    }
    Ok(series)
}

/// Reload verdicts from verdicts.csv.
pub fn load_verdicts(dir: &Path) -> Result<Vec<Verdict>> {
    let path = dir.join("verdicts.csv");
    let text = std::fs::read_to_string(&path)
        .map_err(|e| VmxError::io(path.display().to_string(), e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.splitn(5, ',').collect();
        if parts.len() != 5 {
            return Err(VmxError::SnapshotFormat(format!("bad verdicts row `{line}`")));
        }
        out.push(Verdict {
            name: parts[0].to_string(),
            fitted_constant: parts[1].parse().unwrap_or(f64::NAN),
            max_violation: parts[2].parse().unwrap_or(f64::NAN),
            pass: parts[3] == "1",
            detail: parts[4].to_string(),
        });
    }
    Ok(out)
}
