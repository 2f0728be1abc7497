//! Run-directory layout and plot-ready curve files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::sweep::{SweepOutput, SweepResult};
use crate::{BenchError, Result};

pub const VERSION_STAMP: &str =
    concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"), "\n");

/// Writes a file, creating parent directories.
pub fn write(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| BenchError::io(path, e))
}

/// Pretty JSON with a trailing newline.
pub fn json<T: Serialize>(what: &str, value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value).map_err(|e| BenchError::encode(what, e))?;
    out.push(b'\n');
    Ok(out)
}

/// One compact JSON value per line.
pub fn jsonl<T: Serialize>(what: &str, lines: &[T]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for line in lines {
        serde_json::to_writer(&mut out, line).map_err(|e| BenchError::encode(what, e))?;
        out.push(b'\n');
    }
    Ok(out)
}

/// File name of the curve for one retained fraction.
pub fn curve_file_name(fraction: f64) -> String {
    format!("curve_fraction_{fraction}.csv")
}

/// One headerless `epsilon,meanAccuracy,stddev` file per retained fraction,
/// rows sorted by epsilon, plus `summary.json` with every row.
pub fn emit_curves(result: &SweepResult, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut fractions: Vec<f64> = result.rows.iter().map(|r| r.retained_fraction).collect();
    fractions.sort_by(f64::total_cmp);
    fractions.dedup();
    let mut written = Vec::new();
    for f in fractions {
        let mut rows: Vec<_> = result
            .rows
            .iter()
            .filter(|r| r.retained_fraction == f)
            .collect();
        rows.sort_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
        let mut text = Vec::new();
        for r in rows {
            writeln!(
                text,
                "{},{},{}",
                r.epsilon, r.mean_accuracy, r.accuracy_std_dev
            )
            .expect("writing to memory");
        }
        let path = dir.join(curve_file_name(f));
        write(&path, &text)?;
        written.push(path);
    }
    let path = dir.join("summary.json");
    write(&path, &json("summary", result)?)?;
    written.push(path);
    Ok(written)
}

/// Writes the resolved config, sweep result, traces, curves and version stamp.
pub fn write_sweep_run(dir: &Path, config: &ExperimentConfig, output: &SweepOutput) -> Result<()> {
    write(&dir.join("config.toml"), config.to_toml()?.as_bytes())?;
    write(&dir.join("VERSION"), VERSION_STAMP.as_bytes())?;
    write(
        &dir.join("sweep.json"),
        &json("sweep result", &output.result)?,
    )?;
    write(&dir.join("traces.jsonl"), &jsonl("traces", &output.traces)?)?;
    if let Some(d) = &output.decision {
        write(&dir.join("mode_decision.json"), &json("mode decision", d)?)?;
    }
    emit_curves(&output.result, dir)?;
    Ok(())
}
