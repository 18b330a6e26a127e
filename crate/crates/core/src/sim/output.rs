//! Run artifacts: trajectory CSV, metrics JSON and comparison CSV.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::closed_loop::TrajectoryLog;
use super::compare::Comparison;
use super::metrics::TripMetrics;

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const METRICS_FILE: &str = "metrics.json";
pub const COMPARISON_FILE: &str = "comparison.csv";

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e))
}

/// Per-step CSV. Wall time is left out so reruns are byte-identical.
pub fn write_trajectory(
    log: &TrajectoryLog,
    writer: impl Write,
) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "t_sec",
        "v_mps",
        "p_trac_w",
        "p_bat_w",
        "p_eng_w",
        "soc",
        "t_cl_c",
        "t_cat_c",
        "engine_on",
        "fuel_cum_kg",
        "status",
        "iterations",
        "soft",
    ])?;
    for r in &log.records {
        let status = r
            .status
            .map(|s| {
                serde_json::to_value(s)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_owned))
                    .unwrap_or_default()
            })
            .unwrap_or_default();
        w.write_record([
            r.t.to_string(),
            r.v.to_string(),
            r.p_trac.to_string(),
            r.p_bat.to_string(),
            r.p_eng.to_string(),
            r.soc.to_string(),
            r.t_cl.to_string(),
            r.t_cat.to_string(),
            u8::from(r.engine_on).to_string(),
            r.fuel_cum.to_string(),
            status,
            r.iterations.to_string(),
            u8::from(r.soft).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the trajectory CSV and metrics JSON into `out_dir`; returns their paths.
pub fn write_outputs(
    log: &TrajectoryLog,
    metrics: &TripMetrics,
    out_dir: impl AsRef<Path>,
) -> Result<Vec<PathBuf>> {
    let dir = out_dir.as_ref();
    let traj = dir.join(TRAJECTORY_FILE);
    write_trajectory(log, create(&traj)?).map_err(|e| csv_err(&traj, e))?;
    let met = dir.join(METRICS_FILE);
    write_json(metrics, &met)?;
    Ok(vec![traj, met])
}

pub fn write_json(value: &impl serde::Serialize, path: &Path) -> Result<()> {
    let mut f = create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")
        .and_then(|_| f.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn load_metrics(path: impl AsRef<Path>) -> Result<TripMetrics> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_comparison(c: &Comparison, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_writer(create(path)?);
    let run = |w: &mut csv::Writer<BufWriter<File>>| -> std::result::Result<(), csv::Error> {
        w.write_record([
            "label",
            "fuel_kg",
            "fuel_delta_pct",
            "engine_on_ratio",
            "engine_on_delta_pct",
        ])?;
        for r in &c.rows {
            w.write_record([
                r.label.clone(),
                r.fuel_total.to_string(),
                r.fuel_delta_pct.to_string(),
                r.engine_on_ratio.to_string(),
                r.engine_on_delta_pct.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    };
    run(&mut w).map_err(|e| csv_err(path, e))
}
