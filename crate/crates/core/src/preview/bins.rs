//! Arrival-phase trip classification and per-bin speed statistics.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::corridor::CorridorConfig;
use super::trace::DriveTrace;
use super::traffic::STOP_OFFSET;

/// Bin (1-based) of an arrival `since_red` seconds after a red onset.
pub fn arrival_bin(since_red: f64, cycle: f64, bins: usize) -> usize {
    let phase = since_red.rem_euclid(cycle);
    let width = cycle / bins as f64;
    ((phase / width).floor() as usize).min(bins - 1) + 1
}

/// How close to the resting spot counts as arrived (m). Positions rebuilt
/// from speed samples can stop a few centimetres short of it.
pub const ARRIVAL_TOLERANCE: f64 = 0.5;

/// Time the trace first comes within [`ARRIVAL_TOLERANCE`] of the resting
/// position in front of the first stop line.
pub fn first_arrival(trace: &DriveTrace, cfg: &CorridorConfig) -> Result<f64> {
    let position = cfg.first().position;
    trace
        .time_at_position(position - STOP_OFFSET - ARRIVAL_TOLERANCE)
        .ok_or(Error::NeverArrives { position })
}

/// Bin index in `1..=bin_count` from the arrival phase at the first signal,
/// measured from the onset of red.
pub fn classify_trip(trace: &DriveTrace, cfg: &CorridorConfig) -> Result<usize> {
    let t_arr = first_arrival(trace, cfg)?;
    let first = cfg.first();
    Ok(arrival_bin(
        t_arr - first.red_onset(),
        first.cycle,
        cfg.bin_count,
    ))
}

/// Mean and spread of the speed of one bin's trips, indexed by time since
/// departure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinProfile {
    pub bin_index: usize,
    /// Sample spacing (s)
    pub dt: f64,
    pub mean_v: Vec<f64>,
    pub std_v: Vec<f64>,
    pub support_count: usize,
}

impl BinProfile {
    pub fn usable(&self) -> bool {
        self.support_count > 0
    }

    /// Profile of a single trace at spacing `dt`, used for exact previews.
    pub fn from_trace(trace: &DriveTrace, dt: f64) -> Self {
        let n = (trace.duration() / dt).ceil() as usize + 1;
        Self {
            bin_index: 0,
            dt,
            mean_v: trace.resample(trace.start_time(), dt, n),
            std_v: vec![0.0; n],
            support_count: 1,
        }
    }

    /// Mean speed `tau` seconds after departure (linear, zero past the end).
    pub fn speed_at(&self, tau: f64) -> f64 {
        if tau <= 0.0 {
            return self.mean_v.first().copied().unwrap_or(0.0);
        }
        let u = tau / self.dt;
        let i = u.floor() as usize;
        if i + 1 >= self.mean_v.len() {
            return if i + 1 == self.mean_v.len() && u == i as f64 {
                self.mean_v[i]
            } else {
                0.0
            };
        }
        let w = u - i as f64;
        self.mean_v[i] + w * (self.mean_v[i + 1] - self.mean_v[i])
    }

    /// Distance covered by the mean profile after `tau` seconds (trapezoid).
    pub fn distance_at(&self, tau: f64) -> f64 {
        let mut x = 0.0;
        let mut t = 0.0;
        for w in self.mean_v.windows(2) {
            if t + self.dt >= tau {
                let h = (tau - t).max(0.0);
                let v_end = w[0] + (w[1] - w[0]) * h / self.dt;
                return x + 0.5 * (w[0] + v_end) * h;
            }
            x += 0.5 * (w[0] + w[1]) * self.dt;
            t += self.dt;
        }
        x
    }

    /// Earliest time the mean profile has covered `x` metres, if ever.
    pub fn time_at_distance(&self, x: f64) -> Option<f64> {
        if x <= 0.0 {
            return Some(0.0);
        }
        let mut covered = 0.0;
        for (i, w) in self.mean_v.windows(2).enumerate() {
            let seg = 0.5 * (w[0] + w[1]) * self.dt;
            if covered + seg >= x && seg > 0.0 {
                // solve the quadratic of the linear-speed segment
                let need = x - covered;
                let acc = (w[1] - w[0]) / self.dt;
                let h = if acc.abs() < 1e-12 {
                    need / w[0]
                } else {
                    let disc = (w[0] * w[0] + 2.0 * acc * need).max(0.0);
                    (disc.sqrt() - w[0]) / acc
                };
                return Some(i as f64 * self.dt + h.clamp(0.0, self.dt));
            }
            covered += seg;
        }
        None
    }

    /// Total distance of the mean profile.
    pub fn total_distance(&self) -> f64 {
        self.distance_at(self.dt * self.mean_v.len() as f64)
    }
}

/// Per-bin pointwise mean and population standard deviation of the speed,
/// resampled from each trip's departure at spacing `dt2` over `horizon`
/// seconds. Finished trips count as parked at zero speed.
pub fn aggregate_bins(
    traces: &[DriveTrace],
    assignments: &[usize],
    bin_count: usize,
    dt2: f64,
    horizon: f64,
) -> Result<Vec<BinProfile>> {
    if traces.len() != assignments.len() {
        return Err(Error::InvalidParameter(
            "every trace needs a bin assignment".into(),
        ));
    }
    if !(dt2 > 0.0 && horizon >= 0.0) {
        return Err(Error::InvalidParameter(
            "aggregation needs dt2 > 0 and horizon >= 0".into(),
        ));
    }
    if let Some(&b) = assignments.iter().find(|&&b| b == 0 || b > bin_count) {
        return Err(Error::InvalidParameter(format!(
            "bin {b} outside 1..={bin_count}"
        )));
    }
    let n = (horizon / dt2).ceil() as usize + 1;
    let profiles = (1..=bin_count)
        .map(|bin| {
            let members: Vec<Vec<f64>> = traces
                .iter()
                .zip(assignments)
                .filter(|(_, &b)| b == bin)
                .map(|(tr, _)| tr.resample(tr.start_time(), dt2, n))
                .collect();
            let count = members.len();
            let mut mean_v = vec![0.0; n];
            let mut std_v = vec![0.0; n];
            if count > 0 {
                for k in 0..n {
                    let m = members.iter().map(|v| v[k]).sum::<f64>() / count as f64;
                    let var =
                        members.iter().map(|v| (v[k] - m).powi(2)).sum::<f64>() / count as f64;
                    mean_v[k] = m;
                    std_v[k] = var.sqrt();
                }
            }
            BinProfile {
                bin_index: bin,
                dt: dt2,
                mean_v,
                std_v,
                support_count: count,
            }
        })
        .collect();
    Ok(profiles)
}

/// Writes profiles as `bin,t_sec,mean_mps,std_mps,count` rows.
pub fn write_profiles(profiles: &[BinProfile], writer: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let err = |e: csv::Error| Error::Config(format!("writing bin profiles: {e}"));
    w.write_record(["bin", "t_sec", "mean_mps", "std_mps", "count"])
        .map_err(err)?;
    for p in profiles {
        for (k, (m, s)) in p.mean_v.iter().zip(&p.std_v).enumerate() {
            w.write_record([
                p.bin_index.to_string(),
                (k as f64 * p.dt).to_string(),
                m.to_string(),
                s.to_string(),
                p.support_count.to_string(),
            ])
            .map_err(err)?;
        }
    }
    w.flush()
        .map_err(|e| Error::Config(format!("writing bin profiles: {e}")))
}

/// Reads profiles written by [`write_profiles`]. Sample spacing is taken from
/// the first two rows of each bin.
pub fn read_profiles(reader: impl std::io::Read) -> Result<Vec<BinProfile>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out: Vec<BinProfile> = Vec::new();
    let mut times: Vec<Vec<f64>> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            msg: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let get = |k: usize| -> Result<&str> {
            record.get(k).ok_or_else(|| Error::Parse {
                line,
                msg: "missing column".into(),
            })
        };
        let num = |k: usize| -> Result<f64> {
            let raw = get(k)?;
            raw.parse::<f64>().map_err(|e| Error::Parse {
                line,
                msg: format!("{raw:?}: {e}"),
            })
        };
        let bin = num(0)? as usize;
        let (t, m, s, c) = (num(1)?, num(2)?, num(3)?, num(4)? as usize);
        if out.last().map(|p| p.bin_index) != Some(bin) {
            out.push(BinProfile {
                bin_index: bin,
                dt: 0.0,
                mean_v: Vec::new(),
                std_v: Vec::new(),
                support_count: c,
            });
            times.push(Vec::new());
        }
        let p = out.last_mut().expect("pushed");
        p.mean_v.push(m);
        p.std_v.push(s);
        times.last_mut().expect("pushed").push(t);
    }
    for (p, t) in out.iter_mut().zip(&times) {
        p.dt = if t.len() >= 2 { t[1] - t[0] } else { 1.0 };
    }
    Ok(out)
}

pub fn save_profiles(profiles: &[BinProfile], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_profiles(profiles, std::io::BufWriter::new(file))
}

pub fn load_profiles(path: impl AsRef<Path>) -> Result<Vec<BinProfile>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_profiles(file)
}
