//! Time-stamped speed/position traces and their CSV form.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed below which a vehicle counts as stopped (m/s).
pub const STOP_SPEED: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    /// s
    pub t: f64,
    /// m/s
    pub v: f64,
    /// m
    pub x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveTrace {
    pub route_id: String,
    pub vehicle_id: String,
    samples: Vec<TraceSample>,
}

impl DriveTrace {
    /// Builds a trace after checking timestamps, speeds and positions.
    pub fn new(
        route_id: impl Into<String>,
        vehicle_id: impl Into<String>,
        samples: Vec<TraceSample>,
    ) -> Result<Self> {
        validate(&samples)?;
        Ok(Self {
            route_id: route_id.into(),
            vehicle_id: vehicle_id.into(),
            samples,
        })
    }

    /// Builds a trace from speeds alone, starting at position 0; positions are
    /// the cumulative trapezoid of the speed.
    pub fn from_speeds(
        route_id: impl Into<String>,
        vehicle_id: impl Into<String>,
        times: &[f64],
        speeds: &[f64],
    ) -> Result<Self> {
        if times.len() != speeds.len() {
            return Err(Error::InvalidParameter(
                "times and speeds differ in length".into(),
            ));
        }
        let mut samples = Vec::with_capacity(times.len());
        let mut x = 0.0;
        for i in 0..times.len() {
            if i > 0 {
                x += 0.5 * (speeds[i] + speeds[i - 1]) * (times[i] - times[i - 1]);
            }
            samples.push(TraceSample {
                t: times[i],
                v: speeds[i],
                x,
            });
        }
        Self::new(route_id, vehicle_id, samples)
    }

    pub fn samples(&self) -> &[TraceSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn start_time(&self) -> f64 {
        self.samples[0].t
    }

    pub fn end_time(&self) -> f64 {
        self.samples[self.samples.len() - 1].t
    }

    pub fn duration(&self) -> f64 {
        self.end_time() - self.start_time()
    }

    pub fn distance(&self) -> f64 {
        self.samples[self.samples.len() - 1].x - self.samples[0].x
    }

    pub fn max_speed(&self) -> f64 {
        self.samples.iter().map(|s| s.v).fold(0.0, f64::max)
    }

    fn bracket(&self, t: f64) -> Option<(usize, f64)> {
        let n = self.samples.len();
        if n < 2 || t < self.samples[0].t || t > self.samples[n - 1].t {
            return None;
        }
        let i = self.samples.partition_point(|s| s.t <= t).clamp(1, n - 1) - 1;
        let (a, b) = (&self.samples[i], &self.samples[i + 1]);
        Some((i, (t - a.t) / (b.t - a.t)))
    }

    /// Linearly interpolated speed. Before departure the first speed holds;
    /// after the end the vehicle is parked at zero speed.
    pub fn speed_at(&self, t: f64) -> f64 {
        let n = self.samples.len();
        if t <= self.samples[0].t {
            return self.samples[0].v;
        }
        if t >= self.samples[n - 1].t {
            return if t == self.samples[n - 1].t {
                self.samples[n - 1].v
            } else {
                0.0
            };
        }
        let (i, w) = self.bracket(t).expect("inside trace");
        self.samples[i].v + w * (self.samples[i + 1].v - self.samples[i].v)
    }

    /// Linearly interpolated position, clamped to the end positions.
    pub fn position_at(&self, t: f64) -> f64 {
        let n = self.samples.len();
        if t <= self.samples[0].t {
            return self.samples[0].x;
        }
        if t >= self.samples[n - 1].t {
            return self.samples[n - 1].x;
        }
        let (i, w) = self.bracket(t).expect("inside trace");
        self.samples[i].x + w * (self.samples[i + 1].x - self.samples[i].x)
    }

    /// First time the interpolated position reaches `x`.
    pub fn time_at_position(&self, x: f64) -> Option<f64> {
        let s = &self.samples;
        if s[0].x >= x {
            return Some(s[0].t);
        }
        let i = s.iter().position(|p| p.x >= x)?;
        let (a, b) = (&s[i - 1], &s[i]);
        let w = (x - a.x) / (b.x - a.x);
        Some(a.t + w * (b.t - a.t))
    }

    /// Speeds at `t0, t0 + dt, …` (`n` points).
    pub fn resample(&self, t0: f64, dt: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| self.speed_at(t0 + k as f64 * dt)).collect()
    }

    /// Number of stops before the final one: maximal runs of samples at or
    /// below [`STOP_SPEED`] that follow motion and are followed by motion.
    pub fn stop_count(&self) -> usize {
        let mut moved = false;
        let mut stopped = false;
        let mut count = 0;
        for s in &self.samples {
            if s.v > STOP_SPEED {
                if stopped && moved {
                    count += 1;
                }
                moved = true;
                stopped = false;
            } else {
                stopped = true;
            }
        }
        count
    }

    /// Reads a `t_sec,v_mps[,x_m]` CSV file. Without a position column the
    /// positions are reconstructed by trapezoidal integration.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::read_csv(file, "", &id)
    }

    pub fn read_csv(reader: impl std::io::Read, route_id: &str, vehicle_id: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers().map_err(|e| parse_error(1, e))?.clone();
        let cols: Vec<&str> = headers.iter().collect();
        let has_x = match cols.as_slice() {
            ["t_sec", "v_mps"] => false,
            ["t_sec", "v_mps", "x_m"] => true,
            _ => {
                return Err(Error::Parse {
                    line: 1,
                    msg: format!(
                        "expected header t_sec,v_mps[,x_m], found {}",
                        cols.join(",")
                    ),
                })
            }
        };
        let mut times = Vec::new();
        let mut speeds = Vec::new();
        let mut positions = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                parse_error(line, e)
            })?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            let field = |k: usize| -> Result<f64> {
                let raw = record.get(k).ok_or_else(|| Error::Parse {
                    line,
                    msg: "missing column".into(),
                })?;
                raw.parse::<f64>().map_err(|e| Error::Parse {
                    line,
                    msg: format!("{raw:?}: {e}"),
                })
            };
            times.push(field(0)?);
            speeds.push(field(1)?);
            if has_x {
                positions.push(field(2)?);
            }
        }
        if times.is_empty() {
            return Err(Error::Parse {
                line: 2,
                msg: "trace has no samples".into(),
            });
        }
        if has_x {
            let samples = times
                .iter()
                .zip(&speeds)
                .zip(&positions)
                .map(|((&t, &v), &x)| TraceSample { t, v, x })
                .collect();
            Self::new(route_id, vehicle_id, samples)
        } else {
            Self::from_speeds(route_id, vehicle_id, &times, &speeds)
        }
    }

    pub fn write_csv(&self, writer: impl std::io::Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let err = |e: csv::Error| Error::Config(format!("writing trace: {e}"));
        w.write_record(["t_sec", "v_mps", "x_m"]).map_err(err)?;
        for s in &self.samples {
            w.write_record([s.t.to_string(), s.v.to_string(), s.x.to_string()])
                .map_err(err)?;
        }
        w.flush()
            .map_err(|e| Error::Config(format!("writing trace: {e}")))?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

fn parse_error(line: u64, e: csv::Error) -> Error {
    Error::Parse {
        line,
        msg: e.to_string(),
    }
}

fn validate(samples: &[TraceSample]) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("trace has no samples".into()));
    }
    let mut trapezoid = 0.0;
    for (i, s) in samples.iter().enumerate() {
        if !(s.t.is_finite() && s.v.is_finite() && s.x.is_finite()) {
            return Err(Error::Monotonicity {
                index: i,
                msg: "non-finite value".into(),
            });
        }
        if s.v < 0.0 {
            return Err(Error::Monotonicity {
                index: i,
                msg: format!("negative speed {}", s.v),
            });
        }
        if i == 0 {
            continue;
        }
        let prev = &samples[i - 1];
        if s.t <= prev.t {
            return Err(Error::Monotonicity {
                index: i,
                msg: format!("time {} does not increase past {}", s.t, prev.t),
            });
        }
        if s.x < prev.x {
            return Err(Error::Monotonicity {
                index: i,
                msg: format!("position {} decreases from {}", s.x, prev.x),
            });
        }
        trapezoid += 0.5 * (s.v + prev.v) * (s.t - prev.t);
        let travelled = s.x - samples[0].x;
        if (travelled - trapezoid).abs() > 0.01 * trapezoid + 0.5 {
            return Err(Error::Monotonicity {
                index: i,
                msg: format!(
                    "position {travelled:.2} m disagrees with integrated speed {trapezoid:.2} m"
                ),
            });
        }
    }
    Ok(())
}
