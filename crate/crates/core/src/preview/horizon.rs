//! Two-resolution speed preview: a fine receding segment followed by a coarse
//! segment that shrinks toward the trip end.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::bins::BinProfile;
use super::trace::DriveTrace;

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedPreview {
    pub t_now: f64,
    pub dt1: f64,
    pub dt2: f64,
    /// Speeds at the start of each fine step, `t_now + k·dt1`
    pub short: Vec<f64>,
    /// Speed where the fine segment ends, from the same source as `short`
    pub v_join: f64,
    /// Speeds at the end of each coarse step; the last one is at `t_end`
    pub long: Vec<f64>,
    pub t_end: f64,
}

impl SpeedPreview {
    pub fn len(&self) -> usize {
        self.short.len() + self.long.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Durations of all steps; the last coarse step ends exactly at `t_end`.
    pub fn step_durations(&self) -> Vec<f64> {
        let mut d = vec![self.dt1; self.short.len()];
        d.extend(std::iter::repeat_n(self.dt2, self.long.len()));
        if let Some(n) = d.len().checked_sub(1) {
            let before: f64 = d[..n].iter().sum();
            d[n] = self.t_end - self.t_now - before;
        }
        d
    }

    /// Start time of every step.
    pub fn node_times(&self) -> Vec<f64> {
        let h = self.short.len();
        (0..h)
            .map(|k| self.t_now + k as f64 * self.dt1)
            .chain(
                (0..self.long.len())
                    .map(|j| self.t_now + h as f64 * self.dt1 + j as f64 * self.dt2),
            )
            .collect()
    }

    /// Speed at the start and at the end of every step.
    pub fn step_speeds(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.len());
        for (k, &v) in self.short.iter().enumerate() {
            out.push((v, self.short.get(k + 1).copied().unwrap_or(self.v_join)));
        }
        let mut prev = self.v_join;
        for &v in &self.long {
            out.push((prev, v));
            prev = v;
        }
        out
    }

    /// Mean speed and acceleration of every step. `traction_power` of these
    /// gives the exact kinetic-energy change however coarse the step.
    pub fn node_kinematics(&self) -> Vec<(f64, f64)> {
        self.step_speeds()
            .into_iter()
            .zip(self.step_durations())
            .map(|((a, b), d)| (0.5 * (a + b), (b - a) / d))
            .collect()
    }
}

pub fn long_count(t_now: f64, h_r: usize, dt1: f64, dt2: f64, t_end: f64) -> usize {
    let rest = t_end - t_now - h_r as f64 * dt1;
    if rest <= EPS {
        0
    } else {
        (rest / dt2 - EPS).ceil() as usize
    }
}

/// How the coarse segment is read from its profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreviewMode {
    /// Profile is this trip's own trace, read by elapsed time.
    Exact,
    /// Profile is a bin mean, read from the point where it has covered the
    /// distance the vehicle will have covered at the end of the fine segment.
    Binned,
}

/// Builds the preview at `t_now`. The fine segment is read from `trace`; the
/// coarse segment from `long_source` according to `mode`.
#[allow(clippy::too_many_arguments)]
pub fn build_preview(
    t_now: f64,
    trace: &DriveTrace,
    long_source: &BinProfile,
    mode: PreviewMode,
    h_r: usize,
    dt1: f64,
    dt2: f64,
    t_end: f64,
) -> Result<SpeedPreview> {
    if !long_source.usable() {
        return Err(Error::UnusableProfile {
            bin: long_source.bin_index,
        });
    }
    if !(dt1 > 0.0 && dt2 > 0.0) {
        return Err(Error::InvalidParameter(
            "preview steps must be positive".into(),
        ));
    }
    let short_end = t_now + h_r as f64 * dt1;
    if short_end > t_end + EPS {
        return Err(Error::HorizonExceedsEnd {
            horizon_end: short_end,
            t_end,
        });
    }
    let short = (0..h_r)
        .map(|k| trace.speed_at(t_now + k as f64 * dt1))
        .collect();
    let n_long = long_count(t_now, h_r, dt1, dt2, t_end);
    // offsets of the coarse step ends from `short_end`
    let ends = (1..=n_long).map(|j| (j as f64 * dt2).min(t_end - short_end));
    let long = match mode {
        PreviewMode::Exact => {
            let t0 = trace.start_time();
            ends.map(|e| long_source.speed_at(short_end + e - t0))
                .collect()
        }
        PreviewMode::Binned => {
            let x = trace.position_at(short_end) - trace.samples()[0].x;
            match long_source.time_at_distance(x) {
                Some(tau0) => ends.map(|e| long_source.speed_at(tau0 + e)).collect(),
                None => vec![0.0; n_long],
            }
        }
    };
    Ok(SpeedPreview {
        t_now,
        dt1,
        dt2,
        short,
        v_join: trace.speed_at(short_end),
        long,
        t_end,
    })
}

/// Trip-end estimate from a bin mean profile: the time the profile needs to
/// cover the rest of the route from the vehicle's position at the end of the
/// fine segment.
pub fn estimate_trip_end(
    t_now: f64,
    trace: &DriveTrace,
    profile: &BinProfile,
    h_r: usize,
    dt1: f64,
    route_length: f64,
) -> f64 {
    let short_end = t_now + h_r as f64 * dt1;
    let x = trace.position_at(short_end) - trace.samples()[0].x;
    let target = (route_length - 0.5).max(0.0);
    let tau_end = profile
        .time_at_distance(target)
        .unwrap_or(profile.dt * (profile.mean_v.len() - 1) as f64);
    let tau0 = profile.time_at_distance(x).unwrap_or(tau_end);
    short_end + (tau_end - tau0).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cruise(secs: usize, v: f64) -> DriveTrace {
        let t: Vec<f64> = (0..=secs).map(|k| k as f64).collect();
        DriveTrace::from_speeds("r", "v", &t, &vec![v; secs + 1]).unwrap()
    }

    #[test]
    fn tiling_arithmetic() {
        let tr = cruise(600, 10.0);
        let prof = BinProfile::from_trace(&tr, 1.0);
        let p = build_preview(0.0, &tr, &prof, PreviewMode::Exact, 5, 1.0, 10.0, 600.0).unwrap();
        assert_eq!(p.short.len(), 5);
        assert_eq!(p.long.len(), 60);
        let d = p.step_durations();
        assert_eq!(d.iter().sum::<f64>(), 600.0);
        assert_eq!(*d.last().unwrap(), 5.0);
        let later =
            build_preview(10.0, &tr, &prof, PreviewMode::Exact, 5, 1.0, 10.0, 600.0).unwrap();
        assert_eq!(later.long.len(), 59);
    }

    #[test]
    fn exact_mode_reproduces_truth() {
        let t: Vec<f64> = (0..=100).map(|k| k as f64).collect();
        let v: Vec<f64> = t.iter().map(|&s| 5.0 + (s * 0.1).sin()).collect();
        let tr = DriveTrace::from_speeds("r", "v", &t, &v).unwrap();
        let prof = BinProfile::from_trace(&tr, 1.0);
        let p = build_preview(3.0, &tr, &prof, PreviewMode::Exact, 5, 1.0, 10.0, 100.0).unwrap();
        let ends = p.step_speeds();
        for ((a, b), (t0, d)) in ends
            .iter()
            .zip(p.node_times().into_iter().zip(p.step_durations()))
        {
            assert!((a - tr.speed_at(t0)).abs() < 1e-12);
            assert!((b - tr.speed_at(t0 + d)).abs() < 1e-12);
        }
    }

    #[test]
    fn binned_segment_starts_from_the_actual_speed() {
        let slow = cruise(200, 2.0);
        let fast = BinProfile::from_trace(&cruise(200, 12.0), 1.0);
        let p = build_preview(0.0, &slow, &fast, PreviewMode::Binned, 5, 1.0, 10.0, 100.0).unwrap();
        let ends = p.step_speeds();
        assert_eq!(ends[4], (2.0, 2.0));
        assert_eq!(ends[5], (2.0, 12.0));
        let kin = p.node_kinematics();
        assert!((kin[5].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn horizon_beyond_end_rejected() {
        let tr = cruise(10, 10.0);
        let prof = BinProfile::from_trace(&tr, 1.0);
        assert!(matches!(
            build_preview(8.0, &tr, &prof, PreviewMode::Exact, 5, 1.0, 10.0, 10.0),
            Err(Error::HorizonExceedsEnd { .. })
        ));
    }

    #[test]
    fn short_only_preview_ends_at_trip_end() {
        let tr = cruise(10, 10.0);
        let prof = BinProfile::from_trace(&tr, 1.0);
        let p = build_preview(7.0, &tr, &prof, PreviewMode::Exact, 3, 1.0, 10.0, 10.0).unwrap();
        assert!(p.long.is_empty());
        assert_eq!(p.step_durations(), vec![1.0, 1.0, 1.0]);
    }
}
