//! Ego-vehicle preparation and execution of the case matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preview::{aggregate_bins, classify_trip, plan_eco_trajectory, BinProfile, DriveTrace};

use super::closed_loop::{run_closed_loop, TrajectoryLog};
use super::config::{CaseLabel, ControllerKind, Driving, SimConfig};
use super::metrics::{compute_metrics, TripMetrics};

/// Corridor traffic with each trip's arrival bin.
#[derive(Debug, Clone)]
pub struct ClassifiedTraffic {
    pub traces: Vec<DriveTrace>,
    pub bins: Vec<usize>,
}

impl ClassifiedTraffic {
    pub fn classify(traces: Vec<DriveTrace>, cfg: &SimConfig) -> Result<Self> {
        let bins = traces
            .iter()
            .map(|t| classify_trip(t, &cfg.corridor))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { traces, bins })
    }

    /// Longest trip, used as the aggregation horizon.
    pub fn longest_trip(&self) -> f64 {
        self.traces.iter().map(|t| t.duration()).fold(0.0, f64::max)
    }

    /// Bin mean profile of `bin` built from every trip except `exclude`.
    pub fn profile_without(
        &self,
        bin: usize,
        exclude: usize,
        cfg: &SimConfig,
    ) -> Result<BinProfile> {
        let (traces, bins): (Vec<DriveTrace>, Vec<usize>) = self
            .traces
            .iter()
            .zip(&self.bins)
            .enumerate()
            .filter(|(i, (_, &b))| *i != exclude && b == bin)
            .map(|(_, (t, b))| (t.clone(), *b))
            .unzip();
        let horizon = self.longest_trip() + 60.0;
        let mut profiles = aggregate_bins(
            &traces,
            &bins,
            cfg.corridor.bin_count,
            cfg.scenario.dt1,
            horizon,
        )?;
        Ok(profiles.swap_remove(bin - 1))
    }
}

/// Everything a case needs about one ego vehicle.
#[derive(Debug, Clone)]
pub struct Ego {
    pub index: usize,
    pub bin: usize,
    pub normal: DriveTrace,
    pub eco: DriveTrace,
    /// Bin mean profile from the other trips in the ego's bin
    pub profile: BinProfile,
}

impl Ego {
    pub fn prepare(traffic: &ClassifiedTraffic, index: usize, cfg: &SimConfig) -> Result<Self> {
        let normal = traffic
            .traces
            .get(index)
            .ok_or_else(|| Error::Config(format!("no generated vehicle {index}")))?
            .clone();
        let bin = traffic.bins[index];
        let profile = traffic.profile_without(bin, index, cfg)?;
        let eco = eco_trace(&normal, cfg)?;
        Ok(Self {
            index,
            bin,
            normal,
            eco,
            profile,
        })
    }

    pub fn trace(&self, driving: Driving) -> &DriveTrace {
        match driving {
            Driving::Normal => &self.normal,
            Driving::Eco => &self.eco,
        }
    }
}

/// Eco trajectory for the ego's departure at its own preferred cruise speed.
pub fn eco_trace(normal: &DriveTrace, cfg: &SimConfig) -> Result<DriveTrace> {
    let mut corridor = cfg.corridor.clone();
    corridor.eco.cruise_speed = Some(normal.max_speed().max(corridor.eco.min_speed));
    let horizon = 4.0
        * normal
            .duration()
            .max(corridor.length / corridor.eco.min_speed);
    let plan = plan_eco_trajectory(&corridor, normal.start_time(), horizon)?;
    let mut trace = plan.trace;
    trace.vehicle_id.clone_from(&normal.vehicle_id);
    Ok(trace)
}

/// Indices of vehicles usable as egos: optionally restricted to one bin, and
/// with at least one other trip in the same bin.
pub fn eligible_egos(traffic: &ClassifiedTraffic, bin: Option<usize>) -> Vec<usize> {
    let mut counts = std::collections::HashMap::new();
    for b in &traffic.bins {
        *counts.entry(*b).or_insert(0usize) += 1;
    }
    (0..traffic.traces.len())
        .filter(|&i| bin.is_none_or(|b| traffic.bins[i] == b) && counts[&traffic.bins[i]] >= 2)
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaseResult {
    pub case: CaseLabel,
    pub ego: usize,
    pub bin: usize,
    pub metrics: TripMetrics,
}

/// Runs one case of the matrix on `ego`.
pub fn run_case(
    cfg: &SimConfig,
    case: CaseLabel,
    ego: &Ego,
) -> Result<(TrajectoryLog, CaseResult)> {
    let mut c = cfg.clone();
    c.scenario = cfg.scenario.with_case(case);
    let trace = ego.trace(c.scenario.driving);
    let profile = (c.scenario.controller == ControllerKind::Mpc).then_some(&ego.profile);
    let log = run_closed_loop(&c, trace, profile)?;
    let metrics = compute_metrics(&log, &c.controller.mpc.bounds);
    Ok((
        log,
        CaseResult {
            case,
            ego: ego.index,
            bin: ego.bin,
            metrics,
        },
    ))
}

/// Runs every (ego, case) pair, spreading the runs over the available cores.
/// Results come back in input order.
pub fn run_matrix(cfg: &SimConfig, cases: &[CaseLabel], egos: &[Ego]) -> Result<Vec<CaseResult>> {
    let jobs: Vec<(usize, CaseLabel)> = (0..egos.len())
        .flat_map(|e| cases.iter().map(move |c| (e, *c)))
        .collect();
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(jobs.len())
        .max(1);
    let next = std::sync::atomic::AtomicUsize::new(0);
    let mut slots: Vec<Option<Result<CaseResult>>> = (0..jobs.len()).map(|_| None).collect();
    let results = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let j = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                let Some(&(e, case)) = jobs.get(j) else { break };
                let r = run_case(cfg, case, &egos[e]).map(|(_, r)| r);
                results.lock().expect("result slots")[j] = Some(r);
            });
        }
    });
    slots
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect()
}
