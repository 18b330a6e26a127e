//! Acceptance suite. Prints one PASS/FAIL line per criterion followed by a
//! summary. Exits zero so a plain `cargo test` still runs the remaining
//! suites; set ACCEPTANCE_STRICT=1 to exit non-zero on any FAIL.

mod common;

use std::time::Instant;

use common::corridors::random_corridor;
use common::oracle;
use iptm::control::{mpc_step, MpcConfig, RuleBasedConfig, SplitDp};
use iptm::models::{VehicleParams, VehicleState};
use iptm::preview::traffic::STOP_OFFSET;
use iptm::preview::{
    arrival_bin, build_preview, classify_trip, generate_corridor_traffic, plan_eco_trajectory,
    BinProfile, CorridorConfig, DriveTrace, Intersection, PreviewMode, TraceSample,
};
use iptm::sim::{
    eligible_egos, run_closed_loop, run_matrix, CaseLabel, CaseResult, ClassifiedTraffic,
    ControllerKind, Ego, SimConfig,
};
use iptm::solver::{dp_oracle, SolveStatus, StateGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EGOS: usize = 20;
const ALL_CASES: [CaseLabel; 7] = [
    CaseLabel::A,
    CaseLabel::B,
    CaseLabel::C,
    CaseLabel::I,
    CaseLabel::II,
    CaseLabel::III,
    CaseLabel::IV,
];
const SWEEP_CASES: [CaseLabel; 4] = [CaseLabel::B, CaseLabel::C, CaseLabel::III, CaseLabel::IV];

struct Verdict {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn verdict(id: &'static str, pass: bool, detail: String) -> Verdict {
    println!("{id} {} {detail}", if pass { "PASS" } else { "FAIL" });
    Verdict { id, pass, detail }
}

struct Corpus {
    cfg: SimConfig,
    egos: Vec<Ego>,
    /// Every case of both scenarios at the default H_r
    matrix: Vec<CaseResult>,
}

impl Corpus {
    fn build() -> Corpus {
        let cfg = SimConfig::default();
        let traces =
            generate_corridor_traffic(&cfg.corridor, cfg.scenario.vehicles, cfg.scenario.seed)
                .unwrap();
        let traffic = ClassifiedTraffic::classify(traces, &cfg).unwrap();
        let egos: Vec<Ego> = eligible_egos(&traffic, None)
            .into_iter()
            .take(EGOS)
            .map(|i| Ego::prepare(&traffic, i, &cfg).unwrap())
            .collect();
        assert_eq!(egos.len(), EGOS, "not enough eligible ego vehicles");
        let matrix = run_matrix(&cfg, &ALL_CASES, &egos).unwrap();
        Corpus { cfg, egos, matrix }
    }

    fn runs(&self, case: CaseLabel) -> Vec<&CaseResult> {
        self.matrix.iter().filter(|r| r.case == case).collect()
    }

    fn mean_fuel(&self, case: CaseLabel) -> f64 {
        mean(self.runs(case).iter().map(|r| r.metrics.fuel_total))
    }

    fn run_of(&self, case: CaseLabel, ego: usize) -> &CaseResult {
        self.matrix
            .iter()
            .find(|r| r.case == case && r.ego == ego)
            .unwrap()
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

fn ac1() -> Verdict {
    let start = Instant::now();
    let rate = oracle::worst_rate_error();
    let grad = oracle::worst_gradient_error(100, 2024);
    let secs = start.elapsed().as_secs_f64();
    verdict(
        "AC-1",
        rate <= 1e-9 && grad <= 1e-4 && secs < 10.0,
        format!("worst rate error {rate:.2e} (≤1e-9), worst gradient error {grad:.2e} (≤1e-4), {secs:.2} s"),
    )
}

fn ac2() -> Verdict {
    const STAGES: usize = 30;
    const DT: f64 = 10.0;
    let start = Instant::now();
    let base = SimConfig::default();
    let params = base.vehicle_params();
    let trips = generate_corridor_traffic(&base.corridor, 4, base.scenario.seed).unwrap();
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for trip in &trips {
        let t0 = trip.start_time();
        let times: Vec<f64> = (0..=STAGES).map(|k| k as f64 * DT).collect();
        let speeds: Vec<f64> = times.iter().map(|t| trip.speed_at(t0 + t)).collect();
        let trace = DriveTrace::from_speeds("dp", &trip.vehicle_id, &times, &speeds).unwrap();
        let bounds = base.controller.mpc.bounds.clone();
        let dp = SplitDp::new(
            &params,
            &speeds,
            DT,
            SplitDp::uniform_levels(&params, 21),
            bounds,
            0.6,
            true,
        );
        let grid = StateGrid::new(vec![
            StateGrid::linspace(0.5, 0.7, 41),
            StateGrid::linspace(40.0, 90.0, 31),
            StateGrid::linspace(250.0, 700.0, 31),
        ])
        .unwrap();
        let sol = dp_oracle(&dp, grid).unwrap();
        let optimum = sol.optimal_cost(&dp, &[0.6, 50.0, 250.0]);

        let mut cfg = base.clone();
        cfg.scenario = cfg.scenario.with_case(CaseLabel::B);
        cfg.scenario.dt1 = DT;
        cfg.scenario.dt2 = DT;
        cfg.scenario.h_r = 1;
        let fuel = run_closed_loop(&cfg, &trace, None).unwrap().fuel_total();
        // an infinite optimum means the grid lost the start state
        let ratio = if optimum.is_finite() {
            fuel / optimum
        } else {
            f64::INFINITY
        };
        worst = worst.max(ratio);
        lines.push(format!(
            "{}: {:.2} g vs {:.2} g ({ratio:.4})",
            trip.vehicle_id,
            fuel * 1e3,
            optimum * 1e3
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        "AC-2",
        worst <= 1.02 && secs < 300.0,
        format!(
            "MPC/DP fuel worst ratio {worst:.4} (≤1.02) in {secs:.1} s; {}",
            lines.join(", ")
        ),
    )
}

fn ac3(c: &Corpus) -> Verdict {
    let mut hard = 0;
    let mut flagged = Vec::new();
    let mut terminal = 0;
    let mut mpc_runs = 0;
    for r in &c.matrix {
        let v = &r.metrics.violations;
        let soft = r.metrics.solver.soft > 0;
        hard += v.soc.count + v.t_cat.count;
        if soft {
            if v.t_cl.count > 0 {
                flagged.push(format!("{}/{}", r.case.name(), r.ego));
            }
        } else {
            hard += v.t_cl.count;
        }
        if r.case.layout().1 == ControllerKind::Mpc {
            mpc_runs += 1;
            terminal += usize::from(v.terminal_soc);
        }
    }
    let worst_soc = c
        .matrix
        .iter()
        .map(|r| r.metrics.violations.soc.max)
        .fold(f64::MIN, f64::max);
    let worst_cl = c
        .matrix
        .iter()
        .map(|r| r.metrics.violations.t_cl.max)
        .fold(f64::MIN, f64::max);
    let worst_cat = c
        .matrix
        .iter()
        .map(|r| r.metrics.violations.t_cat.max)
        .fold(f64::MIN, f64::max);
    verdict(
        "AC-3",
        hard == 0 && terminal == 0,
        format!(
            "{} runs: {hard} hard bound violations (worst excess SOC {worst_soc:.1e}, T_cl {worst_cl:.2} °C, T_cat {worst_cat:.2} °C), \
             {terminal}/{mpc_runs} MPC runs outside the terminal SOC band, soft-penalty runs with T_cl excursions: {flagged:?}",
            c.matrix.len()
        ),
    )
}

fn ac4(c: &Corpus) -> Verdict {
    let f = |case| c.mean_fuel(case);
    let saving = |base: CaseLabel, case: CaseLabel| 100.0 * (1.0 - f(case) / f(base));
    let order_i = f(CaseLabel::A) > f(CaseLabel::C) && f(CaseLabel::C) > f(CaseLabel::B);
    let order_ii = f(CaseLabel::II) > f(CaseLabel::IV) && f(CaseLabel::IV) > f(CaseLabel::III);
    let mpc_saving = [
        saving(CaseLabel::A, CaseLabel::B),
        saving(CaseLabel::II, CaseLabel::III),
    ];
    let eco_saving = [
        saving(CaseLabel::I, CaseLabel::II),
        saving(CaseLabel::B, CaseLabel::III),
        saving(CaseLabel::C, CaseLabel::IV),
    ];
    let pass = order_i
        && order_ii
        && mpc_saving.iter().all(|&s| s >= 1.0)
        && eco_saving.iter().all(|&s| s >= 5.0);
    verdict(
        "AC-4",
        pass,
        format!(
            "mean fuel g: A {:.2} > C {:.2} > B {:.2} [{order_i}]; II {:.2} > IV {:.2} > III {:.2} [{order_ii}]; \
             exact MPC saving {:.1}% / {:.1}% (≥1%); eco saving rule {:.1}%, exact {:.1}%, binned {:.1}% (≥5%)",
            f(CaseLabel::A) * 1e3,
            f(CaseLabel::C) * 1e3,
            f(CaseLabel::B) * 1e3,
            f(CaseLabel::II) * 1e3,
            f(CaseLabel::IV) * 1e3,
            f(CaseLabel::III) * 1e3,
            mpc_saving[0],
            mpc_saving[1],
            eco_saving[0],
            eco_saving[1],
            eco_saving[2]
        ),
    )
}

fn ac5(c: &Corpus) -> Verdict {
    let pairs = [
        (CaseLabel::A, CaseLabel::B),
        (CaseLabel::A, CaseLabel::C),
        (CaseLabel::II, CaseLabel::III),
        (CaseLabel::II, CaseLabel::IV),
    ];
    let mut worse = Vec::new();
    let mut reductions = Vec::new();
    for (rule, mpc) in pairs {
        for ego in &c.egos {
            let r = c.run_of(rule, ego.index).metrics.engine_on_ratio;
            let m = c.run_of(mpc, ego.index).metrics.engine_on_ratio;
            if m >= r {
                worse.push(format!("{}/{}", mpc.name(), ego.index));
            }
        }
        let r = mean(c.runs(rule).iter().map(|x| x.metrics.engine_on_ratio));
        let m = mean(c.runs(mpc).iter().map(|x| x.metrics.engine_on_ratio));
        reductions.push((mpc, 100.0 * (1.0 - m / r)));
    }
    let least = reductions.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let shown: Vec<String> = reductions
        .iter()
        .map(|(c, r)| format!("{} {r:.1}%", c.name()))
        .collect();
    verdict(
        "AC-5",
        worse.is_empty() && least >= 20.0,
        format!(
            "MPC engine-on ratio below rule-based on {}/{} traces (not on {worse:?}); mean reduction {} (≥20%)",
            pairs.len() * c.egos.len() - worse.len(),
            pairs.len() * c.egos.len(),
            shown.join(", ")
        ),
    )
}

fn ac6(c: &Corpus) -> Verdict {
    let mut cfg = c.cfg.clone();
    cfg.scenario.h_r = 20;
    let long = run_matrix(&cfg, &SWEEP_CASES, &c.egos).unwrap();
    let mean20 = |case| {
        mean(
            long.iter()
                .filter(|r| r.case == case)
                .map(|r| r.metrics.fuel_total),
        )
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for (exact, binned) in [
        (CaseLabel::III, CaseLabel::IV),
        (CaseLabel::B, CaseLabel::C),
    ] {
        let (b5, b20) = (c.mean_fuel(binned), mean20(binned));
        let (gap5, gap20) = (b5 - c.mean_fuel(exact), b20 - mean20(exact));
        let shrink = 100.0 * (1.0 - gap20 / gap5);
        let ok = b20 <= b5 && shrink >= 25.0;
        pass &= ok;
        parts.push(format!(
            "{}: fuel {:.3} g at H_r=5 vs {:.3} g at H_r=20, gap to {} {:.3} g -> {:.3} g, shrink {shrink:.0}% (≥25%) [{ok}]",
            binned.name(),
            b5 * 1e3,
            b20 * 1e3,
            exact.name(),
            gap5 * 1e3,
            gap20 * 1e3
        ));
    }
    verdict("AC-6", pass, parts.join("; "))
}

fn ac7() -> Verdict {
    let cfg = SimConfig::default();
    let params = VehicleParams::default();
    let trip = generate_corridor_traffic(&cfg.corridor, 1, 1)
        .unwrap()
        .remove(0);
    let own = BinProfile::from_trace(&trip, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst: f64 = 0.0;
    let mut optimal = 0;
    for _ in 0..10 {
        let s = VehicleState {
            soc: rng.gen_range(0.45..0.75),
            t_cl: rng.gen_range(45.0..85.0),
            t_cat: rng.gen_range(255.0..600.0),
            engine_on: false,
        };
        let t_now = trip.start_time() + rng.gen_range(0..150) as f64;
        let t_end = t_now + 40.0;
        let multi =
            build_preview(t_now, &trip, &own, PreviewMode::Exact, 5, 1.0, 1.0, t_end).unwrap();
        let uniform =
            build_preview(t_now, &trip, &own, PreviewMode::Exact, 40, 1.0, 1.0, t_end).unwrap();
        let solve = |pv| {
            mpc_step(
                &s,
                pv,
                None,
                &params,
                &MpcConfig::default(),
                &RuleBasedConfig::default(),
                s.soc,
            )
            .unwrap()
            .0
        };
        let (a, b) = (solve(&multi), solve(&uniform));
        worst = worst
            .max((a.p_bat - b.p_bat).abs())
            .max((a.p_eng - b.p_eng).abs());
        let ok = |d: &iptm::control::ControlDecision| {
            d.diagnostics
                .as_ref()
                .is_some_and(|x| x.status == SolveStatus::Optimal)
        };
        optimal += usize::from(ok(&a) && ok(&b));
    }
    verdict(
        "AC-7",
        worst <= 1e-6,
        format!("largest first-move difference {worst:.2e} W (≤1e-6) over 10 states, {optimal}/10 solved to optimality"),
    )
}

fn ac8() -> Verdict {
    // twelve signals over 7 km for trips of ten minutes or more
    let mut cfg = SimConfig::default();
    let first: Vec<Intersection> = cfg.corridor.intersections.clone();
    cfg.corridor
        .intersections
        .extend(first.iter().map(|s| Intersection {
            position: s.position + 3500.0,
            ..*s
        }));
    cfg.corridor.length = 7000.0;
    cfg.validate().unwrap();
    let traces = generate_corridor_traffic(&cfg.corridor, 60, 5).unwrap();
    let traffic = ClassifiedTraffic::classify(traces, &cfg).unwrap();
    let index = eligible_egos(&traffic, None)
        .into_iter()
        .find(|&i| traffic.traces[i].duration() >= 600.0)
        .expect("a ten-minute trip");
    let ego = Ego::prepare(&traffic, index, &cfg).unwrap();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for case in [CaseLabel::B, CaseLabel::C] {
        let (_, r) = iptm::sim::run_case(&cfg, case, &ego).unwrap();
        worst = worst.max(r.metrics.wall_time.max);
        parts.push(format!(
            "{} max {:.0} ms mean {:.1} ms",
            case.name(),
            r.metrics.wall_time.max * 1e3,
            r.metrics.wall_time.mean * 1e3
        ));
    }
    verdict(
        "AC-8",
        worst <= 1.0,
        format!(
            "{:.0} s trip, H_r=5, dt2=10, one run at a time: {} (≤1000 ms)",
            ego.normal.duration(),
            parts.join(", ")
        ),
    )
}

/// Constant-speed approach reaching the first resting spot at `t_arr`.
fn approach(cfg: &CorridorConfig, t_arr: f64) -> DriveTrace {
    let x = cfg.first().position - STOP_OFFSET;
    let v = 14.0;
    let t0 = t_arr - x / v;
    let samples = vec![
        TraceSample { t: t0, v, x: 0.0 },
        TraceSample { t: t_arr, v, x },
        TraceSample {
            t: t_arr + 20.0,
            v,
            x: x + 20.0 * v,
        },
    ];
    DriveTrace::new("r", "v", samples).unwrap()
}

fn ac9() -> Verdict {
    let cfg = CorridorConfig::default();
    let red = cfg.first().red_onset();
    let example = arrival_bin(45.0, cfg.cycle(), cfg.bin_count) == 5
        && classify_trip(&approach(&cfg, red + 45.0 + 3.0 * cfg.cycle()), &cfg).unwrap() == 5;

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut shift_failures = 0;
    for _ in 0..1000 {
        let t_arr = rng.gen_range(0.0..1e4);
        let k = rng.gen_range(-20i32..=20) as f64;
        let phase = (t_arr - red).rem_euclid(cfg.cycle() / cfg.bin_count as f64);
        let on_edge = phase.min(cfg.cycle() / cfg.bin_count as f64 - phase) < 1e-6;
        let a = classify_trip(&approach(&cfg, t_arr), &cfg).unwrap();
        let b = classify_trip(&approach(&cfg, t_arr + k * cfg.cycle()), &cfg).unwrap();
        shift_failures += usize::from(a != b && !on_edge);
    }

    let mut red_crossings = 0;
    let mut infeasible = 0;
    for _ in 0..100 {
        let corridor = random_corridor(&mut rng);
        let depart = rng.gen_range(0.0..corridor.cycle());
        match plan_eco_trajectory(&corridor, depart, 3600.0) {
            Ok(plan) => {
                red_crossings += corridor
                    .intersections
                    .iter()
                    .zip(&plan.crossings)
                    .filter(|(s, &t)| !s.is_green(t))
                    .count();
            }
            Err(_) => infeasible += 1,
        }
    }
    verdict(
        "AC-9",
        example && shift_failures == 0 && red_crossings == 0 && infeasible == 0,
        format!(
            "bin-5 example [{example}], cycle-shift mismatches {shift_failures}/1000, eco crossings in red {red_crossings} \
             and unplannable corridors {infeasible} over 100 random corridors"
        ),
    )
}

fn main() {
    let start = Instant::now();
    let mut verdicts = vec![ac1(), ac2()];
    let corpus = Corpus::build();
    println!(
        "corpus: {} ego vehicles x {} cases in {:.1} s",
        corpus.egos.len(),
        ALL_CASES.len(),
        start.elapsed().as_secs_f64()
    );
    verdicts.push(ac3(&corpus));
    verdicts.push(ac4(&corpus));
    verdicts.push(ac5(&corpus));
    verdicts.push(ac6(&corpus));
    verdicts.push(ac7());
    verdicts.push(ac8());
    verdicts.push(ac9());
    verdicts.sort_by_key(|v| v.id);

    let failed: Vec<&Verdict> = verdicts.iter().filter(|v| !v.pass).collect();
    println!(
        "acceptance: {}/{} criteria pass in {:.1} s",
        verdicts.len() - failed.len(),
        verdicts.len(),
        start.elapsed().as_secs_f64()
    );
    for v in &failed {
        println!("  failing {}: {}", v.id, v.detail);
    }
    if !failed.is_empty() && std::env::var_os("ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
