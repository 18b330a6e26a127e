//! Runs every case of both scenarios for a handful of ego vehicles and
//! prints the per-case mean fuel and engine-on ratio.
//!
//! cargo run --release --example scenario_matrix -- [egos]

use iptm::preview::generate_corridor_traffic;
use iptm::sim::{eligible_egos, run_matrix, CaseLabel, ClassifiedTraffic, Ego, SimConfig};

fn main() -> iptm::Result<()> {
    let n_egos: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(3);
    let cfg = SimConfig::default();
    let traces =
        generate_corridor_traffic(&cfg.corridor, cfg.scenario.vehicles, cfg.scenario.seed)?;
    let traffic = ClassifiedTraffic::classify(traces, &cfg)?;
    let egos = eligible_egos(&traffic, None)
        .into_iter()
        .take(n_egos)
        .map(|i| Ego::prepare(&traffic, i, &cfg))
        .collect::<iptm::Result<Vec<_>>>()?;
    let cases = [
        CaseLabel::A,
        CaseLabel::B,
        CaseLabel::C,
        CaseLabel::II,
        CaseLabel::III,
        CaseLabel::IV,
    ];
    let start = std::time::Instant::now();
    let results = run_matrix(&cfg, &cases, &egos)?;
    println!("{} runs in {:.1?}", results.len(), start.elapsed());
    for case in cases {
        let rs: Vec<_> = results.iter().filter(|r| r.case == case).collect();
        let n = rs.len() as f64;
        let mean = |f: &dyn Fn(&iptm::sim::TripMetrics) -> f64| {
            rs.iter().map(|r| f(&r.metrics)).sum::<f64>() / n
        };
        println!(
            "case {:4} mean fuel {:.5} kg  engine-on {:.3}  terminal dev {:+.4}  fallback steps {}",
            case.name(),
            mean(&|m| m.fuel_total),
            mean(&|m| m.engine_on_ratio),
            mean(&|m| m.soc_terminal_dev),
            rs.iter().map(|r| r.metrics.solver.fallback).sum::<usize>()
        );
    }
    if std::env::var_os("VERBOSE").is_none() {
        return Ok(());
    }
    for r in &results {
        let m = &r.metrics;
        println!(
            "ego {:3} bin {:2} case {:4} fuel {:.4} kg  on {:.3}  dsoc {:+.4}  viol {}  fb {} soft {} mean {:.2} ms max {:.1} ms",
            r.ego,
            r.bin,
            r.case.name(),
            m.fuel_total,
            m.engine_on_ratio,
            m.soc_terminal_dev,
            m.violations.any(),
            m.solver.fallback,
            m.solver.soft,
            m.wall_time.mean * 1e3,
            m.wall_time.max * 1e3
        );
    }
    Ok(())
}
