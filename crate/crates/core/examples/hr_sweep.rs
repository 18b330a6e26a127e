//! Sweeps the fine-horizon length H_r for exact and binned previews and
//! prints the mean fuel of each, with the binned-minus-exact gap.
//!
//! cargo run --release --example hr_sweep -- [egos]

use iptm::preview::generate_corridor_traffic;
use iptm::sim::{eligible_egos, run_matrix, CaseLabel, ClassifiedTraffic, Ego, SimConfig};

fn main() -> iptm::Result<()> {
    let n_egos: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(5);
    let mut cfg = SimConfig::default();
    let traces =
        generate_corridor_traffic(&cfg.corridor, cfg.scenario.vehicles, cfg.scenario.seed)?;
    let traffic = ClassifiedTraffic::classify(traces, &cfg)?;
    let egos = eligible_egos(&traffic, None)
        .into_iter()
        .take(n_egos)
        .map(|i| Ego::prepare(&traffic, i, &cfg))
        .collect::<iptm::Result<Vec<_>>>()?;
    let cases = [CaseLabel::B, CaseLabel::C, CaseLabel::III, CaseLabel::IV];
    println!("h_r   B        C        gap      III      IV       gap");
    for h_r in [5, 10, 20] {
        cfg.scenario.h_r = h_r;
        let results = run_matrix(&cfg, &cases, &egos)?;
        let mean = |c: CaseLabel| {
            results
                .iter()
                .filter(|r| r.case == c)
                .map(|r| r.metrics.fuel_total)
                .sum::<f64>()
                / egos.len() as f64
        };
        let (b, c, e3, e4) = (
            mean(CaseLabel::B),
            mean(CaseLabel::C),
            mean(CaseLabel::III),
            mean(CaseLabel::IV),
        );
        println!(
            "{h_r:<4} {b:.5}  {c:.5}  {:.5}  {e3:.5}  {e4:.5}  {:.5}",
            c - b,
            e4 - e3
        );
    }
    Ok(())
}
