use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use iptm::preview::bins::save_profiles;
use iptm::preview::{
    aggregate_bins, first_arrival, generate_corridor_traffic, plan_eco_trajectory, DriveTrace,
};
use iptm::sim::output::COMPARISON_FILE;
use iptm::sim::{
    compare_cases, eligible_egos, load_metrics, run_case, run_matrix, write_comparison, write_json,
    write_outputs, CaseLabel, ClassifiedTraffic, Ego, SimConfig,
};
use iptm::{Error, Result};

/// Power and thermal management workbench for a power-split hybrid on a
/// signalized corridor.
#[derive(Parser)]
#[command(name = "iptm", version)]
struct Cli {
    /// JSON configuration; defaults apply to anything left out
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides scenario.seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate corridor traffic traces
    Generate,
    /// Assign every trip to its arrival bin at the first signal
    Classify {
        /// Directory of t_sec,v_mps[,x_m] CSV traces; generated when absent
        #[arg(long)]
        traces: Option<PathBuf>,
    },
    /// Build per-bin mean speed profiles
    Aggregate {
        #[arg(long)]
        traces: Option<PathBuf>,
    },
    /// Plan a green-window eco trajectory
    PlanEco {
        /// Departure time (s)
        #[arg(long, default_value_t = 0.0)]
        depart: f64,
        /// Planning horizon (s)
        #[arg(long, default_value_t = 1800.0)]
        horizon: f64,
    },
    /// Run one closed-loop case on one ego vehicle
    Simulate {
        /// Case label (A, B, C, I, II, III, IV); defaults to scenario.case
        #[arg(long)]
        case: Option<CaseLabel>,
        /// Overrides scenario.ego_index
        #[arg(long)]
        ego: Option<usize>,
    },
    /// Compare metrics files, or run the configured scenario's cases on the ego
    Compare {
        /// metrics.json files; the first is the baseline
        metrics: Vec<PathBuf>,
    },
    /// Fuel versus short-horizon length for exact and binned preview
    SweepHr {
        #[arg(long, value_delimiter = ',', default_value = "5,10,20")]
        hr: Vec<usize>,
        /// Number of ego vehicles
        #[arg(long, default_value_t = 5)]
        egos: usize,
    },
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) => 2,
                Error::InfeasibleRun { .. } => 3,
                _ => 1,
            })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => SimConfig::load(path)?,
        None => SimConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.scenario.seed = seed;
    }
    let out = cli.out.as_path();
    create_dir(out)?;
    match cli.command {
        Command::Generate => {
            let dir = out.join("traces");
            create_dir(&dir)?;
            let traces = generate(&cfg)?;
            for t in &traces {
                t.save(dir.join(format!("{}.csv", t.vehicle_id)))?;
            }
            println!("{} traces written to {}", traces.len(), dir.display());
        }
        Command::Classify { traces } => {
            let traffic =
                ClassifiedTraffic::classify(load_or_generate(&cfg, traces.as_deref())?, &cfg)?;
            let path = out.join("bins.csv");
            let mut w = csv_writer(&path)?;
            let err = |e: csv::Error| Error::Config(format!("{}: {e}", path.display()));
            w.write_record(["vehicle_id", "first_arrival_s", "bin"])
                .map_err(err)?;
            for (t, b) in traffic.traces.iter().zip(&traffic.bins) {
                let arrival = first_arrival(t, &cfg.corridor)?;
                w.write_record([t.vehicle_id.clone(), arrival.to_string(), b.to_string()])
                    .map_err(err)?;
            }
            w.flush()
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            println!(
                "{} trips classified into {}",
                traffic.traces.len(),
                path.display()
            );
        }
        Command::Aggregate { traces } => {
            let traffic =
                ClassifiedTraffic::classify(load_or_generate(&cfg, traces.as_deref())?, &cfg)?;
            let horizon = traffic.longest_trip() + 60.0;
            let profiles = aggregate_bins(
                &traffic.traces,
                &traffic.bins,
                cfg.corridor.bin_count,
                cfg.scenario.dt1,
                horizon,
            )?;
            let path = out.join("profiles.csv");
            save_profiles(&profiles, &path)?;
            for p in &profiles {
                println!("bin {:2}: {} trips", p.bin_index, p.support_count);
            }
        }
        Command::PlanEco { depart, horizon } => {
            let plan = plan_eco_trajectory(&cfg.corridor, depart, horizon)?;
            let path = out.join("eco.csv");
            plan.trace.save(&path)?;
            for (k, t) in plan.crossings.iter().enumerate() {
                println!("signal {k}: crossed at {t:.1} s");
            }
            println!("arrives at {:.1} s", plan.trace.end_time());
        }
        Command::Simulate { case, ego } => {
            if let Some(c) = case {
                cfg.scenario = cfg.scenario.with_case(c);
            }
            if let Some(i) = ego {
                cfg.scenario.ego_index = i;
            }
            let ego = select_ego(&cfg)?;
            let (log, result) = run_case(&cfg, cfg.scenario.case, &ego)?;
            write_outputs(&log, &result.metrics, out)?;
            let m = &result.metrics;
            println!(
                "case {} ego {} (bin {}): fuel {:.5} kg, engine on {:.1}%, terminal SOC deviation {:+.4}",
                cfg.scenario.case.name(),
                ego.index,
                ego.bin,
                m.fuel_total,
                100.0 * m.engine_on_ratio,
                m.soc_terminal_dev
            );
            if m.violations.any() {
                println!("constraint violations: {:?}", m.violations);
            }
        }
        Command::Compare { metrics } => {
            let cases = if metrics.is_empty() {
                let ego = select_ego(&cfg)?;
                let labels: &[CaseLabel] = match cfg.scenario.scenario {
                    iptm::sim::Scenario::I => &CaseLabel::SCENARIO_I,
                    iptm::sim::Scenario::II => &CaseLabel::SCENARIO_II,
                };
                let mut cases = Vec::new();
                for &c in labels {
                    let (log, r) = run_case(&cfg, c, &ego)?;
                    write_outputs(&log, &r.metrics, out.join(c.name()))?;
                    cases.push((c.name().to_string(), r.metrics));
                }
                cases
            } else {
                metrics
                    .iter()
                    .map(|p| Ok((label_of(p), load_metrics(p)?)))
                    .collect::<Result<Vec<_>>>()?
            };
            let cmp = compare_cases(&cases, 0)?;
            write_comparison(&cmp, out.join(COMPARISON_FILE))?;
            for r in &cmp.rows {
                println!(
                    "{:6} fuel {:.5} kg ({:+.2}%)  engine on {:.3} ({:+.1}%)",
                    r.label,
                    r.fuel_total,
                    r.fuel_delta_pct,
                    r.engine_on_ratio,
                    r.engine_on_delta_pct
                );
            }
        }
        Command::SweepHr { hr, egos } => sweep_hr(&cfg, &hr, egos, out)?,
    }
    Ok(())
}

fn sweep_hr(cfg: &SimConfig, hr: &[usize], n_egos: usize, out: &Path) -> Result<()> {
    if hr.is_empty() || hr.contains(&0) {
        return Err(Error::Config("--hr needs positive horizon lengths".into()));
    }
    let traffic = ClassifiedTraffic::classify(generate(cfg)?, cfg)?;
    let egos = eligible_egos(&traffic, cfg.scenario.bin_index)
        .into_iter()
        .take(n_egos)
        .map(|i| Ego::prepare(&traffic, i, cfg))
        .collect::<Result<Vec<_>>>()?;
    if egos.is_empty() {
        return Err(Error::Config("no eligible ego vehicles".into()));
    }
    let cases = [CaseLabel::B, CaseLabel::C, CaseLabel::III, CaseLabel::IV];
    let path = out.join("sweep_hr.csv");
    let mut w = csv_writer(&path)?;
    let err = |e: csv::Error| Error::Config(format!("{}: {e}", path.display()));
    w.write_record(["h_r", "case", "mean_fuel_kg", "mean_engine_on_ratio"])
        .map_err(err)?;
    for &h in hr {
        let mut c = cfg.clone();
        c.scenario.h_r = h;
        let results = run_matrix(&c, &cases, &egos)?;
        for case in cases {
            let rs: Vec<_> = results.iter().filter(|r| r.case == case).collect();
            let n = rs.len() as f64;
            let fuel = rs.iter().map(|r| r.metrics.fuel_total).sum::<f64>() / n;
            let on = rs.iter().map(|r| r.metrics.engine_on_ratio).sum::<f64>() / n;
            w.write_record([
                h.to_string(),
                case.name().to_string(),
                fuel.to_string(),
                on.to_string(),
            ])
            .map_err(err)?;
            println!(
                "H_r {h:3} case {:4} fuel {fuel:.5} kg  engine on {on:.3}",
                case.name()
            );
        }
    }
    w.flush()
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    write_json(&cfg.scenario, &out.join("sweep_scenario.json"))
}

fn generate(cfg: &SimConfig) -> Result<Vec<DriveTrace>> {
    generate_corridor_traffic(&cfg.corridor, cfg.scenario.vehicles, cfg.scenario.seed)
}

fn load_or_generate(cfg: &SimConfig, dir: Option<&Path>) -> Result<Vec<DriveTrace>> {
    let Some(dir) = dir else {
        return generate(cfg);
    };
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::Config(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Config(format!("no CSV traces in {}", dir.display())));
    }
    paths.iter().map(DriveTrace::load).collect()
}

fn select_ego(cfg: &SimConfig) -> Result<Ego> {
    let traffic = ClassifiedTraffic::classify(generate(cfg)?, cfg)?;
    let eligible = eligible_egos(&traffic, cfg.scenario.bin_index);
    let index = *eligible.get(cfg.scenario.ego_index).ok_or_else(|| {
        Error::Config(format!(
            "ego_index {} out of range: {} eligible vehicles",
            cfg.scenario.ego_index,
            eligible.len()
        ))
    })?;
    Ego::prepare(&traffic, index, cfg)
}

/// Case label for a metrics file: its parent directory, else its stem.
fn label_of(path: &Path) -> String {
    let named = |p: Option<&std::ffi::OsStr>| p.map(|s| s.to_string_lossy().into_owned());
    if path
        .file_name()
        .is_some_and(|n| n == iptm::sim::output::METRICS_FILE)
    {
        if let Some(dir) = named(path.parent().and_then(Path::file_name)) {
            return dir;
        }
    }
    named(path.file_stem()).unwrap_or_else(|| path.display().to_string())
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", dir.display())))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}
