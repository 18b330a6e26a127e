//! Percent-change tables across cases.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::metrics::TripMetrics;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub label: String,
    pub fuel_total: f64,
    /// Percent change of fuel versus the baseline
    pub fuel_delta_pct: f64,
    pub engine_on_ratio: f64,
    pub engine_on_delta_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub baseline: String,
    pub rows: Vec<ComparisonRow>,
    /// Labels from most to least fuel
    pub fuel_order: Vec<String>,
}

impl Comparison {
    /// True if fuel strictly decreases along `labels`.
    pub fn strictly_decreasing(&self, labels: &[&str]) -> bool {
        let fuel = |l: &str| {
            self.rows
                .iter()
                .find(|r| r.label == l)
                .map(|r| r.fuel_total)
        };
        labels
            .windows(2)
            .all(|w| matches!((fuel(w[0]), fuel(w[1])), (Some(a), Some(b)) if a > b))
    }
}

fn pct(value: f64, base: f64) -> f64 {
    if base == 0.0 {
        if value == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(value)
        }
    } else {
        100.0 * (value - base) / base
    }
}

/// Compares labelled metrics against the entry at `baseline`.
pub fn compare_cases(cases: &[(String, TripMetrics)], baseline: usize) -> Result<Comparison> {
    if cases.len() < 2 {
        return Err(Error::InvalidParameter(
            "comparison needs at least two cases".into(),
        ));
    }
    let (base_label, base) = cases.get(baseline).ok_or_else(|| {
        Error::InvalidParameter(format!("baseline index {baseline} out of range"))
    })?;
    let rows: Vec<ComparisonRow> = cases
        .iter()
        .map(|(label, m)| ComparisonRow {
            label: label.clone(),
            fuel_total: m.fuel_total,
            fuel_delta_pct: pct(m.fuel_total, base.fuel_total),
            engine_on_ratio: m.engine_on_ratio,
            engine_on_delta_pct: pct(m.engine_on_ratio, base.engine_on_ratio),
        })
        .collect();
    let mut order: Vec<&ComparisonRow> = rows.iter().collect();
    order.sort_by(|a, b| b.fuel_total.total_cmp(&a.fuel_total));
    Ok(Comparison {
        baseline: base_label.clone(),
        fuel_order: order.iter().map(|r| r.label.clone()).collect(),
        rows,
    })
}
