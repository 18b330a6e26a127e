//! Power-split policies: the rule-based baseline and the multi-horizon MPC.

pub mod mpc;
pub mod ocp;
pub mod reference;
pub mod rule_based;

use serde::{Deserialize, Serialize};

use crate::solver::SolveStatus;

pub use mpc::{mpc_step, warm_start_shift, MpcConfig, MpcController, MpcPlan};
pub use ocp::{transcribe_ocp, Ocp, OcpBounds, OcpSpec, ThermalMode, POWER_SCALE};
pub use reference::SplitDp;
pub use rule_based::{rule_based_step, RuleBasedConfig};

/// Solver diagnostics attached to an MPC decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub status: SolveStatus,
    /// Predicted fuel over the horizon (kg)
    pub cost: f64,
    pub iterations: usize,
    /// Seconds
    pub wall_time: f64,
    /// Thermal bounds were softened for this step
    pub soft: bool,
}

/// Power-split command for the next step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlDecision {
    /// Battery power including the auxiliary load (W)
    pub p_bat: f64,
    pub engine_on: bool,
    /// Engine power implied by the split (W)
    pub p_eng: f64,
    pub diagnostics: Option<Diagnostics>,
}
