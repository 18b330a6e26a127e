//! Run configuration: one JSON document with plant, corridor, controller and
//! scenario sections. Every section and field is optional and falls back to
//! its default.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::control::{MpcConfig, RuleBasedConfig};
use crate::error::{Error, Result};
use crate::models::{
    BatteryParams, CatalystParams, EngineParams, EngineThermalParams, RoadLoadParams, VehicleParams,
};
use crate::preview::{CorridorConfig, PreviewMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    I,
    II,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CaseLabel {
    A,
    B,
    C,
    I,
    II,
    III,
    IV,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Driving {
    Normal,
    Eco,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    RuleBased,
    Mpc,
}

impl CaseLabel {
    pub const SCENARIO_I: [CaseLabel; 3] = [CaseLabel::A, CaseLabel::B, CaseLabel::C];
    pub const SCENARIO_II: [CaseLabel; 4] =
        [CaseLabel::I, CaseLabel::II, CaseLabel::III, CaseLabel::IV];

    pub fn scenario(self) -> Scenario {
        match self {
            CaseLabel::A | CaseLabel::B | CaseLabel::C => Scenario::I,
            _ => Scenario::II,
        }
    }

    /// Driving style, controller and (for MPC) preview of this case.
    pub fn layout(self) -> (Driving, ControllerKind, Option<PreviewMode>) {
        use ControllerKind::*;
        use Driving::*;
        match self {
            CaseLabel::A | CaseLabel::I => (Normal, RuleBased, None),
            CaseLabel::B => (Normal, Mpc, Some(PreviewMode::Exact)),
            CaseLabel::C => (Normal, Mpc, Some(PreviewMode::Binned)),
            CaseLabel::II => (Eco, RuleBased, None),
            CaseLabel::III => (Eco, Mpc, Some(PreviewMode::Exact)),
            CaseLabel::IV => (Eco, Mpc, Some(PreviewMode::Binned)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CaseLabel::A => "A",
            CaseLabel::B => "B",
            CaseLabel::C => "C",
            CaseLabel::I => "I",
            CaseLabel::II => "II",
            CaseLabel::III => "III",
            CaseLabel::IV => "IV",
        }
    }
}

impl std::str::FromStr for CaseLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "A" => CaseLabel::A,
            "B" => CaseLabel::B,
            "C" => CaseLabel::C,
            "I" => CaseLabel::I,
            "II" => CaseLabel::II,
            "III" => CaseLabel::III,
            "IV" => CaseLabel::IV,
            _ => return Err(Error::Config(format!("unknown case label {s:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub case: CaseLabel,
    pub driving: Driving,
    pub controller: ControllerKind,
    pub preview: PreviewMode,
    /// Restrict ego selection to this arrival bin
    pub bin_index: Option<usize>,
    /// Which eligible generated vehicle is the ego
    pub ego_index: usize,
    /// Size of the generated background traffic
    pub vehicles: usize,
    pub h_r: usize,
    pub dt1: f64,
    pub dt2: f64,
    pub soc_init: f64,
    pub t_cl_init: f64,
    pub t_cat_init: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::for_case(CaseLabel::A)
    }
}

impl ScenarioConfig {
    /// Defaults for a case of the matrix.
    pub fn for_case(case: CaseLabel) -> Self {
        let (driving, controller, preview) = case.layout();
        Self {
            scenario: case.scenario(),
            case,
            driving,
            controller,
            preview: preview.unwrap_or(PreviewMode::Exact),
            bin_index: None,
            ego_index: 0,
            vehicles: 200,
            h_r: 5,
            dt1: 1.0,
            dt2: 10.0,
            soc_init: 0.6,
            t_cl_init: 50.0,
            t_cat_init: 250.0,
            seed: 7,
        }
    }

    /// Same run settings re-labelled as another case.
    pub fn with_case(&self, case: CaseLabel) -> Self {
        let (driving, controller, preview) = case.layout();
        Self {
            scenario: case.scenario(),
            case,
            driving,
            controller,
            preview: preview.unwrap_or(self.preview),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (driving, controller, preview) = self.case.layout();
        if self.scenario != self.case.scenario() {
            return Err(Error::Config(format!(
                "case {} does not belong to scenario {:?}",
                self.case.name(),
                self.scenario
            )));
        }
        if self.driving != driving
            || self.controller != controller
            || preview.is_some_and(|p| p != self.preview)
        {
            return Err(Error::Config(format!(
                "case {} needs driving={driving:?}, controller={controller:?}, preview={preview:?}",
                self.case.name()
            )));
        }
        if self.h_r == 0 || !(self.dt1 > 0.0) || !(self.dt2 >= self.dt1) {
            return Err(Error::Config("need h_r ≥ 1 and 0 < dt1 ≤ dt2".into()));
        }
        if !(0.0..=1.0).contains(&self.soc_init) {
            return Err(Error::Config("soc_init must lie in [0, 1]".into()));
        }
        if self.vehicles == 0 {
            return Err(Error::Config("vehicles must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerConfig {
    pub rule_based: RuleBasedConfig,
    pub mpc: MpcConfig,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub battery: BatteryParams,
    pub engine: EngineParams,
    pub engine_thermal: EngineThermalParams,
    pub catalyst: CatalystParams,
    pub road_load: RoadLoadParams,
    pub corridor: CorridorConfig,
    pub controller: ControllerConfig,
    pub scenario: ScenarioConfig,
}

impl SimConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SimConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks every section; all failures are reported as configuration errors.
    pub fn validate(&self) -> Result<()> {
        let as_config = |e: Error| match e {
            Error::Config(_) => e,
            other => Error::Config(other.to_string()),
        };
        self.vehicle_params().validate().map_err(as_config)?;
        self.corridor.validate().map_err(as_config)?;
        self.controller.rule_based.validate().map_err(as_config)?;
        self.controller.mpc.bounds.validate().map_err(as_config)?;
        let idle = self.controller.rule_based.idle_power;
        if idle > self.engine.max_power() {
            return Err(Error::Config(format!(
                "controller.rule_based.idle_power {idle} W exceeds the engine's rated {} W",
                self.engine.max_power()
            )));
        }
        self.scenario.validate()
    }

    pub fn vehicle_params(&self) -> VehicleParams {
        VehicleParams {
            battery: self.battery.clone(),
            engine: self.engine.clone(),
            engine_thermal: self.engine_thermal.clone(),
            catalyst: self.catalyst.clone(),
            road_load: self.road_load.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn idle_point_must_fit_the_engine() {
        let text = r#"{"engine": {"ool": {"power": [0, 2000], "speed": [0, 100]}}}"#;
        assert!(matches!(SimConfig::from_json(text), Err(Error::Config(_))));
    }

    #[test]
    fn empty_document_is_the_default() {
        assert_eq!(SimConfig::from_json("{}").unwrap(), SimConfig::default());
    }

    #[test]
    fn round_trips() {
        let cfg = SimConfig::default();
        assert_eq!(SimConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }

    #[test]
    fn unknown_section_rejected() {
        assert!(matches!(
            SimConfig::from_json(r#"{"batery": {}}"#),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn inconsistent_case_rejected() {
        let text = r#"{"scenario": {"scenario": "I", "case": "B", "driving": "normal", "controller": "rule_based"}}"#;
        assert!(matches!(SimConfig::from_json(text), Err(Error::Config(_))));
        let ok = r#"{"scenario": {"scenario": "I", "case": "B", "driving": "normal", "controller": "mpc", "preview": "exact"}}"#;
        assert!(SimConfig::from_json(ok).is_ok());
    }

    #[test]
    fn bad_physics_is_a_config_error() {
        let text = r#"{"battery": {"p_max": 1e9}}"#;
        assert!(matches!(SimConfig::from_json(text), Err(Error::Config(_))));
    }

    #[test]
    fn case_layouts_cover_the_matrix() {
        for c in CaseLabel::SCENARIO_I.iter().chain(&CaseLabel::SCENARIO_II) {
            ScenarioConfig::for_case(*c).validate().unwrap();
        }
    }
}
