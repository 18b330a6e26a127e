use std::path::PathBuf;

/// Errors raised by the models, the preview pipeline, the controllers and the
/// simulation harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("battery power {p_bat:.1} W exceeds the physical limit {limit:.1} W (negative discriminant)")]
    BatteryLimit { p_bat: f64, limit: f64 },

    #[error("infeasible power split: engine would need {required:.1} W (max {max:.1} W)")]
    InfeasibleSplit { required: f64, max: f64 },

    #[error("infeasible demand: {0}")]
    InfeasibleDemand(String),

    #[error("{what} = {value} is outside [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error("trace is not monotone at sample {index}: {msg}")]
    Monotonicity { index: usize, msg: String },

    #[error("infeasible corridor: {0}")]
    InfeasibleCorridor(String),

    #[error("trace never reaches the intersection at {position} m")]
    NeverArrives { position: f64 },

    #[error("bin profile {bin} is unusable (no supporting traces)")]
    UnusableProfile { bin: usize },

    #[error("horizon end {horizon_end} s exceeds trip end {t_end} s")]
    HorizonExceedsEnd { horizon_end: f64, t_end: f64 },

    #[error("no feasible green-window chain: {0}")]
    NoGreenWindow(String),

    #[error("dynamic programming grid too large: {size} state-control pairs (limit {limit})")]
    GridTooLarge { size: usize, limit: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("infeasible run at t = {t} s: {msg}")]
    InfeasibleRun { t: f64, msg: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
