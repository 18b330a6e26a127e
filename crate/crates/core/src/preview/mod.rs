//! Corridor traffic, trip classification, eco planning and the speed preview
//! fed to the controllers.

pub mod bins;
pub mod corridor;
pub mod eco;
pub mod horizon;
pub mod trace;
pub mod traffic;

pub use bins::{aggregate_bins, arrival_bin, classify_trip, first_arrival, BinProfile};
pub use corridor::{CorridorConfig, Intersection};
pub use eco::{plan_eco_trajectory, EcoParams, EcoPlan};
pub use horizon::{build_preview, estimate_trip_end, long_count, PreviewMode, SpeedPreview};
pub use trace::{DriveTrace, TraceSample};
pub use traffic::{generate_corridor_traffic, Driver, TrafficParams, STOP_OFFSET};
