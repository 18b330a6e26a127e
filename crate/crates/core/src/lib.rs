//! Integrated power and thermal management for a power-split hybrid.
//!
//! The crate bundles plant models (battery, engine coolant, catalyst),
//! corridor speed previews built from binned traffic traces, a rule-based
//! baseline and a multi-resolution MPC power-split controller, the NLP and
//! dynamic-programming solvers behind them, and a closed-loop harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod error;
pub mod interp;
pub mod models;
pub mod preview;
pub mod sim;
pub mod solver;

pub use error::{Error, Result};
