//! Numerical kernels: a smooth NLP solver, KKT checks, finite differences and
//! a dynamic-programming reference.

pub mod auglag;
pub mod dp;
pub mod fd;
pub mod kkt;
pub mod nlp;

pub use auglag::{solve_nlp, solve_nlp_warm, Solution, SolveOptions, SolveReport, SolveStatus};
pub use dp::{dp_oracle, DpProblem, DpSolution, StateGrid, MAX_GRID_WORK};
pub use fd::finite_diff_gradient;
pub use kkt::{check_kkt, KktReport};
pub use nlp::{FnNlp, Nlp};
