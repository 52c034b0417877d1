//! Boundary-trimmed empirical distribution of scores and the estimators
//! built on it.

mod bahadur;
mod coupling;
mod ecdf;
mod means;

pub use bahadur::{bahadur_remainder, bahadur_remainder_at, sup_remainder, sup_remainder_at, ProbabilityGrid, QuantileReference};
pub use coupling::{add_one_cost, delta_coupling, DeltaCoupling, Threshold};
pub use ecdf::{build_ecdf, build_truncated_ecdf, trim_radius, EmpiricalCdf, QuantileEstimate};
pub use means::{trimmed_mean, winsorized_mean};
