//! Boundary-trimmed empirical distribution functions and quantiles of
//! stabilizing score functionals on Poisson point processes.
//!
//! The crate is `no_std` (with `alloc`). It provides
//!
//! * [`geometry`]: observation windows, Poisson sampling, and an exact kd-tree,
//! * [`scores`]: k-nearest-neighbor and planar Voronoi score functionals,
//! * [`oracles`]: closed-form laws of the nearest-neighbor scores,
//! * [`empirical`]: the trimmed empirical CDF, quantiles, Bahadur remainders,
//!   trimmed and Winsorized means and the resampling coupling,
//! * [`stats`]: goodness-of-fit and regression helpers used by experiments.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod empirical;
mod error;
pub mod geometry;
pub mod oracles;
pub mod scores;
pub mod stats;

pub use error::{Error, Result};
