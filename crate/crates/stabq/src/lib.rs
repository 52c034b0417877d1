//! Monte Carlo experiments, output formats and the command-line driver for
//! `stabq-core`.
//!
//! Experiments take an [`ExperimentConfig`] and return typed results plus a
//! [`Report`] of tables and acceptance checks; [`output`] turns reports into
//! CSV, SVG and a run manifest.

pub mod cli;
pub mod config;
mod error;
pub mod experiments;
pub mod family;
pub mod output;
pub mod parallel;
pub mod report;

pub use config::{parse_config, ExperimentConfig, Family};
pub use error::{Error, Result};
pub use report::{Cell, Check, LilTrack, NormalityReport, RateFit, Report, Table};
