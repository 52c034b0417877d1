//! Command-line front end: `stabq <subcommand> --config <path> [--seed N] [--out DIR] [--svg]`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::{parse_config, ExperimentConfig};
use crate::error::Result;
use crate::experiments::Experiment;
use crate::output::{timestamp, write_manifest, write_report, RunManifest};

pub const EXIT_OK: u8 = 0;
pub const EXIT_BAND_FAILURE: u8 = 1;
pub const EXIT_ERROR: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "stabq", version, about = "Trimmed score quantiles on Poisson point processes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub args: RunArgs,
}

#[derive(Debug, Clone, clap::Args)]
pub struct RunArgs {
    /// JSON experiment configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the configured base seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    pub svg: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// One window per volume with every point's score.
    Sample,
    /// Score law against its oracle, or Voronoi sanity checks.
    DensityCheck,
    /// Bahadur remainder rate along the volume ladder.
    Bahadur,
    /// Normality of the centred quantile and cdf statistics.
    Clt,
    /// Nested-ladder LIL trajectories and a Gaussian control.
    Lil,
    /// Trimmed and winsorized means.
    Means,
    /// Variance estimates and the add-one coupling ladder.
    Sigma,
    /// Every experiment that applies to the configured family.
    All,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Sample => "sample",
            Self::DensityCheck => "density-check",
            Self::Bahadur => "bahadur",
            Self::Clt => "clt",
            Self::Lil => "lil",
            Self::Means => "means",
            Self::Sigma => "sigma",
            Self::All => "all",
        }
    }

    fn experiment(self) -> Option<Experiment> {
        Some(match self {
            Self::Sample => Experiment::Sample,
            Self::DensityCheck => Experiment::DensityCheck,
            Self::Bahadur => Experiment::Bahadur,
            Self::Clt => Experiment::Clt,
            Self::Lil => Experiment::Lil,
            Self::Means => Experiment::Means,
            Self::Sigma => Experiment::Sigma,
            Self::All => return None,
        })
    }
}

/// Loads the configuration and applies command-line overrides.
pub fn load(args: &RunArgs) -> Result<(ExperimentConfig, Vec<String>)> {
    let (mut cfg, warnings) = match &args.config {
        Some(path) => parse_config(path)?,
        None => return Err(crate::error::Error::config("config", "--config <path> is required")),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.output = out.to_string_lossy().into_owned();
    }
    Ok((cfg, warnings))
}

/// Runs `command`, writes its outputs and the manifest, and returns whether
/// every acceptance check passed.
pub fn dispatch(command: Command, cfg: &ExperimentConfig, mut warnings: Vec<String>, svg: bool) -> Result<RunManifest> {
    let started = timestamp();
    let dir = PathBuf::from(&cfg.output);
    let experiments: Vec<Experiment> = match command.experiment() {
        Some(e) => vec![e],
        None => Experiment::ALL
            .into_iter()
            .filter(|e| {
                let ok = e.applies(cfg);
                if !ok {
                    warnings.push(format!("{} skipped: no closed-form law for {}", e.name(), cfg.family.name()));
                }
                ok
            })
            .collect(),
    };
    let mut files = BTreeMap::new();
    let mut notes = Vec::new();
    let mut passed = true;
    for e in experiments {
        let report = e.run(cfg)?;
        passed &= report.passed();
        notes.extend(report.notes.iter().map(|n| format!("{}: {n}", e.name())));
        files.insert(e.name().to_string(), write_report(&report, &dir, svg)?);
    }
    let manifest = RunManifest {
        config_hash: cfg.hash(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        subcommand: command.name().to_string(),
        started,
        finished: timestamp(),
        files,
        warnings,
        notes,
        passed,
    };
    write_manifest(&manifest, &dir)?;
    Ok(manifest)
}

/// Parses `argv` and runs; returns the process exit code.
pub fn run<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    let result = load(&cli.args).and_then(|(cfg, warnings)| {
        for w in &warnings {
            eprintln!("warning: {w}");
        }
        dispatch(cli.command, &cfg, warnings, cli.args.svg)
    });
    match result {
        Ok(m) => {
            for w in m.warnings.iter().filter(|w| w.contains("skipped")) {
                eprintln!("warning: {w}");
            }
            if m.passed {
                EXIT_OK
            } else {
                eprintln!("acceptance checks failed; see the summary files in the output directory");
                EXIT_BAND_FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
