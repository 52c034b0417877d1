//! Monte Carlo drivers. Each returns a typed outcome whose `report` carries
//! the tables and acceptance checks; replicates run on the shared pool and
//! are folded in replicate order.

mod bahadur;
mod clt;
mod density;
mod lil;
mod sample;
mod sigma;
mod voronoi;

pub use bahadur::{run_bahadur_rate, BahadurOutcome, BahadurRow, MIN_SLOPE_GAP, RAW_SLOPE, REMAINDER_SLOPE};
pub use clt::{
    clt_with, mean_targets, quantile_estimates, run_clt, run_means, CltOutcome, CltRow, MeansOutcome, MeansRow,
    MIN_REPLICATES,
};
pub use density::{origin_radii, run_density_check, run_knn_density, DensityOutcome, DensityRow};
pub use lil::{normal_control, run_lil, LilOutcome};
pub use sample::run_sample;
pub use sigma::{run_coupling_ladder, run_sigma, sigma_with, CouplingOutcome, SigmaOutcome};
pub use voronoi::{run_voronoi_sanity, FaceSample, VoronoiOutcome, FACE_COUNTS};

use stabq_core::empirical::EmpiricalCdf;
use stabq_core::scores::ScoreFunctional;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::family::{oracle, replicate_ecdf};
use crate::parallel::try_par_map;
use crate::report::Report;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Sample,
    DensityCheck,
    Bahadur,
    Clt,
    Means,
    Lil,
    Sigma,
}

impl Experiment {
    /// Order used by `all`.
    pub const ALL: [Experiment; 7] = [
        Self::Sample,
        Self::DensityCheck,
        Self::Bahadur,
        Self::Clt,
        Self::Means,
        Self::Lil,
        Self::Sigma,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Sample => "sample",
            Self::DensityCheck => "density-check",
            Self::Bahadur => "bahadur",
            Self::Clt => "clt",
            Self::Means => "means",
            Self::Lil => "lil",
            Self::Sigma => "sigma",
        }
    }

    /// Whether the experiment needs a closed-form law for `cfg`.
    pub fn needs_oracle(self, cfg: &ExperimentConfig) -> bool {
        match self {
            Self::DensityCheck => !cfg.family.is_voronoi(),
            Self::Bahadur | Self::Means => true,
            _ => false,
        }
    }

    /// Whether `cfg` can run this experiment at all.
    pub fn applies(self, cfg: &ExperimentConfig) -> bool {
        !self.needs_oracle(cfg) || matches!(oracle(cfg), Ok(Some(_)))
    }

    pub fn run(self, cfg: &ExperimentConfig) -> Result<Report> {
        match self {
            Self::Sample => run_sample(cfg),
            Self::DensityCheck => run_density_check(cfg),
            Self::Bahadur => Ok(run_bahadur_rate(cfg)?.report),
            Self::Clt => Ok(run_clt(cfg)?.report),
            Self::Means => Ok(run_means(cfg)?.report),
            Self::Lil => Ok(run_lil(cfg)?.report),
            Self::Sigma => Ok(run_sigma(cfg)?.report),
        }
    }
}

/// One replicate window of the ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Replicate<T> {
    pub n: f64,
    pub replicate: u64,
    pub inner_points: usize,
    pub value: T,
}

/// `f` applied to the trimmed ECDF of every (rung, replicate) window, in
/// ladder-then-replicate order. Rung `i` draws from lane `i`.
pub(crate) fn ladder_map<const D: usize, S, T, F>(score: &S, cfg: &ExperimentConfig, f: F) -> Result<Vec<Replicate<T>>>
where
    S: ScoreFunctional<D> + Sync + ?Sized,
    T: Send,
    F: Fn(&EmpiricalCdf) -> Result<T> + Sync + Send,
{
    let reps = cfg.replicates as u64;
    try_par_map(cfg.n_ladder.len() as u64 * reps, |i| {
        let (rung, rep) = (i / reps, i % reps);
        let n = cfg.n_ladder[rung as usize];
        let ecdf = replicate_ecdf::<D, S>(score, cfg, n, cfg.seed, rep, rung as u16)?;
        Ok(Replicate {
            n,
            replicate: rep,
            inner_points: ecdf.len(),
            value: f(&ecdf)?,
        })
    })
}

pub(crate) fn variance(xs: &[f64]) -> f64 {
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0)
}
