//! Score construction per family and dimension, and the quantile reference
//! each experiment centres on.

use stabq_core::empirical::{build_ecdf, EmpiricalCdf, QuantileReference};
use stabq_core::geometry::{make_window, sample_poisson, stream_rng, SpatialIndex};
use stabq_core::oracles::KnnKthLaw;
use stabq_core::scores::ScoreFunctional;

use crate::config::{ExperimentConfig, Family};
use crate::error::{Error, Result};
use crate::parallel::try_par_map;

/// Calls `$f::<D, S>(&score, args...)` with the score of `$cfg`, dispatching
/// the runtime dimension to a const generic. The score is always the first
/// argument.
macro_rules! with_score {
    ($cfg:expr, $f:ident($($arg:expr),* $(,)?)) => {{
        use stabq_core::scores::{FundamentalRegionScore, KnnKthScore, KnnTotalScore, VoronoiDeviationScore};
        use $crate::config::Family;
        let cfg: &$crate::config::ExperimentConfig = $cfg;
        let k = cfg.k as usize;
        match (cfg.d, cfg.family) {
            (2, Family::KnnKth) => match KnnKthScore::new(k) { Ok(s) => $f::<2, _>(&s, $($arg),*), Err(e) => Err(e.into()) },
            (3, Family::KnnKth) => match KnnKthScore::new(k) { Ok(s) => $f::<3, _>(&s, $($arg),*), Err(e) => Err(e.into()) },
            (2, Family::KnnTotal) => match KnnTotalScore::new(k) { Ok(s) => $f::<2, _>(&s, $($arg),*), Err(e) => Err(e.into()) },
            (3, Family::KnnTotal) => match KnnTotalScore::new(k) { Ok(s) => $f::<3, _>(&s, $($arg),*), Err(e) => Err(e.into()) },
            (2, Family::VoronoiDeviation) => match VoronoiDeviationScore::new(cfg.epsilon) { Ok(s) => $f::<2, _>(&s, $($arg),*), Err(e) => Err(e.into()) },
            (2, Family::FundamentalRegion) => $f::<2, _>(&FundamentalRegionScore::default(), $($arg),*),
            (d, family) => Err($crate::error::Error::config(
                "d",
                format!("{} is not available in dimension {d}", family.name()),
            )),
        }
    }};
}
pub(crate) use with_score;

/// The closed-form law of the configured score, if there is one.
pub fn oracle(cfg: &ExperimentConfig) -> Result<Option<KnnKthLaw>> {
    match cfg.family {
        Family::KnnKth => Ok(Some(KnnKthLaw::new(cfg.k, cfg.d)?)),
        _ => Ok(None),
    }
}

pub fn require_oracle(cfg: &ExperimentConfig) -> Result<KnnKthLaw> {
    oracle(cfg)?.ok_or(Error::NoOracle(cfg.family.name()))
}

/// Random stream lane of pilot windows for oracle-free references.
pub const PILOT_LANE: u16 = 0xF0;
const PILOT_WINDOWS: u64 = 8;

/// Trimmed ECDF of one replicate window of volume `n` drawn from
/// `(seed, replicate, lane)`.
pub fn replicate_ecdf<const D: usize, S>(
    score: &S,
    cfg: &ExperimentConfig,
    n: f64,
    seed: u64,
    replicate: u64,
    lane: u16,
) -> Result<EmpiricalCdf>
where
    S: ScoreFunctional<D> + ?Sized,
{
    let window = make_window::<D>(n)?;
    let points = sample_poisson(&window, &mut stream_rng(seed, replicate, lane));
    let index = SpatialIndex::new(points);
    Ok(build_ecdf(&index, score, cfg.trim_radius(n)?)?)
}

/// `ψ_p` and `f(ψ_p)`: from the oracle when it exists, otherwise estimated
/// from pooled pilot windows at the largest ladder volume.
pub fn reference<const D: usize, S>(score: &S, cfg: &ExperimentConfig, p: f64) -> Result<QuantileReference>
where
    S: ScoreFunctional<D> + Sync + ?Sized,
{
    if let Some(law) = oracle(cfg)? {
        return Ok(QuantileReference::from_law(&law, p)?);
    }
    let n = *cfg.n_ladder.last().expect("validated ladder");
    let pilots = try_par_map(PILOT_WINDOWS, |rep| {
        replicate_ecdf::<D, S>(score, cfg, n, cfg.seed, rep, PILOT_LANE).map(|e| e.values().to_vec())
    })?;
    let pooled = EmpiricalCdf::from_scores(pilots.concat())?;
    estimated_reference(&pooled, p)
}

/// Quantile of `pooled` and a difference-quotient density with a
/// normal-reference bandwidth.
pub fn estimated_reference(pooled: &EmpiricalCdf, p: f64) -> Result<QuantileReference> {
    let psi = pooled.quantile(p)?.value;
    let values = pooled.values();
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m).sqrt();
    let h = 1.06 * sd * m.powf(-0.2);
    let density = if h > 0.0 {
        (pooled.eval(psi + h) - pooled.eval(psi - h)) / (2.0 * h)
    } else {
        0.0
    };
    Ok(QuantileReference::estimated(p, psi, density)?)
}
