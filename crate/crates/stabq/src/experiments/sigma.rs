use stabq_core::empirical::{DeltaCoupling, QuantileReference, Threshold};
use stabq_core::geometry::{make_window, sample_poisson, stream_rng, Point};
use stabq_core::scores::ScoreFunctional;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::family::{reference, replicate_ecdf, with_score};
use crate::parallel::try_par_map;
use crate::report::{Check, Report, Table};

use super::variance;

const DELTA_BASE_LANE: u16 = 0xB0;
const DELTA_FRESH_LANE: u16 = 0xB1;
const LADDER_BASE_LANE: u16 = 0xA0;
const LADDER_FRESH_LANE: u16 = 0xA1;
/// A seed counts as stabilized when this many top rungs agree exactly.
pub const STABLE_RUNGS: usize = 3;
pub const MIN_STABLE_FRACTION: f64 = 0.95;
const ORDERING_SE: f64 = 3.0;

#[derive(Debug, Clone)]
pub struct SigmaOutcome {
    pub n: f64,
    /// Replicate variance of `√n (F̂(ψ_p) - p)`.
    pub replicate_variance: f64,
    pub replicate_variance_se: f64,
    /// Mean inner volume over `n`, the finite-window factor between the two
    /// estimates.
    pub inner_fraction: f64,
    /// `E[Δ(0, n)²]` over replicates.
    pub delta_second_moment: f64,
    pub delta_se: f64,
    pub deltas: Vec<f64>,
    pub report: Report,
}

#[derive(Debug, Clone)]
pub struct CouplingOutcome {
    pub ladder: Vec<f64>,
    /// `Δ(0, n_j)` per seed along the nested ladder.
    pub values: Vec<Vec<f64>>,
    /// First rung from which each seed's value no longer changes.
    pub settled_from: Vec<usize>,
    pub stable_fraction: f64,
    pub report: Report,
}

/// `E[Δ(0, n)²]` and the replicate variance at the top of the ladder,
/// plus the coupling ladder.
pub fn run_sigma(cfg: &ExperimentConfig) -> Result<SigmaOutcome> {
    super::clt::require_replicates(cfg)?;
    let mut out = with_score!(cfg, sigma_inner(cfg))?;
    let coupling = run_coupling_ladder(cfg)?;
    out.report.merge(coupling.report);
    Ok(out)
}

fn sigma_inner<const D: usize, S>(score: &S, cfg: &ExperimentConfig) -> Result<SigmaOutcome>
where
    S: ScoreFunctional<D> + Sync + ?Sized,
{
    let r = reference::<D, S>(score, cfg, cfg.p)?;
    sigma_with::<D, S>(score, cfg, &r, Threshold::new(r.psi, r.p, 1.0))
}

/// Both variance estimates for an arbitrary score, reference and threshold.
pub fn sigma_with<const D: usize, S>(
    score: &S,
    cfg: &ExperimentConfig,
    r: &QuantileReference,
    threshold: Threshold,
) -> Result<SigmaOutcome>
where
    S: ScoreFunctional<D> + Sync + ?Sized,
{
    let top = cfg.n_ladder.len() - 1;
    let n = cfg.n_ladder[top];
    let trim = cfg.trim_radius(n)?;
    let window = make_window::<D>(n)?;
    let reps = cfg.replicates as u64;
    let scaled = try_par_map(reps, |rep| -> Result<(f64, f64)> {
        let ecdf = replicate_ecdf::<D, S>(score, cfg, n, cfg.seed, rep, top as u16)?;
        Ok((n.sqrt() * (ecdf.eval(r.psi) - r.p), ecdf.inner_volume()))
    })?;
    let deltas = try_par_map(reps, |rep| -> Result<f64> {
        let base = sample_poisson(&window, &mut stream_rng(cfg.seed, rep, DELTA_BASE_LANE));
        let fresh = sample_poisson(&window, &mut stream_rng(cfg.seed, rep, DELTA_FRESH_LANE));
        Ok(DeltaCoupling::new(base, &fresh, &Point::origin())?.delta(score, &[threshold], trim)?)
    })?;

    let a: Vec<f64> = scaled.iter().map(|x| x.0).collect();
    let replicate_variance = variance(&a);
    let replicate_variance_se = replicate_variance * (2.0 / (reps as f64 - 1.0)).sqrt();
    let inner_fraction = scaled.iter().map(|x| x.1).sum::<f64>() / (reps as f64 * n);
    let squares: Vec<f64> = deltas.iter().map(|d| d * d).collect();
    let delta_second_moment = squares.iter().sum::<f64>() / reps as f64;
    let delta_se = (variance(&squares) / reps as f64).sqrt();

    let mut report = Report::new("sigma");
    report.checks.push(Check::above("replicate variance", replicate_variance, 0.0));
    report.checks.push(Check::above("delta second moment", delta_second_moment, 0.0));
    let se = replicate_variance_se.hypot(delta_se);
    report.checks.push(Check::at_least(
        "delta second moment ordering",
        delta_second_moment,
        replicate_variance - ORDERING_SE * se,
    ));
    let mut table = Table::new("sigma", &["n", "replicate", "scaled_cdf", "delta"]);
    for (rep, (x, d)) in a.iter().zip(&deltas).enumerate() {
        table.push(vec![n.into(), (rep as u64).into(), (*x).into(), (*d).into()]);
    }
    let mut summary = Table::new(
        "sigma_estimates",
        &["n", "replicate_variance", "replicate_variance_se", "inner_fraction", "delta_second_moment", "delta_se"],
    );
    summary.push(vec![
        n.into(),
        replicate_variance.into(),
        replicate_variance_se.into(),
        inner_fraction.into(),
        delta_second_moment.into(),
        delta_se.into(),
    ]);
    report.tables.push(table);
    report.tables.push(summary);
    Ok(SigmaOutcome {
        n,
        replicate_variance,
        replicate_variance_se,
        inner_fraction,
        delta_second_moment,
        delta_se,
        deltas,
        report,
    })
}

/// `Δ(0, n)` on the nested ladder `n0 2^j`: both processes are drawn once on
/// the top window and restricted to each rung.
pub fn run_coupling_ladder(cfg: &ExperimentConfig) -> Result<CouplingOutcome> {
    with_score!(cfg, coupling_inner(cfg))
}

fn coupling_inner<const D: usize, S>(score: &S, cfg: &ExperimentConfig) -> Result<CouplingOutcome>
where
    S: ScoreFunctional<D> + Sync + ?Sized,
{
    let r = reference::<D, S>(score, cfg, cfg.p)?;
    let threshold = [Threshold::new(r.psi, r.p, 1.0)];
    let c = cfg.coupling;
    let ladder: Vec<f64> = (0..=c.rungs).map(|j| c.n0 * 2f64.powi(j as i32)).collect();
    let top = make_window::<D>(ladder[ladder.len() - 1])?;
    let values = try_par_map(c.seeds as u64, |seed| {
        let base = sample_poisson(&top, &mut stream_rng(cfg.seed, seed, LADDER_BASE_LANE));
        let fresh = sample_poisson(&top, &mut stream_rng(cfg.seed, seed, LADDER_FRESH_LANE));
        ladder
            .iter()
            .map(|&n| {
                let w = make_window::<D>(n)?;
                let coupling = DeltaCoupling::new(base.restrict(&w)?, &fresh.restrict(&w)?, &Point::origin())?;
                Ok(coupling.delta(score, &threshold, cfg.trim_radius(n)?)?)
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    let settled_from: Vec<usize> = values
        .iter()
        .map(|v| {
            let last = v[v.len() - 1];
            v.iter().rposition(|x| *x != last).map_or(0, |i| i + 1)
        })
        .collect();
    let need = ladder.len().saturating_sub(STABLE_RUNGS);
    let stable_fraction = settled_from.iter().filter(|&&s| s <= need).count() as f64 / values.len() as f64;

    let mut report = Report::new("sigma");
    report.checks.push(Check::at_least(
        format!("coupling constant over top {STABLE_RUNGS} rungs fraction"),
        stable_fraction,
        MIN_STABLE_FRACTION,
    ));
    let mut table = Table::new("coupling", &["n", "replicate", "j", "delta"]);
    for (j, &n) in ladder.iter().enumerate() {
        for (seed, v) in values.iter().enumerate() {
            table.push(vec![n.into(), (seed as u64).into(), j.into(), v[j].into()]);
        }
    }
    let mut settled = Table::new("coupling_settled", &["replicate", "settled_from_j", "settled_from_n"]);
    for (seed, &s) in settled_from.iter().enumerate() {
        settled.push(vec![(seed as u64).into(), s.into(), ladder[s].into()]);
    }
    report.tables.push(table);
    report.tables.push(settled);
    Ok(CouplingOutcome {
        ladder,
        values,
        settled_from,
        stable_fraction,
        report,
    })
}
