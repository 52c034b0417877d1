use stabq_core::geometry::{make_window, sample_poisson, stream_rng, uniform_in_ball, Point, SpatialIndex};
use stabq_core::oracles::{unit_ball_volume, KnnKthLaw, KnnMixtureLaw, OracleLaw};
use stabq_core::scores::{knn_kth_score, stabilization_tail_fit, ScoreFunctional, TailFit};
use stabq_core::stats::ks_statistic_sorted;

use crate::config::{ExperimentConfig, Family};
use crate::error::Result;
use crate::family::{replicate_ecdf, require_oracle, with_score};
use crate::parallel::try_par_map;
use crate::report::{Check, Plot, Report, Table};

use super::voronoi::run_voronoi_sanity;

/// Volume of the windows around an inserted origin.
const ORIGIN_WINDOW: f64 = 400.0;
const ORIGIN_LANE: u16 = 0xE0;
const EXTENDED_LANE: u16 = 0xE1;
/// KS band for the extended law from `origin_samples` draws.
const EXTENDED_KS: f64 = 0.03;
/// Separation required between samples and the oracle of the next `k`.
const CONTROL_KS: f64 = 0.2;
/// Two-sided 1% critical value of the KS distance is `1.63 / √M`.
const KS_CRITICAL_1PCT: f64 = 1.63;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityRow {
    pub n: f64,
    pub replicate: u64,
    pub inner_points: usize,
    pub ks: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone)]
pub struct DensityOutcome {
    pub rows: Vec<DensityRow>,
    /// KS distance of the largest-window sample from the oracle for `k + 1`.
    pub control_ks: f64,
    pub tail: TailFit,
    /// KS distance of origin scores with one extra point in `B(0, R)` from
    /// the extended mixture law.
    pub extended_ks: f64,
    pub report: Report,
}

/// Empirical score law against the oracle for kNN families; the Voronoi
/// sanity checks for Voronoi families.
pub fn run_density_check(cfg: &ExperimentConfig) -> Result<Report> {
    if cfg.family.is_voronoi() {
        return Ok(run_voronoi_sanity(cfg)?.report);
    }
    Ok(run_knn_density(cfg)?.report)
}

pub fn run_knn_density(cfg: &ExperimentConfig) -> Result<DensityOutcome> {
    let law = require_oracle(cfg)?;
    let reps = cfg.density.replicates as u64;
    let rungs = cfg.n_ladder.len() as u64;
    let runs = try_par_map(rungs * reps, |i| {
        let (rung, rep) = (i / reps, i % reps);
        let n = cfg.n_ladder[rung as usize];
        let ecdf = with_score!(cfg, replicate_ecdf(cfg, n, cfg.seed, rep, rung as u16))?;
        Ok::<_, crate::Error>((n, rep, ecdf.values().to_vec()))
    })?;

    let mut table = Table::new("density", &["n", "replicate", "inner_points", "ks", "band", "flagged"]);
    let mut report = Report::new("density-check");
    let mut rows = Vec::new();
    for (n, rep, values) in &runs {
        let ks = ks_statistic_sorted(values, |s| law.cdf(s));
        let band = cfg.density.threshold.max(KS_CRITICAL_1PCT / (values.len() as f64).sqrt());
        let flagged = !(ks <= cfg.density.threshold);
        table.push(vec![(*n).into(), (*rep).into(), values.len().into(), ks.into(), band.into(), flagged.into()]);
        report.checks.push(Check::at_most(format!("ks n={n} replicate={rep}"), ks, band));
        rows.push(DensityRow {
            n: *n,
            replicate: *rep,
            inner_points: values.len(),
            ks,
            flagged,
        });
    }

    let (_, _, largest) = runs.last().expect("non-empty ladder");
    let wrong = KnnKthLaw::new(cfg.k + 1, cfg.d)?;
    let control_ks = ks_statistic_sorted(largest, |s| wrong.cdf(s));
    report
        .checks
        .push(Check::above(format!("negative control ks vs k={}", cfg.k + 1), control_ks, CONTROL_KS));

    let radii = with_score!(cfg, origin_radii(cfg))?;
    let tail = stabilization_tail_fit(&radii, cfg.alpha_stab())?;
    let w = unit_ball_volume(cfg.d);
    let mut tails = Table::new("stabilization_tail", &["k", "alpha_stab", "rate", "rate_se", "prefactor", "points_used", "exact_rate"]);
    tails.push(vec![cfg.k.into(), cfg.alpha_stab().into(), tail.rate.into(), tail.rate_se.into(), tail.prefactor.into(), tail.points_used.into(), w.into()]);
    if cfg.alpha_stab() == cfg.d as f64 {
        match cfg.k {
            1 => report.checks.push(Check::within("tail rate k=1", tail.rate, 0.9 * w, 1.1 * w)),
            2 => report.checks.push(Check::within("tail rate k=2", tail.rate, 0.7 * w, 1.1 * w)),
            _ => report.notes.push(format!("tail rate {} for k={} is reported without a band", tail.rate, cfg.k)),
        }
    }

    let mut extended = extended_origin_scores(cfg)?;
    extended.sort_by(|a, b| a.total_cmp(b));
    let mixture = KnnMixtureLaw::extended(cfg.k, cfg.d, cfg.extended_radius())?;
    let extended_ks = ks_statistic_sorted(&extended, |s| mixture.cdf(s));
    report.checks.push(Check::at_most("extended law ks", extended_ks, EXTENDED_KS));

    let top = largest.last().copied().unwrap_or(1.0);
    let density = (0..=200).map(|i| {
        let s = top * i as f64 / 200.0;
        (s, law.pdf(s))
    });
    report.plots.push(Plot::Histogram {
        name: "density_histogram".into(),
        samples: largest.clone(),
        density: density.collect(),
    });
    report.tables.push(table);
    report.tables.push(tails);
    Ok(DensityOutcome {
        rows,
        control_ks,
        tail,
        extended_ks,
        report,
    })
}

/// Stabilization radii of an origin inserted into independent Poisson
/// samples, one per replicate of `origin_samples`.
pub fn origin_radii<const D: usize, S>(score: &S, cfg: &ExperimentConfig) -> Result<Vec<f64>>
where
    S: ScoreFunctional<D> + Sync + ?Sized,
{
    let window = make_window::<D>(ORIGIN_WINDOW)?;
    try_par_map(cfg.density.origin_samples as u64, |rep| {
        let points = sample_poisson(&window, &mut stream_rng(cfg.seed, rep, ORIGIN_LANE));
        let index = SpatialIndex::new(points.with_point(Point::origin())?);
        Ok(score.stabilization_radius(&Point::origin(), &index)?)
    })
}

fn extended_origin_scores(cfg: &ExperimentConfig) -> Result<Vec<f64>> {
    with_score!(cfg, extended_inner(cfg))
}

fn extended_inner<const D: usize, S>(_: &S, cfg: &ExperimentConfig) -> Result<Vec<f64>>
where
    S: ScoreFunctional<D> + ?Sized,
{
    debug_assert_eq!(cfg.family, Family::KnnKth);
    let window = make_window::<D>(ORIGIN_WINDOW)?;
    let radius = cfg.extended_radius();
    try_par_map(cfg.density.origin_samples as u64, |rep| {
        let mut rng = stream_rng(cfg.seed, rep, EXTENDED_LANE);
        let points = sample_poisson(&window, &mut rng);
        let extra = uniform_in_ball(&Point::<D>::origin(), radius, &mut rng);
        let index = SpatialIndex::new(points.with_point(extra)?);
        Ok(knn_kth_score(&Point::origin(), &index, cfg.k as usize)?)
    })
}
