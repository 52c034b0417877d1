use stabq_core::empirical::{trimmed_mean, winsorized_mean, QuantileReference};
use stabq_core::oracles::quadrature::integrate;
use stabq_core::oracles::{KnnKthLaw, OracleLaw};
use stabq_core::scores::ScoreFunctional;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::family::{reference, replicate_ecdf, require_oracle, with_score};
use crate::parallel::try_par_map;
use crate::report::{Check, NormalityReport, Plot, Report, Table};

use super::{ladder_map, variance, Replicate};

pub const MIN_REPLICATES: usize = 100;
pub const AD_LEVEL: f64 = 0.01;
pub const VARIANCE_RATIO: (f64, f64) = (0.8, 1.25);
pub const MEAN_ZERO_SE: f64 = 4.0;
const QUADRATURE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CltRow {
    pub n: f64,
    pub replicate: u64,
    pub inner_points: usize,
    pub psi_hat: f64,
    pub cdf_at_psi: f64,
    /// `√n (F̂(ψ_p) - p)`.
    pub scaled_cdf: f64,
    /// `√n (ψ̂_p - ψ_p)`.
    pub scaled_quantile: f64,
}

#[derive(Debug, Clone)]
pub struct CltOutcome {
    pub reference: QuantileReference,
    pub rows: Vec<CltRow>,
    pub cdf: NormalityReport,
    pub quantile: NormalityReport,
    /// `Var(√n(ψ̂ - ψ)) f(ψ)² / Var(√n(F̂(ψ) - p))` at the largest volume.
    pub variance_ratio: f64,
    pub report: Report,
}

pub(crate) fn require_replicates(cfg: &ExperimentConfig) -> Result<()> {
    if cfg.replicates < MIN_REPLICATES {
        return Err(Error::config(
            "replicates",
            format!("normality checks need at least {MIN_REPLICATES}"),
        ));
    }
    Ok(())
}

pub fn run_clt(cfg: &ExperimentConfig) -> Result<CltOutcome> {
    require_replicates(cfg)?;
    with_score!(cfg, clt_inner(cfg))
}

fn clt_inner<const D: usize, S>(score: &S, cfg: &ExperimentConfig) -> Result<CltOutcome>
where
    S: ScoreFunctional<D> + Sync + ?Sized,
{
    let r = reference::<D, S>(score, cfg, cfg.p)?;
    clt_with::<D, S>(score, cfg, &r)
}

/// The CLT experiment for an arbitrary score and reference.
pub fn clt_with<const D: usize, S>(score: &S, cfg: &ExperimentConfig, r: &QuantileReference) -> Result<CltOutcome>
where
    S: ScoreFunctional<D> + Sync + ?Sized,
{
    let runs = ladder_map::<D, S, _, _>(score, cfg, |ecdf| Ok((ecdf.quantile(r.p)?.value, ecdf.eval(r.psi))))?;
    let rows: Vec<CltRow> = runs
        .iter()
        .map(|x| {
            let (psi_hat, cdf) = x.value;
            CltRow {
                n: x.n,
                replicate: x.replicate,
                inner_points: x.inner_points,
                psi_hat,
                cdf_at_psi: cdf,
                scaled_cdf: x.n.sqrt() * (cdf - r.p),
                scaled_quantile: x.n.sqrt() * (psi_hat - r.psi),
            }
        })
        .collect();

    let mut variances = Table::new("clt_variance", &["n", "var_cdf", "var_quantile", "ratio"]);
    let (mut traj_cdf, mut traj_q) = (Vec::new(), Vec::new());
    for &n in &cfg.n_ladder {
        let a: Vec<f64> = rows.iter().filter(|x| x.n == n).map(|x| x.scaled_cdf).collect();
        let b: Vec<f64> = rows.iter().filter(|x| x.n == n).map(|x| x.scaled_quantile).collect();
        let (va, vb) = (variance(&a), variance(&b));
        variances.push(vec![n.into(), va.into(), vb.into(), (vb * r.density * r.density / va).into()]);
        traj_cdf.push((n, va));
        traj_q.push((n, vb));
    }
    let n = *cfg.n_ladder.last().expect("validated ladder");
    let a: Vec<f64> = rows.iter().filter(|x| x.n == n).map(|x| x.scaled_cdf).collect();
    let b: Vec<f64> = rows.iter().filter(|x| x.n == n).map(|x| x.scaled_quantile).collect();
    let cdf = NormalityReport::from_values("scaled_cdf", n, &a, traj_cdf)?;
    let quantile = NormalityReport::from_values("scaled_quantile", n, &b, traj_q)?;
    let variance_ratio = quantile.variance * r.density * r.density / cdf.variance;

    let mut report = Report::new("clt");
    report.checks.push(Check::above("ad p-value scaled_cdf", cdf.p_value(), AD_LEVEL));
    report.checks.push(Check::above("ad p-value scaled_quantile", quantile.p_value(), AD_LEVEL));
    report.checks.push(Check::within("variance ratio", variance_ratio, VARIANCE_RATIO.0, VARIANCE_RATIO.1));
    if cdf.degenerate || quantile.degenerate {
        report.notes.push("degenerate statistics: zero replicate variance".into());
    }
    if r.oracle_free {
        report.notes.push(format!("reference estimated from pilot windows: psi={} f={}", r.psi, r.density));
    }
    let mut table = Table::new(
        "clt",
        &["n", "replicate", "inner_points", "psi_hat", "cdf_at_psi", "scaled_cdf", "scaled_quantile"],
    );
    for x in &rows {
        table.push(vec![
            x.n.into(),
            x.replicate.into(),
            x.inner_points.into(),
            x.psi_hat.into(),
            x.cdf_at_psi.into(),
            x.scaled_cdf.into(),
            x.scaled_quantile.into(),
        ]);
    }
    report.tables.push(table);
    report.tables.push(variances);
    report.tables.push(normality_table("clt_normality", &[&cdf, &quantile]));
    report.plots.push(normal_histogram("clt_quantile_histogram", &b, quantile.mean, quantile.variance));
    Ok(CltOutcome {
        reference: *r,
        rows,
        cdf,
        quantile,
        variance_ratio,
        report,
    })
}

/// `ψ̂_p` for `replicates` independent windows of volume `n` (lane 0).
pub fn quantile_estimates(cfg: &ExperimentConfig, n: f64, replicates: u64) -> Result<Vec<f64>> {
    with_score!(cfg, quantile_inner(cfg, n, replicates))
}

fn quantile_inner<const D: usize, S>(score: &S, cfg: &ExperimentConfig, n: f64, replicates: u64) -> Result<Vec<f64>>
where
    S: ScoreFunctional<D> + Sync + ?Sized,
{
    try_par_map(replicates, |rep| {
        Ok(replicate_ecdf::<D, S>(score, cfg, n, cfg.seed, rep, 0)?.quantile(cfg.p)?.value)
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeansRow {
    pub n: f64,
    pub replicate: u64,
    pub trimmed: f64,
    pub winsorized: f64,
    pub scaled_trimmed: f64,
    pub scaled_winsorized: f64,
}

#[derive(Debug, Clone)]
pub struct MeansOutcome {
    /// (trimmed, Winsorized) centring constants.
    pub targets: (f64, f64),
    pub rows: Vec<MeansRow>,
    pub trimmed: NormalityReport,
    pub winsorized: NormalityReport,
    pub report: Report,
}

/// Limits of the trimmed and Winsorized means by quadrature of the oracle
/// quantile function.
pub fn mean_targets(law: &KnnKthLaw, p0: f64, p1: f64) -> Result<(f64, f64)> {
    let (q0, q1) = (law.quantile(p0)?, law.quantile(p1)?);
    let integral = integrate(|u| law.quantile(u).unwrap_or(f64::NAN), p0, p1, QUADRATURE_TOLERANCE);
    if !integral.is_finite() {
        return Err(Error::Core(stabq_core::Error::Degenerate("quantile quadrature diverged")));
    }
    Ok((integral / (p1 - p0), p0 * q0 + integral + (1.0 - p1) * q1))
}

pub fn run_means(cfg: &ExperimentConfig) -> Result<MeansOutcome> {
    require_replicates(cfg)?;
    let law = require_oracle(cfg)?;
    let (p0, p1) = (cfg.means.p0, cfg.means.p1);
    let targets = mean_targets(&law, p0, p1)?;
    let runs: Vec<Replicate<(f64, f64)>> = with_score!(cfg, means_inner(cfg))?;
    let rows: Vec<MeansRow> = runs
        .iter()
        .map(|x| MeansRow {
            n: x.n,
            replicate: x.replicate,
            trimmed: x.value.0,
            winsorized: x.value.1,
            scaled_trimmed: x.n.sqrt() * (x.value.0 - targets.0),
            scaled_winsorized: x.n.sqrt() * (x.value.1 - targets.1),
        })
        .collect();
    let mut traj_t = Vec::new();
    let mut traj_w = Vec::new();
    for &n in &cfg.n_ladder {
        let t: Vec<f64> = rows.iter().filter(|x| x.n == n).map(|x| x.scaled_trimmed).collect();
        let w: Vec<f64> = rows.iter().filter(|x| x.n == n).map(|x| x.scaled_winsorized).collect();
        traj_t.push((n, variance(&t)));
        traj_w.push((n, variance(&w)));
    }
    let n = *cfg.n_ladder.last().expect("validated ladder");
    let t: Vec<f64> = rows.iter().filter(|x| x.n == n).map(|x| x.scaled_trimmed).collect();
    let w: Vec<f64> = rows.iter().filter(|x| x.n == n).map(|x| x.scaled_winsorized).collect();
    let trimmed = NormalityReport::from_values("scaled_trimmed", n, &t, traj_t)?;
    let winsorized = NormalityReport::from_values("scaled_winsorized", n, &w, traj_w)?;

    let mut report = Report::new("means");
    for r in [&trimmed, &winsorized] {
        let z = if r.std_error > 0.0 { r.mean.abs() / r.std_error } else { f64::INFINITY };
        report.checks.push(Check::at_most(format!("mean-zero {} |mean|/se", r.label), z, MEAN_ZERO_SE));
        report.checks.push(Check::above(format!("ad p-value {}", r.label), r.p_value(), AD_LEVEL));
    }
    let mut table = Table::new(
        "means",
        &["n", "replicate", "trimmed", "winsorized", "scaled_trimmed", "scaled_winsorized"],
    );
    for x in &rows {
        table.push(vec![
            x.n.into(),
            x.replicate.into(),
            x.trimmed.into(),
            x.winsorized.into(),
            x.scaled_trimmed.into(),
            x.scaled_winsorized.into(),
        ]);
    }
    let mut target_table = Table::new("means_targets", &["p0", "p1", "trimmed_target", "winsorized_target"]);
    target_table.push(vec![p0.into(), p1.into(), targets.0.into(), targets.1.into()]);
    report.tables.push(table);
    report.tables.push(target_table);
    report.tables.push(normality_table("means_normality", &[&trimmed, &winsorized]));
    Ok(MeansOutcome {
        targets,
        rows,
        trimmed,
        winsorized,
        report,
    })
}

fn means_inner<const D: usize, S>(score: &S, cfg: &ExperimentConfig) -> Result<Vec<Replicate<(f64, f64)>>>
where
    S: ScoreFunctional<D> + Sync + ?Sized,
{
    let (p0, p1) = (cfg.means.p0, cfg.means.p1);
    ladder_map::<D, S, _, _>(score, cfg, |ecdf| {
        Ok((trimmed_mean(ecdf, p0, p1)?, winsorized_mean(ecdf, p0, p1)?))
    })
}

fn normality_table(name: &str, reports: &[&NormalityReport]) -> Table {
    let mut t = Table::new(
        name,
        &["statistic", "n", "count", "mean", "variance", "skewness", "kurtosis", "std_error", "ad_statistic", "ad_p_value", "degenerate"],
    );
    for r in reports {
        let (a2, p) = r.anderson_darling.map_or((f64::NAN, 0.0), |a| (a.statistic, a.p_value));
        t.push(vec![
            r.label.as_str().into(),
            r.n.into(),
            r.count.into(),
            r.mean.into(),
            r.variance.into(),
            r.skewness.into(),
            r.kurtosis.into(),
            r.std_error.into(),
            a2.into(),
            p.into(),
            r.degenerate.into(),
        ]);
    }
    t
}

fn normal_histogram(name: &str, samples: &[f64], mean: f64, var: f64) -> Plot {
    let sd = var.sqrt();
    let density = (0..=200)
        .map(|i| {
            let x = mean + sd * (-4.0 + 8.0 * i as f64 / 200.0);
            let z = (x - mean) / sd;
            (x, (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt()))
        })
        .collect();
    Plot::Histogram {
        name: name.into(),
        samples: samples.to_vec(),
        density,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Family;
    use stabq_core::scores::ConstantScore;
    use std::f64::consts::{LN_2, PI};

    #[test]
    fn constant_scores_are_flagged_degenerate() {
        let (cfg, _) = ExperimentConfig::from_json(r#"{"family": "knn-kth", "n_ladder": [400], "replicates": 100}"#).unwrap();
        let r = QuantileReference::estimated(0.5, 1.0, 1.0).unwrap();
        let out = clt_with::<2, _>(&ConstantScore(1.0), &cfg, &r).unwrap();
        assert!(out.cdf.degenerate && out.quantile.degenerate);
        assert_eq!(out.cdf.variance, 0.0);
        assert!(!out.report.passed());
        assert!(out.report.notes.iter().any(|n| n.contains("degenerate")));
    }

    #[test]
    fn too_few_replicates_is_an_error() {
        let mut cfg = ExperimentConfig::new(Family::KnnKth);
        cfg.replicates = 20;
        assert!(matches!(run_clt(&cfg), Err(Error::Config { field: "replicates", .. })));
        assert!(matches!(run_means(&cfg), Err(Error::Config { field: "replicates", .. })));
    }

    #[test]
    fn mean_targets_match_closed_forms() {
        // k = 1, d = 2: ψ_u = √(-ln(1-u)/π).
        let law = KnnKthLaw::new(1, 2).unwrap();
        let psi = |u: f64| (-(1.0 - u).ln() / PI).sqrt();
        let n = 200_000;
        let (p0, p1) = (0.1, 0.9);
        let h = (p1 - p0) / n as f64;
        let midpoint: f64 = (0..n).map(|i| psi(p0 + (i as f64 + 0.5) * h)).sum::<f64>() * h;
        let (t, w) = mean_targets(&law, p0, p1).unwrap();
        assert!((t - midpoint / (p1 - p0)).abs() < 1e-8);
        assert!((w - (p0 * psi(p0) + midpoint + (1.0 - p1) * psi(p1))).abs() < 1e-8);
        // Without trimming both tend to the mean 1/2.
        let (t, _) = mean_targets(&law, 1e-9, 1.0 - 1e-9).unwrap();
        assert!((t - 0.5).abs() < 1e-4);
        assert!((psi(0.5) - (LN_2 / PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn quantile_estimates_are_consistent() {
        let (cfg, _) = ExperimentConfig::from_json(r#"{"family": "knn-kth"}"#).unwrap();
        let est = quantile_estimates(&cfg, 4000.0, 5).unwrap();
        assert_eq!(est.len(), 5);
        assert!(est.iter().all(|q| (q - 0.469718).abs() < 0.03));
    }
}
