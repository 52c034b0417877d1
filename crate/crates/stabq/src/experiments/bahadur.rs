use stabq_core::empirical::{bahadur_remainder_at, sup_remainder_at, ProbabilityGrid, QuantileReference};
use stabq_core::scores::ScoreFunctional;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::family::{require_oracle, with_score};
use crate::report::{Check, Plot, RateFit, Report, Table};

use super::ladder_map;

pub const REMAINDER_SLOPE: (f64, f64) = (-0.95, -0.55);
pub const RAW_SLOPE: (f64, f64) = (-0.6, -0.4);
pub const MIN_SLOPE_GAP: f64 = 0.1;
const MIN_RUNGS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BahadurRow {
    pub n: f64,
    pub replicate: u64,
    pub p: f64,
    /// Signed remainder at `p`.
    pub remainder: f64,
    /// Largest absolute remainder over the probability grid.
    pub sup_remainder: f64,
    /// `ψ̂_p - ψ_p`.
    pub raw_error: f64,
    /// Largest `|ψ̂_u - ψ_u|` over the grid.
    pub raw_sup: f64,
}

#[derive(Debug, Clone)]
pub struct BahadurOutcome {
    pub rows: Vec<BahadurRow>,
    pub remainder: RateFit,
    pub raw: RateFit,
    pub report: Report,
}

pub fn run_bahadur_rate(cfg: &ExperimentConfig) -> Result<BahadurOutcome> {
    if cfg.n_ladder.len() < MIN_RUNGS {
        return Err(Error::config("n_ladder", format!("a rate fit needs at least {MIN_RUNGS} rungs")));
    }
    let law = require_oracle(cfg)?;
    let at_p = QuantileReference::from_law(&law, cfg.p)?;
    let g = cfg.p_grid;
    let grid = ProbabilityGrid::new(g.p0, g.p1, g.step)?.references(&law)?;
    let rows = with_score!(cfg, rows_for(cfg, &at_p, &grid))?;

    let per_n = |f: fn(&BahadurRow) -> f64| -> Vec<(f64, Vec<f64>)> {
        cfg.n_ladder
            .iter()
            .map(|&n| (n, rows.iter().filter(|r| r.n == n).map(f).collect()))
            .collect()
    };
    let remainder = RateFit::from_samples("sup_remainder", &per_n(|r| r.sup_remainder))?;
    let raw = RateFit::from_samples("raw_sup", &per_n(|r| r.raw_sup))?;

    let mut report = Report::new("bahadur");
    report.checks.push(Check::within(
        "remainder slope",
        remainder.slope,
        REMAINDER_SLOPE.0,
        REMAINDER_SLOPE.1,
    ));
    report.checks.push(Check::within("raw error slope", raw.slope, RAW_SLOPE.0, RAW_SLOPE.1));
    report
        .checks
        .push(Check::at_least("slope gap", raw.slope - remainder.slope, MIN_SLOPE_GAP));

    let mut table = Table::new(
        "bahadur",
        &["n", "replicate", "p", "remainder", "sup_remainder", "raw_error", "raw_sup"],
    );
    for r in &rows {
        table.push(vec![
            r.n.into(),
            r.replicate.into(),
            r.p.into(),
            r.remainder.into(),
            r.sup_remainder.into(),
            r.raw_error.into(),
            r.raw_sup.into(),
        ]);
    }
    let mut fits = Table::new(
        "bahadur_fit",
        &["statistic", "n", "mean", "q10", "median", "q90", "slope", "slope_se", "intercept", "r_squared"],
    );
    for fit in [&remainder, &raw] {
        for p in &fit.points {
            fits.push(vec![
                fit.label.as_str().into(),
                p.n.into(),
                p.mean.into(),
                p.q10.into(),
                p.median.into(),
                p.q90.into(),
                fit.slope.into(),
                fit.slope_se.into(),
                fit.intercept.into(),
                fit.r_squared.into(),
            ]);
        }
    }
    report.tables.push(table);
    report.tables.push(fits);
    report.plots.push(Plot::Rate {
        name: "bahadur_remainder_rate".into(),
        fit: remainder.clone(),
    });
    report.plots.push(Plot::Rate {
        name: "bahadur_raw_rate".into(),
        fit: raw.clone(),
    });
    Ok(BahadurOutcome {
        rows,
        remainder,
        raw,
        report,
    })
}

fn rows_for<const D: usize, S>(
    score: &S,
    cfg: &ExperimentConfig,
    at_p: &QuantileReference,
    grid: &[QuantileReference],
) -> Result<Vec<BahadurRow>>
where
    S: ScoreFunctional<D> + Sync + ?Sized,
{
    let runs = ladder_map::<D, S, _, _>(score, cfg, |ecdf| {
        let mut raw_sup = 0.0f64;
        for r in grid {
            raw_sup = raw_sup.max((ecdf.quantile(r.p)?.value - r.psi).abs());
        }
        Ok((
            bahadur_remainder_at(ecdf, at_p)?,
            sup_remainder_at(ecdf, grid)?,
            ecdf.quantile(at_p.p)?.value - at_p.psi,
            raw_sup,
        ))
    })?;
    Ok(runs
        .into_iter()
        .map(|r| BahadurRow {
            n: r.n,
            replicate: r.replicate,
            p: at_p.p,
            remainder: r.value.0,
            sup_remainder: r.value.1,
            raw_error: r.value.2,
            raw_sup: r.value.3,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_ladders_are_rejected() {
        let (cfg, _) = ExperimentConfig::from_json(r#"{"family": "knn-kth", "n_ladder": [1000]}"#).unwrap();
        assert!(matches!(run_bahadur_rate(&cfg), Err(Error::Config { field: "n_ladder", .. })));
    }

    #[test]
    fn rows_are_in_ladder_order() {
        let (cfg, _) = ExperimentConfig::from_json(
            r#"{"family": "knn-kth", "n_ladder": [500, 1000, 2000, 4000], "replicates": 3}"#,
        )
        .unwrap();
        let out = run_bahadur_rate(&cfg).unwrap();
        assert_eq!(out.rows.len(), 12);
        assert!(out.rows.windows(2).all(|w| (w[0].n, w[0].replicate) < (w[1].n, w[1].replicate)));
        assert!(out.rows.iter().all(|r| r.sup_remainder > 0.0 && r.raw_sup > 0.0));
        assert!(out.raw.slope < 0.0);
    }
}
