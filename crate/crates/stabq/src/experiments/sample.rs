use stabq_core::geometry::{make_window, sample_poisson, stream_rng, SpatialIndex};
use stabq_core::scores::ScoreFunctional;
use stabq_core::Error as CoreError;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::family::with_score;
use crate::report::{Cell, Report, Table};

/// Replicate 0 of every ladder rung: point coordinates, whether the point
/// lies in the trimmed window, and its score there.
pub fn run_sample(cfg: &ExperimentConfig) -> Result<Report> {
    with_score!(cfg, sample_inner(cfg))
}

fn sample_inner<const D: usize, S>(score: &S, cfg: &ExperimentConfig) -> Result<Report>
where
    S: ScoreFunctional<D> + ?Sized,
{
    let axes: Vec<String> = (0..D).map(|i| format!("x{i}")).collect();
    let mut columns = vec!["n", "replicate", "index"];
    columns.extend(axes.iter().map(String::as_str));
    columns.extend(["inner", "score"]);
    let mut table = Table::new("sample", &columns);
    for (rung, &n) in cfg.n_ladder.iter().enumerate() {
        let window = make_window::<D>(n)?;
        let inner = window.shrink(cfg.trim_radius(n)?)?;
        let index = SpatialIndex::new(sample_poisson(&window, &mut stream_rng(cfg.seed, 0, rung as u16)));
        for (i, y) in index.points().iter().enumerate() {
            let is_inner = inner.contains(y);
            let value = if is_inner {
                match score.evaluate(y, &index) {
                    Ok(v) => Cell::Float(v),
                    Err(CoreError::BoundaryAffected) => Cell::Text(String::new()),
                    Err(e) => return Err(e.into()),
                }
            } else {
                Cell::Text(String::new())
            };
            let mut row: Vec<Cell> = vec![n.into(), 0u64.into(), i.into()];
            row.extend(y.coords.iter().map(|&c| Cell::Float(c)));
            row.push(is_inner.into());
            row.push(value);
            table.push(row);
        }
    }
    let mut report = Report::new("sample");
    report.tables.push(table);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_dimensional_sample_has_three_coordinates() {
        let (cfg, _) = ExperimentConfig::from_json(r#"{"family": "knn-total", "d": 3, "n_ladder": [500]}"#).unwrap();
        let r = run_sample(&cfg).unwrap();
        let t = &r.tables[0];
        assert_eq!(t.columns, ["n", "replicate", "index", "x0", "x1", "x2", "inner", "score"]);
        assert!(t.rows.len() > 400);
        assert!(t.rows.iter().any(|row| row[6] == Cell::Bool(true)));
    }
}
