//! Tabular experiment output and the typed summaries behind it.

use stabq_core::stats::{anderson_darling_normal, fit_loglog, moments, AndersonDarling};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Self::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Self::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Self::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Self::Int(i64::from(v))
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Self::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Self::Text(v.to_owned())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Self::Text(v)
    }
}

/// A named table written as `<name>.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| (*c).to_owned()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width in {}", self.name);
        self.rows.push(row);
    }
}

/// One acceptance band: `lower <= value <= upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub pass: bool,
}

impl Check {
    pub fn within(name: impl Into<String>, value: f64, lower: f64, upper: f64) -> Self {
        Self {
            name: name.into(),
            value,
            lower,
            upper,
            pass: value >= lower && value <= upper,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, lower: f64) -> Self {
        Self::within(name, value, lower, f64::INFINITY)
    }

    pub fn at_most(name: impl Into<String>, value: f64, upper: f64) -> Self {
        Self::within(name, value, f64::NEG_INFINITY, upper)
    }

    /// Strict `value > lower`.
    pub fn above(name: impl Into<String>, value: f64, lower: f64) -> Self {
        let mut c = Self::at_least(name, value, lower);
        c.pass = value > lower;
        c
    }
}

/// Something worth drawing with `--svg`.
#[derive(Debug, Clone, PartialEq)]
pub enum Plot {
    Rate { name: String, fit: RateFit },
    Histogram {
        name: String,
        samples: Vec<f64>,
        /// Reference density sampled on a grid.
        density: Vec<(f64, f64)>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub experiment: &'static str,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    pub plots: Vec<Plot>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(experiment: &'static str) -> Self {
        Self {
            experiment,
            tables: Vec::new(),
            checks: Vec::new(),
            plots: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn merge(&mut self, other: Report) {
        self.tables.extend(other.tables);
        self.checks.extend(other.checks);
        self.plots.extend(other.plots);
        self.notes.extend(other.notes);
    }
}

/// Summary of one statistic at one window volume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub n: f64,
    pub mean: f64,
    pub q10: f64,
    pub median: f64,
    pub q90: f64,
}

/// Least-squares fit of `ln mean` against `ln n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub label: String,
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub r_squared: f64,
    pub points: Vec<RatePoint>,
}

impl RateFit {
    /// `per_n` pairs a window volume with the replicate values measured there.
    pub fn from_samples(label: impl Into<String>, per_n: &[(f64, Vec<f64>)]) -> Result<Self> {
        let points: Vec<RatePoint> = per_n
            .iter()
            .map(|(n, values)| {
                let mut sorted = values.clone();
                sorted.sort_by(|a, b| a.total_cmp(b));
                RatePoint {
                    n: *n,
                    mean: values.iter().sum::<f64>() / values.len() as f64,
                    q10: sample_quantile(&sorted, 0.1),
                    median: sample_quantile(&sorted, 0.5),
                    q90: sample_quantile(&sorted, 0.9),
                }
            })
            .collect();
        let xs: Vec<f64> = points.iter().map(|p| p.n).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.mean).collect();
        let fit = fit_loglog(&xs, &ys)?;
        Ok(Self {
            label: label.into(),
            slope: fit.slope,
            intercept: fit.intercept,
            slope_se: fit.slope_se,
            r_squared: fit.r_squared,
            points,
        })
    }
}

/// Linear interpolation between order statistics of sorted data.
pub fn sample_quantile(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        m => {
            let h = q.clamp(0.0, 1.0) * (m - 1) as f64;
            let i = h.floor() as usize;
            let j = (i + 1).min(m - 1);
            sorted[i] + (h - i as f64) * (sorted[j] - sorted[i])
        }
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    sample_quantile(&sorted, 0.5)
}

/// Moments and Anderson–Darling test of a replicate sample.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalityReport {
    pub label: String,
    pub n: f64,
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    pub std_error: f64,
    /// Absent when the sample is degenerate.
    pub anderson_darling: Option<AndersonDarling>,
    pub degenerate: bool,
    /// Replicate variance at each window volume of the ladder.
    pub trajectory: Vec<(f64, f64)>,
}

impl NormalityReport {
    pub fn from_values(label: impl Into<String>, n: f64, values: &[f64], trajectory: Vec<(f64, f64)>) -> Result<Self> {
        let m = moments(values)?;
        let degenerate = !(m.variance > 0.0);
        let anderson_darling = if degenerate {
            None
        } else {
            Some(anderson_darling_normal(values)?)
        };
        Ok(Self {
            label: label.into(),
            n,
            count: m.count,
            mean: m.mean,
            variance: m.variance,
            skewness: m.skewness,
            kurtosis: m.kurtosis,
            std_error: m.std_error(),
            anderson_darling,
            degenerate,
            trajectory,
        })
    }

    /// Anderson–Darling p-value, zero for a degenerate sample.
    pub fn p_value(&self) -> f64 {
        self.anderson_darling.map_or(0.0, |a| a.p_value)
    }
}

/// `T_j = √n_j (ψ̂ - ψ) / √(2 ln ln n_j)` along a dyadic ladder for one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct LilTrack {
    pub seed: u64,
    pub n: Vec<f64>,
    pub normalized: Vec<f64>,
    pub running_sup: Vec<f64>,
    pub running_inf: Vec<f64>,
}

impl LilTrack {
    pub fn new(seed: u64, n: Vec<f64>, normalized: Vec<f64>) -> Self {
        let mut running_sup = Vec::with_capacity(normalized.len());
        let mut running_inf = Vec::with_capacity(normalized.len());
        let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
        for &t in &normalized {
            hi = hi.max(t);
            lo = lo.min(t);
            running_sup.push(hi);
            running_inf.push(lo);
        }
        Self {
            seed,
            n,
            normalized,
            running_sup,
            running_inf,
        }
    }

    /// `max(sup T_j, -inf T_j)` over the whole ladder.
    pub fn two_sided_sup(&self) -> f64 {
        let hi = self.running_sup.last().copied().unwrap_or(f64::NAN);
        let lo = self.running_inf.last().copied().unwrap_or(f64::NAN);
        hi.max(-lo)
    }

    pub fn is_finite(&self) -> bool {
        self.normalized.iter().all(|t| t.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_fit_recovers_power_law() {
        let per_n: Vec<(f64, Vec<f64>)> = [1e3, 4e3, 1.6e4, 6.4e4]
            .iter()
            .map(|&n: &f64| (n, vec![2.0 * n.powf(-0.75); 3]))
            .collect();
        let fit = RateFit::from_samples("x", &per_n).unwrap();
        assert!((fit.slope + 0.75).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!(RateFit::from_samples("x", &per_n[..1]).is_err());
    }

    #[test]
    fn quantiles_interpolate() {
        let s = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(sample_quantile(&s, 0.5), 3.0);
        assert_eq!(sample_quantile(&s, 0.1), 1.4);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
    }

    #[test]
    fn constant_sample_is_degenerate() {
        let r = NormalityReport::from_values("c", 1.0, &[2.0; 50], vec![]).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.variance, 0.0);
        assert_eq!(r.p_value(), 0.0);
    }

    #[test]
    fn lil_track_running_extremes() {
        let t = LilTrack::new(0, vec![16.0, 32.0, 64.0], vec![0.5, -1.5, 1.0]);
        assert_eq!(t.running_sup, vec![0.5, 0.5, 1.0]);
        assert_eq!(t.running_inf, vec![0.5, -1.5, -1.5]);
        assert_eq!(t.two_sided_sup(), 1.5);
        assert!(t.is_finite());
    }

    #[test]
    fn check_bands() {
        assert!(Check::within("a", 1.0, 0.0, 1.0).pass);
        assert!(!Check::within("a", f64::NAN, 0.0, 1.0).pass);
        assert!(!Check::above("b", 0.0, 0.0).pass);
    }
}
