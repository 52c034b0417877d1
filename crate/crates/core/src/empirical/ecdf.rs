use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::SpatialIndex;
use crate::scores::{ScoreFunctional, Truncated};

/// `(c_star ln n)^(1 / alpha_stab)`.
pub fn trim_radius(n: f64, c_star: f64, alpha_stab: f64) -> Result<f64> {
    if !(n >= 2.0) {
        return Err(Error::InvalidArgument("trimming radius needs n >= 2"));
    }
    if !(c_star > 0.0) || !(alpha_stab > 0.0) {
        return Err(Error::InvalidArgument("c_star and alpha_stab must be positive"));
    }
    Ok((c_star * n.ln()).powf(1.0 / alpha_stab))
}

/// Empirical distribution of the scores of the points of the inner window.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    values: Vec<f64>,
    outer_count: usize,
    inner_volume: f64,
    outer_volume: f64,
    trim_radius: f64,
    unstabilized: usize,
    discarded: usize,
}

/// `inf { t : F̂(t) >= p }` together with the order statistic it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileEstimate {
    pub p: f64,
    pub value: f64,
    /// 1-based rank of the order statistic.
    pub rank: usize,
}

impl EmpiricalCdf {
    /// An ECDF over raw score values with no window bookkeeping.
    pub fn from_scores(mut values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidArgument("scores must not be NaN"));
        }
        values.sort_by(|a, b| a.total_cmp(b));
        let n = values.len();
        Ok(Self {
            values,
            outer_count: n,
            inner_volume: n as f64,
            outer_volume: n as f64,
            trim_radius: 0.0,
            unstabilized: 0,
            discarded: 0,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `M°`, the number of scores.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `M`, the number of points of the outer configuration.
    pub fn outer_count(&self) -> usize {
        self.outer_count
    }

    pub fn inner_volume(&self) -> f64 {
        self.inner_volume
    }

    pub fn outer_volume(&self) -> f64 {
        self.outer_volume
    }

    pub fn trim_radius(&self) -> f64 {
        self.trim_radius
    }

    /// Inner points whose truncated score was undefined.
    pub fn unstabilized(&self) -> usize {
        self.unstabilized
    }

    /// Inner points whose score reached the window boundary.
    pub fn discarded(&self) -> usize {
        self.discarded
    }

    /// Number of scores `<= x`.
    pub fn count_le(&self, x: f64) -> usize {
        self.values.partition_point(|v| *v <= x)
    }

    /// `F̂(x)`; identically zero when there are no scores.
    pub fn eval(&self, x: f64) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.count_le(x) as f64 / self.values.len() as f64
    }

    /// The `i`th order statistic, 1-based.
    pub fn order_statistic(&self, i: usize) -> Option<f64> {
        i.checked_sub(1).and_then(|j| self.values.get(j).copied())
    }

    pub fn quantile(&self, p: f64) -> Result<QuantileEstimate> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::ProbabilityOutOfRange(p));
        }
        let m = self.values.len();
        if m == 0 {
            return Err(Error::EmptySample);
        }
        let rank = quantile_rank(p, m);
        Ok(QuantileEstimate {
            p,
            value: self.values[rank - 1],
            rank,
        })
    }
}

/// Smallest `k` with `k / m >= p`, i.e. `ceil(p m)` without rounding drift.
fn quantile_rank(p: f64, m: usize) -> usize {
    let mf = m as f64;
    let mut k = ((p * mf).ceil() as usize).clamp(1, m);
    while k > 1 && (k - 1) as f64 / mf >= p {
        k -= 1;
    }
    while k < m && (k as f64) / mf < p {
        k += 1;
    }
    k
}

/// `F̂` over the points of `index` inside the window shrunk by `r`, each
/// scored on the whole configuration.
///
/// Scores that fail with `BoundaryAffected` are left out and counted.
pub fn build_ecdf<const D: usize, S: ScoreFunctional<D> + ?Sized>(
    index: &SpatialIndex<D>,
    score: &S,
    r: f64,
) -> Result<EmpiricalCdf> {
    build_with(index, r, |y| match score.evaluate(y, index) {
        Ok(v) => Ok(Some(Truncated::Value(v))),
        Err(Error::BoundaryAffected) => Ok(None),
        Err(e) => Err(e),
    })
}

/// As [`build_ecdf`] but with the truncated score `ξ_r`; points where `ξ_r`
/// is undefined are left out and counted as unstabilized.
pub fn build_truncated_ecdf<const D: usize, S: ScoreFunctional<D> + ?Sized>(
    index: &SpatialIndex<D>,
    score: &S,
    r: f64,
) -> Result<EmpiricalCdf> {
    build_with(index, r, |y| match score.evaluate_truncated(y, index, r) {
        Ok(t) => Ok(Some(t)),
        Err(Error::BoundaryAffected) => Ok(None),
        Err(e) => Err(e),
    })
}

fn build_with<const D: usize, F>(index: &SpatialIndex<D>, r: f64, mut eval: F) -> Result<EmpiricalCdf>
where
    F: FnMut(&crate::geometry::Point<D>) -> Result<Option<Truncated>>,
{
    if !(r >= 0.0) {
        return Err(Error::InvalidArgument("trimming radius must be nonnegative"));
    }
    let outer = *index.config().window();
    let inner = outer.shrink(r)?;
    let mut values = Vec::new();
    let (mut unstabilized, mut discarded) = (0, 0);
    for y in index.points().iter().filter(|y| inner.contains(y)) {
        match eval(y)? {
            Some(Truncated::Value(v)) => values.push(v),
            Some(Truncated::Unstabilized) => unstabilized += 1,
            None => discarded += 1,
        }
    }
    values.sort_by(|a, b| a.total_cmp(b));
    Ok(EmpiricalCdf {
        values,
        outer_count: index.len(),
        inner_volume: inner.volume(),
        outer_volume: outer.volume(),
        trim_radius: r,
        unstabilized,
        discarded,
    })
}
