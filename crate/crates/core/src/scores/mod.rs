//! Score functionals: translation-invariant values attached to a point of a
//! configuration, together with a radius of stabilization.

mod disks;
mod knn;
mod tail;
mod voronoi;

pub use disks::{disk_union_area, disk_union_area_mc, Disk};
pub use knn::{knn_kth_score, knn_stabilization_radius, knn_total_score, KnnKthScore, KnnTotalScore};
pub use tail::{stabilization_tail_fit, TailFit};
pub use voronoi::{
    fundamental_region, voronoi_cell, AreaMethod, CellStatistics, EdgeSource, FundamentalRegionScore,
    VoronoiCell, VoronoiDeviationScore,
};

use crate::error::{Error, Result};
use crate::geometry::{Point, PointConfiguration, SpatialIndex};

/// Result of a truncated evaluation `ξ_r(y, P) = ξ(y, P ∩ B(y, r))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncated {
    Value(f64),
    /// The ball holds too few points for the score to be defined.
    Unstabilized,
}

impl Truncated {
    pub fn value(self) -> Option<f64> {
        match self {
            Self::Value(v) => Some(v),
            Self::Unstabilized => None,
        }
    }
}

/// A translation-invariant score `ξ(y, P)` of a point `y` of a configuration.
///
/// `index` carries the configuration `P`; points of `P` equal to `y` are not
/// treated as neighbors of `y`, so `y` may be passed whether or not it is
/// stored in `P`.
pub trait ScoreFunctional<const D: usize> {
    fn name(&self) -> &'static str;

    fn evaluate(&self, y: &Point<D>, index: &SpatialIndex<D>) -> Result<f64>;

    /// A radius `R` such that changes to the configuration outside `B(y, R)`
    /// leave `evaluate(y, ·)` unchanged.
    fn stabilization_radius(&self, y: &Point<D>, index: &SpatialIndex<D>) -> Result<f64>;

    /// Exponent of the stabilization tail `P(R >= r) <= C exp(-c r^α)`.
    fn alpha_stab(&self) -> f64 {
        D as f64
    }

    fn evaluate_truncated(&self, y: &Point<D>, index: &SpatialIndex<D>, r: f64) -> Result<Truncated> {
        if !(r >= 0.0) {
            return Err(Error::InvalidArgument("truncation radius must be nonnegative"));
        }
        let points = index.within(y, r).into_iter().map(|i| index.points()[i]).collect();
        let local = PointConfiguration::new(points, *index.config().window())?;
        match self.evaluate(y, &SpatialIndex::new(local)) {
            Ok(v) => Ok(Truncated::Value(v)),
            Err(Error::InsufficientPoints { .. }) => Ok(Truncated::Unstabilized),
            Err(e) => Err(e),
        }
    }
}

impl<const D: usize, S: ScoreFunctional<D> + ?Sized> ScoreFunctional<D> for &S {
    fn name(&self) -> &'static str {
        (**self).name()
    }
    fn evaluate(&self, y: &Point<D>, index: &SpatialIndex<D>) -> Result<f64> {
        (**self).evaluate(y, index)
    }
    fn stabilization_radius(&self, y: &Point<D>, index: &SpatialIndex<D>) -> Result<f64> {
        (**self).stabilization_radius(y, index)
    }
    fn alpha_stab(&self) -> f64 {
        (**self).alpha_stab()
    }
    fn evaluate_truncated(&self, y: &Point<D>, index: &SpatialIndex<D>, r: f64) -> Result<Truncated> {
        (**self).evaluate_truncated(y, index, r)
    }
}

/// `ξ_r(y, P)` for any score.
pub fn truncated_score<const D: usize, S: ScoreFunctional<D> + ?Sized>(
    score: &S,
    y: &Point<D>,
    index: &SpatialIndex<D>,
    r: f64,
) -> Result<Truncated> {
    score.evaluate_truncated(y, index, r)
}

/// A score that ignores the configuration. Used for degenerate controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantScore(pub f64);

impl<const D: usize> ScoreFunctional<D> for ConstantScore {
    fn name(&self) -> &'static str {
        "constant"
    }

    fn evaluate(&self, _: &Point<D>, _: &SpatialIndex<D>) -> Result<f64> {
        Ok(self.0)
    }

    fn stabilization_radius(&self, _: &Point<D>, _: &SpatialIndex<D>) -> Result<f64> {
        Ok(0.0)
    }
}
