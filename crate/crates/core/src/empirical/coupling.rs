use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{make_window, sample_poisson, stream_rng, Point, PointConfiguration, SpatialIndex, Window};
use crate::scores::ScoreFunctional;

/// One term `a (1{ξ <= x} - F(x))` of the finite-dimensional score `Ψ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub x: f64,
    /// `F(x)` under the stationary law.
    pub cdf: f64,
    pub weight: f64,
}

impl Threshold {
    pub fn new(x: f64, cdf: f64, weight: f64) -> Self {
        Self { x, cdf, weight }
    }
}

/// A configuration and its copy with the unit cube `Q_z` resampled from an
/// independent process.
#[derive(Debug, Clone)]
pub struct DeltaCoupling<const D: usize> {
    base: PointConfiguration<D>,
    resampled: PointConfiguration<D>,
    cube: Window<D>,
}

impl<const D: usize> DeltaCoupling<D> {
    /// `(base \ Q_z) ∪ (fresh ∩ Q_z)`; `Q_z` must lie in the base window.
    pub fn new(base: PointConfiguration<D>, fresh: &PointConfiguration<D>, z: &Point<D>) -> Result<Self> {
        let cube = Window::cube(z, 1.0)?;
        if !base.window().contains_window(&cube) {
            return Err(Error::NotContained);
        }
        let inside: Vec<Point<D>> = fresh.points().iter().filter(|p| cube.contains(p)).copied().collect();
        let resampled = base.without(&cube).union(&inside)?;
        Ok(Self { base, resampled, cube })
    }

    pub fn base(&self) -> &PointConfiguration<D> {
        &self.base
    }

    pub fn resampled(&self) -> &PointConfiguration<D> {
        &self.resampled
    }

    pub fn cube(&self) -> &Window<D> {
        &self.cube
    }

    /// `Σ_{y ∈ P°} Ψ(y, P) - Σ_{y ∈ P''°} Ψ(y, P'')` over the window shrunk by
    /// `trim`.
    ///
    /// Points outside `Q_z` whose stabilization ball misses `Q_z` score the
    /// same in both configurations and are skipped. Scores that fail with
    /// `BoundaryAffected` drop out of their configuration's sum.
    pub fn delta<S: ScoreFunctional<D> + ?Sized>(&self, score: &S, thresholds: &[Threshold], trim: f64) -> Result<f64> {
        let inner = self.base.window().shrink(trim)?;
        let base = SpatialIndex::new(self.base.clone());
        let other = SpatialIndex::new(self.resampled.clone());
        // Per threshold: (#{ξ <= x} in P°) - (#{ξ <= x} in P''°), and M° - M''°.
        let mut counts = alloc::vec![0i64; thresholds.len()];
        let mut size = 0i64;
        let mut tally = |value: Option<f64>, sign: i64| {
            if let Some(v) = value {
                size += sign;
                for (c, t) in counts.iter_mut().zip(thresholds) {
                    if v <= t.x {
                        *c += sign;
                    }
                }
            }
        };
        for y in base.points().iter().filter(|y| inner.contains(y)) {
            if self.cube.contains(y) {
                tally(score_or_skip(score, y, &base)?, 1);
                continue;
            }
            let reach = match score.stabilization_radius(y, &base) {
                Ok(r) => r,
                Err(Error::InsufficientPoints { .. }) | Err(Error::BoundaryAffected) => f64::INFINITY,
                Err(e) => return Err(e),
            };
            if distance_to_box(y, &self.cube) > reach {
                continue;
            }
            tally(score_or_skip(score, y, &base)?, 1);
            tally(score_or_skip(score, y, &other)?, -1);
        }
        for y in other.points().iter().filter(|y| inner.contains(y) && self.cube.contains(y)) {
            tally(score_or_skip(score, y, &other)?, -1);
        }
        Ok(thresholds
            .iter()
            .zip(&counts)
            .map(|(t, &c)| t.weight * (c as f64 - t.cdf * size as f64))
            .sum())
    }
}

fn score_or_skip<const D: usize, S: ScoreFunctional<D> + ?Sized>(
    score: &S,
    y: &Point<D>,
    index: &SpatialIndex<D>,
) -> Result<Option<f64>> {
    match score.evaluate(y, index) {
        Ok(v) => Ok(Some(v)),
        Err(Error::BoundaryAffected) => Ok(None),
        Err(e) => Err(e),
    }
}

fn distance_to_box<const D: usize>(y: &Point<D>, w: &Window<D>) -> f64 {
    let mut s = 0.0;
    for axis in 0..D {
        let c = y.coords[axis];
        let gap = (w.lo()[axis] - c).max(c - w.hi()[axis]).max(0.0);
        s += gap * gap;
    }
    s.sqrt()
}

/// `Δ(z, n)` for processes drawn on the window of volume `n`: `P` from lane 0
/// and the independent copy `P'` from lane 1 of `(seed, replicate)`.
#[allow(clippy::too_many_arguments)]
pub fn delta_coupling<const D: usize, S: ScoreFunctional<D> + ?Sized>(
    seed: u64,
    replicate: u64,
    n: f64,
    z: &Point<D>,
    score: &S,
    thresholds: &[Threshold],
    trim: f64,
) -> Result<f64> {
    let window = make_window::<D>(n)?;
    let base = sample_poisson(&window, &mut stream_rng(seed, replicate, 0));
    let fresh = sample_poisson(&window, &mut stream_rng(seed, replicate, 1));
    DeltaCoupling::new(base, &fresh, z)?.delta(score, thresholds, trim)
}

/// Finite-window add-one cost at the origin:
/// `(1{ξ(0, P ∪ {0}) <= x} - F(x)) + Σ_{y ∈ P} (1{ξ(y, P ∪ {0}) <= x} - 1{ξ(y, P) <= x})`.
///
/// Points farther from the origin than their stabilization radius cannot
/// flip and are skipped.
pub fn add_one_cost<const D: usize, S: ScoreFunctional<D> + ?Sized>(
    config: &PointConfiguration<D>,
    score: &S,
    x: f64,
    cdf_x: f64,
) -> Result<f64> {
    let origin = Point::origin();
    let without = SpatialIndex::new(config.clone());
    let with = SpatialIndex::new(config.with_point(origin)?);
    let ind = |v: f64| if v <= x { 1.0 } else { 0.0 };
    let mut cost = ind(score.evaluate(&origin, &with)?) - cdf_x;
    for y in config.points() {
        if *y == origin {
            continue;
        }
        let reach = match score.stabilization_radius(y, &without) {
            Ok(r) => r,
            Err(Error::InsufficientPoints { .. }) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        if y.norm() > reach {
            continue;
        }
        cost += ind(score.evaluate(y, &with)?) - ind(score.evaluate(y, &without)?);
    }
    Ok(cost)
}
