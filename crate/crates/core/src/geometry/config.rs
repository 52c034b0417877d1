use alloc::vec::Vec;

use super::{Point, Window};
use crate::error::{Error, Result};

/// A finite point set together with the window that carries it.
#[derive(Debug, Clone, PartialEq)]
pub struct PointConfiguration<const D: usize> {
    points: Vec<Point<D>>,
    window: Window<D>,
}

impl<const D: usize> PointConfiguration<D> {
    /// Fails if a point is not finite or lies outside `window`.
    pub fn new(points: Vec<Point<D>>, window: Window<D>) -> Result<Self> {
        if let Some(index) = points
            .iter()
            .position(|p| !p.is_finite() || !window.contains(p))
        {
            return Err(Error::PointOutsideWindow { index });
        }
        Ok(Self { points, window })
    }

    pub fn empty(window: Window<D>) -> Self {
        Self {
            points: Vec::new(),
            window,
        }
    }

    pub fn points(&self) -> &[Point<D>] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point<D>> {
        self.points
    }

    pub fn window(&self) -> &Window<D> {
        &self.window
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points lying in `w` (closed inclusion), carried by `w`.
    pub fn restrict(&self, w: &Window<D>) -> Result<Self> {
        if !self.window.contains_window(w) {
            return Err(Error::NotContained);
        }
        let points = self.points.iter().filter(|p| w.contains(p)).copied().collect();
        Ok(Self { points, window: *w })
    }

    /// Points in the closed ball `B(center, radius)`, keeping the carrier window.
    pub fn within_ball(&self, center: &Point<D>, radius: f64) -> Self {
        let points = self
            .points
            .iter()
            .filter(|p| super::in_ball(p.dist2(center), radius))
            .copied()
            .collect();
        Self {
            points,
            window: self.window,
        }
    }

    /// Removes every point of the closed box `w`.
    pub fn without(&self, w: &Window<D>) -> Self {
        let points = self.points.iter().filter(|p| !w.contains(p)).copied().collect();
        Self {
            points,
            window: self.window,
        }
    }

    /// Adds `extra` to the configuration; each must lie in the window.
    pub fn union(&self, extra: &[Point<D>]) -> Result<Self> {
        let mut points = self.points.clone();
        points.extend_from_slice(extra);
        Self::new(points, self.window)
    }

    pub fn with_point(&self, p: Point<D>) -> Result<Self> {
        self.union(core::slice::from_ref(&p))
    }

    /// `P - z`, with the window shifted accordingly.
    pub fn translate(&self, z: &Point<D>) -> Self {
        let neg = Point::origin() - *z;
        Self {
            points: self.points.iter().map(|p| *p - *z).collect(),
            window: self.window.translate(&neg),
        }
    }

    /// Replaces the carrier window by a larger one.
    pub fn rewindow(&self, window: Window<D>) -> Result<Self> {
        if !window.contains_window(&self.window) {
            return Err(Error::NotContained);
        }
        Ok(Self {
            points: self.points.clone(),
            window,
        })
    }
}
