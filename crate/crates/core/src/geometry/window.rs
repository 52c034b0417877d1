use super::Point;
use crate::error::{Error, Result};

/// Closed axis-aligned box `[lo_1, hi_1] x ... x [lo_D, hi_D]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window<const D: usize> {
    lo: [f64; D],
    hi: [f64; D],
}

impl<const D: usize> Window<D> {
    pub fn new(lo: [f64; D], hi: [f64; D]) -> Result<Self> {
        for axis in 0..D {
            if !(lo[axis].is_finite() && hi[axis].is_finite() && lo[axis] < hi[axis]) {
                return Err(Error::DegenerateWindow { axis });
            }
        }
        Ok(Self { lo, hi })
    }

    /// The observation window `[-n^(1/D)/2, n^(1/D)/2]^D` of volume `n`.
    pub fn with_volume(n: f64) -> Result<Self> {
        if D < 2 {
            return Err(Error::DimensionTooSmall(D));
        }
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::NonPositiveVolume(n));
        }
        let half = n.powf(1.0 / D as f64) / 2.0;
        Self::new([-half; D], [half; D])
    }

    /// Cube of side `side` centered at `center`.
    pub fn cube(center: &Point<D>, side: f64) -> Result<Self> {
        let mut lo = center.coords;
        let mut hi = center.coords;
        for axis in 0..D {
            lo[axis] -= side / 2.0;
            hi[axis] += side / 2.0;
        }
        Self::new(lo, hi)
    }

    pub fn lo(&self) -> &[f64; D] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64; D] {
        &self.hi
    }

    pub fn side(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn min_side(&self) -> f64 {
        (0..D).map(|a| self.side(a)).fold(f64::INFINITY, f64::min)
    }

    pub fn volume(&self) -> f64 {
        (0..D).map(|a| self.side(a)).product()
    }

    pub fn center(&self) -> Point<D> {
        let mut c = [0.0; D];
        for (axis, c) in c.iter_mut().enumerate() {
            *c = 0.5 * (self.lo[axis] + self.hi[axis]);
        }
        Point::new(c)
    }

    /// Shrinks every axis by `margin` at both ends.
    pub fn shrink(&self, margin: f64) -> Result<Self> {
        if !(margin >= 0.0 && margin.is_finite()) {
            return Err(Error::InvalidArgument("shrink margin must be finite and nonnegative"));
        }
        let side = self.min_side();
        if 2.0 * margin >= side {
            return Err(Error::ShrinkTooLarge { margin, side });
        }
        let mut lo = self.lo;
        let mut hi = self.hi;
        for axis in 0..D {
            lo[axis] += margin;
            hi[axis] -= margin;
        }
        Self::new(lo, hi)
    }

    pub fn contains(&self, p: &Point<D>) -> bool {
        (0..D).all(|a| self.lo[a] <= p.coords[a] && p.coords[a] <= self.hi[a])
    }

    pub fn contains_window(&self, other: &Window<D>) -> bool {
        (0..D).all(|a| self.lo[a] <= other.lo[a] && other.hi[a] <= self.hi[a])
    }

    /// Whether the closed ball `B(center, radius)` lies inside the window.
    pub fn contains_ball(&self, center: &Point<D>, radius: f64) -> bool {
        (0..D).all(|a| {
            self.lo[a] <= center.coords[a] - radius && center.coords[a] + radius <= self.hi[a]
        })
    }

    pub fn translate(&self, z: &Point<D>) -> Self {
        let mut lo = self.lo;
        let mut hi = self.hi;
        for axis in 0..D {
            lo[axis] += z.coords[axis];
            hi[axis] += z.coords[axis];
        }
        Self { lo, hi }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_sides_match_volume() {
        let w = Window::<2>::with_volume(1.0).unwrap();
        assert_eq!(w.lo(), &[-0.5, -0.5]);
        assert_eq!(w.hi(), &[0.5, 0.5]);

        let w = Window::<2>::with_volume(16.0).unwrap();
        assert!((w.side(0) - 4.0).abs() < 1e-12);
        assert!((w.volume() - 16.0).abs() < 1e-12 * 16.0);

        let w = Window::<3>::with_volume(1000.0).unwrap();
        assert!((w.side(2) - 10.0).abs() < 1e-12);
        assert!((w.volume() - 1000.0).abs() < 1e-12 * 1000.0);
    }

    #[test]
    fn invalid_windows_are_rejected() {
        assert_eq!(Window::<2>::with_volume(0.0), Err(Error::NonPositiveVolume(0.0)));
        assert_eq!(Window::<2>::with_volume(-3.0), Err(Error::NonPositiveVolume(-3.0)));
        assert_eq!(Window::<1>::with_volume(4.0), Err(Error::DimensionTooSmall(1)));
        assert!(Window::new([0.0, 1.0], [1.0, 1.0]).is_err());
    }

    #[test]
    fn shrink_cases() {
        let w = Window::<2>::with_volume(100.0).unwrap();
        assert_eq!(w.shrink(0.0).unwrap(), w);
        let s = w.shrink(1.0).unwrap();
        assert_eq!(s.lo(), &[-4.0, -4.0]);
        assert_eq!(s.hi(), &[4.0, 4.0]);

        let w2 = Window::<2>::with_volume(4.0).unwrap();
        assert!(matches!(w2.shrink(1.0), Err(Error::ShrinkTooLarge { .. })));
        assert!(w2.shrink(-0.1).is_err());
    }

    #[test]
    fn closed_inclusion() {
        let w = Window::<2>::with_volume(4.0).unwrap();
        assert!(w.contains(&Point::new([1.0, -1.0])));
        assert!(!w.contains(&Point::new([1.0 + 1e-12, 0.0])));
        assert!(w.contains_ball(&Point::new([0.0, 0.0]), 1.0));
        assert!(!w.contains_ball(&Point::new([0.5, 0.0]), 0.6));
    }
}
