use super::ScoreFunctional;
use crate::error::{Error, Result};
use crate::geometry::{Point, SpatialIndex};

/// Total distance from `y` to its `k` nearest neighbors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KnnTotalScore {
    k: usize,
}

/// Distance from `y` to its `k`th nearest neighbor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KnnKthScore {
    k: usize,
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        Err(Error::InvalidArgument("k must be at least 1"))
    } else {
        Ok(())
    }
}

impl KnnTotalScore {
    pub fn new(k: usize) -> Result<Self> {
        check_k(k)?;
        Ok(Self { k })
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

impl KnnKthScore {
    pub fn new(k: usize) -> Result<Self> {
        check_k(k)?;
        Ok(Self { k })
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

pub fn knn_total_score<const D: usize>(y: &Point<D>, index: &SpatialIndex<D>, k: usize) -> Result<f64> {
    check_k(k)?;
    Ok(index.knn(y, k)?.iter().map(|n| n.distance).sum())
}

pub fn knn_kth_score<const D: usize>(y: &Point<D>, index: &SpatialIndex<D>, k: usize) -> Result<f64> {
    check_k(k)?;
    Ok(index.knn(y, k)?.last().map_or(0.0, |n| n.distance))
}

/// `d(y, V_k)`: all k neighbors lie in the closed ball of this radius, and
/// points added outside it cannot displace them.
pub fn knn_stabilization_radius<const D: usize>(
    y: &Point<D>,
    index: &SpatialIndex<D>,
    k: usize,
) -> Result<f64> {
    knn_kth_score(y, index, k)
}

impl<const D: usize> ScoreFunctional<D> for KnnTotalScore {
    fn name(&self) -> &'static str {
        "knn-total"
    }

    fn evaluate(&self, y: &Point<D>, index: &SpatialIndex<D>) -> Result<f64> {
        knn_total_score(y, index, self.k)
    }

    fn stabilization_radius(&self, y: &Point<D>, index: &SpatialIndex<D>) -> Result<f64> {
        knn_stabilization_radius(y, index, self.k)
    }
}

impl<const D: usize> ScoreFunctional<D> for KnnKthScore {
    fn name(&self) -> &'static str {
        "knn-kth"
    }

    fn evaluate(&self, y: &Point<D>, index: &SpatialIndex<D>) -> Result<f64> {
        knn_kth_score(y, index, self.k)
    }

    fn stabilization_radius(&self, y: &Point<D>, index: &SpatialIndex<D>) -> Result<f64> {
        knn_stabilization_radius(y, index, self.k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{PointConfiguration, Window};
    use crate::scores::Truncated;
    use alloc::vec;

    fn triangle() -> SpatialIndex<2> {
        let pts = vec![Point::new([0.0, 0.0]), Point::new([1.0, 0.0]), Point::new([0.0, 2.0])];
        SpatialIndex::new(PointConfiguration::new(pts, Window::with_volume(36.0).unwrap()).unwrap())
    }

    #[test]
    fn small_configuration_scores() {
        let idx = triangle();
        let y = Point::new([0.0, 0.0]);
        assert_eq!(knn_total_score(&y, &idx, 2).unwrap(), 3.0);
        assert_eq!(knn_kth_score(&y, &idx, 2).unwrap(), 2.0);
        assert_eq!(knn_stabilization_radius(&y, &idx, 2).unwrap(), 2.0);
        assert_eq!(
            knn_total_score(&y, &idx, 1).unwrap(),
            knn_kth_score(&y, &idx, 1).unwrap()
        );
        assert!(matches!(
            knn_kth_score(&y, &idx, 3),
            Err(Error::InsufficientPoints { .. })
        ));
    }

    #[test]
    fn truncation_cases() {
        let idx = triangle();
        let y = Point::new([0.0, 0.0]);
        let s = KnnKthScore::new(2).unwrap();
        assert_eq!(s.evaluate_truncated(&y, &idx, 2.0).unwrap(), Truncated::Value(2.0));
        assert_eq!(s.evaluate_truncated(&y, &idx, 0.0).unwrap(), Truncated::Unstabilized);
        // The ball of radius 1.5 misses the second neighbor.
        assert_eq!(s.evaluate_truncated(&y, &idx, 1.5).unwrap(), Truncated::Unstabilized);
        assert!(s.evaluate_truncated(&y, &idx, -1.0).is_err());
    }

    #[test]
    fn zero_k_is_rejected() {
        assert!(KnnKthScore::new(0).is_err());
        assert!(KnnTotalScore::new(0).is_err());
    }
}
