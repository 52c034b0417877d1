use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use super::{Point, PointConfiguration, Window};

/// Independent random stream for `(seed, replicate, lane)`.
///
/// Lanes separate independent draws within one replicate (the base process,
/// a resampled copy, an extra point, ...). Streams do not depend on the order
/// in which replicates are visited.
pub fn stream_rng(seed: u64, replicate: u64, lane: u16) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((replicate << 16) | u64::from(lane));
    rng
}

/// Homogeneous unit-intensity Poisson process on `window`.
pub fn sample_poisson<const D: usize, R: Rng + ?Sized>(
    window: &Window<D>,
    rng: &mut R,
) -> PointConfiguration<D> {
    let count = poisson_count(window.volume(), rng);
    let points = (0..count).map(|_| uniform_point(window, rng)).collect::<Vec<_>>();
    PointConfiguration::new(points, *window).expect("uniform points lie inside their window")
}

pub fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("finite positive Poisson mean");
    dist.sample(rng) as u64
}

pub fn uniform_point<const D: usize, R: Rng + ?Sized>(window: &Window<D>, rng: &mut R) -> Point<D> {
    let mut coords = [0.0; D];
    for (axis, c) in coords.iter_mut().enumerate() {
        let u: f64 = rng.random();
        *c = window.lo()[axis] + u * window.side(axis);
    }
    Point::new(coords)
}

/// Uniform point in the ball `B(center, radius)` by rejection from the bounding cube.
pub fn uniform_in_ball<const D: usize, R: Rng + ?Sized>(
    center: &Point<D>,
    radius: f64,
    rng: &mut R,
) -> Point<D> {
    loop {
        let mut offset = [0.0; D];
        for c in offset.iter_mut() {
            let u: f64 = rng.random();
            *c = (2.0 * u - 1.0) * radius;
        }
        let q = Point::new(offset);
        if q.dist2(&Point::origin()) <= radius * radius {
            return *center + q;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_key_same_configuration() {
        let w = Window::<2>::with_volume(500.0).unwrap();
        let a = sample_poisson(&w, &mut stream_rng(7, 3, 0));
        let b = sample_poisson(&w, &mut stream_rng(7, 3, 0));
        assert_eq!(a, b);
        let c = sample_poisson(&w, &mut stream_rng(7, 3, 1));
        assert_ne!(a, c);
        let d = sample_poisson(&w, &mut stream_rng(7, 4, 0));
        assert_ne!(a, d);
    }

    #[test]
    fn ball_points_stay_in_ball() {
        let mut rng = stream_rng(1, 0, 0);
        let c = Point::new([1.0, -2.0, 0.5]);
        for _ in 0..1000 {
            assert!(uniform_in_ball(&c, 0.7, &mut rng).dist(&c) <= 0.7);
        }
    }
}
