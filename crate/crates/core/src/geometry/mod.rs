//! Observation windows, Poisson sampling, point configurations and the
//! nearest-neighbor index.

mod config;
mod kdtree;
mod point;
mod sampling;
mod window;

pub use config::PointConfiguration;
pub use kdtree::{Neighbor, SpatialIndex};
pub use point::Point;
pub use sampling::{poisson_count, sample_poisson, stream_rng, uniform_in_ball, uniform_point};
pub use window::Window;

/// `[-n^(1/D)/2, n^(1/D)/2]^D`, the window of volume `n`.
pub fn make_window<const D: usize>(n: f64) -> crate::Result<Window<D>> {
    Window::with_volume(n)
}

/// The inner window obtained by stripping `r` from every face.
pub fn shrink_window<const D: usize>(w: &Window<D>, r: f64) -> crate::Result<Window<D>> {
    w.shrink(r)
}

/// Closed-ball membership from a squared distance. Radii computed as
/// `dist2.sqrt()` always admit the point they came from.
pub(crate) fn in_ball(d2: f64, r: f64) -> bool {
    d2 <= r * r || d2.sqrt() <= r
}
