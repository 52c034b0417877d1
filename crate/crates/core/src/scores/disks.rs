use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use rand::Rng;

use crate::geometry::Point;

/// Closed disk in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub center: Point<2>,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Point<2>, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn contains(&self, p: &Point<2>) -> bool {
        self.center.dist2(p) <= self.radius * self.radius
    }
}

/// Exact area of a union of disks.
///
/// Green's theorem over the boundary of the union: each circle contributes
/// the arcs not covered by any other disk.
pub fn disk_union_area(disks: &[Disk]) -> f64 {
    let mut area = 0.0;
    let mut covered: Vec<(f64, f64)> = Vec::new();
    'outer: for (i, a) in disks.iter().enumerate() {
        if !(a.radius > 0.0) {
            continue;
        }
        covered.clear();
        for (j, b) in disks.iter().enumerate() {
            if i == j || !(b.radius > 0.0) {
                continue;
            }
            let dx = b.center.coords[0] - a.center.coords[0];
            let dy = b.center.coords[1] - a.center.coords[1];
            let d = (dx * dx + dy * dy).sqrt();
            if d == 0.0 && a.radius == b.radius {
                // Duplicates: keep the first copy only.
                if j < i {
                    continue 'outer;
                }
                continue;
            }
            if d + a.radius <= b.radius {
                continue 'outer;
            }
            if d >= a.radius + b.radius || d + b.radius <= a.radius {
                continue;
            }
            let cos_half = (a.radius * a.radius + d * d - b.radius * b.radius) / (2.0 * a.radius * d);
            let half = cos_half.clamp(-1.0, 1.0).acos();
            let mid = dy.atan2(dx);
            push_interval(&mut covered, mid - half, mid + half);
        }
        if covered.is_empty() {
            area += PI * a.radius * a.radius;
            continue;
        }
        covered.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(core::cmp::Ordering::Equal));
        let mut cursor = 0.0;
        for &(lo, hi) in covered.iter() {
            if lo > cursor {
                area += arc_term(a, cursor, lo);
            }
            cursor = cursor.max(hi);
        }
        if cursor < TAU {
            area += arc_term(a, cursor, TAU);
        }
    }
    area
}

/// Adds `[lo, hi]` (radians) to `out`, split into pieces inside `[0, 2π]`.
fn push_interval(out: &mut Vec<(f64, f64)>, lo: f64, hi: f64) {
    let span = (hi - lo).min(TAU);
    let start = lo.rem_euclid(TAU);
    let end = start + span;
    if end <= TAU {
        out.push((start, end));
    } else {
        out.push((start, TAU));
        out.push((0.0, end - TAU));
    }
}

/// `½ ∮ (x dy - y dx)` along the arc `[t0, t1]` of `disk`.
fn arc_term(disk: &Disk, t0: f64, t1: f64) -> f64 {
    let r = disk.radius;
    let [cx, cy] = disk.center.coords;
    0.5 * (r * r * (t1 - t0) + r * cx * (t1.sin() - t0.sin()) - r * cy * (t1.cos() - t0.cos()))
}

/// Monte Carlo estimate of the union area from `proposals` uniform points in
/// the bounding box.
pub fn disk_union_area_mc<R: Rng + ?Sized>(disks: &[Disk], proposals: usize, rng: &mut R) -> f64 {
    if disks.is_empty() || proposals == 0 {
        return 0.0;
    }
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for d in disks {
        for axis in 0..2 {
            lo[axis] = lo[axis].min(d.center.coords[axis] - d.radius);
            hi[axis] = hi[axis].max(d.center.coords[axis] + d.radius);
        }
    }
    let (w, h) = (hi[0] - lo[0], hi[1] - lo[1]);
    let hits = (0..proposals)
        .filter(|_| {
            let p = Point::new([lo[0] + w * rng.random::<f64>(), lo[1] + h * rng.random::<f64>()]);
            disks.iter().any(|d| d.contains(&p))
        })
        .count();
    w * h * hits as f64 / proposals as f64
}
