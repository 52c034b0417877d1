use alloc::vec::Vec;
use core::cmp::Ordering;

use super::{in_ball, Point, PointConfiguration};
use crate::error::{Error, Result};

const LEAF_SIZE: usize = 8;

/// A neighbor returned by [`SpatialIndex::knn`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor<const D: usize> {
    /// Position of the point in the indexed configuration.
    pub index: usize,
    pub point: Point<D>,
    pub distance: f64,
}

/// Immutable kd-tree over a configuration, answering exact k-nearest-neighbor
/// and ball queries.
///
/// The tree is stored implicitly as a permutation of point indices: each
/// subrange is split at its median along `depth % D`, with small ranges
/// scanned linearly.
#[derive(Debug, Clone)]
pub struct SpatialIndex<const D: usize> {
    config: PointConfiguration<D>,
    order: Vec<u32>,
}

impl<const D: usize> SpatialIndex<D> {
    pub fn new(config: PointConfiguration<D>) -> Self {
        assert!(config.len() < u32::MAX as usize, "configuration too large to index");
        let mut order: Vec<u32> = (0..config.len() as u32).collect();
        build(&mut order, config.points(), 0);
        Self { config, order }
    }

    pub fn config(&self) -> &PointConfiguration<D> {
        &self.config
    }

    pub fn points(&self) -> &[Point<D>] {
        self.config.points()
    }

    pub fn len(&self) -> usize {
        self.config.len()
    }

    pub fn is_empty(&self) -> bool {
        self.config.is_empty()
    }

    /// The `k` points of the configuration other than `y` closest to `y`,
    /// sorted by distance with lexicographic tie-breaking on coordinates.
    ///
    /// Points whose coordinates equal `y` are not candidates, so `y` may or may
    /// not belong to the configuration.
    pub fn knn(&self, y: &Point<D>, k: usize) -> Result<Vec<Neighbor<D>>> {
        if k == 0 {
            return Ok(Vec::new());
        }
        let mut cands = Candidates::new(y, k, self.points());
        self.search(0, self.order.len(), 0, y, &mut cands);
        if cands.items.len() < k {
            return Err(Error::InsufficientPoints {
                needed: k,
                available: cands.items.len(),
            });
        }
        Ok(cands
            .items
            .iter()
            .map(|&(d2, i)| Neighbor {
                index: i as usize,
                point: self.points()[i as usize],
                distance: d2.sqrt(),
            })
            .collect())
    }

    /// Indices of all points in the closed ball `B(center, radius)`, ascending.
    pub fn within(&self, center: &Point<D>, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.range(0, self.order.len(), 0, center, radius, &mut out);
        out.sort_unstable();
        out
    }

    fn search(&self, lo: usize, hi: usize, depth: usize, q: &Point<D>, cands: &mut Candidates<'_, D>) {
        let len = hi - lo;
        if len <= LEAF_SIZE {
            for &i in &self.order[lo..hi] {
                cands.offer(i);
            }
            return;
        }
        let mid = lo + len / 2;
        let axis = depth % D;
        let split = self.order[mid];
        cands.offer(split);
        let diff = q.coords[axis] - self.points()[split as usize].coords[axis];
        let (near, far) = if diff < 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.search(near.0, near.1, depth + 1, q, cands);
        if !cands.is_full() || diff * diff <= cands.worst_dist2() {
            self.search(far.0, far.1, depth + 1, q, cands);
        }
    }

    fn range(&self, lo: usize, hi: usize, depth: usize, q: &Point<D>, r: f64, out: &mut Vec<usize>) {
        let len = hi - lo;
        if len <= LEAF_SIZE {
            out.extend(
                self.order[lo..hi]
                    .iter()
                    .filter(|&&i| in_ball(self.points()[i as usize].dist2(q), r))
                    .map(|&i| i as usize),
            );
            return;
        }
        let mid = lo + len / 2;
        let axis = depth % D;
        let split = self.order[mid] as usize;
        if in_ball(self.points()[split].dist2(q), r) {
            out.push(split);
        }
        let diff = q.coords[axis] - self.points()[split].coords[axis];
        if diff <= 0.0 || diff.abs() <= r {
            self.range(lo, mid, depth + 1, q, r, out);
        }
        if diff >= 0.0 || diff.abs() <= r {
            self.range(mid + 1, hi, depth + 1, q, r, out);
        }
    }
}

fn build<const D: usize>(order: &mut [u32], points: &[Point<D>], depth: usize) {
    if order.len() <= LEAF_SIZE {
        return;
    }
    let axis = depth % D;
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        points[a as usize].coords[axis]
            .partial_cmp(&points[b as usize].coords[axis])
            .unwrap_or(Ordering::Equal)
    });
    let (left, rest) = order.split_at_mut(mid);
    build(left, points, depth + 1);
    build(&mut rest[1..], points, depth + 1);
}

struct Candidates<'a, const D: usize> {
    query: &'a Point<D>,
    k: usize,
    points: &'a [Point<D>],
    /// Sorted ascending by (squared distance, coordinates).
    items: Vec<(f64, u32)>,
}

impl<'a, const D: usize> Candidates<'a, D> {
    fn new(query: &'a Point<D>, k: usize, points: &'a [Point<D>]) -> Self {
        Self {
            query,
            k,
            points,
            items: Vec::with_capacity(k + 1),
        }
    }

    fn is_full(&self) -> bool {
        self.items.len() == self.k
    }

    fn worst_dist2(&self) -> f64 {
        self.items.last().map_or(f64::INFINITY, |c| c.0)
    }

    fn cmp(&self, a: (f64, u32), b: (f64, u32)) -> Ordering {
        a.0.partial_cmp(&b.0)
            .unwrap_or(Ordering::Equal)
            .then_with(|| self.points[a.1 as usize].lex_cmp(&self.points[b.1 as usize]))
    }

    fn offer(&mut self, i: u32) {
        let p = &self.points[i as usize];
        if p == self.query {
            return;
        }
        let cand = (p.dist2(self.query), i);
        if self.is_full() {
            let worst = *self.items.last().expect("full candidate list");
            if self.cmp(cand, worst) != Ordering::Less {
                return;
            }
            self.items.pop();
        }
        let pos = self
            .items
            .partition_point(|&c| self.cmp(c, cand) == Ordering::Less);
        self.items.insert(pos, cand);
    }
}
