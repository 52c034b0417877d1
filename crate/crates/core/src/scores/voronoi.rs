//! Planar Voronoi cells by half-plane clipping.
//!
//! The cell of `y` is the window rectangle clipped by the bisector half-planes
//! of its nearest neighbors, taken in order of distance. Once the next
//! unclipped neighbor is at least twice the circumradius `R_o` away, no
//! further generator can cut the cell and the result is exact.

use alloc::vec::Vec;

use super::disks::{disk_union_area, disk_union_area_mc, Disk};
use super::ScoreFunctional;
use crate::error::{Error, Result};
use crate::geometry::{stream_rng, Point, SpatialIndex};

const INITIAL_NEIGHBORS: usize = 16;

/// Origin of a polygon edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeSource {
    /// Part of the window boundary.
    Window,
    /// Bisector between the generator and the point at this configuration index.
    Generator { index: usize, half_distance: f64 },
}

/// Convex Voronoi cell clipped to the carrier window, vertices counterclockwise.
///
/// `edges[i]` describes the edge from `vertices[i]` to `vertices[i + 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct VoronoiCell {
    pub generator: Point<2>,
    pub vertices: Vec<Point<2>>,
    pub edges: Vec<EdgeSource>,
    pub clipped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellStatistics {
    pub area: f64,
    /// Radius of the smallest ball centered at the generator containing the cell.
    pub circumradius: f64,
    /// Radius of the largest ball centered at the generator inside the cell.
    pub inradius: f64,
    /// `(R_o - ρ_o) / (R_o + ρ_o)`.
    pub deviation: f64,
    /// Number of edges shared with other generators.
    pub faces: usize,
}

impl VoronoiCell {
    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        let mut twice = 0.0;
        for i in 0..n {
            let a = self.vertices[i].coords;
            let b = self.vertices[(i + 1) % n].coords;
            twice += a[0] * b[1] - a[1] * b[0];
        }
        0.5 * twice
    }

    pub fn circumradius(&self) -> f64 {
        self.vertices
            .iter()
            .map(|v| v.dist(&self.generator))
            .fold(0.0, f64::max)
    }

    pub fn inradius(&self) -> f64 {
        let n = self.vertices.len();
        let mut best = f64::INFINITY;
        for (i, edge) in self.edges.iter().enumerate() {
            let d = match *edge {
                EdgeSource::Generator { half_distance, .. } => half_distance,
                EdgeSource::Window => {
                    let a = self.vertices[i];
                    let b = self.vertices[(i + 1) % n];
                    let len = a.dist(&b);
                    if len <= 1e-14 {
                        continue;
                    }
                    let (e, g) = (b - a, self.generator - a);
                    (e.coords[0] * g.coords[1] - e.coords[1] * g.coords[0]).abs() / len
                }
            };
            best = best.min(d);
        }
        if best.is_finite() {
            best
        } else {
            0.0
        }
    }

    pub fn faces(&self) -> usize {
        self.edges
            .iter()
            .filter(|e| matches!(e, EdgeSource::Generator { .. }))
            .count()
    }

    pub fn statistics(&self) -> CellStatistics {
        let circumradius = self.circumradius();
        let inradius = self.inradius().min(circumradius);
        let sum = circumradius + inradius;
        CellStatistics {
            area: self.area(),
            circumradius,
            inradius,
            deviation: if sum > 0.0 { (circumradius - inradius) / sum } else { 0.0 },
            faces: self.faces(),
        }
    }

    /// Disks centered at the cell vertices passing through the generator.
    /// Away from the window boundary these are the empty circumdisks of the
    /// Delaunay triangles at the generator.
    pub fn vertex_disks(&self) -> Vec<Disk> {
        self.vertices
            .iter()
            .map(|v| Disk::new(*v, v.dist(&self.generator)))
            .collect()
    }
}

/// Voronoi cell of `y` with respect to the other points of the index, clipped
/// to the carrier window.
pub fn voronoi_cell(y: &Point<2>, index: &SpatialIndex<2>) -> Result<VoronoiCell> {
    let window = index.config().window();
    if !window.contains(y) {
        return Err(Error::InvalidArgument("generator outside the window"));
    }
    let (lo, hi) = (window.lo(), window.hi());
    let mut poly: Vec<(Point<2>, EdgeSource)> = [
        [lo[0], lo[1]],
        [hi[0], lo[1]],
        [hi[0], hi[1]],
        [lo[0], hi[1]],
    ]
    .into_iter()
    .map(|c| (Point::new(c), EdgeSource::Window))
    .collect();

    let available = index.len() - index.within(y, 0.0).len();
    let mut k = INITIAL_NEIGHBORS.min(available);
    let mut done = 0;
    while k > done {
        let neighbors = index.knn(y, k)?;
        for nb in &neighbors[done..] {
            poly = clip(&poly, y, &nb.point, nb.index);
        }
        done = neighbors.len();
        let reach = poly.iter().map(|(v, _)| v.dist(y)).fold(0.0, f64::max);
        if neighbors.last().is_some_and(|nb| nb.distance >= 2.0 * reach) {
            break;
        }
        k = (2 * k).min(available);
    }

    let clipped = poly.iter().any(|(_, e)| *e == EdgeSource::Window);
    let (vertices, edges) = poly.into_iter().unzip();
    Ok(VoronoiCell {
        generator: *y,
        vertices,
        edges,
        clipped,
    })
}

/// Keeps the part of the convex polygon on the side of the bisector of
/// `y` and `q` that contains `y`.
fn clip(
    poly: &[(Point<2>, EdgeSource)],
    y: &Point<2>,
    q: &Point<2>,
    index: usize,
) -> Vec<(Point<2>, EdgeSource)> {
    let normal = *q - *y;
    let mid = Point::new([0.5 * (q.coords[0] + y.coords[0]), 0.5 * (q.coords[1] + y.coords[1])]);
    let side = |p: &Point<2>| {
        let r = *p - mid;
        r.coords[0] * normal.coords[0] + r.coords[1] * normal.coords[1]
    };
    let label = EdgeSource::Generator {
        index,
        half_distance: 0.5 * q.dist(y),
    };
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let (a, edge) = poly[i];
        let (b, _) = poly[(i + 1) % n];
        let (sa, sb) = (side(&a), side(&b));
        match (sa <= 0.0, sb <= 0.0) {
            (true, true) => out.push((a, edge)),
            (true, false) => {
                out.push((a, edge));
                out.push((lerp(&a, &b, sa / (sa - sb)), label));
            }
            (false, true) => out.push((lerp(&a, &b, sa / (sa - sb)), edge)),
            (false, false) => {}
        }
    }
    out
}

fn lerp(a: &Point<2>, b: &Point<2>, t: f64) -> Point<2> {
    Point::new([
        a.coords[0] + t * (b.coords[0] - a.coords[0]),
        a.coords[1] + t * (b.coords[1] - a.coords[1]),
    ])
}

/// Cell area if the deviation `δ(Z)` is at least `epsilon`, else zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoronoiDeviationScore {
    epsilon: f64,
}

impl VoronoiDeviationScore {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&epsilon) {
            return Err(Error::InvalidArgument("deviation threshold must lie in [0, 1)"));
        }
        Ok(Self { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

impl ScoreFunctional<2> for VoronoiDeviationScore {
    fn name(&self) -> &'static str {
        "voronoi-deviation"
    }

    fn evaluate(&self, y: &Point<2>, index: &SpatialIndex<2>) -> Result<f64> {
        let stats = voronoi_cell(y, index)?.statistics();
        Ok(if stats.deviation >= self.epsilon { stats.area } else { 0.0 })
    }

    fn stabilization_radius(&self, y: &Point<2>, index: &SpatialIndex<2>) -> Result<f64> {
        Ok(2.0 * voronoi_cell(y, index)?.circumradius())
    }
}

/// How the area of the fundamental region is computed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AreaMethod {
    Exact,
    /// Rejection sampling in the bounding box, seeded from the generator
    /// coordinates so evaluation stays a pure function.
    MonteCarlo { proposals: usize },
}

/// The union of vertex disks of the cell of `y`, or `BoundaryAffected` if the
/// cell or one of the disks reaches the window boundary.
pub fn fundamental_region(y: &Point<2>, index: &SpatialIndex<2>) -> Result<(VoronoiCell, Vec<Disk>)> {
    let cell = voronoi_cell(y, index)?;
    if cell.clipped {
        return Err(Error::BoundaryAffected);
    }
    let disks = cell.vertex_disks();
    let window = index.config().window();
    if disks.iter().any(|d| !window.contains_ball(&d.center, d.radius)) {
        return Err(Error::BoundaryAffected);
    }
    Ok((cell, disks))
}

/// Area of the fundamental region: the union of the empty Delaunay
/// circumdisks at the generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalRegionScore {
    pub method: AreaMethod,
}

impl Default for FundamentalRegionScore {
    fn default() -> Self {
        Self {
            method: AreaMethod::Exact,
        }
    }
}

impl FundamentalRegionScore {
    pub fn area_of(&self, y: &Point<2>, disks: &[Disk]) -> f64 {
        match self.method {
            AreaMethod::Exact => disk_union_area(disks),
            AreaMethod::MonteCarlo { proposals } => {
                let key = y.coords[0].to_bits() ^ y.coords[1].to_bits().rotate_left(32);
                disk_union_area_mc(disks, proposals, &mut stream_rng(key, 0, 0))
            }
        }
    }

    /// Area together with the number of cell edges.
    pub fn evaluate_with_faces(&self, y: &Point<2>, index: &SpatialIndex<2>) -> Result<(f64, usize)> {
        let (cell, disks) = fundamental_region(y, index)?;
        Ok((self.area_of(y, &disks), cell.faces()))
    }
}

impl ScoreFunctional<2> for FundamentalRegionScore {
    fn name(&self) -> &'static str {
        "fundamental-region"
    }

    fn evaluate(&self, y: &Point<2>, index: &SpatialIndex<2>) -> Result<f64> {
        Ok(self.evaluate_with_faces(y, index)?.0)
    }

    fn stabilization_radius(&self, y: &Point<2>, index: &SpatialIndex<2>) -> Result<f64> {
        Ok(2.0 * voronoi_cell(y, index)?.circumradius())
    }
}
