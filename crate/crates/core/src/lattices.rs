//! Square lattices and disk triangulations with mixed boundary conditions.

use std::f64::consts::{PI, TAU};

use delaunator::{triangulate, EMPTY};

use crate::error::{Error, Result};
use crate::model::{IsingGraph, Point, VertexId};
use crate::rng::RngStream;
use crate::symmetry::{validate_involution, GeometricInvolution, GraphInvolution};

#[derive(Debug, Clone, PartialEq)]
pub enum BoundarySpec {
    /// `+1` on the left and right sides, `-1` on the top and bottom.
    SidesPm,
    /// `+1` in the first and third quadrants, `-1` in the second and fourth.
    QuadrantPm,
    /// `+1` on the listed half-open angular intervals `[start, end)` (radians),
    /// `-1` elsewhere.
    Arcs(Vec<(f64, f64)>),
}

impl BoundarySpec {
    pub fn arcs(mut intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::InvalidLattice("arc list is empty".into()));
        }
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(a, b) in &intervals {
            if !(0.0 <= a && a < b && b <= TAU) {
                return Err(Error::InvalidLattice(format!(
                    "arc [{a}, {b}) must satisfy 0 <= start < end <= 2pi"
                )));
            }
        }
        if let Some(w) = intervals.windows(2).find(|w| w[1].0 < w[0].1) {
            return Err(Error::InvalidLattice(format!(
                "arcs [{}, {}) and [{}, {}) overlap",
                w[0].0, w[0].1, w[1].0, w[1].1
            )));
        }
        let covered: f64 = intervals.iter().map(|(a, b)| b - a).sum();
        if covered >= TAU {
            return Err(Error::InvalidLattice("arcs cover the whole circle".into()));
        }
        Ok(Self::Arcs(intervals))
    }

    /// Boundary spin at polar angle `theta` (any real; reduced mod 2pi).
    pub fn spin_at_angle(&self, theta: f64) -> i8 {
        let theta = theta.rem_euclid(TAU);
        let positive = match self {
            BoundarySpec::QuadrantPm => {
                (0.0..PI / 2.0).contains(&theta) || (PI..1.5 * PI).contains(&theta)
            }
            BoundarySpec::SidesPm => {
                // Vertical sides of a square centred on the origin.
                (theta < PI / 4.0 || theta >= 1.75 * PI) || (0.75 * PI..1.25 * PI).contains(&theta)
            }
            BoundarySpec::Arcs(arcs) => arcs.iter().any(|&(a, b)| (a..b).contains(&theta)),
        };
        if positive {
            1
        } else {
            -1
        }
    }

    pub fn spin_at(&self, p: Point) -> i8 {
        self.spin_at_angle(p.y.atan2(p.x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshParams {
    pub h: f64,
    pub seed: u64,
    /// Per-coordinate jitter amplitude as a fraction of `h`.
    pub jitter: f64,
}

impl MeshParams {
    pub const DEFAULT_JITTER: f64 = 0.35;

    pub fn new(h: f64, seed: u64) -> Result<Self> {
        if !(h > 0.0 && h < 1.0) {
            return Err(Error::InvalidLattice(format!("mesh size {h} must lie in (0, 1)")));
        }
        Ok(Self {
            h,
            seed,
            jitter: Self::DEFAULT_JITTER,
        })
    }

    /// Jitter fractions at or above one half would let neighbouring grid
    /// points swap places.
    pub fn with_jitter(self, jitter: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&jitter) {
            return Err(Error::InvalidLattice(format!("jitter {jitter} must lie in [0, 0.5)")));
        }
        Ok(Self { jitter, ..self })
    }
}

/// `n1` rows by `n2` columns of interior sites with 4-neighbour edges,
/// surrounded by a ring of degree-one boundary sites (corners omitted).
///
/// Site `(r, c)` has id `r * n2 + c` and sits at
/// `(c - (n2 - 1) / 2, r - (n1 - 1) / 2)`, so row 0 is the bottom row.
/// Boundary ids run counterclockwise from the bottom-left.
pub fn build_square_lattice(n1: usize, n2: usize, bc: &BoundarySpec) -> Result<IsingGraph> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::InvalidLattice("lattice sides must be positive".into()));
    }
    match bc {
        BoundarySpec::SidesPm => {}
        BoundarySpec::QuadrantPm => {
            if n1 % 2 == 1 || n2 % 2 == 1 {
                return Err(Error::InvalidLattice(format!(
                    "quadrant boundary needs even sides, got {n1}x{n2}"
                )));
            }
        }
        BoundarySpec::Arcs(_) => {
            return Err(Error::InvalidLattice(
                "arc boundary conditions apply to disk triangulations only".into(),
            ))
        }
    }

    let (rows, cols) = (n1 as i64, n2 as i64);
    let x0 = (n2 as f64 - 1.0) / 2.0;
    let y0 = (n1 as f64 - 1.0) / 2.0;
    let pos = |r: i64, c: i64| Point::new(c as f64 - x0, r as f64 - y0);
    let id = |r: i64, c: i64| (r * cols + c) as VertexId;

    let interior = n1 * n2;
    let mut points: Vec<Point> = Vec::with_capacity(interior + 2 * (n1 + n2));
    for r in 0..rows {
        for c in 0..cols {
            points.push(pos(r, c));
        }
    }

    let mut edges = Vec::with_capacity(2 * interior + 2 * (n1 + n2));
    for r in 0..rows {
        for c in 0..cols - 1 {
            edges.push((id(r, c), id(r, c + 1)));
        }
    }
    for r in 0..rows - 1 {
        for c in 0..cols {
            edges.push((id(r, c), id(r + 1, c)));
        }
    }

    // (ring position, adjacent interior site, lies on a vertical side)
    let mut ring: Vec<(i64, i64, VertexId, bool)> = Vec::with_capacity(2 * (n1 + n2));
    ring.extend((0..cols).map(|c| (-1, c, id(0, c), false)));
    ring.extend((0..rows).map(|r| (r, cols, id(r, cols - 1), true)));
    ring.extend((0..cols).rev().map(|c| (rows, c, id(rows - 1, c), false)));
    ring.extend((0..rows).rev().map(|r| (r, -1, id(r, 0), true)));

    let mut spins = Vec::with_capacity(ring.len());
    for (k, &(r, c, neighbour, vertical)) in ring.iter().enumerate() {
        let p = pos(r, c);
        points.push(p);
        spins.push(match bc {
            BoundarySpec::SidesPm => {
                if vertical {
                    1
                } else {
                    -1
                }
            }
            _ => {
                if p.x * p.y > 0.0 {
                    1
                } else {
                    -1
                }
            }
        });
        edges.push((neighbour, (interior + k) as VertexId));
    }

    IsingGraph::new(interior, spins, edges, Some(points))
}

/// Quasi-uniform Delaunay triangulation of the unit disk.
///
/// Boundary sites are `ceil(2pi/h)` equally spaced points on the circle at
/// angles `(k + 1/2) 2pi / N`; interior sites form a square grid of spacing
/// `h` anchored at the origin, each point moved by uniform jitter up to
/// `params.jitter * h` per coordinate and kept if its radius is `< 1 - h/2`.
/// Edges between two boundary sites are dropped.
pub fn build_disk_triangulation(params: &MeshParams, bc: &BoundarySpec) -> Result<IsingGraph> {
    let h = params.h;
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::InvalidLattice(format!("mesh size {h} must lie in (0, 1)")));
    }
    if matches!(bc, BoundarySpec::SidesPm) {
        return Err(Error::InvalidLattice(
            "disk triangulations take quadrant or arc boundary conditions".into(),
        ));
    }

    let mut rng = RngStream::new(params.seed, 0);
    let jitter = params.jitter * h;
    let reach = (1.0 / h).ceil() as i64;
    let limit = 1.0 - h / 2.0;
    let mut points = Vec::new();
    for gy in -reach..=reach {
        for gx in -reach..=reach {
            let dx = (2.0 * rng.uniform() - 1.0) * jitter;
            let dy = (2.0 * rng.uniform() - 1.0) * jitter;
            let p = Point::new(gx as f64 * h + dx, gy as f64 * h + dy);
            if p.l2() < limit {
                points.push(p);
            }
        }
    }
    let interior = points.len();
    if interior == 0 {
        return Err(Error::InvalidLattice(format!(
            "mesh size {h} leaves no interior points"
        )));
    }

    let ring = (TAU / h).ceil() as usize;
    let mut spins = Vec::with_capacity(ring);
    for k in 0..ring {
        let theta = (k as f64 + 0.5) * TAU / ring as f64;
        points.push(Point::new(theta.cos(), theta.sin()));
        spins.push(bc.spin_at_angle(theta));
    }

    let coords: Vec<delaunator::Point> = points
        .iter()
        .map(|p| delaunator::Point { x: p.x, y: p.y })
        .collect();
    let tri = triangulate(&coords);
    if tri.triangles.is_empty() {
        return Err(Error::InvalidLattice("triangulation is empty".into()));
    }
    let next = |e: usize| if e % 3 == 2 { e - 2 } else { e + 1 };
    let mut edges: Vec<(VertexId, VertexId)> = (0..tri.triangles.len())
        .filter(|&e| tri.halfedges[e] == EMPTY || e < tri.halfedges[e])
        .map(|e| {
            let a = tri.triangles[e] as VertexId;
            let b = tri.triangles[next(e)] as VertexId;
            (a.min(b), a.max(b))
        })
        .filter(|&(u, _)| (u as usize) < interior)
        .collect();
    edges.sort_unstable();

    IsingGraph::new(interior, spins, edges, Some(points))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactSymmetry {
    Diagonal,
    XAxis,
    YAxis,
}

impl ExactSymmetry {
    pub fn geometric(self) -> GeometricInvolution {
        match self {
            ExactSymmetry::Diagonal => GeometricInvolution::diagonal(),
            ExactSymmetry::XAxis => GeometricInvolution::x_axis(),
            ExactSymmetry::YAxis => GeometricInvolution::y_axis(),
        }
    }
}

/// The graph involution induced by an exact reflection symmetry of a
/// square lattice, checked against all three involution axioms.
pub fn exact_involution_for(g: &IsingGraph, kind: ExactSymmetry) -> Result<GraphInvolution> {
    let m = GraphInvolution::from_exact_symmetry(g, &kind.geometric())?;
    validate_involution(g, &m).map_err(|violations| {
        let list: Vec<String> = violations.iter().map(ToString::to_string).collect();
        Error::InvalidInvolution(format!("{kind:?} is not a symmetry: {}", list.join("; ")))
    })?;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::union_find::UnionFind;

    fn degrees(g: &IsingGraph) -> Vec<usize> {
        let mut d = vec![0; g.vertex_count()];
        for &(u, v) in g.edges() {
            d[u as usize] += 1;
            d[v as usize] += 1;
        }
        d
    }

    #[test]
    fn one_by_one() {
        let g = build_square_lattice(1, 1, &BoundarySpec::SidesPm).unwrap();
        assert_eq!(g.interior_count(), 1);
        assert_eq!(g.boundary_count(), 4);
        assert_eq!(g.interior_edges().count(), 0);
        assert_eq!(g.boundary_edges().count(), 4);
        let plus = g.boundary_spins().iter().filter(|&&f| f == 1).count();
        assert_eq!(plus, 2);
    }

    #[test]
    fn three_by_three_counts_by_enumeration() {
        let g = build_square_lattice(3, 3, &BoundarySpec::SidesPm).unwrap();
        let pts = g.embedding().unwrap();
        // Count unit-distance interior pairs directly from coordinates.
        let mut unit_pairs = 0;
        for a in 0..9 {
            for b in a + 1..9 {
                let (p, q) = (pts[a], pts[b]);
                if ((p.x - q.x).abs() + (p.y - q.y).abs() - 1.0).abs() < 1e-12 {
                    unit_pairs += 1;
                }
            }
        }
        assert_eq!(unit_pairs, 12);
        assert_eq!(g.interior_edges().count(), 12);
        assert_eq!(g.boundary_count(), 12);
        assert_eq!(g.boundary_edges().count(), 12);
        assert!(degrees(&g)[9..].iter().all(|&d| d == 1));
    }

    #[test]
    fn counts_for_general_rectangles() {
        for (n1, n2) in [(1, 3), (2, 2), (5, 4), (20, 20), (100, 99)] {
            let g = build_square_lattice(n1, n2, &BoundarySpec::SidesPm).unwrap();
            assert_eq!(g.interior_edges().count(), n1 * (n2 - 1) + n2 * (n1 - 1));
            assert_eq!(g.boundary_count(), 2 * n1 + 2 * n2);
        }
        let g = build_square_lattice(20, 20, &BoundarySpec::SidesPm).unwrap();
        assert_eq!((g.interior_count(), g.boundary_count()), (400, 80));
    }

    #[test]
    fn sides_pm_spins_by_side() {
        let g = build_square_lattice(4, 6, &BoundarySpec::SidesPm).unwrap();
        let pts = g.embedding().unwrap();
        for (k, &f) in g.boundary_spins().iter().enumerate() {
            let p = pts[g.interior_count() + k];
            let vertical = p.x.abs() > 2.5;
            assert_eq!(f, if vertical { 1 } else { -1 });
        }
    }

    #[test]
    fn quadrant_requires_even_sides() {
        assert!(build_square_lattice(3, 4, &BoundarySpec::QuadrantPm).is_err());
        assert!(build_square_lattice(4, 4, &BoundarySpec::QuadrantPm).is_ok());
        let arcs = BoundarySpec::arcs(vec![(0.0, 1.0)]).unwrap();
        assert!(build_square_lattice(4, 4, &arcs).is_err());
    }

    #[test]
    fn exact_involutions() {
        let g = build_square_lattice(3, 3, &BoundarySpec::SidesPm).unwrap();
        let m = exact_involution_for(&g, ExactSymmetry::Diagonal).unwrap();
        for r in 0..3u32 {
            for c in 0..3u32 {
                assert_eq!(m.apply(r * 3 + c), c * 3 + r);
            }
        }
        let q = build_square_lattice(4, 4, &BoundarySpec::QuadrantPm).unwrap();
        assert!(exact_involution_for(&q, ExactSymmetry::XAxis).is_ok());
        assert!(exact_involution_for(&q, ExactSymmetry::YAxis).is_ok());
        assert!(exact_involution_for(&q, ExactSymmetry::Diagonal).is_err());

        let rect = build_square_lattice(3, 2, &BoundarySpec::SidesPm).unwrap();
        assert!(exact_involution_for(&rect, ExactSymmetry::Diagonal).is_err());
        assert!(exact_involution_for(&g, ExactSymmetry::XAxis).is_err());
    }

    #[test]
    fn arc_validation() {
        assert!(BoundarySpec::arcs(vec![]).is_err());
        assert!(BoundarySpec::arcs(vec![(0.0, TAU)]).is_err());
        assert!(BoundarySpec::arcs(vec![(0.0, 2.0), (1.0, 3.0)]).is_err());
        assert!(BoundarySpec::arcs(vec![(2.0, 1.0)]).is_err());
        assert!(BoundarySpec::arcs(vec![(0.0, 7.0)]).is_err());
        assert!(BoundarySpec::arcs(vec![(0.0, PI / 3.0), (PI, 5.0 * PI / 3.0)]).is_ok());
    }

    #[test]
    fn boundary_spin_by_angle() {
        let q = BoundarySpec::QuadrantPm;
        assert_eq!(q.spin_at_angle(PI / 4.0), 1);
        assert_eq!(q.spin_at_angle(3.0 * PI / 4.0), -1);
        assert_eq!(q.spin_at_angle(5.0 * PI / 4.0), 1);
        assert_eq!(q.spin_at_angle(-PI / 4.0), -1);
        let arcs = BoundarySpec::arcs(vec![(0.0, PI / 3.0), (PI, 5.0 * PI / 3.0)]).unwrap();
        assert_eq!(arcs.spin_at_angle(PI / 6.0), 1);
        assert_eq!(arcs.spin_at_angle(PI / 2.0), -1);
        assert_eq!(arcs.spin_at_angle(4.0 * PI / 3.0), 1);
        assert_eq!(arcs.spin_at_angle(11.0 * PI / 6.0), -1);
    }

    fn nearest_boundary(g: &IsingGraph, theta: f64) -> i8 {
        let pts = g.embedding().unwrap();
        let target = Point::new(theta.cos(), theta.sin());
        let n = g.interior_count();
        let k = (0..g.boundary_count())
            .min_by(|&a, &b| {
                let da = (pts[n + a].x - target.x).hypot(pts[n + a].y - target.y);
                let db = (pts[n + b].x - target.x).hypot(pts[n + b].y - target.y);
                da.total_cmp(&db)
            })
            .unwrap();
        g.boundary_spins()[k]
    }

    #[test]
    fn disk_at_h_one_tenth() {
        let params = MeshParams::new(0.1, 1).unwrap();
        let g = build_disk_triangulation(&params, &BoundarySpec::QuadrantPm).unwrap();
        assert!((300..=400).contains(&g.vertex_count()), "{}", g.vertex_count());
        assert_eq!(g.boundary_count(), 63);
        assert_eq!(nearest_boundary(&g, PI / 4.0), 1);
        assert_eq!(nearest_boundary(&g, 3.0 * PI / 4.0), -1);

        let arcs = BoundarySpec::arcs(vec![(0.0, PI / 3.0), (PI, 5.0 * PI / 3.0)]).unwrap();
        let g = build_disk_triangulation(&params, &arcs).unwrap();
        assert_eq!(nearest_boundary(&g, PI / 6.0), 1);
        assert_eq!(nearest_boundary(&g, PI / 2.0), -1);
    }

    #[test]
    fn disk_is_deterministic() {
        let params = MeshParams::new(0.1, 7).unwrap();
        let a = build_disk_triangulation(&params, &BoundarySpec::QuadrantPm).unwrap();
        let b = build_disk_triangulation(&params, &BoundarySpec::QuadrantPm).unwrap();
        assert_eq!(a, b);
        let c = build_disk_triangulation(&MeshParams::new(0.1, 8).unwrap(), &BoundarySpec::QuadrantPm)
            .unwrap();
        assert_ne!(a.embedding(), c.embedding());
    }

    #[test]
    fn disk_graph_properties() {
        for (h, seed) in [(0.1, 1), (0.07, 2), (0.05, 3)] {
            let g = build_disk_triangulation(&MeshParams::new(h, seed).unwrap(), &BoundarySpec::QuadrantPm)
                .unwrap();
            let n = g.interior_count();
            let deg = degrees(&g);
            assert!(deg[..n].iter().all(|&d| d >= 2));
            assert!(deg[n..].iter().all(|&d| d >= 1));
            assert!(g.edges().iter().all(|&(u, _)| (u as usize) < n));
            let mut uf = UnionFind::new(g.vertex_count());
            for &(u, v) in g.edges() {
                uf.union(u, v);
            }
            let root = uf.find(0);
            assert!((0..g.vertex_count() as u32).all(|v| uf.find(v) == root));
            // Planar triangulation: E <= 3V - 6 including the dropped ring edges.
            assert!(g.edge_count() + g.boundary_count() <= 3 * g.vertex_count() - 6);
            // Quasi-uniform: no edge much longer than the mesh size.
            let pts = g.embedding().unwrap();
            for &(u, v) in g.edges() {
                let (p, q) = (pts[u as usize], pts[v as usize]);
                assert!((p.x - q.x).hypot(p.y - q.y) < 3.0 * h);
            }
        }
    }

    #[test]
    fn disk_rejects_bad_params() {
        assert!(MeshParams::new(0.0, 1).is_err());
        assert!(MeshParams::new(1.0, 1).is_err());
        assert!(MeshParams::new(0.1, 1).unwrap().with_jitter(0.5).is_err());
        assert!(MeshParams::new(0.1, 1).unwrap().with_jitter(-0.1).is_err());
        assert!(MeshParams::new(0.1, 1).unwrap().with_jitter(0.0).is_ok());
        let coarse = MeshParams::new(0.99, 1).unwrap();
        let g = build_disk_triangulation(&coarse, &BoundarySpec::QuadrantPm).unwrap();
        assert!(g.interior_count() >= 1);
        assert!(build_disk_triangulation(&MeshParams::new(0.1, 1).unwrap(), &BoundarySpec::SidesPm).is_err());
    }
}
