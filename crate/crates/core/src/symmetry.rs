//! Double flip moves: vertex involutions, the greedy geometric matching that
//! builds one from a continuous symmetry, and the Metropolized flip.

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{self, InverseTemperature, IsingGraph, Point, SpinConfig, VertexId};
use crate::rng::RngStream;

/// A permutation `m` of all vertex ids with `m(m(v)) = v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphInvolution {
    map: Vec<VertexId>,
}

impl GraphInvolution {
    pub fn new(map: Vec<VertexId>) -> Result<Self> {
        for (v, &w) in map.iter().enumerate() {
            let back = map.get(w as usize).copied();
            if back != Some(v as VertexId) {
                return Err(Error::InvalidInvolution(format!(
                    "m(m({v})) != {v} (m({v}) = {w})"
                )));
            }
        }
        Ok(Self { map })
    }

    pub fn identity(len: usize) -> Self {
        Self {
            map: (0..len as VertexId).collect(),
        }
    }

    /// Derives `m` from a geometric map that is an exact symmetry of the
    /// embedding: every vertex must land exactly on another vertex.
    pub fn from_exact_symmetry(g: &IsingGraph, mu: &GeometricInvolution) -> Result<Self> {
        let points = g.embedding().ok_or(Error::MissingEmbedding)?;
        let key = |p: Point| ((p.x + 0.0).to_bits(), (p.y + 0.0).to_bits());
        let index: HashMap<_, VertexId> = points
            .iter()
            .enumerate()
            .map(|(v, &p)| (key(p), v as VertexId))
            .collect();
        let map = points
            .iter()
            .enumerate()
            .map(|(v, &p)| {
                let image = mu.apply(p);
                index.get(&key(image)).copied().ok_or_else(|| {
                    Error::InvalidInvolution(format!(
                        "{mu} maps vertex {v} at ({}, {}) to ({}, {}), which is not a vertex",
                        p.x, p.y, image.x, image.y
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(map)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn apply(&self, v: VertexId) -> VertexId {
        self.map[v as usize]
    }

    pub fn as_slice(&self) -> &[VertexId] {
        &self.map
    }
}

/// A violated involution axiom, with a witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    WrongLength { expected: usize, got: usize },
    CrossesPartition { vertex: VertexId, image: VertexId },
    EdgeNotPreserved { edge: (VertexId, VertexId), image: (VertexId, VertexId) },
    BoundarySpinNotNegated { vertex: VertexId, image: VertexId, spin: i8, image_spin: i8 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::WrongLength { expected, got } => {
                write!(f, "map has {got} entries, graph has {expected} vertices")
            }
            Violation::CrossesPartition { vertex, image } => {
                write!(f, "vertex {vertex} maps across the interior/boundary split to {image}")
            }
            Violation::EdgeNotPreserved { edge, image } => write!(
                f,
                "edge {}-{} maps to {}-{}, which is not an edge",
                edge.0, edge.1, image.0, image.1
            ),
            Violation::BoundarySpinNotNegated { vertex, image, spin, image_spin } => write!(
                f,
                "f({image}) = {image_spin:+} is not -f({vertex}) = {:+}",
                -spin
            ),
        }
    }
}

/// Checks that `m` maps interior to interior and boundary to boundary,
/// preserves edges, and negates boundary spins. Reports the first witness of
/// each violated axiom.
pub fn validate_involution(
    g: &IsingGraph,
    m: &GraphInvolution,
) -> std::result::Result<(), Vec<Violation>> {
    if m.len() != g.vertex_count() {
        return Err(vec![Violation::WrongLength {
            expected: g.vertex_count(),
            got: m.len(),
        }]);
    }
    let mut violations = Vec::new();

    if let Some(v) = (0..m.len() as VertexId).find(|&v| g.is_interior(v) != g.is_interior(m.apply(v))) {
        violations.push(Violation::CrossesPartition { vertex: v, image: m.apply(v) });
    }

    let edges: HashSet<(VertexId, VertexId)> = g.edges().iter().copied().collect();
    let broken = g.edges().iter().find_map(|&(u, v)| {
        let (a, b) = (m.apply(u), m.apply(v));
        let image = (a.min(b), a.max(b));
        (!edges.contains(&image)).then_some(Violation::EdgeNotPreserved { edge: (u, v), image })
    });
    violations.extend(broken);

    let n = g.interior_count() as VertexId;
    let unnegated = (n..g.vertex_count() as VertexId).find_map(|b| {
        let image = m.apply(b);
        let spin = g.boundary_spin(b)?;
        let image_spin = g.boundary_spin(image)?;
        (image_spin != -spin).then_some(Violation::BoundarySpinNotNegated {
            vertex: b,
            image,
            spin,
            image_spin,
        })
    });
    violations.extend(unnegated);

    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// `t_i = -s_{m(i)}`: reflect the configuration, then negate it.
///
/// `m` must map the interior ids of `s` onto themselves.
pub fn double_flip(s: &SpinConfig, m: &GraphInvolution) -> SpinConfig {
    let src = s.as_slice();
    let map = &m.as_slice()[..src.len()];
    SpinConfig::from_vec_unchecked(map.iter().map(|&j| -src[j as usize]).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvolutionKind {
    /// Reflection about the line through the origin at the given angle.
    Reflection,
    /// `x -> -x`.
    PointReflection,
}

/// A self-inverse isometry of the plane fixing the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricInvolution {
    kind: InvolutionKind,
    angle: f64,
    cos2: f64,
    sin2: f64,
}

impl GeometricInvolution {
    /// Reflection about the line through the origin at `angle` radians.
    pub fn reflection(angle: f64) -> Self {
        let snap = |v: f64| if (v - v.round()).abs() < 1e-12 { v.round() + 0.0 } else { v };
        Self {
            kind: InvolutionKind::Reflection,
            angle,
            cos2: snap((2.0 * angle).cos()),
            sin2: snap((2.0 * angle).sin()),
        }
    }

    /// `(x, y) -> (x, -y)`.
    pub fn x_axis() -> Self {
        Self::reflection(0.0)
    }

    /// `(x, y) -> (-x, y)`.
    pub fn y_axis() -> Self {
        Self::reflection(std::f64::consts::FRAC_PI_2)
    }

    /// `(x, y) -> (y, x)`.
    pub fn diagonal() -> Self {
        Self::reflection(std::f64::consts::FRAC_PI_4)
    }

    pub fn point_reflection() -> Self {
        Self {
            kind: InvolutionKind::PointReflection,
            angle: 0.0,
            cos2: -1.0,
            sin2: 0.0,
        }
    }

    pub fn kind(&self) -> InvolutionKind {
        self.kind
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    #[inline]
    pub fn apply(&self, p: Point) -> Point {
        match self.kind {
            InvolutionKind::Reflection => Point::new(
                self.cos2 * p.x + self.sin2 * p.y,
                self.sin2 * p.x - self.cos2 * p.y,
            ),
            InvolutionKind::PointReflection => Point::new(-p.x, -p.y),
        }
    }
}

impl fmt::Display for GeometricInvolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            InvolutionKind::Reflection => {
                write!(f, "reflection at {} deg", self.angle.to_degrees())
            }
            InvolutionKind::PointReflection => write!(f, "point reflection"),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Norm {
    L2,
    #[default]
    Linf,
}

impl Norm {
    #[inline]
    pub fn of(self, p: Point) -> f64 {
        match self {
            Norm::L2 => p.l2(),
            Norm::Linf => p.linf(),
        }
    }

    #[inline]
    pub fn distance(self, a: Point, b: Point) -> f64 {
        self.of(Point::new(a.x - b.x, a.y - b.y))
    }
}

/// Greedy outside-in pairing of `points` with their images under `mu`.
///
/// Points are scanned by decreasing norm (ties by ascending index); each
/// unpaired `j` is paired with the unpaired `i` whose image `mu(x_i)` is
/// closest to `x_j` (ties by ascending index). `i == j` is allowed. The
/// returned map is an involution on `0..points.len()`.
pub fn greedy_involution(points: &[Point], mu: &GeometricInvolution, norm: Norm) -> Vec<usize> {
    let n = points.len();
    let images: Vec<Point> = points.iter().map(|&p| mu.apply(p)).collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        norm.of(points[b])
            .total_cmp(&norm.of(points[a]))
            .then(a.cmp(&b))
    });

    const UNPAIRED: usize = usize::MAX;
    let mut pair = vec![UNPAIRED; n];
    // Unpaired ids, with each id's slot in `alive` for O(1) removal.
    let mut alive: Vec<usize> = (0..n).collect();
    let mut slot: Vec<usize> = (0..n).collect();
    let remove = |alive: &mut Vec<usize>, slot: &mut Vec<usize>, id: usize| {
        let k = slot[id];
        alive.swap_remove(k);
        if let Some(&moved) = alive.get(k) {
            slot[moved] = k;
        }
    };

    for &j in &order {
        if pair[j] != UNPAIRED {
            continue;
        }
        let target = points[j];
        let mut best = (f64::INFINITY, usize::MAX);
        for &i in &alive {
            let d = norm.distance(images[i], target);
            if d < best.0 || (d == best.0 && i < best.1) {
                best = (d, i);
            }
        }
        let i = best.1;
        pair[i] = j;
        pair[j] = i;
        remove(&mut alive, &mut slot, j);
        if i != j {
            remove(&mut alive, &mut slot, i);
        }
    }
    pair
}

/// Interior pairing built from a geometric symmetry, with its per-vertex
/// displacement `‖mu(x_i) - x_{m(i)}‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchingReport {
    pub pairs: Vec<VertexId>,
    pub images: Vec<Point>,
    pub displacement: Vec<f64>,
    pub max_displacement: f64,
    pub mean_displacement: f64,
    pub norm: Norm,
}

impl MatchingReport {
    /// The pairing as a full-vertex involution; boundary vertices are fixed.
    pub fn involution(&self, vertex_count: usize) -> GraphInvolution {
        let mut map: Vec<VertexId> = (0..vertex_count as VertexId).collect();
        map[..self.pairs.len()].copy_from_slice(&self.pairs);
        GraphInvolution { map }
    }
}

pub fn build_matching(
    g: &IsingGraph,
    mu: &GeometricInvolution,
    norm: Norm,
) -> Result<MatchingReport> {
    let points = g.embedding().ok_or(Error::MissingEmbedding)?;
    let interior = &points[..g.interior_count()];
    let pairs = greedy_involution(interior, mu, norm);
    let images: Vec<Point> = interior.iter().map(|&p| mu.apply(p)).collect();
    let displacement: Vec<f64> = pairs
        .iter()
        .enumerate()
        .map(|(i, &j)| norm.distance(images[i], interior[j]))
        .collect();
    let max_displacement = displacement.iter().copied().fold(0.0, f64::max);
    let mean_displacement = if displacement.is_empty() {
        0.0
    } else {
        displacement.iter().sum::<f64>() / displacement.len() as f64
    };
    Ok(MatchingReport {
        pairs: pairs.into_iter().map(|j| j as VertexId).collect(),
        images,
        displacement,
        max_displacement,
        mean_displacement,
        norm,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlipOutcome {
    pub proposed: SpinConfig,
    pub accepted: bool,
    pub acceptance_prob: f64,
    /// `H(t) - H(s)`.
    pub delta: i64,
}

/// Metropolis acceptance probability `min(1, exp(β·ΔH))`.
#[inline]
pub fn acceptance_probability(beta: InverseTemperature, delta: i64) -> f64 {
    if delta >= 0 {
        1.0
    } else {
        (beta.value() * delta as f64).exp()
    }
}

/// Proposes `t_i = -s_{m(i)}` and accepts it with probability
/// `min(1, p(t)/p(s))`, using one uniform draw.
pub fn metropolized_double_flip(
    g: &IsingGraph,
    s: &SpinConfig,
    m: &GraphInvolution,
    beta: InverseTemperature,
    rng: &mut RngStream,
) -> Result<FlipOutcome> {
    let delta = model::alignment_delta_under_flip(g, s, m)?;
    let acceptance_prob = acceptance_probability(beta, delta);
    let u = rng.uniform();
    Ok(FlipOutcome {
        proposed: double_flip(s, m),
        accepted: u <= acceptance_prob,
        acceptance_prob,
        delta,
    })
}
