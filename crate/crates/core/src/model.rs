//! Ising graphs with fixed boundary spins and their Gibbs weight.
//!
//! Vertex ids are dense: interior vertices occupy `0..interior_count` and
//! boundary vertices follow at `interior_count..vertex_count`. Every edge is
//! stored as `(u, v)` with `u < v`, so `u` is always interior.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::symmetry::GraphInvolution;

pub type VertexId = u32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn linf(self) -> f64 {
        self.x.abs().max(self.y.abs())
    }

    pub fn l2(self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// An Ising model on a graph with mixed boundary conditions.
///
/// Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingGraph {
    interior_count: usize,
    boundary_spins: Vec<i8>,
    edges: Vec<(VertexId, VertexId)>,
    embedding: Option<Vec<Point>>,
}

impl IsingGraph {
    pub fn new(
        interior_count: usize,
        boundary_spins: Vec<i8>,
        edges: Vec<(VertexId, VertexId)>,
        embedding: Option<Vec<Point>>,
    ) -> Result<Self> {
        let vertex_count = interior_count + boundary_spins.len();
        if vertex_count > u32::MAX as usize {
            return Err(Error::InvalidGraph("too many vertices".into()));
        }
        if let Some(&f) = boundary_spins.iter().find(|&&f| f != 1 && f != -1) {
            return Err(Error::InvalidSpin(f as i64));
        }

        let mut seen = HashSet::with_capacity(edges.len());
        let mut normalized = Vec::with_capacity(edges.len());
        for &(a, b) in &edges {
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if v as usize >= vertex_count {
                return Err(Error::InvalidGraph(format!(
                    "edge {a}-{b} references a vertex outside 0..{vertex_count}"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {u}")));
            }
            if u as usize >= interior_count {
                return Err(Error::InvalidGraph(format!(
                    "edge {u}-{v} joins two boundary vertices"
                )));
            }
            if !seen.insert((u, v)) {
                return Err(Error::InvalidGraph(format!("duplicate edge {u}-{v}")));
            }
            normalized.push((u, v));
        }

        if let Some(points) = &embedding {
            if points.len() != vertex_count {
                return Err(Error::InvalidGraph(format!(
                    "embedding has {} points for {vertex_count} vertices",
                    points.len()
                )));
            }
            if points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
                return Err(Error::InvalidGraph("non-finite embedding coordinate".into()));
            }
        }

        Ok(Self {
            interior_count,
            boundary_spins,
            edges: normalized,
            embedding,
        })
    }

    pub fn interior_count(&self) -> usize {
        self.interior_count
    }

    pub fn boundary_count(&self) -> usize {
        self.boundary_spins.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.interior_count + self.boundary_spins.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn is_interior(&self, v: VertexId) -> bool {
        (v as usize) < self.interior_count
    }

    pub fn interior_edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.edges.iter().copied().filter(|&(_, v)| self.is_interior(v))
    }

    pub fn boundary_edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.edges.iter().copied().filter(|&(_, v)| !self.is_interior(v))
    }

    /// Boundary spins `f_b`, indexed by `b - interior_count`.
    pub fn boundary_spins(&self) -> &[i8] {
        &self.boundary_spins
    }

    /// Boundary spin of vertex `b`; `None` for interior vertices.
    pub fn boundary_spin(&self, b: VertexId) -> Option<i8> {
        (b as usize)
            .checked_sub(self.interior_count)
            .and_then(|k| self.boundary_spins.get(k).copied())
    }

    pub fn embedding(&self) -> Option<&[Point]> {
        self.embedding.as_deref()
    }

    pub fn position(&self, v: VertexId) -> Option<Point> {
        self.embedding.as_ref().map(|p| p[v as usize])
    }

    /// Spins of all vertices: `s` on the interior followed by `f` on the boundary.
    pub fn full_spins(&self, s: &SpinConfig) -> Result<Vec<i8>> {
        self.check_spins(s)?;
        let mut out = Vec::with_capacity(self.vertex_count());
        out.extend_from_slice(s.as_slice());
        out.extend_from_slice(&self.boundary_spins);
        Ok(out)
    }

    pub fn check_spins(&self, s: &SpinConfig) -> Result<()> {
        if s.len() != self.interior_count {
            return Err(Error::SpinLengthMismatch {
                expected: self.interior_count,
                got: s.len(),
            });
        }
        Ok(())
    }
}

/// Interior spin assignment, one `±1` per interior vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinConfig(Vec<i8>);

impl SpinConfig {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(&v) = spins.iter().find(|&&v| v != 1 && v != -1) {
            return Err(Error::InvalidSpin(v as i64));
        }
        Ok(Self(spins))
    }

    pub fn uniform(len: usize, spin: i8) -> Self {
        assert!(spin == 1 || spin == -1, "spin must be +1 or -1");
        Self(vec![spin; len])
    }

    /// Decodes a bit-pattern state: bit `i` set means `s_i = +1`.
    pub fn from_bits(bits: u64, len: usize) -> Self {
        Self((0..len).map(|i| if bits >> i & 1 == 1 { 1 } else { -1 }).collect())
    }

    pub fn to_bits(&self) -> u64 {
        debug_assert!(self.0.len() <= 64);
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &v)| v == 1)
            .fold(0, |acc, (i, _)| acc | 1 << i)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<i8> {
        self.0
    }

    pub fn sum(&self) -> i64 {
        self.0.iter().map(|&v| v as i64).sum()
    }

    pub(crate) fn from_vec_unchecked(spins: Vec<i8>) -> Self {
        debug_assert!(spins.iter().all(|&v| v == 1 || v == -1));
        Self(spins)
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [i8] {
        &mut self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct InverseTemperature(f64);

impl InverseTemperature {
    pub fn new(beta: f64) -> Result<Self> {
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::InvalidBeta(beta));
        }
        Ok(Self(beta))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `1 - exp(-2β)`, the probability of occupying an aligned edge.
    pub fn bond_probability(self) -> f64 {
        -(-2.0 * self.0).exp_m1()
    }
}

/// `H(s) = Σ_{ij} s_i s_j + Σ_{ib} s_i f_b`; the log Gibbs weight is `β·H(s)`.
pub fn alignment_sum(g: &IsingGraph, s: &SpinConfig) -> Result<i64> {
    g.check_spins(s)?;
    Ok(alignment_sum_unchecked(g, s.as_slice()))
}

pub(crate) fn alignment_sum_unchecked(g: &IsingGraph, s: &[i8]) -> i64 {
    let n = g.interior_count;
    g.edges
        .iter()
        .map(|&(u, v)| {
            let other = if (v as usize) < n {
                s[v as usize]
            } else {
                g.boundary_spins[v as usize - n]
            };
            (s[u as usize] * other) as i64
        })
        .sum()
}

/// `H(t) - H(s)` for the double-flip proposal `t_i = -s_{m(i)}`, computed
/// without materializing `t`. Only the interior part of `m` is used.
pub fn alignment_delta_under_flip(
    g: &IsingGraph,
    s: &SpinConfig,
    m: &GraphInvolution,
) -> Result<i64> {
    g.check_spins(s)?;
    check_interior_bijection(g, m)?;
    Ok(alignment_delta_unchecked(g, s.as_slice(), m.as_slice()))
}

pub(crate) fn check_interior_bijection(g: &IsingGraph, m: &GraphInvolution) -> Result<()> {
    let n = g.interior_count;
    let map = m.as_slice();
    if map.len() < n {
        return Err(Error::InvalidInvolution(format!(
            "map covers {} vertices, graph has {n} interior vertices",
            map.len()
        )));
    }
    let mut hit = vec![false; n];
    for (i, &j) in map[..n].iter().enumerate() {
        let j = j as usize;
        if j >= n {
            return Err(Error::InvalidInvolution(format!(
                "interior vertex {i} maps to non-interior vertex {j}"
            )));
        }
        if std::mem::replace(&mut hit[j], true) {
            return Err(Error::InvalidInvolution(format!(
                "interior vertex {j} is the image of two vertices"
            )));
        }
    }
    Ok(())
}

pub(crate) fn alignment_delta_unchecked(g: &IsingGraph, s: &[i8], m: &[VertexId]) -> i64 {
    let n = g.interior_count;
    let mut delta = 0i64;
    for &(u, v) in &g.edges {
        let (u, v) = (u as usize, v as usize);
        let tu = -s[m[u] as usize];
        let (before, after) = if v < n {
            (s[u] * s[v], tu * -s[m[v] as usize])
        } else {
            let f = g.boundary_spins[v - n];
            (s[u] * f, tu * f)
        };
        delta += (after - before) as i64;
    }
    delta
}

/// Interior mean spin `(1/|I|) Σ s_i`.
pub fn average_spin(s: &SpinConfig) -> f64 {
    if s.is_empty() {
        return 0.0;
    }
    s.sum() as f64 / s.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_vertex(boundary: Vec<i8>) -> IsingGraph {
        let edges = (0..boundary.len() as u32).map(|b| (0, b + 1)).collect();
        IsingGraph::new(1, boundary, edges, None).unwrap()
    }

    #[test]
    fn single_boundary_edge() {
        let g = single_vertex(vec![1]);
        assert_eq!(alignment_sum(&g, &SpinConfig::uniform(1, 1)).unwrap(), 1);
        assert_eq!(alignment_sum(&g, &SpinConfig::uniform(1, -1)).unwrap(), -1);
    }

    #[test]
    fn single_interior_edge() {
        let g = IsingGraph::new(2, vec![], vec![(0, 1)], None).unwrap();
        let s = SpinConfig::new(vec![1, -1]).unwrap();
        assert_eq!(alignment_sum(&g, &s).unwrap(), -1);
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let g = single_vertex(vec![1]);
        let err = alignment_sum(&g, &SpinConfig::uniform(2, 1)).unwrap_err();
        assert_eq!(err, Error::SpinLengthMismatch { expected: 1, got: 2 });
    }

    #[test]
    fn identity_flip_on_one_boundary_edge() {
        let g = single_vertex(vec![1]);
        let m = GraphInvolution::identity(2);
        let d = alignment_delta_under_flip(&g, &SpinConfig::uniform(1, 1), &m).unwrap();
        assert_eq!(d, -2);
    }

    #[test]
    fn delta_rejects_map_leaving_interior() {
        let g = IsingGraph::new(1, vec![1], vec![(0, 1)], None).unwrap();
        let m = GraphInvolution::new(vec![1, 0]).unwrap();
        assert!(matches!(
            alignment_delta_under_flip(&g, &SpinConfig::uniform(1, 1), &m),
            Err(Error::InvalidInvolution(_))
        ));
    }

    #[test]
    fn graph_invariants_enforced() {
        assert!(IsingGraph::new(2, vec![1], vec![(0, 0)], None).is_err());
        assert!(IsingGraph::new(1, vec![1, 1], vec![(1, 2)], None).is_err());
        assert!(IsingGraph::new(2, vec![], vec![(0, 1), (1, 0)], None).is_err());
        assert!(IsingGraph::new(1, vec![0], vec![], None).is_err());
        assert!(IsingGraph::new(1, vec![], vec![(0, 5)], None).is_err());
        assert!(IsingGraph::new(1, vec![], vec![], Some(vec![])).is_err());
    }

    #[test]
    fn isolated_interior_vertices_are_allowed() {
        let g = IsingGraph::new(3, vec![1], vec![(0, 3)], None).unwrap();
        let s = SpinConfig::new(vec![1, -1, 1]).unwrap();
        assert_eq!(alignment_sum(&g, &s).unwrap(), 1);
    }

    #[test]
    fn bits_round_trip() {
        let s = SpinConfig::new(vec![1, -1, -1, 1]).unwrap();
        assert_eq!(s.to_bits(), 0b1001);
        assert_eq!(SpinConfig::from_bits(0b1001, 4), s);
    }

    #[test]
    fn average_spin_values() {
        assert_eq!(average_spin(&SpinConfig::uniform(9, -1)), -1.0);
        assert_eq!(average_spin(&SpinConfig::uniform(9, 1)), 1.0);
        let mut v = vec![-1; 9];
        v[..3].fill(1);
        let s = SpinConfig::new(v).unwrap();
        assert_eq!(average_spin(&s), -1.0 / 3.0);
    }

    #[test]
    fn bond_probability_matches_formula() {
        let beta = InverseTemperature::new(0.5).unwrap();
        assert!((beta.bond_probability() - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert_eq!(InverseTemperature::new(0.0).unwrap().bond_probability(), 0.0);
        assert!(InverseTemperature::new(-0.1).is_err());
        assert!(InverseTemperature::new(f64::NAN).is_err());
    }
}
