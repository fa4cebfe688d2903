//! Boundary-aware Swendsen-Wang update.
//!
//! One step: occupy each aligned edge with probability `1 - exp(-2β)`, take
//! connected components over occupied edges (boundary vertices included),
//! pin every component that touches the boundary to its boundary spin, and
//! give every other component one fair `±1`.
//!
//! Random draws are consumed in a fixed order: one uniform per aligned edge
//! in edge-id order, then one coin per unpinned component in order of its
//! smallest interior vertex. [`SwendsenWang::step`] and [`sw_step`] follow
//! the same order and produce identical trajectories.

use crate::error::{Error, Result};
use crate::model::{InverseTemperature, IsingGraph, SpinConfig, VertexId};
use crate::rng::RngStream;
use crate::union_find::UnionFind;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeConfig(Vec<bool>);

impl EdgeConfig {
    pub fn new(occupied: Vec<bool>) -> Self {
        Self(occupied)
    }

    pub fn empty(edge_count: usize) -> Self {
        Self(vec![false; edge_count])
    }

    /// Decodes a bit-pattern state: bit `e` set means edge `e` is occupied.
    pub fn from_bits(bits: u64, edge_count: usize) -> Self {
        Self((0..edge_count).map(|e| bits >> e & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_occupied(&self, edge: usize) -> bool {
        self.0[edge]
    }

    pub fn occupied_count(&self) -> usize {
        self.0.iter().filter(|&&w| w).count()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentDecomposition {
    /// Component id of each interior vertex. Ids are dense and ordered by
    /// the smallest interior vertex in each component.
    pub component_of: Vec<u32>,
    /// Boundary spin a component is pinned to, or `None` if it touches no
    /// boundary vertex.
    pub pinned: Vec<Option<i8>>,
    /// Number of unpinned components.
    pub interior_only_count: usize,
}

pub fn sample_edge_config(
    g: &IsingGraph,
    s: &SpinConfig,
    beta: InverseTemperature,
    rng: &mut RngStream,
) -> Result<EdgeConfig> {
    let full = g.full_spins(s)?;
    let p = beta.bond_probability();
    let occupied = g
        .edges()
        .iter()
        .map(|&(u, v)| full[u as usize] == full[v as usize] && rng.bernoulli(p))
        .collect();
    Ok(EdgeConfig(occupied))
}

pub fn decompose(g: &IsingGraph, w: &EdgeConfig) -> Result<ComponentDecomposition> {
    if w.len() != g.edge_count() {
        return Err(Error::EdgeLengthMismatch {
            expected: g.edge_count(),
            got: w.len(),
        });
    }
    let mut uf = UnionFind::new(g.vertex_count());
    for (&(u, v), &occ) in g.edges().iter().zip(w.as_slice()) {
        if occ {
            uf.union(u, v);
        }
    }

    let n = g.interior_count();
    // Per root: (pinned spin, the boundary vertex that pinned it).
    let mut pin: Vec<Option<(i8, VertexId)>> = vec![None; g.vertex_count()];
    for (k, &f) in g.boundary_spins().iter().enumerate() {
        let b = (n + k) as VertexId;
        let root = uf.find(b) as usize;
        match pin[root] {
            None => pin[root] = Some((f, b)),
            Some((other, first)) if other != f => {
                return Err(Error::ConflictingBoundary {
                    first,
                    first_spin: other,
                    second: b,
                    second_spin: f,
                })
            }
            Some(_) => {}
        }
    }

    let mut id_of_root = vec![u32::MAX; g.vertex_count()];
    let mut component_of = Vec::with_capacity(n);
    let mut pinned = Vec::new();
    for i in 0..n as VertexId {
        let root = uf.find(i) as usize;
        if id_of_root[root] == u32::MAX {
            id_of_root[root] = pinned.len() as u32;
            pinned.push(pin[root].map(|(f, _)| f));
        }
        component_of.push(id_of_root[root]);
    }
    let interior_only_count = pinned.iter().filter(|p| p.is_none()).count();
    Ok(ComponentDecomposition {
        component_of,
        pinned,
        interior_only_count,
    })
}

pub fn assign_spins(decomp: &ComponentDecomposition, rng: &mut RngStream) -> SpinConfig {
    let spins: Vec<i8> = decomp
        .pinned
        .iter()
        .map(|p| p.unwrap_or_else(|| rng.spin()))
        .collect();
    SpinConfig::from_vec_unchecked(
        decomp
            .component_of
            .iter()
            .map(|&c| spins[c as usize])
            .collect(),
    )
}

/// One Swendsen-Wang update, built from the three stages above.
pub fn sw_step(
    g: &IsingGraph,
    s: &SpinConfig,
    beta: InverseTemperature,
    rng: &mut RngStream,
) -> Result<SpinConfig> {
    let w = sample_edge_config(g, s, beta, rng)?;
    let decomp = decompose(g, &w)?;
    Ok(assign_spins(&decomp, rng))
}

/// Reusable Swendsen-Wang sampler for one graph and temperature.
///
/// Holds all scratch buffers, so a step performs no allocation.
#[derive(Debug, Clone)]
pub struct SwendsenWang<'g> {
    graph: &'g IsingGraph,
    beta: InverseTemperature,
    bond_probability: f64,
    full: Vec<i8>,
    label: Vec<i8>,
    occupied: Vec<bool>,
    uf: UnionFind,
}

impl<'g> SwendsenWang<'g> {
    pub fn new(graph: &'g IsingGraph, beta: InverseTemperature) -> Self {
        let n = graph.interior_count();
        let mut full = vec![0i8; graph.vertex_count()];
        full[n..].copy_from_slice(graph.boundary_spins());
        Self {
            graph,
            beta,
            bond_probability: beta.bond_probability(),
            full,
            label: vec![0; graph.vertex_count()],
            occupied: vec![false; graph.edge_count()],
            uf: UnionFind::new(graph.vertex_count()),
        }
    }

    pub fn beta(&self) -> InverseTemperature {
        self.beta
    }

    /// Edge occupation drawn by the most recent step.
    pub fn last_edge_config(&self) -> &[bool] {
        &self.occupied
    }

    /// Replaces `s` with the next Swendsen-Wang state.
    pub fn step(&mut self, s: &mut SpinConfig, rng: &mut RngStream) -> Result<()> {
        self.graph.check_spins(s)?;
        let g = self.graph;
        let n = g.interior_count();
        let spins = s.as_mut_slice();
        self.full[..n].copy_from_slice(spins);

        self.uf.reset(g.vertex_count());
        let p = self.bond_probability;
        for (occ, &(u, v)) in self.occupied.iter_mut().zip(g.edges()) {
            *occ = self.full[u as usize] == self.full[v as usize] && rng.bernoulli(p);
            if *occ {
                self.uf.union(u, v);
            }
        }

        self.label.fill(0);
        for (k, &f) in g.boundary_spins().iter().enumerate() {
            let b = (n + k) as VertexId;
            let root = self.uf.find(b) as usize;
            match self.label[root] {
                0 => self.label[root] = f,
                other if other != f => {
                    // Unreachable from a valid spin state: occupied edges are aligned.
                    let first = (n..g.vertex_count())
                        .find(|&x| self.uf.find(x as VertexId) as usize == root)
                        .unwrap_or(b as usize) as VertexId;
                    return Err(Error::ConflictingBoundary {
                        first,
                        first_spin: other,
                        second: b,
                        second_spin: f,
                    });
                }
                _ => {}
            }
        }

        for (i, spin) in spins.iter_mut().enumerate() {
            let root = self.uf.find(i as VertexId) as usize;
            if self.label[root] == 0 {
                self.label[root] = rng.spin();
            }
            *spin = self.label[root];
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattices::{build_square_lattice, BoundarySpec};

    fn beta(b: f64) -> InverseTemperature {
        InverseTemperature::new(b).unwrap()
    }

    fn random_spins(n: usize, rng: &mut RngStream) -> SpinConfig {
        SpinConfig::new((0..n).map(|_| rng.spin()).collect()).unwrap()
    }

    #[test]
    fn misaligned_edges_never_occupied() {
        let g = build_square_lattice(6, 5, &BoundarySpec::SidesPm).unwrap();
        let mut rng = RngStream::new(3, 0);
        for _ in 0..200 {
            let s = random_spins(g.interior_count(), &mut rng);
            let full = g.full_spins(&s).unwrap();
            let w = sample_edge_config(&g, &s, beta(2.0), &mut rng).unwrap();
            for (e, &(u, v)) in g.edges().iter().enumerate() {
                if full[u as usize] != full[v as usize] {
                    assert!(!w.is_occupied(e));
                }
            }
        }
    }

    #[test]
    fn zero_beta_occupies_nothing() {
        let g = build_square_lattice(4, 4, &BoundarySpec::SidesPm).unwrap();
        let mut rng = RngStream::new(1, 0);
        let s = SpinConfig::uniform(16, 1);
        let w = sample_edge_config(&g, &s, beta(0.0), &mut rng).unwrap();
        assert_eq!(w.occupied_count(), 0);
    }

    #[test]
    fn aligned_edge_frequency() {
        let g = IsingGraph::new(2, vec![], vec![(0, 1)], None).unwrap();
        let s = SpinConfig::uniform(2, 1);
        let mut rng = RngStream::new(17, 0);
        let trials = 100_000;
        let hits = (0..trials)
            .filter(|_| sample_edge_config(&g, &s, beta(0.5), &mut rng).unwrap().is_occupied(0))
            .count();
        let expected = 1.0 - (-1.0f64).exp();
        assert!((expected - 0.63212).abs() < 1e-5);
        assert!((hits as f64 / trials as f64 - expected).abs() < 0.005);
    }

    #[test]
    fn empty_edges_give_singletons() {
        let g = build_square_lattice(3, 3, &BoundarySpec::SidesPm).unwrap();
        let d = decompose(&g, &EdgeConfig::empty(g.edge_count())).unwrap();
        assert_eq!(d.interior_only_count, 9);
        assert_eq!(d.component_of, (0..9).collect::<Vec<u32>>());
    }

    #[test]
    fn fully_connected_plus() {
        // 2x2 interior with every boundary site at +1.
        let base = build_square_lattice(2, 2, &BoundarySpec::SidesPm).unwrap();
        let g = IsingGraph::new(4, vec![1; 8], base.edges().to_vec(), None).unwrap();
        let d = decompose(&g, &EdgeConfig::new(vec![true; g.edge_count()])).unwrap();
        assert_eq!(d.pinned, vec![Some(1)]);
        assert_eq!(d.interior_only_count, 0);
        let mut a = RngStream::new(1, 0);
        let mut b = RngStream::new(2, 5);
        let t = assign_spins(&d, &mut a);
        assert_eq!(t, SpinConfig::uniform(4, 1));
        assert_eq!(assign_spins(&d, &mut b), t);
    }

    #[test]
    fn conflicting_boundary_detected() {
        // -1 boundary (2) -- 0 -- 1 -- +1 boundary (3)
        let g = IsingGraph::new(2, vec![-1, 1], vec![(0, 1), (0, 2), (1, 3)], None).unwrap();
        let err = decompose(&g, &EdgeConfig::new(vec![true; 3])).unwrap_err();
        assert!(matches!(err, Error::ConflictingBoundary { first: 2, second: 3, .. }));
        assert!(matches!(
            decompose(&g, &EdgeConfig::new(vec![true; 2])),
            Err(Error::EdgeLengthMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn single_unpinned_component_is_fair() {
        let g = IsingGraph::new(3, vec![], vec![(0, 1), (1, 2)], None).unwrap();
        let d = decompose(&g, &EdgeConfig::new(vec![true; 2])).unwrap();
        assert_eq!(d.interior_only_count, 1);
        let mut rng = RngStream::new(9, 0);
        let trials = 10_000;
        let mut plus = 0;
        for _ in 0..trials {
            let t = assign_spins(&d, &mut rng);
            assert!(t.as_slice().iter().all(|&x| x == t.as_slice()[0]));
            plus += usize::from(t.as_slice()[0] == 1);
        }
        assert!((plus as f64 / trials as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn zero_beta_resamples_uniformly() {
        let g = IsingGraph::new(3, vec![], vec![(0, 1), (1, 2)], None).unwrap();
        let mut rng = RngStream::new(4, 0);
        let s = SpinConfig::uniform(3, -1);
        let mut counts = [0usize; 8];
        let trials = 80_000;
        for _ in 0..trials {
            counts[sw_step(&g, &s, beta(0.0), &mut rng).unwrap().to_bits() as usize] += 1;
        }
        for c in counts {
            assert!((c as f64 / trials as f64 - 0.125).abs() < 0.005);
        }
    }

    fn single_site_frequency(boundary: Vec<i8>, b: f64, seed: u64) -> f64 {
        let edges = (1..=boundary.len() as u32).map(|v| (0, v)).collect();
        let g = IsingGraph::new(1, boundary, edges, None).unwrap();
        let mut sampler = SwendsenWang::new(&g, beta(b));
        let mut rng = RngStream::new(seed, 0);
        let mut s = SpinConfig::uniform(1, -1);
        let steps = 100_000;
        let mut plus = 0;
        for _ in 0..steps {
            sampler.step(&mut s, &mut rng).unwrap();
            plus += usize::from(s.as_slice()[0] == 1);
        }
        plus as f64 / steps as f64
    }

    #[test]
    fn single_site_stationary_marginal() {
        // One +1 neighbour: P(+1) = e^β / (e^β + e^-β).
        let exact = 0.5f64.exp() / (0.5f64.exp() + (-0.5f64).exp());
        assert!((single_site_frequency(vec![1], 0.5, 21) - exact).abs() < 0.005);
        // Two +1 neighbours double the field: e / (e + e^-1).
        let exact = 1f64.exp() / (1f64.exp() + (-1f64).exp());
        assert!((exact - 0.88080).abs() < 1e-5);
        assert!((single_site_frequency(vec![1, 1], 0.5, 22) - exact).abs() < 0.005);
        assert!((single_site_frequency(vec![1], 1.0, 23) - exact).abs() < 0.005);
    }

    #[test]
    fn sampler_matches_composed_step() {
        let g = build_square_lattice(5, 4, &BoundarySpec::SidesPm).unwrap();
        let b = beta(0.6);
        let mut sampler = SwendsenWang::new(&g, b);
        let mut r1 = RngStream::new(77, 2);
        let mut r2 = RngStream::new(77, 2);
        let mut s1 = SpinConfig::uniform(20, -1);
        let mut s2 = s1.clone();
        for _ in 0..500 {
            sampler.step(&mut s1, &mut r1).unwrap();
            s2 = sw_step(&g, &s2, b, &mut r2).unwrap();
            assert_eq!(s1, s2);
        }
    }

    #[test]
    fn sampler_rejects_wrong_length() {
        let g = build_square_lattice(2, 2, &BoundarySpec::SidesPm).unwrap();
        let mut sampler = SwendsenWang::new(&g, beta(0.5));
        let mut s = SpinConfig::uniform(3, 1);
        assert!(sampler.step(&mut s, &mut RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn large_lattice_step_is_fast() {
        let g = build_square_lattice(100, 100, &BoundarySpec::SidesPm).unwrap();
        let mut sampler = SwendsenWang::new(&g, beta(0.5));
        let mut rng = RngStream::new(0, 0);
        let mut s = SpinConfig::uniform(10_000, -1);
        let steps = 50;
        let start = std::time::Instant::now();
        for _ in 0..steps {
            sampler.step(&mut s, &mut rng).unwrap();
        }
        let per_step = start.elapsed() / steps;
        assert!(per_step.as_millis() < 10, "{per_step:?} per step");
    }
}
