//! Brute-force enumeration on tiny graphs.
//!
//! Spin states are bit patterns with bit `i` set when `s_i = +1`; edge states
//! have bit `e` set when edge `e` is occupied; joint states are indexed
//! `(w << |I|) | s`. Everything here is exact up to floating point and is
//! meant as an independent check of the samplers.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattices::{build_square_lattice, exact_involution_for, BoundarySpec, ExactSymmetry};
use crate::model::{self, InverseTemperature, IsingGraph, VertexId};
use crate::rng::RngStream;
use crate::swendsen_wang::{decompose, EdgeConfig};
use crate::symmetry::{acceptance_probability, GraphInvolution};

pub const MAX_SPIN_BITS: usize = 20;
pub const MAX_KERNEL_SPIN_BITS: usize = 12;
pub const MAX_TOTAL_BITS: usize = 24;

/// Compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut k = KahanSum::default();
        iter.into_iter().for_each(|x| k.add(x));
        k
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Spins { interior: usize },
    Edges { edges: usize },
    Joint { interior: usize, edges: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactDistribution {
    pub domain: Domain,
    pub weights: Vec<f64>,
}

impl ExactDistribution {
    fn normalized(domain: Domain, mut weights: Vec<f64>) -> Self {
        let z = weights.iter().copied().collect::<KahanSum>().value();
        weights.iter_mut().for_each(|w| *w /= z);
        Self { domain, weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn prob(&self, state: usize) -> f64 {
        self.weights[state]
    }

    /// Total-variation distance to an empirical histogram over the same states.
    pub fn tv_distance(&self, counts: &[u64]) -> f64 {
        let total: u64 = counts.iter().sum();
        0.5 * self
            .weights
            .iter()
            .zip(counts)
            .map(|(&p, &c)| (p - c as f64 / total as f64).abs())
            .sum::<f64>()
    }
}

fn check_spin_bits(g: &IsingGraph, cap: usize) -> Result<()> {
    if g.interior_count() > cap {
        return Err(Error::TooLarge(format!(
            "{} interior vertices exceed the enumeration cap of {cap}",
            g.interior_count()
        )));
    }
    Ok(())
}

fn check_total_bits(g: &IsingGraph) -> Result<()> {
    let bits = g.interior_count() + g.edge_count();
    if bits > MAX_TOTAL_BITS {
        return Err(Error::TooLarge(format!(
            "{} spin bits + {} edge bits exceed the cap of {MAX_TOTAL_BITS}",
            g.interior_count(),
            g.edge_count()
        )));
    }
    Ok(())
}

/// Alignment sum of every spin state, indexed by bit pattern.
fn alignment_table(g: &IsingGraph) -> Vec<i64> {
    let n = g.interior_count();
    let mut spins = vec![0i8; n];
    (0..1usize << n)
        .map(|bits| {
            for (i, s) in spins.iter_mut().enumerate() {
                *s = if bits >> i & 1 == 1 { 1 } else { -1 };
            }
            model::alignment_sum_unchecked(g, &spins)
        })
        .collect()
}

/// `p_V(s) ∝ exp(β·H(s))`.
pub fn enumerate_pv(g: &IsingGraph, beta: InverseTemperature) -> Result<ExactDistribution> {
    check_spin_bits(g, MAX_SPIN_BITS)?;
    let table = alignment_table(g);
    let top = table.iter().copied().max().unwrap_or(0);
    let weights = table
        .iter()
        .map(|&h| (beta.value() * (h - top) as f64).exp())
        .collect();
    Ok(ExactDistribution::normalized(
        Domain::Spins { interior: g.interior_count() },
        weights,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointMarginals {
    pub joint: ExactDistribution,
    pub edges: ExactDistribution,
    pub spins: ExactDistribution,
}

impl JointMarginals {
    /// Largest deviations in `Σ_w p_VE(s,w) = p_V(s)` and `Σ_s p_VE(s,w) = p_E(w)`.
    pub fn marginal_errors(&self) -> (f64, f64) {
        let n_states = self.spins.len();
        let mut over_w = vec![KahanSum::default(); n_states];
        let mut over_s = vec![KahanSum::default(); self.edges.len()];
        for (idx, &p) in self.joint.weights.iter().enumerate() {
            over_w[idx % n_states].add(p);
            over_s[idx / n_states].add(p);
        }
        let err = |sums: &[KahanSum], target: &ExactDistribution| {
            sums.iter()
                .zip(&target.weights)
                .map(|(k, &p)| (k.value() - p).abs())
                .fold(0.0, f64::max)
        };
        (err(&over_w, &self.spins), err(&over_s, &self.edges))
    }
}

/// Joint spin-edge distribution and both of its marginals, each computed
/// from its own closed form.
///
/// `p_E(w) ∝ p^{|w|} q^{|E|-|w|} 2^{|C_w|}` with `p = 1 - e^{-2β}`,
/// `q = e^{-2β}` and `C_w` the components without boundary vertices; edge
/// states that join boundary vertices of opposite sign get weight zero.
pub fn enumerate_joint_and_marginals(g: &IsingGraph, beta: InverseTemperature) -> Result<JointMarginals> {
    check_total_bits(g)?;
    let n = g.interior_count();
    let m = g.edge_count();
    let p = beta.bond_probability();
    let q = (-2.0 * beta.value()).exp();

    let aligned = aligned_masks(g);
    let mut joint = vec![0.0; 1usize << (n + m)];
    for w in 0..1u64 << m {
        let occupied = w.count_ones() as i32;
        let weight = p.powi(occupied) * q.powi(m as i32 - occupied);
        for (s, &mask) in aligned.iter().enumerate() {
            if w & !mask == 0 {
                joint[((w as usize) << n) | s] = weight;
            }
        }
    }

    let edge_weights = (0..1u64 << m)
        .map(|w| {
            let occupied = w.count_ones() as i32;
            match decompose(g, &EdgeConfig::from_bits(w, m)) {
                Ok(d) => {
                    p.powi(occupied)
                        * q.powi(m as i32 - occupied)
                        * 2f64.powi(d.interior_only_count as i32)
                }
                Err(Error::ConflictingBoundary { .. }) => 0.0,
                Err(e) => unreachable!("edge state has the right length: {e}"),
            }
        })
        .collect();

    Ok(JointMarginals {
        joint: ExactDistribution::normalized(Domain::Joint { interior: n, edges: m }, joint),
        edges: ExactDistribution::normalized(Domain::Edges { edges: m }, edge_weights),
        spins: enumerate_pv(g, beta)?,
    })
}

/// For each spin state, the bit mask of edges whose endpoints agree.
fn aligned_masks(g: &IsingGraph) -> Vec<u64> {
    let n = g.interior_count();
    (0..1usize << n)
        .map(|s| {
            let spin = |v: VertexId| -> i8 {
                match g.boundary_spin(v) {
                    Some(f) => f,
                    None if s >> v & 1 == 1 => 1,
                    None => -1,
                }
            };
            g.edges()
                .iter()
                .enumerate()
                .filter(|(_, &(u, v))| spin(u) == spin(v))
                .fold(0u64, |acc, (e, _)| acc | 1 << e)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelKind {
    Sw,
    DfExact,
    DfMetropolized,
    Mixture(f64),
}

/// Dense row-major transition matrix over spin bit patterns.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    pub kind: KernelKind,
    order: usize,
    entries: Vec<f64>,
}

impl TransitionMatrix {
    pub fn from_rows(kind: KernelKind, rows: Vec<Vec<f64>>) -> Result<Self> {
        let order = rows.len();
        if rows.iter().any(|r| r.len() != order) {
            return Err(Error::InvalidGraph("transition matrix is not square".into()));
        }
        Ok(Self {
            kind,
            order,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.entries[from * self.order + to]
    }

    pub fn row(&self, from: usize) -> &[f64] {
        &self.entries[from * self.order..(from + 1) * self.order]
    }

    pub fn max_row_sum_error(&self) -> f64 {
        (0..self.order)
            .map(|s| (self.row(s).iter().copied().collect::<KahanSum>().value() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn min_entry(&self) -> f64 {
        self.entries.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `max_t |(pP)(t) - p(t)|`.
    pub fn stationarity_error(&self, p: &ExactDistribution) -> f64 {
        (0..self.order)
            .map(|t| {
                let flow: KahanSum = (0..self.order).map(|s| p.weights[s] * self.get(s, t)).collect();
                (flow.value() - p.weights[t]).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Entrywise `eta·a + (1-eta)·b`.
    pub fn mixture(eta: f64, a: &TransitionMatrix, b: &TransitionMatrix) -> Self {
        assert_eq!(a.order, b.order, "kernels act on different state spaces");
        Self {
            kind: KernelKind::Mixture(eta),
            order: a.order,
            entries: a
                .entries
                .iter()
                .zip(&b.entries)
                .map(|(&x, &y)| eta * x + (1.0 - eta) * y)
                .collect(),
        }
    }

    /// Modulus of the largest non-unit eigenvalue of a `p`-reversible
    /// kernel, estimated as `‖(P - 1pᵀ)^{2^k}‖^{1/2^k}`.
    pub fn second_eigenvalue_modulus(&self, p: &ExactDistribution, squarings: u32) -> f64 {
        let n = self.order;
        let mut m: Vec<f64> = (0..n * n)
            .map(|k| self.entries[k] - p.weights[k % n])
            .collect();
        let mut log_scale = 0.0f64;
        for _ in 0..squarings {
            let mut sq = vec![0.0; n * n];
            for i in 0..n {
                for k in 0..n {
                    let a = m[i * n + k];
                    if a == 0.0 {
                        continue;
                    }
                    for j in 0..n {
                        sq[i * n + j] += a * m[k * n + j];
                    }
                }
            }
            let norm = sq.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            sq.iter_mut().for_each(|x| *x /= norm);
            m = sq;
            log_scale = 2.0 * log_scale + norm.ln();
        }
        (log_scale / 2f64.powi(squarings as i32)).exp()
    }
}

/// Exact Swendsen-Wang kernel `P(s,t) = Σ_w P(s→w) P(w→t)`.
pub fn exact_sw_kernel(g: &IsingGraph, beta: InverseTemperature) -> Result<TransitionMatrix> {
    check_spin_bits(g, MAX_KERNEL_SPIN_BITS)?;
    check_total_bits(g)?;
    let n = g.interior_count();
    let m = g.edge_count();
    let p = beta.bond_probability();
    let q = 1.0 - p;

    // For each edge state: bits fixed by pinned components, and the vertex
    // masks of the free components. `None` when w is impossible.
    let outcomes: Vec<Option<(u64, Vec<u64>)>> = (0..1u64 << m)
        .into_par_iter()
        .map(|w| {
            let d = decompose(g, &EdgeConfig::from_bits(w, m)).ok()?;
            let mut fixed = 0u64;
            let mut free = vec![0u64; d.pinned.len()];
            for (i, &c) in d.component_of.iter().enumerate() {
                match d.pinned[c as usize] {
                    Some(1) => fixed |= 1 << i,
                    Some(_) => {}
                    None => free[c as usize] |= 1 << i,
                }
            }
            free.retain(|&mask| mask != 0);
            Some((fixed, free))
        })
        .collect();

    let aligned = aligned_masks(g);
    let rows: Vec<Vec<f64>> = (0..1usize << n)
        .into_par_iter()
        .map(|s| {
            let mask = aligned[s];
            let a = mask.count_ones() as i32;
            let mut row = vec![KahanSum::default(); 1 << n];
            // Enumerate every w ⊆ aligned(s), including the empty set.
            let mut w = mask;
            loop {
                let (fixed, free) = outcomes[w as usize]
                    .as_ref()
                    .expect("aligned edge states never join opposite boundaries");
                let k = w.count_ones() as i32;
                let weight = p.powi(k) * q.powi(a - k) / (1u64 << free.len()) as f64;
                for choice in 0..1u64 << free.len() {
                    let t = free
                        .iter()
                        .enumerate()
                        .filter(|(c, _)| choice >> c & 1 == 1)
                        .fold(*fixed, |acc, (_, &comp)| acc | comp);
                    row[t as usize].add(weight);
                }
                if w == 0 {
                    break;
                }
                w = (w - 1) & mask;
            }
            row.iter().map(KahanSum::value).collect()
        })
        .collect();
    TransitionMatrix::from_rows(KernelKind::Sw, rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlipKernelKind {
    Exact,
    Metropolized,
}

/// Exact double flip kernel for the proposal `t_i = -s_{m(i)}`.
pub fn exact_flip_kernel(
    g: &IsingGraph,
    beta: InverseTemperature,
    m: &GraphInvolution,
    kind: FlipKernelKind,
) -> Result<TransitionMatrix> {
    check_spin_bits(g, MAX_KERNEL_SPIN_BITS)?;
    model::check_interior_bijection(g, m)?;
    let n = g.interior_count();
    let table = alignment_table(g);
    let map = m.as_slice();
    let order = 1usize << n;
    let mut entries = vec![0.0; order * order];
    for s in 0..order {
        let t = (0..n)
            .filter(|&i| s >> map[i] & 1 == 0)
            .fold(0usize, |acc, i| acc | 1 << i);
        match kind {
            FlipKernelKind::Exact => entries[s * order + t] = 1.0,
            FlipKernelKind::Metropolized => {
                let c = acceptance_probability(beta, table[t] - table[s]);
                entries[s * order + t] += c;
                entries[s * order + s] += 1.0 - c;
            }
        }
    }
    Ok(TransitionMatrix {
        kind: match kind {
            FlipKernelKind::Exact => KernelKind::DfExact,
            FlipKernelKind::Metropolized => KernelKind::DfMetropolized,
        },
        order,
        entries,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalanceWitness {
    pub from: usize,
    pub to: usize,
    /// `p(s) P(s,t)`.
    pub forward: f64,
    /// `p(t) P(t,s)`.
    pub backward: f64,
}

impl BalanceWitness {
    pub fn violation(&self) -> f64 {
        (self.forward - self.backward).abs()
    }
}

/// Largest `|p(s)P(s,t) - p(t)P(t,s)|`; the worst pair is returned as an
/// error when it exceeds `tol`.
pub fn check_detailed_balance(
    kernel: &TransitionMatrix,
    p: &ExactDistribution,
    tol: f64,
) -> std::result::Result<f64, BalanceWitness> {
    let n = kernel.order();
    let mut worst = BalanceWitness { from: 0, to: 0, forward: 0.0, backward: 0.0 };
    for s in 0..n {
        for t in s + 1..n {
            let w = BalanceWitness {
                from: s,
                to: t,
                forward: p.weights[s] * kernel.get(s, t),
                backward: p.weights[t] * kernel.get(t, s),
            };
            if w.violation() > worst.violation() {
                worst = w;
            }
        }
    }
    if worst.violation() <= tol {
        Ok(worst.violation())
    } else {
        Err(worst)
    }
}

/// Random pairing of the interior vertices; boundary vertices are fixed.
pub fn random_interior_involution(g: &IsingGraph, rng: &mut RngStream) -> GraphInvolution {
    let mut ids: Vec<VertexId> = (0..g.interior_count() as VertexId).collect();
    rand::seq::SliceRandom::shuffle(&mut ids[..], rng);
    let mut map: Vec<VertexId> = (0..g.vertex_count() as VertexId).collect();
    // Leave one vertex fixed roughly a third of the time.
    let keep_fixed = (rng.uniform() < 1.0 / 3.0) as usize;
    for pair in ids[keep_fixed..].chunks_exact(2) {
        map[pair[0] as usize] = pair[1];
        map[pair[1] as usize] = pair[0];
    }
    GraphInvolution::new(map).expect("pairing is an involution")
}

/// One line of an identity check report.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub identity: String,
    pub instance: String,
    pub max_violation: f64,
    pub tolerance: f64,
}

impl CheckRow {
    pub fn passed(&self) -> bool {
        self.max_violation <= self.tolerance
    }
}

pub const MARGINAL_TOL: f64 = 1e-12;
pub const BALANCE_TOL: f64 = 1e-10;
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// Checks the marginal identities and the reversibility of every kernel on
/// one instance. `exact` is an exact symmetry of `g` when one exists;
/// `approximate` may be any interior pairing.
pub fn verify_instance(
    g: &IsingGraph,
    name: &str,
    beta: InverseTemperature,
    exact: Option<&GraphInvolution>,
    approximate: &GraphInvolution,
    eta: f64,
) -> Result<Vec<CheckRow>> {
    let instance = format!("{name} beta={}", beta.value());
    let mut rows = Vec::new();
    let mut push = |identity: &str, max_violation: f64, tolerance: f64| {
        rows.push(CheckRow {
            identity: identity.to_string(),
            instance: instance.clone(),
            max_violation,
            tolerance,
        })
    };

    let marginals = enumerate_joint_and_marginals(g, beta)?;
    let (spin_err, edge_err) = marginals.marginal_errors();
    push("sum_w p_VE = p_V", spin_err, MARGINAL_TOL);
    push("sum_s p_VE = p_E", edge_err, MARGINAL_TOL);

    let pv = &marginals.spins;
    let balance = |k: &TransitionMatrix| match check_detailed_balance(k, pv, BALANCE_TOL) {
        Ok(v) => v,
        Err(w) => w.violation(),
    };

    let sw = exact_sw_kernel(g, beta)?;
    push("P_SW stochastic", sw.max_row_sum_error(), STOCHASTIC_TOL);
    push("P_SW detailed balance", balance(&sw), BALANCE_TOL);
    push("P_SW stationary", sw.stationarity_error(pv), BALANCE_TOL);

    let metro = exact_flip_kernel(g, beta, approximate, FlipKernelKind::Metropolized)?;
    push("P_DF metropolized stochastic", metro.max_row_sum_error(), STOCHASTIC_TOL);
    push("P_DF metropolized detailed balance", balance(&metro), BALANCE_TOL);
    let mix = TransitionMatrix::mixture(eta, &metro, &sw);
    push("P_SWDF metropolized detailed balance", balance(&mix), BALANCE_TOL);

    if let Some(m) = exact {
        let df = exact_flip_kernel(g, beta, m, FlipKernelKind::Exact)?;
        push("P_DF exact detailed balance", balance(&df), BALANCE_TOL);
        let mix = TransitionMatrix::mixture(eta, &df, &sw);
        push("P_SWDF exact detailed balance", balance(&mix), BALANCE_TOL);
        push("P_SWDF exact stationary", mix.stationarity_error(pv), BALANCE_TOL);
    }
    Ok(rows)
}

pub const SUITE_BETAS: [f64; 3] = [0.2, 0.5, 1.0];
pub const SUITE_ETA: f64 = 0.3;

/// The bundled tiny-instance suite: 2x2 and 1x3 lattices with `+1` on the
/// vertical sides, at each of [`SUITE_BETAS`].
pub fn standard_suite(seed: u64) -> Result<Vec<CheckRow>> {
    let square = build_square_lattice(2, 2, &BoundarySpec::SidesPm)?;
    let strip = build_square_lattice(1, 3, &BoundarySpec::SidesPm)?;
    let diagonal = exact_involution_for(&square, ExactSymmetry::Diagonal)?;
    let mut rng = RngStream::new(seed, 0);
    let mut rows = Vec::new();
    for &b in &SUITE_BETAS {
        let beta = InverseTemperature::new(b)?;
        let random = random_interior_involution(&square, &mut rng);
        rows.extend(verify_instance(&square, "2x2", beta, Some(&diagonal), &random, SUITE_ETA)?);
        let random = random_interior_involution(&strip, &mut rng);
        rows.extend(verify_instance(&strip, "1x3", beta, None, &random, SUITE_ETA)?);
    }
    Ok(rows)
}
