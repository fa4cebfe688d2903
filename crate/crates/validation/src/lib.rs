//! The five reference experiments, each as a ready-to-run graph, involution
//! and chain setting. All of them use β = 0.5, 10 000 iterations and the
//! all -1 starting state.

use std::f64::consts::PI;

use clusterflip::{
    build_disk_triangulation, build_matching, build_square_lattice, exact_involution_for, run_chain, BoundarySpec,
    ChainConfig, ChainTrace, ExactSymmetry, FlipKind, GeometricInvolution, GraphInvolution, IsingGraph,
    MatchingReport, MeshParams, Norm, Result,
};

pub const BETA: f64 = 0.5;
pub const ITERATIONS: usize = 10_000;
pub const DISK_H: f64 = 0.05;

pub struct Scenario {
    pub name: &'static str,
    pub graph: IsingGraph,
    pub involution: GraphInvolution,
    pub flip_kind: FlipKind,
    pub eta: f64,
    /// Present for the Metropolized scenarios.
    pub matching: Option<MatchingReport>,
}

impl Scenario {
    fn exact(name: &'static str, graph: IsingGraph, symmetry: ExactSymmetry) -> Result<Self> {
        let involution = exact_involution_for(&graph, symmetry)?;
        Ok(Self {
            name,
            graph,
            involution,
            flip_kind: FlipKind::Exact,
            eta: 0.01,
            matching: None,
        })
    }

    fn matched(name: &'static str, graph: IsingGraph, mu: GeometricInvolution, norm: Norm) -> Result<Self> {
        let report = build_matching(&graph, &mu, norm)?;
        Ok(Self {
            name,
            involution: report.involution(graph.vertex_count()),
            graph,
            flip_kind: FlipKind::Metropolized,
            eta: 1.0 / 3.0,
            matching: Some(report),
        })
    }

    /// Plain Swendsen-Wang from all -1.
    pub fn run_sw(&self, seed: u64) -> Result<ChainTrace> {
        let cfg = ChainConfig::new(BETA, 0.0, ITERATIONS, seed, FlipKind::None)?;
        run_chain(&self.graph, &cfg, None)
    }

    /// Swendsen-Wang mixed with this scenario's double flip.
    pub fn run_swdf(&self, seed: u64) -> Result<ChainTrace> {
        let cfg = ChainConfig::new(BETA, self.eta, ITERATIONS, seed, self.flip_kind)?;
        run_chain(&self.graph, &cfg, Some(&self.involution))
    }
}

/// 100 x 100 square, +1 on the vertical sides, diagonal reflection.
pub fn square_sides() -> Result<Scenario> {
    let g = build_square_lattice(100, 100, &BoundarySpec::SidesPm)?;
    Scenario::exact("square 100x100 sides-pm", g, ExactSymmetry::Diagonal)
}

/// 100 x 100 square, +1 in the first and third quadrants, x-axis reflection.
pub fn square_quadrants() -> Result<Scenario> {
    let g = build_square_lattice(100, 100, &BoundarySpec::QuadrantPm)?;
    Scenario::exact("square 100x100 quadrant-pm", g, ExactSymmetry::XAxis)
}

/// 100 x 99 rectangle, +1 on the vertical sides, greedy matching for the
/// diagonal reflection.
pub fn rectangle(norm: Norm) -> Result<Scenario> {
    let g = build_square_lattice(100, 99, &BoundarySpec::SidesPm)?;
    Scenario::matched("rectangle 100x99 sides-pm", g, GeometricInvolution::diagonal(), norm)
}

/// Unit disk, +1 in the first and third quadrants.
pub fn disk_quadrants(mesh_seed: u64) -> Result<Scenario> {
    let g = build_disk_triangulation(&MeshParams::new(DISK_H, mesh_seed)?, &BoundarySpec::QuadrantPm)?;
    Scenario::matched("disk quadrant-pm", g, GeometricInvolution::x_axis(), Norm::Linf)
}

/// Unit disk, +1 on the arcs [0, π/3] and [π, 5π/3].
pub fn disk_arcs(mesh_seed: u64) -> Result<Scenario> {
    let bc = BoundarySpec::arcs(vec![(0.0, PI / 3.0), (PI, 5.0 * PI / 3.0)])?;
    let g = build_disk_triangulation(&MeshParams::new(DISK_H, mesh_seed)?, &bc)?;
    Scenario::matched("disk arcs", g, GeometricInvolution::x_axis(), Norm::Linf)
}
