//! Swendsen-Wang sampling of Ising models with fixed boundary spins, plus a
//! double flip move built from a spatial involution of the graph.
//!
//! The crate is organised bottom-up: [`model`] holds graphs, spin states and
//! the Gibbs weight; [`lattices`] builds square lattices and triangulated
//! disks; [`swendsen_wang`] and [`symmetry`] implement the two moves;
//! [`chain`] mixes them; [`oracle`] enumerates tiny instances exactly.

pub mod chain;
pub mod error;
pub mod graph_io;
pub mod lattices;
pub mod model;
pub mod oracle;
pub mod rng;
pub mod swendsen_wang;
pub mod symmetry;
pub mod union_find;

pub use chain::{
    count_transitions, run_chain, run_replicas, Chain, ChainConfig, ChainSummary, ChainTrace, FlipKind,
    InitialState, MoveKind, MoveRecord,
};
pub use error::{Error, Result};
pub use lattices::{
    build_disk_triangulation, build_square_lattice, exact_involution_for, BoundarySpec, ExactSymmetry,
    MeshParams,
};
pub use model::{alignment_sum, average_spin, InverseTemperature, IsingGraph, Point, SpinConfig, VertexId};
pub use rng::RngStream;
pub use swendsen_wang::{sw_step, EdgeConfig, SwendsenWang};
pub use symmetry::{
    build_matching, double_flip, greedy_involution, validate_involution, GeometricInvolution, GraphInvolution,
    MatchingReport, Norm,
};
