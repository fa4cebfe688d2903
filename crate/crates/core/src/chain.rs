//! The Swendsen-Wang chain with an optional double flip move mixed in.
//!
//! Every iteration first draws `u ~ U[0,1)`. If `u < eta` the configured flip
//! move runs, otherwise one Swendsen-Wang step. The mixture draw is consumed
//! even when `eta = 0`, so runs that differ only in `eta` share the seed
//! stream layout.

use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{self, average_spin, InverseTemperature, IsingGraph, SpinConfig};
use crate::rng::RngStream;
use crate::swendsen_wang::SwendsenWang;
use crate::symmetry::{acceptance_probability, double_flip, validate_involution, GraphInvolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialState {
    AllMinus,
    AllPlus,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlipKind {
    None,
    /// Deterministic double flip under an exact symmetry; always accepted.
    Exact,
    /// Double flip proposal with Metropolis acceptance.
    Metropolized,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub beta: InverseTemperature,
    pub eta: f64,
    pub iterations: usize,
    pub seed: u64,
    pub stream: u64,
    pub initial: InitialState,
    pub flip_kind: FlipKind,
    /// Keep a copy of the configuration every this many iterations.
    pub snapshot_interval: Option<usize>,
}

impl ChainConfig {
    pub fn new(beta: f64, eta: f64, iterations: usize, seed: u64, flip_kind: FlipKind) -> Result<Self> {
        let cfg = Self {
            beta: InverseTemperature::new(beta)?,
            eta,
            iterations,
            seed,
            stream: 0,
            initial: InitialState::AllMinus,
            flip_kind,
            snapshot_interval: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidChainConfig(msg));
        if !(0.0..=1.0).contains(&self.eta) {
            return bad(format!("eta = {} must lie in [0, 1]", self.eta));
        }
        if (self.eta == 0.0) != (self.flip_kind == FlipKind::None) {
            return bad(format!(
                "eta = {} is inconsistent with flip kind {:?}",
                self.eta, self.flip_kind
            ));
        }
        if self.iterations == 0 {
            return bad("iterations must be positive".into());
        }
        if self.snapshot_interval == Some(0) {
            return bad("snapshot interval must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveKind {
    Sw,
    Flip,
}

impl MoveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MoveKind::Sw => "sw",
            MoveKind::Flip => "flip",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoveRecord {
    /// 1-based; the record describes the state after this many moves.
    pub iteration: usize,
    pub avg_spin: f64,
    pub kind: MoveKind,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainSummary {
    pub transitions: usize,
    pub flip_attempts: usize,
    pub flip_accepts: usize,
    pub final_avg_spin: f64,
    pub seed: u64,
    pub stream: u64,
    pub wall_time_ms: u128,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainTrace {
    pub records: Vec<MoveRecord>,
    pub snapshots: Vec<(usize, SpinConfig)>,
    pub summary: ChainSummary,
}

impl ChainTrace {
    pub fn avg_spins(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.avg_spin)
    }
}

/// Number of sign changes of the average spin, ignoring exact zeros.
pub fn count_transitions(avg_spins: impl IntoIterator<Item = f64>) -> usize {
    let mut last = 0.0f64;
    let mut count = 0;
    for a in avg_spins {
        if a == 0.0 {
            continue;
        }
        let sign = a.signum();
        if last != 0.0 && sign != last {
            count += 1;
        }
        last = sign;
    }
    count
}

/// A configured SWDF chain bound to one graph.
#[derive(Debug, Clone)]
pub struct Chain<'g> {
    graph: &'g IsingGraph,
    sw: SwendsenWang<'g>,
    eta: f64,
    flip_kind: FlipKind,
    involution: Option<&'g GraphInvolution>,
}

impl<'g> Chain<'g> {
    /// Checks that the involution suits the flip kind: exact flips need all
    /// three involution axioms, Metropolized flips only a pairing of the
    /// interior vertices.
    pub fn new(
        graph: &'g IsingGraph,
        cfg: &ChainConfig,
        involution: Option<&'g GraphInvolution>,
    ) -> Result<Self> {
        cfg.validate()?;
        match (cfg.flip_kind, involution) {
            (FlipKind::None, _) => {}
            (_, None) => {
                return Err(Error::InvalidChainConfig(format!(
                    "flip kind {:?} needs an involution",
                    cfg.flip_kind
                )))
            }
            (FlipKind::Exact, Some(m)) => validate_involution(graph, m).map_err(|v| {
                Error::InvalidChainConfig(format!("exact flip needs an exact symmetry: {}", v[0]))
            })?,
            (FlipKind::Metropolized, Some(m)) => model::check_interior_bijection(graph, m)?,
        }
        Ok(Self {
            graph,
            sw: SwendsenWang::new(graph, cfg.beta),
            eta: cfg.eta,
            flip_kind: cfg.flip_kind,
            involution,
        })
    }

    /// One SWDF iteration; returns `(kind, accepted)`.
    pub fn step(&mut self, s: &mut SpinConfig, rng: &mut RngStream) -> Result<(MoveKind, bool)> {
        let u = rng.uniform();
        if u >= self.eta {
            self.sw.step(s, rng)?;
            return Ok((MoveKind::Sw, true));
        }
        let m = self
            .involution
            .ok_or_else(|| Error::InvalidChainConfig("flip selected without an involution".into()))?;
        self.graph.check_spins(s)?;
        match self.flip_kind {
            FlipKind::None => unreachable!("eta > 0 requires a flip kind"),
            FlipKind::Exact => {
                *s = double_flip(s, m);
                Ok((MoveKind::Flip, true))
            }
            FlipKind::Metropolized => {
                let delta = model::alignment_delta_unchecked(self.graph, s.as_slice(), m.as_slice());
                let c = acceptance_probability(self.sw.beta(), delta);
                let accepted = rng.uniform() <= c;
                if accepted {
                    *s = double_flip(s, m);
                }
                Ok((MoveKind::Flip, accepted))
            }
        }
    }
}

/// Single SWDF iteration on `s`.
pub fn swdf_step(
    g: &IsingGraph,
    s: &SpinConfig,
    cfg: &ChainConfig,
    involution: Option<&GraphInvolution>,
    rng: &mut RngStream,
) -> Result<(SpinConfig, MoveKind, bool)> {
    let mut chain = Chain::new(g, cfg, involution)?;
    let mut t = s.clone();
    let (kind, accepted) = chain.step(&mut t, rng)?;
    Ok((t, kind, accepted))
}

pub fn initial_state(n: usize, initial: InitialState, rng: &mut RngStream) -> SpinConfig {
    match initial {
        InitialState::AllMinus => SpinConfig::uniform(n, -1),
        InitialState::AllPlus => SpinConfig::uniform(n, 1),
        InitialState::Random => SpinConfig::from_vec_unchecked((0..n).map(|_| rng.spin()).collect()),
    }
}

pub fn run_chain(
    g: &IsingGraph,
    cfg: &ChainConfig,
    involution: Option<&GraphInvolution>,
) -> Result<ChainTrace> {
    let start = Instant::now();
    let mut chain = Chain::new(g, cfg, involution)?;
    let mut rng = RngStream::new(cfg.seed, cfg.stream);
    let mut s = initial_state(g.interior_count(), cfg.initial, &mut rng);

    let mut records = Vec::with_capacity(cfg.iterations);
    let mut snapshots = Vec::new();
    let (mut flip_attempts, mut flip_accepts) = (0, 0);
    for iteration in 1..=cfg.iterations {
        let (kind, accepted) = chain.step(&mut s, &mut rng)?;
        if kind == MoveKind::Flip {
            flip_attempts += 1;
            flip_accepts += usize::from(accepted);
        }
        records.push(MoveRecord {
            iteration,
            avg_spin: average_spin(&s),
            kind,
            accepted,
        });
        if cfg.snapshot_interval.is_some_and(|k| iteration % k == 0) {
            snapshots.push((iteration, s.clone()));
        }
    }

    let summary = ChainSummary {
        transitions: count_transitions(records.iter().map(|r| r.avg_spin)),
        flip_attempts,
        flip_accepts,
        final_avg_spin: average_spin(&s),
        seed: cfg.seed,
        stream: cfg.stream,
        wall_time_ms: start.elapsed().as_millis(),
    };
    Ok(ChainTrace {
        records,
        snapshots,
        summary,
    })
}

/// Runs `replicas` independent chains on stream indices `0..replicas`,
/// using at most `threads` workers.
pub fn run_replicas(
    g: &IsingGraph,
    cfg: &ChainConfig,
    involution: Option<&GraphInvolution>,
    replicas: usize,
    threads: usize,
) -> Result<Vec<ChainTrace>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidChainConfig(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        (0..replicas as u64)
            .into_par_iter()
            .map(|stream| {
                let cfg = ChainConfig { stream, ..cfg.clone() };
                run_chain(g, &cfg, involution)
            })
            .collect()
    })
}
