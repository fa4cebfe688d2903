use std::time::Instant;

use clusterflip::graph_io::write_graph;
use clusterflip::oracle::{
    check_detailed_balance, enumerate_pv, random_interior_involution, standard_suite, verify_instance, CheckRow,
    KernelKind, TransitionMatrix, BALANCE_TOL, MAX_KERNEL_SPIN_BITS, STOCHASTIC_TOL, SUITE_BETAS,
};
use clusterflip::{
    build_disk_triangulation, build_matching, build_square_lattice, run_replicas, validate_involution, ChainConfig,
    Error, FlipKind, GeometricInvolution, GraphInvolution, InverseTemperature, IsingGraph, RngStream,
};

use crate::config::{ExperimentConfig, LatticeConfig};
use crate::output::{self, RunSummary};
use crate::{svg, CliError};

pub struct Context {
    pub quiet: bool,
    pub replicas: usize,
    pub threads: usize,
}

impl Context {
    fn say(&self, line: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", line.as_ref());
        }
    }
}

fn config_err(e: Error) -> CliError {
    CliError::Config(e.to_string())
}

fn build_graph(cfg: &ExperimentConfig) -> Result<IsingGraph, CliError> {
    match cfg.lattice.as_ref().ok_or_else(|| CliError::Config("the config has no [lattice] section".into()))? {
        LatticeConfig::Square { n1, n2, bc } => build_square_lattice(*n1, *n2, bc),
        LatticeConfig::Disk { mesh, bc } => build_disk_triangulation(mesh, bc),
    }
    .map_err(config_err)
}

fn require_mu(cfg: &ExperimentConfig, why: &str) -> Result<GeometricInvolution, CliError> {
    cfg.involution
        .ok_or_else(|| CliError::Config(format!("{why} needs matching.involution")))
}

/// The graph involution induced by `mu`, which must be an exact symmetry.
fn exact_involution(g: &IsingGraph, mu: &GeometricInvolution) -> Result<GraphInvolution, CliError> {
    let m = GraphInvolution::from_exact_symmetry(g, mu)
        .map_err(|e| CliError::Config(format!("{mu} is not an exact symmetry of this lattice: {e}")))?;
    validate_involution(g, &m)
        .map_err(|v| CliError::Config(format!("{mu} is not an exact symmetry of this lattice: {}", v[0])))?;
    Ok(m)
}

pub fn build_lattice(cfg: &ExperimentConfig, ctx: &Context) -> Result<(), CliError> {
    let g = build_graph(cfg)?;
    let path = cfg
        .output
        .graph_path
        .as_ref()
        .ok_or_else(|| CliError::Config("build-lattice needs output.graph_path".into()))?;
    output::write_file(path, &write_graph(&g))?;
    if let Some(svg_path) = &cfg.output.svg_path {
        output::write_file(svg_path, &svg::lattice(&g))?;
    }
    ctx.say(format!(
        "{} interior, {} boundary, {} edges -> {}",
        g.interior_count(),
        g.boundary_count(),
        g.edge_count(),
        path.display()
    ));
    Ok(())
}

pub fn run(cfg: &ExperimentConfig, ctx: &Context) -> Result<(), CliError> {
    let chain: &ChainConfig = cfg
        .chain
        .as_ref()
        .ok_or_else(|| CliError::Config("run needs a [chain] section".into()))?;
    let trace_path = cfg.output.trace_path.as_ref();
    let summary_path = cfg
        .output
        .summary_path
        .as_ref()
        .ok_or_else(|| CliError::Config("run needs output.summary_path".into()))?;
    let g = build_graph(cfg)?;
    let involution = match chain.flip_kind {
        FlipKind::None => None,
        FlipKind::Exact => Some(exact_involution(&g, &require_mu(cfg, "flip_kind = exact")?)?),
        FlipKind::Metropolized => {
            let mu = require_mu(cfg, "flip_kind = metropolized")?;
            let report = build_matching(&g, &mu, cfg.norm).map_err(config_err)?;
            Some(report.involution(g.vertex_count()))
        }
    };

    let start = Instant::now();
    let traces = run_replicas(&g, chain, involution.as_ref(), ctx.replicas, ctx.threads).map_err(config_err)?;
    let summary = RunSummary::merge(
        &traces,
        chain.beta.value(),
        chain.eta,
        chain.iterations,
        start.elapsed().as_millis(),
    );

    for (k, trace) in traces.iter().enumerate() {
        if let Some(path) = trace_path {
            output::write_file(&output::replica_path(path, k, ctx.replicas), &output::trace_csv(trace))?;
        }
        if let Some(path) = &cfg.output.snapshot_path {
            output::write_file(&output::replica_path(path, k, ctx.replicas), &output::snapshots_csv(&trace.snapshots))?;
        }
    }
    output::write_file(summary_path, &summary.to_json())?;
    if let Some(path) = &cfg.output.svg_path {
        let series: Vec<Vec<f64>> = traces.iter().map(|t| t.avg_spins().collect()).collect();
        output::write_file(path, &svg::avg_spin_plot(&series))?;
    }
    ctx.say(format!(
        "transitions={} flip_attempts={} flip_accepts={} final_avg_spin={:.4} replicas={}",
        summary.transitions, summary.flip_attempts, summary.flip_accepts, summary.final_avg_spin, ctx.replicas
    ));
    Ok(())
}

fn print_table(rows: &[CheckRow], ctx: &Context) {
    ctx.say(format!("{:<38} {:<16} {:>12} {:>9}  result", "identity", "instance", "max error", "tol"));
    for r in rows {
        ctx.say(format!(
            "{:<38} {:<16} {:>12.3e} {:>9.0e}  {}",
            r.identity,
            r.instance,
            r.max_violation,
            r.tolerance,
            if r.passed() { "pass" } else { "FAIL" }
        ));
    }
}

fn read_kernel(path: &std::path::Path) -> Result<TransitionMatrix, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let rows = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| {
            l.split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::Config(format!("{} line {}: {e}", path.display(), k + 1)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    TransitionMatrix::from_rows(KernelKind::Sw, rows).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Checks a kernel read from disk against the exact distribution.
fn check_kernel_file(
    g: &IsingGraph,
    beta: InverseTemperature,
    path: &std::path::Path,
    ctx: &Context,
) -> Result<(), CliError> {
    let kernel = read_kernel(path)?;
    let order = 1usize << g.interior_count();
    if kernel.order() != order {
        return Err(CliError::Config(format!(
            "kernel has order {}, the lattice has {order} spin states",
            kernel.order()
        )));
    }
    let p = enumerate_pv(g, beta).map_err(config_err)?;
    let rows = [
        ("row sums", kernel.max_row_sum_error(), STOCHASTIC_TOL),
        ("negative entries", (-kernel.min_entry()).max(0.0), 0.0),
    ];
    for (what, err, tol) in rows {
        if err > tol {
            return Err(CliError::Verification(format!("kernel is not stochastic: {what} off by {err:e}")));
        }
    }
    match check_detailed_balance(&kernel, &p, BALANCE_TOL) {
        Ok(v) => {
            ctx.say(format!("kernel {}: detailed balance holds, max error {v:.3e}", path.display()));
            Ok(())
        }
        Err(w) => Err(CliError::Verification(format!(
            "detailed balance fails at s={:#b}, t={:#b}: p(s)P(s,t) = {:e}, p(t)P(t,s) = {:e}",
            w.from, w.to, w.forward, w.backward
        ))),
    }
}

pub fn oracle_check(cfg: Option<&ExperimentConfig>, ctx: &Context) -> Result<(), CliError> {
    let rows = match cfg.filter(|c| c.lattice.is_some()) {
        None => standard_suite(cfg.map_or(0, |c| c.oracle.seed)).map_err(config_err)?,
        Some(cfg) => {
            let g = build_graph(cfg)?;
            if g.interior_count() > MAX_KERNEL_SPIN_BITS {
                return Err(CliError::Config(format!(
                    "refusing exact enumeration: {} interior sites exceed the cap of {MAX_KERNEL_SPIN_BITS}",
                    g.interior_count()
                )));
            }
            let betas: Vec<f64> = match &cfg.chain {
                Some(chain) => vec![chain.beta.value()],
                None => SUITE_BETAS.to_vec(),
            };
            if let Some(path) = &cfg.oracle.kernel_path {
                let beta = cfg
                    .chain
                    .as_ref()
                    .map(|c| c.beta)
                    .ok_or_else(|| CliError::Config("oracle.kernel_path needs chain.beta".into()))?;
                return check_kernel_file(&g, beta, path, ctx);
            }
            let exact = cfg.involution.map(|mu| exact_involution(&g, &mu)).transpose()?;
            let mut rng = RngStream::new(cfg.oracle.seed, 0);
            let mut rows = Vec::new();
            for b in betas {
                let beta = InverseTemperature::new(b).map_err(config_err)?;
                let random = random_interior_involution(&g, &mut rng);
                let found = verify_instance(&g, "config", beta, exact.as_ref(), &random, cfg.oracle.eta)
                    .map_err(|e| CliError::Config(format!("refusing exact enumeration: {e}")))?;
                rows.extend(found);
            }
            rows
        }
    };
    print_table(&rows, ctx);
    let failed = rows.iter().filter(|r| !r.passed()).count();
    if failed > 0 {
        return Err(CliError::Verification(format!("{failed} of {} checks failed", rows.len())));
    }
    ctx.say(format!("all {} checks passed", rows.len()));
    Ok(())
}

pub fn matching_report(cfg: &ExperimentConfig, ctx: &Context) -> Result<(), CliError> {
    let g = build_graph(cfg)?;
    let mu = require_mu(cfg, "matching-report")?;
    let report = build_matching(&g, &mu, cfg.norm).map_err(config_err)?;
    let path = cfg
        .output
        .matching_path
        .as_ref()
        .ok_or_else(|| CliError::Config("matching-report needs output.matching_path".into()))?;
    output::write_file(path, &output::matching_csv(&g, &report))?;
    if let Some(svg_path) = &cfg.output.svg_path {
        output::write_file(svg_path, &svg::transport_map(&g, &report))?;
    }
    ctx.say(format!(
        "{} pairs under {mu}, mean displacement {:.6}, max displacement {:.6}",
        report.pairs.len(),
        report.mean_displacement,
        report.max_displacement
    ));
    Ok(())
}
