use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use clusterflip::{ChainTrace, IsingGraph, MatchingReport, SpinConfig};

use crate::CliError;

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// `trace.csv` becomes `trace.r3.csv` for replica 3 when there is more
/// than one replica.
pub fn replica_path(path: &Path, replica: usize, replicas: usize) -> PathBuf {
    if replicas == 1 {
        return path.to_path_buf();
    }
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.r{replica}.{}", ext.to_string_lossy()),
        None => format!("{stem}.r{replica}"),
    };
    path.with_file_name(name)
}

pub fn trace_csv(trace: &ChainTrace) -> String {
    let mut out = String::with_capacity(32 * trace.records.len() + 32);
    out.push_str("iter,avg_spin,move,accepted\n");
    for r in &trace.records {
        writeln!(out, "{},{},{},{}", r.iteration, r.avg_spin, r.kind.as_str(), r.accepted).unwrap();
    }
    out
}

/// One line per snapshot: the iteration, then one `+` or `-` per interior
/// site in id order.
pub fn snapshots_csv(snapshots: &[(usize, SpinConfig)]) -> String {
    let mut out = String::from("iter,spins\n");
    for (iteration, s) in snapshots {
        let spins: String = s.as_slice().iter().map(|&x| if x > 0 { '+' } else { '-' }).collect();
        writeln!(out, "{iteration},{spins}").unwrap();
    }
    out
}

#[derive(Debug, Serialize)]
pub struct ReplicaSummary {
    pub stream: u64,
    pub transitions: usize,
    pub flip_attempts: usize,
    pub flip_accepts: usize,
    pub final_avg_spin: f64,
    pub wall_time_ms: u128,
}

/// Totals over all replicas; `final_avg_spin` is the replica mean.
#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub transitions: usize,
    pub flip_attempts: usize,
    pub flip_accepts: usize,
    pub final_avg_spin: f64,
    pub seed: u64,
    pub wall_time_ms: u128,
    pub beta: f64,
    pub eta: f64,
    pub iterations: usize,
    pub replicas: Vec<ReplicaSummary>,
}

impl RunSummary {
    pub fn merge(traces: &[ChainTrace], beta: f64, eta: f64, iterations: usize, wall_time_ms: u128) -> Self {
        let replicas: Vec<ReplicaSummary> = traces
            .iter()
            .map(|t| ReplicaSummary {
                stream: t.summary.stream,
                transitions: t.summary.transitions,
                flip_attempts: t.summary.flip_attempts,
                flip_accepts: t.summary.flip_accepts,
                final_avg_spin: t.summary.final_avg_spin,
                wall_time_ms: t.summary.wall_time_ms,
            })
            .collect();
        Self {
            transitions: replicas.iter().map(|r| r.transitions).sum(),
            flip_attempts: replicas.iter().map(|r| r.flip_attempts).sum(),
            flip_accepts: replicas.iter().map(|r| r.flip_accepts).sum(),
            final_avg_spin: replicas.iter().map(|r| r.final_avg_spin).sum::<f64>() / replicas.len().max(1) as f64,
            seed: traces.first().map_or(0, |t| t.summary.seed),
            wall_time_ms,
            beta,
            eta,
            iterations,
            replicas,
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("summary is plain data");
        text.push('\n');
        text
    }
}

pub fn matching_csv(g: &IsingGraph, report: &MatchingReport) -> String {
    let points = g.embedding().expect("matching needs an embedding");
    let mut out = String::from("i,j,xi,yi,x_mu_i,y_mu_i,xj,yj,displacement\n");
    for (i, &j) in report.pairs.iter().enumerate() {
        let (xi, mu, xj) = (points[i], report.images[i], points[j as usize]);
        writeln!(
            out,
            "{i},{j},{},{},{},{},{},{},{}",
            xi.x, xi.y, mu.x, mu.y, xj.x, xj.y, report.displacement[i]
        )
        .unwrap();
    }
    out
}
