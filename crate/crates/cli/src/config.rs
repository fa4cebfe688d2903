//! Experiment configuration files.
//!
//! The grammar is line based:
//!
//! ```text
//! # comment
//! [section]
//! key = value
//! ```
//!
//! Blank lines and lines starting with `#` are ignored, keys may appear at
//! most once per section, and unknown sections or keys are rejected. Angles
//! are in degrees. Relative paths are resolved against the directory that
//! holds the config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clusterflip::{BoundarySpec, ChainConfig, FlipKind, GeometricInvolution, InitialState, MeshParams, Norm};

use crate::CliError;

const SECTIONS: &[(&str, &[&str])] = &[
    ("lattice", &["type", "n1", "n2", "h", "bc", "arcs", "seed", "jitter"]),
    ("chain", &["beta", "eta", "iterations", "seed", "initial", "flip_kind"]),
    ("matching", &["norm", "involution"]),
    (
        "output",
        &["graph_path", "trace_path", "summary_path", "svg_path", "matching_path", "snapshot_path", "snapshot_interval"],
    ),
    ("oracle", &["seed", "eta", "kernel_path"]),
];

#[derive(Debug, Clone)]
struct Entry {
    line: usize,
    value: String,
}

/// Parsed but untyped document: section -> key -> value.
#[derive(Debug, Default)]
pub struct Document {
    sections: BTreeMap<String, BTreeMap<String, Entry>>,
}

fn config_error(line: usize, message: impl Into<String>) -> CliError {
    CliError::Config(format!("line {line}: {}", message.into()))
}

impl Document {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut doc = Document::default();
        let mut current: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| config_error(line, format!("malformed section header `{content}`")))?
                    .trim();
                if !SECTIONS.iter().any(|(s, _)| *s == name) {
                    return Err(config_error(line, format!("unknown section [{name}]")));
                }
                if doc.sections.contains_key(name) {
                    return Err(config_error(line, format!("section [{name}] appears twice")));
                }
                doc.sections.insert(name.to_string(), BTreeMap::new());
                current = Some(name.to_string());
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| config_error(line, format!("expected `key = value`, found `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let section = current
                .as_deref()
                .ok_or_else(|| config_error(line, format!("key `{key}` appears before any section")))?;
            let allowed = SECTIONS.iter().find(|(s, _)| *s == section).map(|(_, k)| *k).unwrap_or(&[]);
            if !allowed.contains(&key) {
                return Err(config_error(line, format!("unknown key `{key}` in [{section}]")));
            }
            if value.is_empty() {
                return Err(config_error(line, format!("key `{key}` has no value")));
            }
            let entries = doc.sections.get_mut(section).expect("section was inserted");
            if entries.contains_key(key) {
                return Err(config_error(line, format!("key `{key}` repeated in [{section}]")));
            }
            entries.insert(key.to_string(), Entry { line, value: value.to_string() });
        }
        Ok(doc)
    }

    pub fn has_section(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    fn entry(&self, section: &str, key: &str) -> Option<&Entry> {
        self.sections.get(section)?.get(key)
    }

    fn get<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<Option<T>, CliError> {
        match self.entry(section, key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse()
                .map(Some)
                .map_err(|_| config_error(e.line, format!("cannot parse `{}` as the value of {section}.{key}", e.value))),
        }
    }

    fn require<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<T, CliError> {
        self.get(section, key)?
            .ok_or_else(|| CliError::Config(format!("missing required key {section}.{key}")))
    }

    fn choice<T: Copy>(&self, section: &str, key: &str, options: &[(&str, T)]) -> Result<Option<T>, CliError> {
        let Some(e) = self.entry(section, key) else {
            return Ok(None);
        };
        options
            .iter()
            .find(|(name, _)| *name == e.value)
            .map(|&(_, v)| Some(v))
            .ok_or_else(|| {
                let names: Vec<_> = options.iter().map(|(n, _)| *n).collect();
                config_error(e.line, format!("{section}.{key} must be one of {}, found `{}`", names.join(", "), e.value))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LatticeConfig {
    Square { n1: usize, n2: usize, bc: BoundarySpec },
    Disk { mesh: MeshParams, bc: BoundarySpec },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub graph_path: Option<PathBuf>,
    pub trace_path: Option<PathBuf>,
    pub summary_path: Option<PathBuf>,
    pub svg_path: Option<PathBuf>,
    pub matching_path: Option<PathBuf>,
    pub snapshot_path: Option<PathBuf>,
    pub snapshot_interval: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub seed: u64,
    pub eta: f64,
    pub kernel_path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub lattice: Option<LatticeConfig>,
    pub chain: Option<ChainConfig>,
    pub norm: Norm,
    pub involution: Option<GeometricInvolution>,
    pub output: OutputConfig,
    pub oracle: OracleConfig,
}

fn parse_arcs(text: &str, line: usize) -> Result<BoundarySpec, CliError> {
    let mut arcs = Vec::new();
    for part in text.split(',') {
        let (a, b) = part
            .trim()
            .split_once(':')
            .ok_or_else(|| config_error(line, format!("arc `{}` must be written start:end in degrees", part.trim())))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| config_error(line, format!("arc endpoint `{}` is not a number", s.trim())))
        };
        arcs.push((parse(a)?.to_radians(), parse(b)?.to_radians()));
    }
    BoundarySpec::arcs(arcs).map_err(|e| config_error(line, e.to_string()))
}

fn parse_involution(text: &str, line: usize) -> Result<GeometricInvolution, CliError> {
    match text {
        "diagonal" => Ok(GeometricInvolution::diagonal()),
        "x-axis" => Ok(GeometricInvolution::x_axis()),
        "y-axis" => Ok(GeometricInvolution::y_axis()),
        "point" => Ok(GeometricInvolution::point_reflection()),
        other => {
            let angle = other
                .strip_prefix("reflection:")
                .and_then(|deg| deg.trim().parse::<f64>().ok())
                .filter(|deg| deg.is_finite())
                .ok_or_else(|| {
                    config_error(
                        line,
                        format!("involution must be diagonal, x-axis, y-axis, point or reflection:<degrees>, found `{other}`"),
                    )
                })?;
            Ok(GeometricInvolution::reflection(angle.to_radians()))
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_document(&Document::parse(&text)?, base)
    }

    pub fn from_document(doc: &Document, base: &Path) -> Result<Self, CliError> {
        let lattice = if doc.has_section("lattice") { Some(Self::lattice(doc)?) } else { None };
        let chain = if doc.has_section("chain") { Some(Self::chain(doc)?) } else { None };
        let norm = doc
            .choice("matching", "norm", &[("linf", Norm::Linf), ("l2", Norm::L2)])?
            .unwrap_or_default();
        let involution = match doc.entry("matching", "involution") {
            Some(e) => Some(parse_involution(&e.value, e.line)?),
            None => None,
        };
        let path = |key: &str| doc.entry("output", key).map(|e| base.join(&e.value));
        let output = OutputConfig {
            graph_path: path("graph_path"),
            trace_path: path("trace_path"),
            summary_path: path("summary_path"),
            svg_path: path("svg_path"),
            matching_path: path("matching_path"),
            snapshot_path: path("snapshot_path"),
            snapshot_interval: doc.get("output", "snapshot_interval")?,
        };
        if output.snapshot_interval == Some(0) {
            return Err(CliError::Config("output.snapshot_interval must be positive".into()));
        }
        if output.snapshot_interval.is_some() != output.snapshot_path.is_some() {
            return Err(CliError::Config(
                "output.snapshot_interval and output.snapshot_path must be given together".into(),
            ));
        }
        let oracle = OracleConfig {
            seed: doc.get("oracle", "seed")?.unwrap_or(0),
            eta: doc.get("oracle", "eta")?.unwrap_or(clusterflip::oracle::SUITE_ETA),
            kernel_path: doc.entry("oracle", "kernel_path").map(|e| base.join(&e.value)),
        };
        if !(0.0..=1.0).contains(&oracle.eta) {
            return Err(CliError::Config(format!("oracle.eta = {} must lie in [0, 1]", oracle.eta)));
        }
        let mut chain = chain;
        if let Some(cfg) = chain.as_mut() {
            cfg.snapshot_interval = output.snapshot_interval;
        }
        Ok(Self { lattice, chain, norm, involution, output, oracle })
    }

    fn lattice(doc: &Document) -> Result<LatticeConfig, CliError> {
        #[derive(Clone, Copy)]
        enum Kind {
            Square,
            Disk,
        }
        #[derive(Clone, Copy)]
        enum Bc {
            Sides,
            Quadrant,
            Arcs,
        }
        let kind = doc
            .choice("lattice", "type", &[("square", Kind::Square), ("disk", Kind::Disk)])?
            .ok_or_else(|| CliError::Config("missing required key lattice.type".into()))?;
        let bc = doc
            .choice("lattice", "bc", &[("sides-pm", Bc::Sides), ("quadrant-pm", Bc::Quadrant), ("arcs", Bc::Arcs)])?
            .ok_or_else(|| CliError::Config("missing required key lattice.bc".into()))?;
        let arcs = doc.entry("lattice", "arcs");
        let bc = match (bc, arcs) {
            (Bc::Sides, None) => BoundarySpec::SidesPm,
            (Bc::Quadrant, None) => BoundarySpec::QuadrantPm,
            (Bc::Arcs, Some(e)) => parse_arcs(&e.value, e.line)?,
            (Bc::Arcs, None) => return Err(CliError::Config("lattice.bc = arcs needs lattice.arcs".into())),
            (_, Some(e)) => return Err(config_error(e.line, "lattice.arcs is only valid with bc = arcs")),
        };
        let reject = |keys: &[&str], kind: &str| {
            for key in keys {
                if let Some(e) = doc.entry("lattice", key) {
                    return Err(config_error(e.line, format!("lattice.{key} does not apply to a {kind} lattice")));
                }
            }
            Ok(())
        };
        match kind {
            Kind::Square => {
                reject(&["h", "seed", "jitter"], "square")?;
                Ok(LatticeConfig::Square {
                    n1: doc.require("lattice", "n1")?,
                    n2: doc.require("lattice", "n2")?,
                    bc,
                })
            }
            Kind::Disk => {
                reject(&["n1", "n2"], "disk")?;
                let mut mesh = MeshParams::new(doc.require("lattice", "h")?, doc.get("lattice", "seed")?.unwrap_or(0))
                    .map_err(|e| CliError::Config(e.to_string()))?;
                if let Some(jitter) = doc.get("lattice", "jitter")? {
                    mesh = mesh.with_jitter(jitter).map_err(|e| CliError::Config(e.to_string()))?;
                }
                Ok(LatticeConfig::Disk { mesh, bc })
            }
        }
    }

    fn chain(doc: &Document) -> Result<ChainConfig, CliError> {
        let flip_kind = doc
            .choice(
                "chain",
                "flip_kind",
                &[("none", FlipKind::None), ("exact", FlipKind::Exact), ("metropolized", FlipKind::Metropolized)],
            )?
            .unwrap_or(FlipKind::None);
        let eta = doc.get("chain", "eta")?.unwrap_or(0.0);
        let mut cfg = ChainConfig::new(
            doc.require("chain", "beta")?,
            eta,
            doc.require("chain", "iterations")?,
            doc.get("chain", "seed")?.unwrap_or(0),
            flip_kind,
        )
        .map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(initial) = doc.choice(
            "chain",
            "initial",
            &[
                ("all-minus", InitialState::AllMinus),
                ("all-plus", InitialState::AllPlus),
                ("random", InitialState::Random),
            ],
        )? {
            cfg.initial = initial;
        }
        Ok(cfg)
    }
}
