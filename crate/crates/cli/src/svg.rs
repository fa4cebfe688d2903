//! Minimal SVG documents with fixed view boxes.

use std::fmt::Write as _;

use clusterflip::{IsingGraph, MatchingReport, Point};

const SIZE: f64 = 600.0;
const MARGIN: f64 = 20.0;

/// Affine map from the embedding's bounding box onto the square canvas,
/// with y pointing up.
struct Frame {
    min: Point,
    scale: f64,
}

impl Frame {
    fn fit<'a>(points: impl IntoIterator<Item = &'a Point>) -> Self {
        let (mut lo, mut hi) = (Point::new(f64::INFINITY, f64::INFINITY), Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for p in points {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let span = (hi.x - lo.x).max(hi.y - lo.y);
        let scale = if span > 0.0 { (SIZE - 2.0 * MARGIN) / span } else { 1.0 };
        Self { min: lo, scale }
    }

    fn map(&self, p: Point) -> (f64, f64) {
        (
            MARGIN + (p.x - self.min.x) * self.scale,
            SIZE - MARGIN - (p.y - self.min.y) * self.scale,
        )
    }
}

fn header(out: &mut String, width: f64, height: f64) {
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width} {height}" width="{width}" height="{height}">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="{width}" height="{height}" fill="white"/>"#).unwrap();
}

/// Edges in grey, boundary sites black for +1 and white for -1.
pub fn lattice(g: &IsingGraph) -> String {
    let points = g.embedding().expect("generated lattices carry an embedding");
    let frame = Frame::fit(points);
    let mut out = String::new();
    header(&mut out, SIZE, SIZE);
    writeln!(out, r##"<g stroke="#999" stroke-width="0.5">"##).unwrap();
    for &(u, v) in g.edges() {
        let (x1, y1) = frame.map(points[u as usize]);
        let (x2, y2) = frame.map(points[v as usize]);
        writeln!(out, r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}"/>"#).unwrap();
    }
    writeln!(out, "</g>").unwrap();
    let radius = (0.25 * frame.scale * nearest_spacing(g)).clamp(1.0, 6.0);
    for (k, &f) in g.boundary_spins().iter().enumerate() {
        let (x, y) = frame.map(points[g.interior_count() + k]);
        let fill = if f > 0 { "black" } else { "white" };
        writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{radius:.2}" fill="{fill}" stroke="black"/>"#).unwrap();
    }
    out.push_str("</svg>\n");
    out
}

fn nearest_spacing(g: &IsingGraph) -> f64 {
    let points = g.embedding().unwrap_or(&[]);
    g.edges()
        .iter()
        .map(|&(u, v)| {
            let (a, b) = (points[u as usize], points[v as usize]);
            (a.x - b.x).hypot(a.y - b.y)
        })
        .fold(f64::INFINITY, f64::min)
        .min(1.0)
}

/// Average spin against iteration, one polyline per trace, y in [-1, 1].
pub fn avg_spin_plot(traces: &[Vec<f64>]) -> String {
    const W: f64 = 800.0;
    const H: f64 = 300.0;
    const COLORS: [&str; 4] = ["#1f4e99", "#b33c1a", "#2d7a2d", "#7a2d7a"];
    let mut out = String::new();
    header(&mut out, W, H);
    let y_of = |a: f64| H / 2.0 - a * (H / 2.0 - MARGIN);
    for level in [-1.0, 0.0, 1.0] {
        let y = y_of(level);
        let dash = if level == 0.0 { r#" stroke-dasharray="4 4""# } else { "" };
        writeln!(out, r##"<line x1="{MARGIN}" y1="{y}" x2="{}" y2="{y}" stroke="#bbb"{dash}/>"##, W - MARGIN).unwrap();
    }
    for (k, trace) in traces.iter().enumerate() {
        let dx = (W - 2.0 * MARGIN) / trace.len().max(1) as f64;
        write!(out, r#"<polyline fill="none" stroke="{}" stroke-width="0.8" points=""#, COLORS[k % COLORS.len()]).unwrap();
        for (i, &a) in trace.iter().enumerate() {
            write!(out, "{:.2},{:.2} ", MARGIN + (i as f64 + 1.0) * dx, y_of(a)).unwrap();
        }
        out.push_str("\"/>\n");
    }
    out.push_str("</svg>\n");
    out
}

/// Transport map: `+` at each image `mu(x_i)`, a circle at each site
/// `x_j`, and a segment from `mu(x_i)` to `x_{m(i)}`.
pub fn transport_map(g: &IsingGraph, report: &MatchingReport) -> String {
    let points = g.embedding().expect("matching needs an embedding");
    let n = g.interior_count();
    let frame = Frame::fit(points[..n].iter().chain(&report.images));
    let arm = 3.0;
    let mut out = String::new();
    header(&mut out, SIZE, SIZE);
    writeln!(out, r##"<g stroke="#c33" stroke-width="0.6">"##).unwrap();
    for (i, &j) in report.pairs.iter().enumerate() {
        let (x1, y1) = frame.map(report.images[i]);
        let (x2, y2) = frame.map(points[j as usize]);
        writeln!(out, r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}"/>"#).unwrap();
    }
    writeln!(out, "</g>").unwrap();
    writeln!(out, r#"<g stroke="black" stroke-width="0.6" fill="none">"#).unwrap();
    for p in &report.images {
        let (x, y) = frame.map(*p);
        writeln!(
            out,
            r#"<path d="M{:.2} {y:.2}H{:.2}M{x:.2} {:.2}V{:.2}"/>"#,
            x - arm,
            x + arm,
            y - arm,
            y + arm
        )
        .unwrap();
    }
    for p in &points[..n] {
        let (x, y) = frame.map(*p);
        writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{arm}"/>"#).unwrap();
    }
    writeln!(out, "</g>").unwrap();
    out.push_str("</svg>\n");
    out
}
