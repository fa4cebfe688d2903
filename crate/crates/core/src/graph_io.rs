//! Line-oriented text format for [`IsingGraph`].
//!
//! ```text
//! ising-graph v1 <interior_count> <boundary_count>
//! b <id> <+1|-1> [<x> <y>]
//! i <id> <x> <y>
//! e <id> <id>
//! ```
//!
//! Coordinates use the shortest decimal that parses back to the same `f64`,
//! so `write_graph(&read_graph(text)?)` reproduces canonical text exactly.
//! Either every vertex carries coordinates or none does.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{IsingGraph, Point, VertexId};

const MAGIC: &str = "ising-graph";
const VERSION: &str = "v1";

pub fn write_graph(g: &IsingGraph) -> String {
    let mut out = String::new();
    let n = g.interior_count();
    writeln!(out, "{MAGIC} {VERSION} {} {}", n, g.boundary_count()).unwrap();
    for (k, &f) in g.boundary_spins().iter().enumerate() {
        let id = n + k;
        write!(out, "b {id} {}", if f > 0 { "+1" } else { "-1" }).unwrap();
        if let Some(p) = g.position(id as VertexId) {
            write!(out, " {} {}", p.x, p.y).unwrap();
        }
        out.push('\n');
    }
    if let Some(points) = g.embedding() {
        for (id, p) in points[..n].iter().enumerate() {
            writeln!(out, "i {id} {} {}", p.x, p.y).unwrap();
        }
    }
    for &(u, v) in g.edges() {
        writeln!(out, "e {u} {v}").unwrap();
    }
    out
}

pub fn read_graph(text: &str) -> Result<IsingGraph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (line_no, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 || fields[0] != MAGIC || fields[1] != VERSION {
        return Err(parse_err(
            line_no,
            format!("expected `{MAGIC} {VERSION} <interior> <boundary>`"),
        ));
    }
    let interior: usize = parse_field(line_no, fields[2], "interior count")?;
    let boundary: usize = parse_field(line_no, fields[3], "boundary count")?;
    let total = interior + boundary;

    let mut spins: Vec<Option<i8>> = vec![None; boundary];
    let mut coords: Vec<Option<Point>> = vec![None; total];
    let mut any_coords = false;
    let mut edges = Vec::new();

    for (line_no, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "b" => {
                if fields.len() != 3 && fields.len() != 5 {
                    return Err(parse_err(line_no, "expected `b <id> <+1|-1> [<x> <y>]`"));
                }
                let id: usize = parse_field(line_no, fields[1], "vertex id")?;
                if id < interior || id >= total {
                    return Err(parse_err(line_no, format!("{id} is not a boundary id")));
                }
                let f = match fields[2] {
                    "+1" => 1,
                    "-1" => -1,
                    other => return Err(parse_err(line_no, format!("bad boundary spin `{other}`"))),
                };
                if spins[id - interior].replace(f).is_some() {
                    return Err(parse_err(line_no, format!("boundary vertex {id} listed twice")));
                }
                if fields.len() == 5 {
                    coords[id] = Some(parse_point(line_no, fields[3], fields[4])?);
                    any_coords = true;
                }
            }
            "i" => {
                if fields.len() != 4 {
                    return Err(parse_err(line_no, "expected `i <id> <x> <y>`"));
                }
                let id: usize = parse_field(line_no, fields[1], "vertex id")?;
                if id >= interior {
                    return Err(parse_err(line_no, format!("{id} is not an interior id")));
                }
                if coords[id].replace(parse_point(line_no, fields[2], fields[3])?).is_some() {
                    return Err(parse_err(line_no, format!("interior vertex {id} listed twice")));
                }
                any_coords = true;
            }
            "e" => {
                if fields.len() != 3 {
                    return Err(parse_err(line_no, "expected `e <id> <id>`"));
                }
                let u: VertexId = parse_field(line_no, fields[1], "vertex id")?;
                let v: VertexId = parse_field(line_no, fields[2], "vertex id")?;
                edges.push((u, v));
            }
            other => return Err(parse_err(line_no, format!("unknown record `{other}`"))),
        }
    }

    let boundary_spins = spins
        .into_iter()
        .enumerate()
        .map(|(k, f)| f.ok_or_else(|| parse_err(0, format!("boundary vertex {} missing", interior + k))))
        .collect::<Result<Vec<i8>>>()?;

    let embedding = if any_coords {
        let points = coords
            .into_iter()
            .enumerate()
            .map(|(id, p)| p.ok_or_else(|| parse_err(0, format!("vertex {id} has no coordinates"))))
            .collect::<Result<Vec<Point>>>()?;
        Some(points)
    } else {
        None
    };

    IsingGraph::new(interior, boundary_spins, edges, embedding)
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_field<T: std::str::FromStr>(line: usize, field: &str, what: &str) -> Result<T> {
    field
        .parse()
        .map_err(|_| parse_err(line, format!("invalid {what} `{field}`")))
}

fn parse_point(line: usize, x: &str, y: &str) -> Result<Point> {
    Ok(Point::new(
        parse_field(line, x, "coordinate")?,
        parse_field(line, y, "coordinate")?,
    ))
}
