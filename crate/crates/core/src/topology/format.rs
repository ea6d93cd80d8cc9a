//! Line-oriented topology files.
//!
//! ```text
//! # comment
//! node <id> <client|edge|cloud> <capacity>
//! link <id_a> <id_b> <end|edge|cloud> <capacity_mbps>
//! ```

use std::fmt::Write as _;

use super::{LinkKind, NodeId, NodeKind, PhysicalGraph, PhysicalNode};
use crate::error::{Error, Result};

pub fn load_topology(name: &str, document: &str) -> Result<PhysicalGraph> {
    let mut nodes = Vec::new();
    let mut links = Vec::new();
    for (lineno, raw) in document.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parse_err = |message: String| Error::Parse { line: line_no, message };
        match fields[0] {
            "node" => {
                if fields.len() != 4 {
                    return Err(parse_err(format!("expected `node <id> <kind> <capacity>`, got `{line}`")));
                }
                let id = parse_id(fields[1]).map_err(parse_err)?;
                let kind = match fields[2] {
                    "client" => NodeKind::Client,
                    "edge" => NodeKind::Edge,
                    "cloud" => NodeKind::Cloud,
                    other => return Err(parse_err(format!("unknown node kind `{other}`"))),
                };
                let capacity = parse_capacity(fields[3], line_no, &format!("node {id}"))?;
                nodes.push(PhysicalNode { id, kind, capacity });
            }
            "link" => {
                if fields.len() != 5 {
                    return Err(parse_err(format!(
                        "expected `link <id_a> <id_b> <kind> <capacity_mbps>`, got `{line}`"
                    )));
                }
                let a = parse_id(fields[1]).map_err(parse_err)?;
                let b = parse_id(fields[2]).map_err(parse_err)?;
                let kind = match fields[3] {
                    "end" => LinkKind::End,
                    "edge" => LinkKind::Edge,
                    "cloud" => LinkKind::Cloud,
                    other => return Err(parse_err(format!("unknown link kind `{other}`"))),
                };
                let capacity = parse_capacity(fields[4], line_no, &format!("link {a} {b}"))?;
                links.push((a, b, kind, capacity));
            }
            other => return Err(parse_err(format!("unknown record `{other}`"))),
        }
    }
    PhysicalGraph::new(name, nodes, links)
}

fn parse_id(s: &str) -> std::result::Result<NodeId, String> {
    s.parse::<u32>().map(NodeId).map_err(|_| format!("invalid node id `{s}`"))
}

fn parse_capacity(s: &str, line: usize, element: &str) -> Result<u32> {
    let v: i64 = s.parse().map_err(|_| Error::Parse { line, message: format!("invalid capacity `{s}`") })?;
    if v < 0 {
        return Err(Error::validation(format!("{element} (line {line})"), "negative capacity"));
    }
    u32::try_from(v).map_err(|_| Error::Parse { line, message: format!("capacity `{s}` out of range") })
}

pub fn save_topology(graph: &PhysicalGraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# topology {}", graph.name());
    for n in graph.nodes() {
        let _ = writeln!(out, "node {} {} {}", n.id, n.kind.as_str(), n.capacity);
    }
    for l in graph.links() {
        let _ = writeln!(out, "link {} {} {} {}", l.a, l.b, l.kind.as_str(), l.capacity);
    }
    out
}
