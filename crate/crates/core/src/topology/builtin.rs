//! Built-in `medium` and `large` topologies.
//!
//! Node numbering: the cloud is node 0, edge nodes are `1..=E`, and the
//! clients of edge `i` follow contiguously after the edge nodes. Edge nodes
//! form a ring with a fixed set of chords; a few gateway edges hold the cloud
//! links. The layout does not depend on any seed.

use super::{LinkKind, NodeId, NodeKind, PhysicalGraph, PhysicalNode};
use crate::error::{Error, Result};

pub const BUILTIN_NAMES: [&str; 2] = ["medium", "large"];

pub const CLIENT_CAPACITY: u32 = 1;
pub const EDGE_CAPACITY: u32 = 200;
pub const CLOUD_CAPACITY: u32 = 4000;
pub const END_LINK_MBPS: u32 = 200;
pub const EDGE_LINK_MBPS: u32 = 2000;
pub const CLOUD_LINK_MBPS: u32 = 4000;

struct Layout {
    edges: u32,
    clients_per_edge: u32,
    chords: &'static [(u32, u32)],
    gateways: &'static [u32],
}

const MEDIUM: Layout = Layout {
    edges: 11,
    clients_per_edge: 20,
    chords: &[(1, 6), (3, 9), (5, 10)],
    gateways: &[1],
};

const LARGE: Layout = Layout {
    edges: 24,
    clients_per_edge: 10,
    chords: &[(1, 13), (4, 10), (7, 19), (16, 22), (3, 21), (9, 15)],
    gateways: &[1],
};

pub fn builtin_topology(name: &str) -> Result<PhysicalGraph> {
    let layout = match name {
        "medium" => &MEDIUM,
        "large" => &LARGE,
        other => {
            return Err(Error::Config(format!(
                "unknown builtin topology `{other}` (expected one of {BUILTIN_NAMES:?})"
            )))
        }
    };
    build(name, layout)
}

fn build(name: &str, layout: &Layout) -> Result<PhysicalGraph> {
    let e = layout.edges;
    let mut nodes = vec![PhysicalNode { id: NodeId(0), kind: NodeKind::Cloud, capacity: CLOUD_CAPACITY }];
    nodes.extend((1..=e).map(|i| PhysicalNode { id: NodeId(i), kind: NodeKind::Edge, capacity: EDGE_CAPACITY }));
    let mut links = Vec::new();
    for i in 1..=e {
        let j = i % e + 1;
        links.push((NodeId(i), NodeId(j), LinkKind::Edge, EDGE_LINK_MBPS));
    }
    for &(a, b) in layout.chords {
        links.push((NodeId(a), NodeId(b), LinkKind::Edge, EDGE_LINK_MBPS));
    }
    for &g in layout.gateways {
        links.push((NodeId(g), NodeId(0), LinkKind::Cloud, CLOUD_LINK_MBPS));
    }
    let mut next = e + 1;
    for i in 1..=e {
        for _ in 0..layout.clients_per_edge {
            nodes.push(PhysicalNode { id: NodeId(next), kind: NodeKind::Client, capacity: CLIENT_CAPACITY });
            links.push((NodeId(next), NodeId(i), LinkKind::End, END_LINK_MBPS));
            next += 1;
        }
    }
    PhysicalGraph::new(name, nodes, links)
}
