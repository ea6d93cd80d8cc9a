use serde::{Deserialize, Serialize};

use super::{NodeId, NodeKind, PhysicalGraph};
use crate::error::{Error, Result};

/// Directed link of the auxiliary graph. It may bypass intermediate physical
/// nodes; its weight is assigned by whichever allocator uses the graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuxLink {
    pub src: NodeId,
    pub dst: NodeId,
    pub weight: Option<f64>,
}

/// Complete directed graph over aggregator candidates plus cloud nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxiliaryGraph {
    /// Candidates first (ascending), then clouds (ascending).
    pub nodes: Vec<NodeId>,
    pub links: Vec<AuxLink>,
}

impl AuxiliaryGraph {
    pub fn link_index(&self, src: NodeId, dst: NodeId) -> Option<usize> {
        self.links.iter().position(|l| l.src == src && l.dst == dst)
    }

    pub fn contains(&self, n: NodeId) -> bool {
        self.nodes.contains(&n)
    }
}

pub fn build_auxiliary_graph(graph: &PhysicalGraph, candidates: &[NodeId]) -> Result<AuxiliaryGraph> {
    let mut nodes: Vec<NodeId> = Vec::new();
    let mut sorted = candidates.to_vec();
    sorted.sort();
    sorted.dedup();
    for c in sorted {
        match graph.kind(c) {
            Some(NodeKind::Edge) => nodes.push(c),
            _ => return Err(Error::validation(format!("node {c}"), "aggregator candidate is not an edge node")),
        }
    }
    nodes.extend(graph.clouds());
    let mut links = Vec::with_capacity(nodes.len() * nodes.len().saturating_sub(1));
    for &src in &nodes {
        for &dst in &nodes {
            if src != dst {
                links.push(AuxLink { src, dst, weight: None });
            }
        }
    }
    Ok(AuxiliaryGraph { nodes, links })
}
