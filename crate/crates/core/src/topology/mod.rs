//! Physical MEC/SD-WAN substrate.
//!
//! A [`PhysicalGraph`] holds typed nodes (clients, edge nodes, cloud servers)
//! and typed bidirectional links with one shared capacity pool per link.
//! Occupied capacity is not stored on the graph: it lives in a [`Usage`]
//! snapshot owned by whoever mutates it (the simulation engine), so graph
//! queries stay pure.

mod auxiliary;
mod builtin;
mod format;
mod routing;

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use auxiliary::{build_auxiliary_graph, AuxLink, AuxiliaryGraph};
pub use builtin::{builtin_topology, BUILTIN_NAMES};
pub use format::{load_topology, save_topology};
pub use routing::{shortest_physical_route, shortest_route_to_any, PhysicalRoute};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Index of a link inside its graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LinkId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Client,
    Edge,
    Cloud,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Client => "client",
            NodeKind::Edge => "edge",
            NodeKind::Cloud => "cloud",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkKind {
    End,
    Edge,
    Cloud,
}

impl LinkKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkKind::End => "end",
            LinkKind::Edge => "edge",
            LinkKind::Cloud => "cloud",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhysicalNode {
    pub id: NodeId,
    pub kind: NodeKind,
    /// Computing units.
    pub capacity: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhysicalLink {
    pub id: LinkId,
    pub a: NodeId,
    pub b: NodeId,
    pub kind: LinkKind,
    /// Mbps, shared by both directions.
    pub capacity: u32,
}

impl PhysicalLink {
    pub fn other(&self, n: NodeId) -> NodeId {
        if self.a == n {
            self.b
        } else {
            self.a
        }
    }
}

/// Cost weights of the cumulative weighted capacity objective, per component kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub alpha_client: f64,
    pub alpha_edge: f64,
    pub alpha_cloud: f64,
    pub beta_end: f64,
    pub beta_edge: f64,
    pub beta_cloud: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Self {
            alpha_client: 1.0,
            alpha_edge: 1.0,
            alpha_cloud: 1.0,
            beta_end: 1.0,
            beta_edge: 1.0,
            beta_cloud: 10.0,
        }
    }
}

impl Weights {
    pub fn alpha(&self, kind: NodeKind) -> f64 {
        match kind {
            NodeKind::Client => self.alpha_client,
            NodeKind::Edge => self.alpha_edge,
            NodeKind::Cloud => self.alpha_cloud,
        }
    }

    pub fn beta(&self, kind: LinkKind) -> f64 {
        match kind {
            LinkKind::End => self.beta_end,
            LinkKind::Edge => self.beta_edge,
            LinkKind::Cloud => self.beta_cloud,
        }
    }
}

/// Validated physical graph `G_p = (N, E)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalGraph {
    name: String,
    nodes: Vec<PhysicalNode>,
    links: Vec<PhysicalLink>,
    index: BTreeMap<NodeId, usize>,
    /// Per node index: (neighbor, link) sorted by neighbor id.
    adjacency: Vec<Vec<(NodeId, LinkId)>>,
    weights: Weights,
}

impl PhysicalGraph {
    /// Builds and validates a graph. Nodes may be given in any order; links
    /// are re-numbered in the given order.
    pub fn new(
        name: impl Into<String>,
        mut nodes: Vec<PhysicalNode>,
        links: Vec<(NodeId, NodeId, LinkKind, u32)>,
    ) -> Result<Self> {
        nodes.sort_by_key(|n| n.id);
        let mut index = BTreeMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if index.insert(n.id, i).is_some() {
                return Err(Error::validation(format!("node {}", n.id), "duplicate node id"));
            }
        }
        let mut adjacency = vec![Vec::new(); nodes.len()];
        let mut out_links = Vec::with_capacity(links.len());
        let mut seen_pairs = BTreeMap::new();
        for (i, (a, b, kind, capacity)) in links.into_iter().enumerate() {
            let element = format!("link {a} {b}");
            let (ia, ib) = match (index.get(&a), index.get(&b)) {
                (Some(&ia), Some(&ib)) => (ia, ib),
                _ => return Err(Error::validation(element, "endpoint is not a declared node")),
            };
            if a == b {
                return Err(Error::validation(element, "self loop"));
            }
            let key = (a.min(b), a.max(b));
            if seen_pairs.insert(key, i).is_some() {
                return Err(Error::validation(element, "duplicate link between the same nodes"));
            }
            let (ka, kb) = (nodes[ia].kind, nodes[ib].kind);
            let expected = match (ka, kb) {
                (NodeKind::Client, NodeKind::Edge) | (NodeKind::Edge, NodeKind::Client) => LinkKind::End,
                (NodeKind::Edge, NodeKind::Edge) => LinkKind::Edge,
                (NodeKind::Edge, NodeKind::Cloud) | (NodeKind::Cloud, NodeKind::Edge) => LinkKind::Cloud,
                (NodeKind::Client, _) | (_, NodeKind::Client) => {
                    return Err(Error::validation(element, "clients may only attach to edge nodes"))
                }
                (NodeKind::Cloud, NodeKind::Cloud) => {
                    return Err(Error::validation(element, "cloud-to-cloud links are not supported"))
                }
            };
            if kind != expected {
                return Err(Error::validation(
                    element,
                    format!("link kind {} does not match endpoints (expected {})", kind.as_str(), expected.as_str()),
                ));
            }
            let id = LinkId(i);
            adjacency[ia].push((b, id));
            adjacency[ib].push((a, id));
            out_links.push(PhysicalLink { id, a, b, kind, capacity });
        }
        for adj in &mut adjacency {
            adj.sort();
        }
        let graph = Self { name: name.into(), nodes, links: out_links, index, adjacency, weights: Weights::default() };
        graph.validate()?;
        Ok(graph)
    }

    fn validate(&self) -> Result<()> {
        if !self.nodes.iter().any(|n| n.kind == NodeKind::Cloud) {
            return Err(Error::validation("graph", "no cloud node"));
        }
        for n in &self.nodes {
            if n.kind == NodeKind::Client {
                let degree = self.neighbors(n.id).len();
                if degree > 1 {
                    return Err(Error::validation(format!("client {}", n.id), "client multi-homing"));
                }
                if degree == 0 {
                    return Err(Error::validation(format!("client {}", n.id), "client has no end link"));
                }
            }
        }
        // Connectivity.
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(i) = queue.pop_front() {
            for &(nb, _) in &self.adjacency[i] {
                let j = self.index[&nb];
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::validation(format!("node {}", self.nodes[i].id), "graph is disconnected"));
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn with_weights(mut self, weights: Weights) -> Self {
        self.weights = weights;
        self
    }

    pub fn nodes(&self) -> &[PhysicalNode] {
        &self.nodes
    }

    pub fn links(&self) -> &[PhysicalLink] {
        &self.links
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    /// Dense index of a node, used for [`Usage`] vectors.
    pub fn node_index(&self, id: NodeId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn node(&self, id: NodeId) -> Option<&PhysicalNode> {
        self.node_index(id).map(|i| &self.nodes[i])
    }

    pub fn link(&self, id: LinkId) -> &PhysicalLink {
        &self.links[id.0]
    }

    pub fn kind(&self, id: NodeId) -> Option<NodeKind> {
        self.node(id).map(|n| n.kind)
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.index.contains_key(&id)
    }

    /// Neighbors with the connecting link, sorted by neighbor id.
    pub fn neighbors(&self, id: NodeId) -> &[(NodeId, LinkId)] {
        self.node_index(id).map(|i| self.adjacency[i].as_slice()).unwrap_or(&[])
    }

    pub fn link_between(&self, a: NodeId, b: NodeId) -> Option<LinkId> {
        self.neighbors(a).iter().find(|(n, _)| *n == b).map(|&(_, l)| l)
    }

    pub fn ids_of(&self, kind: NodeKind) -> Vec<NodeId> {
        self.nodes.iter().filter(|n| n.kind == kind).map(|n| n.id).collect()
    }

    pub fn clients(&self) -> Vec<NodeId> {
        self.ids_of(NodeKind::Client)
    }

    pub fn edges(&self) -> Vec<NodeId> {
        self.ids_of(NodeKind::Edge)
    }

    pub fn clouds(&self) -> Vec<NodeId> {
        self.ids_of(NodeKind::Cloud)
    }

    /// The edge node a client attaches to, with its end link.
    pub fn attachment(&self, client: NodeId) -> Option<(NodeId, LinkId)> {
        match self.kind(client)? {
            NodeKind::Client => self.neighbors(client).first().copied(),
            _ => None,
        }
    }

    /// Mean number of clients per edge node, rounded to the nearest integer.
    pub fn clients_per_edge(&self) -> usize {
        let edges = self.edges().len().max(1);
        (self.clients().len() as f64 / edges as f64).round() as usize
    }
}

/// Occupied capacity (`η`) of every node and link of one graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub nodes: Vec<u32>,
    pub links: Vec<u32>,
}

impl Usage {
    pub fn idle(graph: &PhysicalGraph) -> Self {
        Self { nodes: vec![0; graph.node_count()], links: vec![0; graph.link_count()] }
    }

    pub fn link_residual(&self, graph: &PhysicalGraph, link: LinkId) -> u32 {
        graph.link(link).capacity.saturating_sub(self.links[link.0])
    }

    pub fn node_residual(&self, graph: &PhysicalGraph, node: NodeId) -> u32 {
        match graph.node_index(node) {
            Some(i) => graph.nodes()[i].capacity.saturating_sub(self.nodes[i]),
            None => 0,
        }
    }

    pub fn node_used(&self, graph: &PhysicalGraph, node: NodeId) -> u32 {
        graph.node_index(node).map(|i| self.nodes[i]).unwrap_or(0)
    }

    pub fn is_idle(&self) -> bool {
        self.nodes.iter().all(|&u| u == 0) && self.links.iter().all(|&u| u == 0)
    }
}
