use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{LinkId, NodeId, PhysicalGraph, Usage};

/// A contiguous, loop-free sequence of physical links.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhysicalRoute {
    /// Visited nodes, `src` first and `dst` last.
    pub nodes: Vec<NodeId>,
    pub links: Vec<LinkId>,
}

impl PhysicalRoute {
    pub fn src(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn dst(&self) -> NodeId {
        *self.nodes.last().expect("route has at least one node")
    }

    pub fn hops(&self) -> usize {
        self.links.len()
    }
}

/// Minimum-hop route from `src` to `dst` using only links whose residual
/// capacity is at least `demand`. Among equally short routes the one with the
/// lexicographically smallest node sequence wins. `None` means infeasible.
pub fn shortest_physical_route(
    graph: &PhysicalGraph,
    usage: &Usage,
    src: NodeId,
    dst: NodeId,
    demand: u32,
) -> Option<PhysicalRoute> {
    shortest_route_to_any(graph, usage, src, &[dst], demand)
}

/// Like [`shortest_physical_route`] but stops at the first reachable target;
/// ties between targets follow the same hop-count then lexicographic order.
pub fn shortest_route_to_any(
    graph: &PhysicalGraph,
    usage: &Usage,
    src: NodeId,
    targets: &[NodeId],
    demand: u32,
) -> Option<PhysicalRoute> {
    let start = graph.node_index(src)?;
    if targets.contains(&src) {
        return None;
    }
    // Breadth-first search over neighbors in ascending id order visits each
    // layer in lexicographic order of the paths that reach it, so the first
    // parent recorded for a node is its lexicographically smallest shortest
    // predecessor.
    let n = graph.node_count();
    let mut parent: Vec<Option<(usize, LinkId)>> = vec![None; n];
    let mut seen = vec![false; n];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(i) = queue.pop_front() {
        let id = graph.nodes()[i].id;
        if i != start && targets.contains(&id) {
            return Some(unwind(graph, &parent, start, i));
        }
        for &(nb, link) in graph.neighbors(id) {
            let j = graph.node_index(nb).expect("neighbor exists");
            if seen[j] || usage.link_residual(graph, link) < demand {
                continue;
            }
            seen[j] = true;
            parent[j] = Some((i, link));
            queue.push_back(j);
        }
    }
    None
}

fn unwind(graph: &PhysicalGraph, parent: &[Option<(usize, LinkId)>], start: usize, end: usize) -> PhysicalRoute {
    let mut nodes = vec![graph.nodes()[end].id];
    let mut links = Vec::new();
    let mut cur = end;
    while cur != start {
        let (p, l) = parent[cur].expect("parent chain reaches start");
        links.push(l);
        nodes.push(graph.nodes()[p].id);
        cur = p;
    }
    nodes.reverse();
    links.reverse();
    PhysicalRoute { nodes, links }
}
