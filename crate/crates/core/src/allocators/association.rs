//! Client-to-edge association by device transfer and device exchange.
//!
//! The cost of an edge node `v` holding clients `S_v` is
//!
//! ```text
//! cost(v) = Σ_{c ∈ S_v} route(c → v) + node(v) + route(v → cloud)    (S_v ≠ ∅)
//! cost(v) = 0                                                         (S_v = ∅)
//! ```
//!
//! with the utilization-aware link and node terms of [`super::cost`]. Pairs of
//! edge nodes are visited in ascending order; within a pair, transfers
//! (v1 → v2, then v2 → v1) and then exchanges are tried in client order and
//! the first strictly improving move is applied. Sweeps repeat until a full
//! pass makes no move. Every move strictly lowers the total, so the loop
//! terminates.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::cost::{link_cost, node_cost, route_cost, Demand, Graded};
use crate::topology::{shortest_physical_route, NodeId, PhysicalGraph, Usage};
use crate::workload::TrainingRoundRequest;

#[serde_with::serde_as]
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    #[serde_as(as = "Vec<(_, _)>")]
    pub map: BTreeMap<NodeId, NodeId>,
    /// Clients whose end link cannot carry the update.
    pub unplaceable: Vec<NodeId>,
}

impl Assignment {
    /// Edge nodes holding at least one client, ascending.
    pub fn aggregators(&self) -> Vec<NodeId> {
        self.map.values().copied().collect::<BTreeSet<_>>().into_iter().collect()
    }
}

/// Costs the association works with, precomputed per request.
pub struct AssociationCosts {
    edges: Vec<NodeId>,
    /// `(client, edge)` → route cost, `+∞` if unreachable.
    client_edge: HashMap<(NodeId, NodeId), f64>,
    node: HashMap<NodeId, f64>,
    uplink: HashMap<NodeId, f64>,
}

impl AssociationCosts {
    pub fn new(g: &PhysicalGraph, usage: &Usage, r: &TrainingRoundRequest, cloud: NodeId) -> Self {
        let demand = Demand { node: r.node_demand, link: r.link_demand };
        let edges = g.edges();
        let mut between: HashMap<(NodeId, NodeId), f64> = HashMap::new();
        let mut client_edge = HashMap::new();
        for &c in &r.clients {
            let Some((home, end)) = g.attachment(c) else { continue };
            let first = link_cost(g, usage, end, demand.link);
            for &v in &edges {
                let rest = if v == home {
                    0.0
                } else {
                    *between.entry((home, v)).or_insert_with(|| {
                        shortest_physical_route(g, usage, home, v, demand.link)
                            .map_or(f64::INFINITY, |rt| route_cost(g, usage, &rt, demand.link))
                    })
                };
                client_edge.insert((c, v), first + rest);
            }
        }
        let node = edges.iter().map(|&v| (v, node_cost(g, usage, v, demand.node))).collect();
        let uplink = edges
            .iter()
            .map(|&v| {
                let c = shortest_physical_route(g, usage, v, cloud, demand.link)
                    .map_or(f64::INFINITY, |rt| route_cost(g, usage, &rt, demand.link));
                (v, c)
            })
            .collect();
        Self { edges, client_edge, node, uplink }
    }

    /// Builds costs from explicit tables (tests and hand-made examples).
    pub fn from_tables(
        edges: Vec<NodeId>,
        client_edge: HashMap<(NodeId, NodeId), f64>,
        node: HashMap<NodeId, f64>,
        uplink: HashMap<NodeId, f64>,
    ) -> Self {
        Self { edges, client_edge, node, uplink }
    }

    pub fn edge_cost(&self, v: NodeId, clients: &[NodeId]) -> Graded {
        if clients.is_empty() {
            return Graded::ZERO;
        }
        let mut total = Graded::of(self.node[&v]) + Graded::of(self.uplink[&v]);
        for c in clients {
            total = total + Graded::of(self.client_edge.get(&(*c, v)).copied().unwrap_or(f64::INFINITY));
        }
        total
    }

    pub fn total(&self, groups: &BTreeMap<NodeId, Vec<NodeId>>) -> Graded {
        groups.iter().fold(Graded::ZERO, |acc, (v, cs)| acc + self.edge_cost(*v, cs))
    }
}

pub fn hfel_edge_association(g: &PhysicalGraph, usage: &Usage, r: &TrainingRoundRequest, cloud: NodeId) -> Assignment {
    let costs = AssociationCosts::new(g, usage, r, cloud);
    let mut unplaceable = Vec::new();
    let mut start = BTreeMap::new();
    for &c in &r.clients {
        match g.attachment(c) {
            Some((home, end)) if usage.link_residual(g, end) >= r.link_demand => {
                start.insert(c, home);
            }
            _ => unplaceable.push(c),
        }
    }
    let map = associate(&costs, start);
    Assignment { map, unplaceable }
}

/// Local search from `start` (client → edge) until no pair improves.
pub fn associate(costs: &AssociationCosts, start: BTreeMap<NodeId, NodeId>) -> BTreeMap<NodeId, NodeId> {
    let mut groups: BTreeMap<NodeId, Vec<NodeId>> = costs.edges.iter().map(|&v| (v, Vec::new())).collect();
    for (&c, &v) in &start {
        groups.entry(v).or_default().push(c);
    }
    let edges: Vec<NodeId> = groups.keys().copied().collect();
    loop {
        let mut moved = false;
        for (i, &v1) in edges.iter().enumerate() {
            for &v2 in &edges[i + 1..] {
                while improve_pair(costs, &mut groups, v1, v2) {
                    moved = true;
                }
            }
        }
        if !moved {
            break;
        }
    }
    groups.into_iter().flat_map(|(v, cs)| cs.into_iter().map(move |c| (c, v))).collect()
}

fn improve_pair(costs: &AssociationCosts, groups: &mut BTreeMap<NodeId, Vec<NodeId>>, v1: NodeId, v2: NodeId) -> bool {
    let a = groups[&v1].clone();
    let b = groups[&v2].clone();
    if a.is_empty() && b.is_empty() {
        return false;
    }
    let before = costs.edge_cost(v1, &a) + costs.edge_cost(v2, &b);
    let try_move = |na: Vec<NodeId>, nb: Vec<NodeId>| {
        let after = costs.edge_cost(v1, &na) + costs.edge_cost(v2, &nb);
        after.improves_on(before).then_some((na, nb))
    };
    let without = |xs: &[NodeId], c: NodeId| xs.iter().copied().filter(|&x| x != c).collect::<Vec<_>>();
    let with = |xs: &[NodeId], c: NodeId| {
        let mut v = xs.to_vec();
        v.push(c);
        v.sort();
        v
    };
    let mut found = None;
    // Transfers v1 → v2, then v2 → v1.
    for &c in &a {
        if found.is_none() {
            found = try_move(without(&a, c), with(&b, c));
        }
    }
    for &c in &b {
        if found.is_none() {
            found = try_move(with(&a, c), without(&b, c));
        }
    }
    // Exchanges.
    for &c1 in &a {
        for &c2 in &b {
            if found.is_none() {
                found = try_move(with(&without(&a, c1), c2), with(&without(&b, c2), c1));
            }
        }
    }
    match found {
        Some((na, nb)) => {
            groups.insert(v1, na);
            groups.insert(v2, nb);
            true
        }
        None => false,
    }
}
