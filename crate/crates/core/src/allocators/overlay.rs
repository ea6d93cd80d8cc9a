//! Greedy aggregator overlay.
//!
//! Every aggregator gets candidate edges to every other aggregator (weighted
//! by [`aggregator_edge_cost`]) and to the cloud (weighted by the cloud
//! reporting cost of the current iteration, scaled by `cloud_cost_scale`).
//! The cheapest remaining edge is committed unless it closes a cycle, in
//! which case it is dropped for good. A committed source leaves the pool of
//! sources but stays a valid target, so chains of any length can form.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::cost::{aggregator_edge_cost, cloud_report_cost, CostParams, Demand};
use crate::topology::{shortest_physical_route, NodeId, PhysicalGraph, PhysicalRoute, Usage};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlayEdge {
    pub src: NodeId,
    pub dst: NodeId,
    pub weight: f64,
    /// Realizing route, filled in when the placement claims capacity.
    pub route: Option<PhysicalRoute>,
}

/// Overlay forest rooted at the cloud, edges in commit order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlayTopology {
    pub cloud: NodeId,
    pub edges: Vec<OverlayEdge>,
}

impl OverlayTopology {
    pub fn successor(&self, n: NodeId) -> Option<NodeId> {
        self.edges.iter().find(|e| e.src == n).map(|e| e.dst)
    }

    /// Acyclic, one outgoing edge per aggregator, every chain ends at the cloud.
    pub fn is_valid_forest(&self, aggregators: &[NodeId]) -> bool {
        let mut succ = BTreeMap::new();
        for e in &self.edges {
            if succ.insert(e.src, e.dst).is_some() || e.src == self.cloud {
                return false;
            }
        }
        if succ.len() != aggregators.len() || aggregators.iter().any(|a| !succ.contains_key(a)) {
            return false;
        }
        aggregators.iter().all(|&a| {
            let mut cur = a;
            for _ in 0..=succ.len() {
                match succ.get(&cur) {
                    Some(&n) => cur = n,
                    None => return cur == self.cloud,
                }
            }
            false
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshParams {
    pub xi: u32,
    /// Multiplier on the cloud reporting cost, to put it on the same scale
    /// as the utilization-aware pair costs.
    pub cloud_cost_scale: f64,
}

impl Default for MeshParams {
    fn default() -> Self {
        Self { xi: 1, cloud_cost_scale: 0.12 }
    }
}

/// The greedy on explicit costs. `pair(a, b)` and `cloud(a)` may be `+∞`;
/// `cloud_weight(v)` is the weight of any cloud edge at iteration `v`.
/// Returns committed `(src, dst, weight)` in order, or the lowest aggregator
/// that was left without a usable edge.
pub fn greedy_overlay(
    aggregators: &[NodeId],
    cloud: NodeId,
    pair: &dyn Fn(NodeId, NodeId) -> f64,
    cloud_reachable: &dyn Fn(NodeId) -> bool,
    cloud_weight: &dyn Fn(usize) -> f64,
) -> Result<Vec<(NodeId, NodeId, f64)>, NodeId> {
    let mut aggs = aggregators.to_vec();
    aggs.sort();
    aggs.dedup();
    let mut pairs: Vec<(NodeId, NodeId, f64)> = Vec::new();
    for &a in &aggs {
        for &b in &aggs {
            if a != b {
                let w = pair(a, b);
                if w.is_finite() {
                    pairs.push((a, b, w));
                }
            }
        }
    }
    let mut open: Vec<NodeId> = aggs.clone();
    let mut succ: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    let mut out = Vec::with_capacity(aggs.len());
    while !open.is_empty() {
        let v = out.len() + 1;
        let cw = cloud_weight(v);
        let mut best: Option<(f64, NodeId, NodeId)> = None;
        let better = |w: f64, s: NodeId, t: NodeId, best: &Option<(f64, NodeId, NodeId)>| {
            best.is_none_or(|(bw, bs, bt)| w < bw || (w == bw && (s, t) < (bs, bt)))
        };
        for &(s, t, w) in &pairs {
            if open.binary_search(&s).is_ok() && better(w, s, t, &best) {
                best = Some((w, s, t));
            }
        }
        for &s in &open {
            if cloud_reachable(s) && cw.is_finite() && better(cw, s, cloud, &best) {
                best = Some((cw, s, cloud));
            }
        }
        let Some((w, s, t)) = best else {
            return Err(open[0]);
        };
        if t != cloud && reaches(&succ, t, s) {
            pairs.retain(|&(a, b, _)| (a, b) != (s, t));
            continue;
        }
        succ.insert(s, t);
        open.retain(|&x| x != s);
        pairs.retain(|&(a, b, _)| a != s && (a, b) != (t, s));
        out.push((s, t, w));
    }
    Ok(out)
}

fn reaches(succ: &BTreeMap<NodeId, NodeId>, from: NodeId, target: NodeId) -> bool {
    let mut cur = from;
    loop {
        if cur == target {
            return true;
        }
        match succ.get(&cur) {
            Some(&n) => cur = n,
            None => return false,
        }
    }
}

/// Overlay over the current network state; routes are left for the caller.
pub fn hfel_mesh_overlay(
    g: &PhysicalGraph,
    usage: &Usage,
    aggregators: &[NodeId],
    cloud: NodeId,
    demand: Demand,
    p: MeshParams,
) -> Result<OverlayTopology, NodeId> {
    let total = aggregators.len();
    let pair = |a: NodeId, b: NodeId| aggregator_edge_cost(g, usage, a, b, demand);
    let reachable = |a: NodeId| shortest_physical_route(g, usage, a, cloud, demand.link).is_some();
    let cloud_weight =
        |v: usize| p.cloud_cost_scale * cloud_report_cost(&CostParams { xi: p.xi, aggregators: total, iteration: v });
    let committed = greedy_overlay(aggregators, cloud, &pair, &reachable, &cloud_weight)?;
    Ok(OverlayTopology {
        cloud,
        edges: committed.into_iter().map(|(src, dst, weight)| OverlayEdge { src, dst, weight, route: None }).collect(),
    })
}
