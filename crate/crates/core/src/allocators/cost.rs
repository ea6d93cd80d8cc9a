use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::topology::{shortest_physical_route, LinkId, NodeId, PhysicalGraph, PhysicalRoute, Usage};

/// Per-component demand of one request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Demand {
    pub node: u32,
    pub link: u32,
}

/// Parameters of the cloud reporting cost `𝕍 / (ξ·v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    pub xi: u32,
    /// `𝕍`, the number of aggregators being connected.
    pub aggregators: usize,
    /// `v`, 1-based iteration of the overlay construction.
    pub iteration: usize,
}

pub fn cloud_report_cost(p: &CostParams) -> f64 {
    p.aggregators as f64 / (p.xi as f64 * p.iteration as f64)
}

/// `β·σ_e / (C − η + σ_e)`, or `+∞` when the residual is below the demand.
pub fn link_cost(g: &PhysicalGraph, usage: &Usage, link: LinkId, demand: u32) -> f64 {
    let residual = usage.link_residual(g, link);
    if residual < demand {
        return f64::INFINITY;
    }
    let beta = g.weights().beta(g.link(link).kind);
    beta * demand as f64 / (residual as f64 + demand as f64)
}

/// `α·σ_n / (C − η + σ_n)`, or `+∞` when the residual is below the demand.
pub fn node_cost(g: &PhysicalGraph, usage: &Usage, node: NodeId, demand: u32) -> f64 {
    let residual = usage.node_residual(g, node);
    if residual < demand {
        return f64::INFINITY;
    }
    let alpha = g.node(node).map_or(f64::INFINITY, |n| g.weights().alpha(n.kind));
    alpha * demand as f64 / (residual as f64 + demand as f64)
}

pub fn route_cost(g: &PhysicalGraph, usage: &Usage, route: &PhysicalRoute, demand: u32) -> f64 {
    route.links.iter().map(|&l| link_cost(g, usage, l, demand)).sum()
}

/// Cost of forwarding one model from `src` to `tgt` and aggregating it there:
/// the links of the min-hop feasible route plus the target's node term.
/// `+∞` if no feasible route exists.
pub fn aggregator_edge_cost(g: &PhysicalGraph, usage: &Usage, src: NodeId, tgt: NodeId, demand: Demand) -> f64 {
    match shortest_physical_route(g, usage, src, tgt, demand.link) {
        Some(route) => route_cost(g, usage, &route, demand.link) + node_cost(g, usage, tgt, demand.node),
        None => f64::INFINITY,
    }
}

/// A cost with infeasible terms counted separately, so that a move which
/// removes an infeasibility counts as an improvement even though both sides
/// are infinite in plain arithmetic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Graded {
    pub infeasible: u32,
    pub value: f64,
}

impl Graded {
    pub const ZERO: Graded = Graded { infeasible: 0, value: 0.0 };

    pub fn of(x: f64) -> Self {
        if x.is_finite() {
            Graded { infeasible: 0, value: x }
        } else {
            Graded { infeasible: 1, value: 0.0 }
        }
    }

    /// Strict improvement with a relative tolerance on the finite part.
    pub fn improves_on(self, old: Graded) -> bool {
        match self.infeasible.cmp(&old.infeasible) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => self.value < old.value - 1e-12 * old.value.abs().max(1.0),
        }
    }
}

impl std::ops::Add for Graded {
    type Output = Graded;

    fn add(self, o: Graded) -> Graded {
        Graded { infeasible: self.infeasible + o.infeasible, value: self.value + o.value }
    }
}
