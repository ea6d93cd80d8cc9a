use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::association::{hfel_edge_association, Assignment};
use super::cost::Demand;
use super::overlay::{hfel_mesh_overlay, MeshParams, OverlayEdge, OverlayTopology};
use crate::error::Error;
use crate::topology::{shortest_physical_route, LinkId, NodeId, PhysicalGraph, PhysicalRoute, Usage};
use crate::workload::{request_link_load, TrainingRoundRequest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Hfel,
    HfelMesh,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Hfel => "hfel",
            Strategy::HfelMesh => "hfel_mesh",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "hfel" => Ok(Strategy::Hfel),
            "hfel_mesh" | "hfel-mesh" => Ok(Strategy::HfelMesh),
            other => Err(Error::Config(format!("unknown strategy `{other}` (expected hfel or hfel_mesh)"))),
        }
    }
}

/// Capacity a placement takes from each component.
#[serde_with::serde_as]
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claims {
    #[serde_as(as = "Vec<(_, _)>")]
    pub nodes: BTreeMap<NodeId, u32>,
    #[serde_as(as = "Vec<(_, _)>")]
    pub links: BTreeMap<LinkId, u32>,
}

impl Claims {
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.links.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FailureReason {
    /// The client's end link cannot carry the update.
    Client { node: NodeId },
    /// The overlay left this aggregator without any usable edge.
    Overlay { node: NodeId },
    NodeCapacity { node: NodeId },
    LinkCapacity { link: LinkId },
    /// Source and target are disconnected even in an idle network.
    NoRoute { src: NodeId, dst: NodeId },
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FailureReason::Client { node } => write!(f, "client {node} cannot upload"),
            FailureReason::Overlay { node } => write!(f, "aggregator {node} has no usable overlay edge"),
            FailureReason::NodeCapacity { node } => write!(f, "node {node} capacity"),
            FailureReason::LinkCapacity { link } => write!(f, "link {} capacity", link.0),
            FailureReason::NoRoute { src, dst } => write!(f, "no route {src} -> {dst}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PlacementStatus {
    Placed,
    Failed { reason: FailureReason },
}

/// One model-update flow with its realizing route.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flow {
    pub src: NodeId,
    pub dst: NodeId,
    pub route: PhysicalRoute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementDecision {
    pub request_id: u64,
    pub strategy: Strategy,
    pub assignment: Assignment,
    /// Edge aggregators, ascending.
    pub aggregators: Vec<NodeId>,
    pub cloud: NodeId,
    /// Aggregator → aggregator/cloud edges; for HFEL every edge goes to the cloud.
    pub overlay: OverlayTopology,
    /// Client uploads, ascending by client.
    pub uploads: Vec<Flow>,
    pub claims: Claims,
    pub status: PlacementStatus,
}

impl PlacementDecision {
    pub fn is_placed(&self) -> bool {
        self.status == PlacementStatus::Placed
    }

    /// Flows on overlay edges, in overlay order.
    pub fn forwards(&self) -> impl Iterator<Item = Flow> + '_ {
        self.overlay.edges.iter().filter_map(|e| e.route.clone().map(|route| Flow { src: e.src, dst: e.dst, route }))
    }

    /// Inflows (client uploads plus overlay forwards) per aggregation point.
    pub fn fan_in(&self) -> BTreeMap<NodeId, usize> {
        let mut m = BTreeMap::new();
        for &v in self.assignment.map.values() {
            *m.entry(v).or_insert(0) += 1;
        }
        for e in &self.overlay.edges {
            *m.entry(e.dst).or_insert(0) += 1;
        }
        m
    }

    /// Σ α·claim over nodes plus Σ β·claim over links.
    pub fn weighted_cost(&self, g: &PhysicalGraph) -> f64 {
        let w = g.weights();
        let nodes: f64 =
            self.claims.nodes.iter().map(|(n, &c)| w.alpha(g.kind(*n).expect("claimed node")) * c as f64).sum();
        let links: f64 = self.claims.links.iter().map(|(l, &c)| w.beta(g.link(*l).kind) * c as f64).sum();
        nodes + links
    }
}

/// The destination cloud of every request: the lowest-numbered cloud node.
pub fn designated_cloud(g: &PhysicalGraph) -> NodeId {
    *g.clouds().first().expect("validated graph has a cloud")
}

/// Decides association, aggregators, overlay and routes for `r` against
/// `usage`, which is not modified. A failed decision carries no claims.
pub fn place_request(
    g: &PhysicalGraph,
    usage: &Usage,
    r: &TrainingRoundRequest,
    strategy: Strategy,
    p: MeshParams,
) -> PlacementDecision {
    let cloud = designated_cloud(g);
    let demand = Demand { node: r.node_demand, link: request_link_load(r) };
    let assignment = hfel_edge_association(g, usage, r, cloud);
    let aggregators = assignment.aggregators();
    let mut decision = PlacementDecision {
        request_id: r.id,
        strategy,
        assignment,
        aggregators: aggregators.clone(),
        cloud,
        overlay: OverlayTopology { cloud, edges: Vec::new() },
        uploads: Vec::new(),
        claims: Claims::default(),
        status: PlacementStatus::Placed,
    };
    if let Some(&c) = decision.assignment.unplaceable.first() {
        return fail(decision, FailureReason::Client { node: c });
    }
    let overlay = match strategy {
        Strategy::Hfel => OverlayTopology {
            cloud,
            edges: aggregators.iter().map(|&a| OverlayEdge { src: a, dst: cloud, weight: 0.0, route: None }).collect(),
        },
        Strategy::HfelMesh => match hfel_mesh_overlay(g, usage, &aggregators, cloud, demand, p) {
            Ok(o) => o,
            Err(node) => return fail(decision, FailureReason::Overlay { node }),
        },
    };
    decision.overlay = overlay;

    let mut tentative = usage.clone();
    let mut claims = Claims::default();
    // Compute is claimed where models are actually fused: at the cloud and at
    // every aggregator receiving two or more inflows. A single inflow is relayed.
    let fan_in = decision.fan_in();
    for &n in aggregators.iter().filter(|a| fan_in.get(a).copied().unwrap_or(0) >= 2).chain([&cloud]) {
        if usage.node_residual(g, n) < demand.node {
            return fail(decision, FailureReason::NodeCapacity { node: n });
        }
        let i = g.node_index(n).expect("aggregator exists");
        tentative.nodes[i] += demand.node;
        claims.nodes.insert(n, demand.node);
    }
    let mut uploads = Vec::with_capacity(decision.assignment.map.len());
    for (&c, &v) in &decision.assignment.map {
        match claim_route(g, &mut tentative, &mut claims, c, v, demand.link) {
            Ok(route) => uploads.push(Flow { src: c, dst: v, route }),
            Err(reason) => return fail(decision, reason),
        }
    }
    for idx in 0..decision.overlay.edges.len() {
        let (s, t) = (decision.overlay.edges[idx].src, decision.overlay.edges[idx].dst);
        match claim_route(g, &mut tentative, &mut claims, s, t, demand.link) {
            Ok(route) => decision.overlay.edges[idx].route = Some(route),
            Err(reason) => return fail(decision, reason),
        }
    }
    decision.uploads = uploads;
    decision.claims = claims;
    decision
}

fn claim_route(
    g: &PhysicalGraph,
    tentative: &mut Usage,
    claims: &mut Claims,
    src: NodeId,
    dst: NodeId,
    demand: u32,
) -> Result<PhysicalRoute, FailureReason> {
    match shortest_physical_route(g, tentative, src, dst, demand) {
        Some(route) => {
            for &l in &route.links {
                tentative.links[l.0] += demand;
                *claims.links.entry(l).or_insert(0) += demand;
            }
            Ok(route)
        }
        None => {
            // Name the first saturated link on the route an idle network would use.
            let idle = Usage::idle(g);
            match shortest_physical_route(g, &idle, src, dst, demand) {
                Some(route) => {
                    let link = route
                        .links
                        .iter()
                        .copied()
                        .find(|&l| tentative.link_residual(g, l) < demand)
                        .unwrap_or(route.links[0]);
                    Err(FailureReason::LinkCapacity { link })
                }
                None => Err(FailureReason::NoRoute { src, dst }),
            }
        }
    }
}

fn fail(mut d: PlacementDecision, reason: FailureReason) -> PlacementDecision {
    d.claims = Claims::default();
    d.uploads.clear();
    for e in &mut d.overlay.edges {
        e.route = None;
    }
    d.status = PlacementStatus::Failed { reason };
    d
}
