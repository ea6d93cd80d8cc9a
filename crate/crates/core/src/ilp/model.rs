use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::{AuxiliaryGraph, LinkId, LinkKind, NodeId, NodeKind, PhysicalGraph, Usage};
use crate::workload::{request_link_load, TrainingRoundRequest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    Binary,
    Integer,
}

/// Structured identity of a model column.
///
/// `k` is the position of the request in the model, aux links are written as
/// `(i, j)`, physical arcs as `(u, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VarKey {
    /// Aux link `(i, j)` carries the path of pair `source` for request `k`.
    Q { i: NodeId, j: NodeId, source: NodeId, k: usize },
    /// Physical arc `(u, v)` realizes aux link `(i, j)` for request `k`.
    X { u: NodeId, v: NodeId, i: NodeId, j: NodeId, k: usize },
    /// Aux link `(i, j)` is used by request `k` for any pair.
    AuxUse { i: NodeId, j: NodeId, k: usize },
    /// Physical arc `(u, v)` is used by request `k` for any aux link.
    ArcUse { u: NodeId, v: NodeId, k: usize },
    LinkUse { link: LinkId, k: usize },
    NodeUse { n: NodeId, k: usize },
    Merge { n: NodeId, k: usize },
    /// Node `n` pays its capacity for request `k` (use OR merge).
    NodeCharge { n: NodeId, k: usize },
    Accept { source: NodeId, k: usize },
    NodeLoad { n: NodeId },
    LinkLoad { link: LinkId },
}

impl VarKey {
    /// Column name used in exports: `q_i_j_s_k`, `x_u_v_i_j_k`, `mu_n_k`, ...
    pub fn column_name(&self) -> String {
        match *self {
            VarKey::Q { i, j, source, k } => format!("q_{i}_{j}_{source}_{k}"),
            VarKey::X { u, v, i, j, k } => format!("x_{u}_{v}_{i}_{j}_{k}"),
            VarKey::AuxUse { i, j, k } => format!("w_{i}_{j}_{k}"),
            VarKey::ArcUse { u, v, k } => format!("y_{u}_{v}_{k}"),
            VarKey::LinkUse { link, k } => format!("mue_{}_{k}", link.0),
            VarKey::NodeUse { n, k } => format!("mu_{n}_{k}"),
            VarKey::Merge { n, k } => format!("zeta_{n}_{k}"),
            VarKey::NodeCharge { n, k } => format!("nu_{n}_{k}"),
            VarKey::Accept { source, k } => format!("z_{source}_{k}"),
            VarKey::NodeLoad { n } => format!("etan_{n}"),
            VarKey::LinkLoad { link } => format!("etae_{}", link.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub key: VarKey,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

/// Constraint families, each mapping to one group of rows of the formulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    /// Flow conservation of each node pair over aux links.
    AuxFlow,
    /// `AuxUse` is the OR of the pair paths over one aux link.
    AuxUse,
    /// Using an aux link makes its head an aggregator.
    AggregatorUse,
    /// Flow conservation of each aux link's physical realization.
    PhysicalFlow,
    /// `ArcUse` is the OR of realizations over one arc.
    ArcUse,
    /// Link use is the OR of both arc directions (fixed for end links).
    LinkUse,
    /// Two inbound flows from different neighbors force aggregation.
    Merge,
    /// Node charge is `NodeUse OR Merge`.
    NodeCharge,
    NodeLoad,
    NodeCapacity,
    LinkLoad,
    LinkCapacity,
}

impl Family {
    pub fn label(self) -> &'static str {
        match self {
            Family::AuxFlow => "aux-flow",
            Family::AuxUse => "aux-use",
            Family::AggregatorUse => "aggregator-use",
            Family::PhysicalFlow => "physical-flow",
            Family::ArcUse => "arc-use",
            Family::LinkUse => "link-use",
            Family::Merge => "merge",
            Family::NodeCharge => "node-charge",
            Family::NodeLoad => "node-load",
            Family::NodeCapacity => "node-capacity",
            Family::LinkLoad => "link-load",
            Family::LinkCapacity => "link-capacity",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub family: Family,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// Directed arc over a non-end link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Arc {
    pub from: NodeId,
    pub to: NodeId,
    pub link: LinkId,
}

/// Per-request data the model is built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestData {
    pub request_id: u64,
    pub node_demand: u32,
    pub link_demand: u32,
    /// Edge nodes hosting participating clients (pair sources), ascending.
    pub sources: Vec<NodeId>,
    /// Participating clients per source edge.
    pub clients_at: BTreeMap<NodeId, usize>,
    pub end_links: Vec<LinkId>,
    /// Destination of every pair.
    pub root: NodeId,
}

/// The exact placement/routing model with its index sets.
#[derive(Debug, Clone)]
pub struct IlpModel {
    pub graph: PhysicalGraph,
    pub aux: AuxiliaryGraph,
    pub requests: Vec<RequestData>,
    /// Non-client nodes, ascending.
    pub nodes: Vec<NodeId>,
    pub arcs: Vec<Arc>,
    /// Capacity available to the model (capacity minus prior usage).
    pub node_capacity: BTreeMap<NodeId, u32>,
    pub link_capacity: Vec<u32>,
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub objective: Vec<(usize, f64)>,
    index: HashMap<VarKey, usize>,
}

impl IlpModel {
    pub fn var(&self, key: &VarKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn num_binaries(&self) -> usize {
        self.variables.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, c)| c * values[v]).sum()
    }

    /// Number of directed arcs, aux links and so on, for closed-form counts.
    pub fn dimensions(&self) -> ModelDimensions {
        ModelDimensions {
            aux_links: self.aux.links.len(),
            arcs: self.arcs.len(),
            links: self.graph.link_count(),
            nodes: self.nodes.len(),
            requests: self.requests.len(),
            pairs: self.requests.iter().map(|r| r.sources.len()).sum(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelDimensions {
    pub aux_links: usize,
    pub arcs: usize,
    pub links: usize,
    pub nodes: usize,
    pub requests: usize,
    pub pairs: usize,
}

impl ModelDimensions {
    /// Column count implied by the index sets.
    pub fn expected_variables(&self) -> usize {
        let (ea, a, e, n, k, p) = (self.aux_links, self.arcs, self.links, self.nodes, self.requests, self.pairs);
        if k == 0 {
            return 0;
        }
        ea * p + a * ea * k + ea * k + a * k + e * k + 3 * n * k + p + n + e
    }
}

pub fn build_model(graph: &PhysicalGraph, aux: &AuxiliaryGraph, requests: &[TrainingRoundRequest]) -> Result<IlpModel> {
    build_model_with_usage(graph, &Usage::idle(graph), aux, requests)
}

/// Builds the model against the residual capacity left by `usage`.
pub fn build_model_with_usage(
    graph: &PhysicalGraph,
    usage: &Usage,
    aux: &AuxiliaryGraph,
    requests: &[TrainingRoundRequest],
) -> Result<IlpModel> {
    let nodes: Vec<NodeId> = graph.nodes().iter().filter(|n| n.kind != NodeKind::Client).map(|n| n.id).collect();
    let root = *graph.clouds().first().ok_or_else(|| Error::validation("graph", "no cloud node"))?;
    let mut arcs = Vec::new();
    for l in graph.links() {
        if l.kind != LinkKind::End {
            arcs.push(Arc { from: l.a, to: l.b, link: l.id });
            arcs.push(Arc { from: l.b, to: l.a, link: l.id });
        }
    }
    arcs.sort();
    let node_capacity: BTreeMap<NodeId, u32> = nodes.iter().map(|&n| (n, usage.node_residual(graph, n))).collect();
    let link_capacity: Vec<u32> = graph.links().iter().map(|l| usage.link_residual(graph, l.id)).collect();

    let mut data = Vec::with_capacity(requests.len());
    for r in requests {
        let mut clients_at = BTreeMap::new();
        let mut end_links = Vec::new();
        for &c in &r.clients {
            let (edge, link) = graph
                .attachment(c)
                .ok_or_else(|| Error::validation(format!("request {} client {c}", r.id), "not an attached client"))?;
            *clients_at.entry(edge).or_insert(0usize) += 1;
            end_links.push(link);
        }
        end_links.sort();
        let sources: Vec<NodeId> = clients_at.keys().copied().collect();
        for s in &sources {
            if !aux.contains(*s) {
                return Err(Error::validation(format!("edge {s}"), "pair source is not an aggregator candidate"));
            }
        }
        data.push(RequestData {
            request_id: r.id,
            node_demand: r.node_demand,
            link_demand: request_link_load(r),
            sources,
            clients_at,
            end_links,
            root,
        });
    }

    let mut b = Builder::default();
    if data.is_empty() {
        // Nothing to route or charge: the degenerate model is the empty one.
        return Ok(IlpModel {
            graph: graph.clone(),
            aux: aux.clone(),
            requests: data,
            nodes,
            arcs,
            node_capacity,
            link_capacity,
            variables: b.variables,
            constraints: b.constraints,
            objective: b.objective,
            index: b.index,
        });
    }
    let weights = *graph.weights();
    let aux_nodes = &aux.nodes;
    let bin = |key| (key, VarKind::Binary, 0.0, 1.0);

    for (k, rd) in data.iter().enumerate() {
        // Columns.
        for l in &aux.links {
            for &s in &rd.sources {
                b.add(bin(VarKey::Q { i: l.src, j: l.dst, source: s, k }));
            }
        }
        for l in &aux.links {
            for a in &arcs {
                b.add(bin(VarKey::X { u: a.from, v: a.to, i: l.src, j: l.dst, k }));
            }
        }
        for l in &aux.links {
            b.add(bin(VarKey::AuxUse { i: l.src, j: l.dst, k }));
        }
        for a in &arcs {
            b.add(bin(VarKey::ArcUse { u: a.from, v: a.to, k }));
        }
        for l in graph.links() {
            let fixed = if l.kind == LinkKind::End { Some(rd.end_links.binary_search(&l.id).is_ok()) } else { None };
            match fixed {
                Some(true) => b.add((VarKey::LinkUse { link: l.id, k }, VarKind::Binary, 1.0, 1.0)),
                Some(false) => b.add((VarKey::LinkUse { link: l.id, k }, VarKind::Binary, 0.0, 0.0)),
                None => b.add(bin(VarKey::LinkUse { link: l.id, k })),
            };
        }
        for &n in &nodes {
            b.add(bin(VarKey::NodeUse { n, k }));
            b.add(bin(VarKey::Merge { n, k }));
            b.add(bin(VarKey::NodeCharge { n, k }));
        }
        for &s in &rd.sources {
            // Every request is served in the exact model.
            b.add((VarKey::Accept { source: s, k }, VarKind::Binary, 1.0, 1.0));
        }

        // Pair flow conservation over the auxiliary graph.
        for &s in &rd.sources {
            for &i in aux_nodes {
                let mut terms = Vec::new();
                for l in aux.links.iter().filter(|l| l.src == i) {
                    terms.push((b.id(VarKey::Q { i: l.src, j: l.dst, source: s, k }), 1.0));
                }
                for l in aux.links.iter().filter(|l| l.dst == i) {
                    terms.push((b.id(VarKey::Q { i: l.src, j: l.dst, source: s, k }), -1.0));
                }
                let z = b.id(VarKey::Accept { source: s, k });
                if i == s {
                    terms.push((z, -1.0));
                } else if i == rd.root {
                    terms.push((z, 1.0));
                }
                b.row(format!("auxflow_{s}_{k}_{i}"), Family::AuxFlow, terms, Sense::Eq, 0.0);
            }
        }
        // Aux link use = OR over pairs.
        for l in &aux.links {
            let w = b.id(VarKey::AuxUse { i: l.src, j: l.dst, k });
            let mut sum = vec![(w, 1.0)];
            for &s in &rd.sources {
                let q = b.id(VarKey::Q { i: l.src, j: l.dst, source: s, k });
                b.row(format!("auxuse_lb_{}_{}_{s}_{k}", l.src, l.dst), Family::AuxUse, vec![(q, 1.0), (w, -1.0)], Sense::Le, 0.0);
                sum.push((q, -1.0));
            }
            b.row(format!("auxuse_ub_{}_{}_{k}", l.src, l.dst), Family::AuxUse, sum, Sense::Le, 0.0);
        }
        // Aggregator use at the head of every used aux link.
        for &n in &nodes {
            let mu = b.id(VarKey::NodeUse { n, k });
            let mut ub = vec![(mu, 1.0)];
            for l in aux.links.iter().filter(|l| l.dst == n) {
                for &s in &rd.sources {
                    let q = b.id(VarKey::Q { i: l.src, j: l.dst, source: s, k });
                    b.row(format!("agg_lb_{}_{}_{s}_{k}", l.src, l.dst), Family::AggregatorUse, vec![(q, 1.0), (mu, -1.0)], Sense::Le, 0.0);
                    ub.push((q, -1.0));
                }
            }
            b.row(format!("agg_ub_{n}_{k}"), Family::AggregatorUse, ub, Sense::Le, 0.0);
        }
        // Physical realization of each aux link.
        for l in &aux.links {
            let w = b.id(VarKey::AuxUse { i: l.src, j: l.dst, k });
            for &v in &nodes {
                let mut terms = Vec::new();
                for a in arcs.iter().filter(|a| a.from == v) {
                    terms.push((b.id(VarKey::X { u: a.from, v: a.to, i: l.src, j: l.dst, k }), 1.0));
                }
                for a in arcs.iter().filter(|a| a.to == v) {
                    terms.push((b.id(VarKey::X { u: a.from, v: a.to, i: l.src, j: l.dst, k }), -1.0));
                }
                if v == l.src {
                    terms.push((w, -1.0));
                } else if v == l.dst {
                    terms.push((w, 1.0));
                }
                b.row(format!("physflow_{}_{}_{k}_{v}", l.src, l.dst), Family::PhysicalFlow, terms, Sense::Eq, 0.0);
            }
        }
        // Arc use = OR over aux links.
        for a in &arcs {
            let y = b.id(VarKey::ArcUse { u: a.from, v: a.to, k });
            let mut sum = vec![(y, 1.0)];
            for l in &aux.links {
                let x = b.id(VarKey::X { u: a.from, v: a.to, i: l.src, j: l.dst, k });
                b.row(format!("arcuse_lb_{}_{}_{}_{}_{k}", a.from, a.to, l.src, l.dst), Family::ArcUse, vec![(x, 1.0), (y, -1.0)], Sense::Le, 0.0);
                sum.push((x, -1.0));
            }
            b.row(format!("arcuse_ub_{}_{}_{k}", a.from, a.to), Family::ArcUse, sum, Sense::Le, 0.0);
        }
        // Link use = OR of both directions.
        for l in graph.links().iter().filter(|l| l.kind != LinkKind::End) {
            let mu = b.id(VarKey::LinkUse { link: l.id, k });
            let fwd = b.id(VarKey::ArcUse { u: l.a, v: l.b, k });
            let bwd = b.id(VarKey::ArcUse { u: l.b, v: l.a, k });
            b.row(format!("linkuse_fwd_{}_{k}", l.id.0), Family::LinkUse, vec![(fwd, 1.0), (mu, -1.0)], Sense::Le, 0.0);
            b.row(format!("linkuse_bwd_{}_{k}", l.id.0), Family::LinkUse, vec![(bwd, 1.0), (mu, -1.0)], Sense::Le, 0.0);
            b.row(format!("linkuse_ub_{}_{k}", l.id.0), Family::LinkUse, vec![(mu, 1.0), (fwd, -1.0), (bwd, -1.0)], Sense::Le, 0.0);
        }
        // Merging inbound flows forces aggregation. Participating clients are
        // constant inbound flows at their edge.
        for &n in &nodes {
            let zeta = b.id(VarKey::Merge { n, k });
            let fixed = rd.clients_at.get(&n).copied().unwrap_or(0);
            let inbound: Vec<usize> =
                arcs.iter().filter(|a| a.to == n).map(|a| b.id(VarKey::ArcUse { u: a.from, v: a.to, k })).collect();
            if fixed >= 2 {
                b.row(format!("merge_clients_{n}_{k}"), Family::Merge, vec![(zeta, 1.0)], Sense::Ge, 1.0);
            } else if fixed == 1 {
                for (idx, &y) in inbound.iter().enumerate() {
                    b.row(format!("merge_client_{n}_{k}_{idx}"), Family::Merge, vec![(zeta, 1.0), (y, -1.0)], Sense::Ge, 0.0);
                }
            } else {
                for (x, &ya) in inbound.iter().enumerate() {
                    for (y, &yb) in inbound.iter().enumerate().skip(x + 1) {
                        b.row(format!("merge_{n}_{k}_{x}_{y}"), Family::Merge, vec![(zeta, 1.0), (ya, -1.0), (yb, -1.0)], Sense::Ge, -1.0);
                    }
                }
            }
            let mut ub = vec![(zeta, 1.0)];
            ub.extend(inbound.iter().map(|&y| (y, -1.0)));
            b.row(format!("merge_ub_{n}_{k}"), Family::Merge, ub, Sense::Le, fixed as f64);
            // Charge = use OR merge.
            let mu = b.id(VarKey::NodeUse { n, k });
            let nu = b.id(VarKey::NodeCharge { n, k });
            b.row(format!("charge_use_{n}_{k}"), Family::NodeCharge, vec![(nu, 1.0), (mu, -1.0)], Sense::Ge, 0.0);
            b.row(format!("charge_merge_{n}_{k}"), Family::NodeCharge, vec![(nu, 1.0), (zeta, -1.0)], Sense::Ge, 0.0);
            b.row(format!("charge_ub_{n}_{k}"), Family::NodeCharge, vec![(nu, 1.0), (mu, -1.0), (zeta, -1.0)], Sense::Le, 0.0);
        }
    }

    // Loads, capacities, objective.
    for &n in &nodes {
        let cap = node_capacity[&n];
        let eta = b.add((VarKey::NodeLoad { n }, VarKind::Integer, 0.0, f64::INFINITY));
        let mut terms = vec![(eta, 1.0)];
        for (k, rd) in data.iter().enumerate() {
            terms.push((b.id(VarKey::NodeCharge { n, k }), -(rd.node_demand as f64)));
        }
        b.row(format!("nodeload_{n}"), Family::NodeLoad, terms, Sense::Eq, 0.0);
        b.row(format!("nodecap_{n}"), Family::NodeCapacity, vec![(eta, 1.0)], Sense::Le, cap as f64);
        let kind = graph.kind(n).expect("model node exists");
        b.objective.push((eta, weights.alpha(kind)));
    }
    for l in graph.links() {
        let eta = b.add((VarKey::LinkLoad { link: l.id }, VarKind::Integer, 0.0, f64::INFINITY));
        let mut terms = vec![(eta, 1.0)];
        for (k, rd) in data.iter().enumerate() {
            terms.push((b.id(VarKey::LinkUse { link: l.id, k }), -(rd.link_demand as f64)));
        }
        b.row(format!("linkload_{}", l.id.0), Family::LinkLoad, terms, Sense::Eq, 0.0);
        b.row(format!("linkcap_{}", l.id.0), Family::LinkCapacity, vec![(eta, 1.0)], Sense::Le, link_capacity[l.id.0] as f64);
        b.objective.push((eta, weights.beta(l.kind)));
    }

    Ok(IlpModel {
        graph: graph.clone(),
        aux: aux.clone(),
        requests: data,
        nodes,
        arcs,
        node_capacity,
        link_capacity,
        variables: b.variables,
        constraints: b.constraints,
        objective: b.objective,
        index: b.index,
    })
}

#[derive(Default)]
struct Builder {
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective: Vec<(usize, f64)>,
    index: HashMap<VarKey, usize>,
}

impl Builder {
    fn add(&mut self, (key, kind, lower, upper): (VarKey, VarKind, f64, f64)) -> usize {
        let id = self.variables.len();
        let prev = self.index.insert(key, id);
        debug_assert!(prev.is_none(), "duplicate column {key:?}");
        self.variables.push(Variable { key, kind, lower, upper });
        id
    }

    fn id(&self, key: VarKey) -> usize {
        self.index[&key]
    }

    fn row(&mut self, name: String, family: Family, terms: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        self.constraints.push(Constraint { name, family, terms, sense, rhs });
    }
}
