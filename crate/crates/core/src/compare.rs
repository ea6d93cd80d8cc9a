//! Static three-way comparison: exact ILP, HFEL and HFEL-MESH on one
//! request set that is placed all at once (no releases in between).

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::allocators::{place_request, MeshParams, Strategy};
use crate::error::Result;
use crate::ilp::{build_model, solve_exact, SolveLimits, SolveStatus, VarKey};
use crate::metrics::ComponentKind;
use crate::topology::{build_auxiliary_graph, PhysicalGraph, Usage};
use crate::workload::TrainingRoundRequest;

/// The exact solver is only attempted up to this many requests.
pub const ILP_MAX_REQUESTS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub method: String,
    /// `optimal`, `infeasible`, `limit_reached` or `skipped` for the ILP;
    /// `placed` or `failed` for the heuristics.
    pub status: String,
    /// Cumulative weighted capacity; absent when the method has no solution.
    pub objective: Option<f64>,
    pub placed: usize,
    pub mur_cloud_links: Option<f64>,
    pub mur_edge_links: Option<f64>,
    pub mur_edge_nodes: Option<f64>,
    pub solve_ms: f64,
}

/// Mean η/C per component kind of a usage snapshot.
pub fn snapshot_mur(g: &PhysicalGraph, usage: &Usage, kind: ComponentKind) -> Option<f64> {
    let mut ratios = Vec::new();
    for (i, n) in g.nodes().iter().enumerate() {
        if ComponentKind::of_node(n.kind) == kind && n.capacity > 0 {
            ratios.push(usage.nodes[i] as f64 / n.capacity as f64);
        }
    }
    for l in g.links() {
        if ComponentKind::of_link(l.kind) == kind && l.capacity > 0 {
            ratios.push(usage.links[l.id.0] as f64 / l.capacity as f64);
        }
    }
    (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64)
}

fn row(method: &str, status: &str, objective: Option<f64>, placed: usize, g: &PhysicalGraph, usage: Option<&Usage>, ms: f64) -> CompareRow {
    let m = |k| usage.and_then(|u| snapshot_mur(g, u, k));
    CompareRow {
        method: method.into(),
        status: status.into(),
        objective,
        placed,
        mur_cloud_links: m(ComponentKind::CloudLink),
        mur_edge_links: m(ComponentKind::EdgeLink),
        mur_edge_nodes: m(ComponentKind::EdgeNode),
        solve_ms: ms,
    }
}

/// Places `reqs` one after another on a shared, never-released state.
pub fn heuristic_batch(
    g: &PhysicalGraph,
    reqs: &[TrainingRoundRequest],
    strategy: Strategy,
    mesh: MeshParams,
) -> (Usage, f64, usize) {
    let mut usage = Usage::idle(g);
    let (mut cost, mut placed) = (0.0, 0);
    for r in reqs {
        let d = place_request(g, &usage, r, strategy, mesh);
        if !d.is_placed() {
            continue;
        }
        placed += 1;
        cost += d.weighted_cost(g);
        for (&n, &c) in &d.claims.nodes {
            usage.nodes[g.node_index(n).expect("claimed node")] += c;
        }
        for (&l, &c) in &d.claims.links {
            usage.links[l.0] += c;
        }
    }
    (usage, cost, placed)
}

/// ILP, HFEL and HFEL-MESH rows, in that order.
pub fn compare(
    g: &PhysicalGraph,
    reqs: &[TrainingRoundRequest],
    mesh: MeshParams,
    limits: SolveLimits,
) -> Result<Vec<CompareRow>> {
    let mut rows = Vec::with_capacity(3);
    if reqs.len() > ILP_MAX_REQUESTS {
        rows.push(row("ilp", "skipped", None, 0, g, None, 0.0));
    } else {
        let started = Instant::now();
        let model = build_model(g, &build_auxiliary_graph(g, &g.edges())?, reqs)?;
        let sol = solve_exact(&model, limits);
        let ms = started.elapsed().as_secs_f64() * 1e3;
        match sol.status {
            SolveStatus::Optimal => {
                let mut usage = Usage::idle(g);
                for (i, n) in g.nodes().iter().enumerate() {
                    if let Some(v) = model.var(&VarKey::NodeLoad { n: n.id }) {
                        usage.nodes[i] = sol.values[v].round() as u32;
                    }
                }
                for l in g.links() {
                    if let Some(v) = model.var(&VarKey::LinkLoad { link: l.id }) {
                        usage.links[l.id.0] = sol.values[v].round() as u32;
                    }
                }
                rows.push(row("ilp", "optimal", Some(sol.objective_value + 0.0), reqs.len(), g, Some(&usage), ms));
            }
            SolveStatus::Infeasible => rows.push(row("ilp", "infeasible", None, 0, g, None, ms)),
            SolveStatus::LimitReached => rows.push(row("ilp", "limit_reached", None, 0, g, None, ms)),
        }
    }
    for s in [Strategy::Hfel, Strategy::HfelMesh] {
        let started = Instant::now();
        let (usage, cost, placed) = heuristic_batch(g, reqs, s, mesh);
        let ms = started.elapsed().as_secs_f64() * 1e3;
        let status = if placed == reqs.len() { "placed" } else { "failed" };
        rows.push(row(s.as_str(), status, Some(cost), placed, g, Some(&usage), ms));
    }
    Ok(rows)
}

pub const COMPARE_HEADER: [&str; 8] =
    ["method", "status", "objective", "placed", "mur_cloud_links", "mur_edge_links", "mur_edge_nodes", "solve_ms"];

pub fn compare_to_csv(rows: &[CompareRow]) -> String {
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(COMPARE_HEADER).expect("in-memory write");
    for r in rows {
        w.write_record([
            r.method.clone(),
            r.status.clone(),
            opt(r.objective),
            r.placed.to_string(),
            opt(r.mur_cloud_links),
            opt(r.mur_edge_links),
            opt(r.mur_edge_nodes),
            format!("{:.3}", r.solve_ms),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}
