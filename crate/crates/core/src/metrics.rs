//! Metrics over a [`ResultsLog`] and tabular export of run summaries.
//!
//! * TRFR: failed rounds over arrived rounds.
//! * MUR: per component, the time-weighted mean of occupied/capacity over
//!   `[0, end_time]`; then the arithmetic mean over components of one kind.
//! * Cumulative weighted capacity: Σ α·claim + Σ β·claim over the claims of
//!   every served request (the same accounting as the integer program).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::engine::{LogHeader, Record, ResultsLog};
use crate::error::{Error, Result};
use crate::topology::{LinkKind, NodeId, NodeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    ClientNode,
    EdgeNode,
    CloudNode,
    EndLink,
    EdgeLink,
    CloudLink,
}

impl ComponentKind {
    pub fn of_node(k: NodeKind) -> Self {
        match k {
            NodeKind::Client => Self::ClientNode,
            NodeKind::Edge => Self::EdgeNode,
            NodeKind::Cloud => Self::CloudNode,
        }
    }

    pub fn of_link(k: LinkKind) -> Self {
        match k {
            LinkKind::End => Self::EndLink,
            LinkKind::Edge => Self::EdgeLink,
            LinkKind::Cloud => Self::CloudLink,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub trfr: f64,
    pub mur_cloud_links: f64,
    pub mur_edge_links: f64,
    pub mur_edge_nodes: f64,
    pub cumulative_weighted_capacity: f64,
    /// Mean arrival-to-completion time of served rounds; 0 if none completed.
    pub mean_round_duration_ms: f64,
    /// Wall-clock placement time; absent when timing was not requested.
    pub mean_placement_ms: Option<f64>,
    pub t_total: u64,
    pub t_failed: u64,
}

pub fn trfr(log: &ResultsLog) -> Result<f64> {
    if log.t_total == 0 {
        return Err(Error::UndefinedMetric("TRFR of a run without requests".into()));
    }
    Ok(log.t_failed as f64 / log.t_total as f64)
}

/// Per-component time-weighted utilization, keyed by node or link index.
fn utilization(log: &ResultsLog) -> (Vec<f64>, Vec<f64>) {
    let h = &log.header;
    let mut node_area = vec![0.0; h.nodes.len()];
    let mut link_area = vec![0.0; h.links.len()];
    let mut node_level = vec![(0u32, 0.0f64); h.nodes.len()];
    let mut link_level = vec![(0u32, 0.0f64); h.links.len()];
    fn step(area: &mut [f64], level: &mut [(u32, f64)], i: usize, v: u32, t: f64) {
        let (old, since) = level[i];
        area[i] += old as f64 * (t - since);
        level[i] = (v, t);
    }
    for r in &log.records {
        if let Record::Usage { t, nodes, links } = r {
            for &(i, v) in nodes {
                step(&mut node_area, &mut node_level, i, v, *t);
            }
            for &(i, v) in links {
                step(&mut link_area, &mut link_level, i, v, *t);
            }
        }
    }
    let end = log.end_time;
    let ratio = |area: f64, (v, since): (u32, f64), cap: u32| {
        if end <= 0.0 || cap == 0 {
            return 0.0;
        }
        (area + v as f64 * (end - since)) / (end * cap as f64)
    };
    let nodes = (0..h.nodes.len()).map(|i| ratio(node_area[i], node_level[i], h.nodes[i].capacity)).collect();
    let links = (0..h.links.len()).map(|i| ratio(link_area[i], link_level[i], h.links[i].capacity)).collect();
    (nodes, links)
}

pub fn mur(log: &ResultsLog, kind: ComponentKind) -> Result<f64> {
    mur_all(log)?.remove(&kind).ok_or_else(|| Error::UndefinedMetric(format!("no {kind:?} components")))
}

/// MUR of every component kind present in the log.
pub fn mur_all(log: &ResultsLog) -> Result<BTreeMap<ComponentKind, f64>> {
    let (nodes, links) = utilization(log);
    let h = &log.header;
    let mut acc: BTreeMap<ComponentKind, (f64, usize)> = BTreeMap::new();
    for (i, n) in h.nodes.iter().enumerate() {
        let e = acc.entry(ComponentKind::of_node(n.kind)).or_default();
        e.0 += nodes[i];
        e.1 += 1;
    }
    for (i, l) in h.links.iter().enumerate() {
        let e = acc.entry(ComponentKind::of_link(l.kind)).or_default();
        e.0 += links[i];
        e.1 += 1;
    }
    Ok(acc.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect())
}

/// α per node and β per link index.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComponentWeights {
    pub nodes: BTreeMap<NodeId, f64>,
    pub links: BTreeMap<usize, f64>,
}

impl ComponentWeights {
    /// Per-kind weights from the log header.
    pub fn from_header(h: &LogHeader) -> Self {
        Self {
            nodes: h.nodes.iter().map(|n| (n.id, h.weights.alpha(n.kind))).collect(),
            links: h.links.iter().map(|l| (l.id, h.weights.beta(l.kind))).collect(),
        }
    }
}

pub fn cumulative_weighted_capacity(log: &ResultsLog, w: &ComponentWeights) -> Result<f64> {
    let mut total = 0.0;
    for d in log.placements().filter(|d| d.is_placed()) {
        for (n, &c) in &d.claims.nodes {
            let a = w.nodes.get(n).ok_or_else(|| Error::Config(format!("no weight for node {n}")))?;
            total += a * c as f64;
        }
        for (l, &c) in &d.claims.links {
            let b = w.links.get(&l.0).ok_or_else(|| Error::Config(format!("no weight for link {}", l.0)))?;
            total += b * c as f64;
        }
    }
    Ok(total)
}

pub fn summarize(log: &ResultsLog, placement_ms: Option<&[f64]>) -> Result<RunSummary> {
    let murs = mur_all(log)?;
    // A topology without components of some kind reports 0 for it.
    let get = |k| murs.get(&k).copied().unwrap_or(0.0);
    let durations: Vec<f64> = log
        .records
        .iter()
        .filter_map(|r| match r {
            Record::RoundComplete { duration, .. } => Some(*duration),
            _ => None,
        })
        .collect();
    Ok(RunSummary {
        trfr: trfr(log)?,
        mur_cloud_links: get(ComponentKind::CloudLink),
        mur_edge_links: get(ComponentKind::EdgeLink),
        mur_edge_nodes: get(ComponentKind::EdgeNode),
        cumulative_weighted_capacity: cumulative_weighted_capacity(log, &ComponentWeights::from_header(&log.header))?,
        mean_round_duration_ms: mean(&durations).unwrap_or(0.0),
        mean_placement_ms: placement_ms.and_then(mean),
        t_total: log.t_total,
        t_failed: log.t_failed,
    })
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// One run of a sweep: its coordinates and its summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub topology: String,
    pub strategy: String,
    pub xi: u32,
    pub lambda: f64,
    /// Fixed clients per request, when that axis is swept.
    pub clients: Option<usize>,
    pub seed: u64,
    pub summary: RunSummary,
}

pub const CSV_HEADER: [&str; 15] = [
    "topology",
    "strategy",
    "xi",
    "lambda",
    "clients",
    "seed",
    "trfr",
    "mur_cloud_links",
    "mur_edge_links",
    "mur_edge_nodes",
    "cumulative_weighted_capacity",
    "mean_round_duration_ms",
    "mean_placement_ms",
    "t_total",
    "t_failed",
];

pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in rows {
        let s = &r.summary;
        w.write_record([
            r.topology.clone(),
            r.strategy.clone(),
            r.xi.to_string(),
            r.lambda.to_string(),
            r.clients.map(|c| c.to_string()).unwrap_or_default(),
            r.seed.to_string(),
            s.trfr.to_string(),
            s.mur_cloud_links.to_string(),
            s.mur_edge_links.to_string(),
            s.mur_edge_nodes.to_string(),
            s.cumulative_weighted_capacity.to_string(),
            s.mean_round_duration_ms.to_string(),
            s.mean_placement_ms.map(|x| x.to_string()).unwrap_or_default(),
            s.t_total.to_string(),
            s.t_failed.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

pub fn to_json(rows: &[SweepRow]) -> String {
    serde_json::to_string_pretty(rows).expect("rows serialize")
}

pub fn from_json(text: &str) -> Result<Vec<SweepRow>> {
    serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })
}
