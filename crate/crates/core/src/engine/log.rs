//! Results log: one JSON record per line.
//!
//! Schema version 1. The first line is a `header` record describing the run
//! and every component's kind and capacity; then one record per processed
//! event (`arrival`, `placement`, `graph`, `task_start`, `task_complete`,
//! `round_complete`, `release`) interleaved with `usage` records listing the
//! components whose occupied capacity changed; optionally a final `summary`
//! record. Times are milliseconds of simulated time. Wall-clock measurements
//! are kept out of the log so that it is reproducible byte for byte.

use serde::{Deserialize, Serialize};

use crate::allocators::{MeshParams, PlacementDecision, Strategy};
use crate::error::{Error, Result};
use crate::topology::{LinkKind, NodeId, NodeKind, PhysicalGraph, Weights};
use crate::workload::WorkloadConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeInfo {
    pub id: NodeId,
    pub kind: NodeKind,
    pub capacity: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkInfo {
    pub id: usize,
    pub a: NodeId,
    pub b: NodeId,
    pub kind: LinkKind,
    pub capacity: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub schema: u32,
    pub rng: String,
    pub topology: String,
    pub strategy: Strategy,
    pub mesh: MeshParams,
    pub workload: WorkloadConfig,
    pub weights: Weights,
    pub nodes: Vec<NodeInfo>,
    pub links: Vec<LinkInfo>,
}

impl LogHeader {
    pub fn describe(g: &PhysicalGraph) -> (Vec<NodeInfo>, Vec<LinkInfo>) {
        let nodes = g.nodes().iter().map(|n| NodeInfo { id: n.id, kind: n.kind, capacity: n.capacity }).collect();
        let links = g
            .links()
            .iter()
            .map(|l| LinkInfo { id: l.id.0, a: l.a, b: l.b, kind: l.kind, capacity: l.capacity })
            .collect();
        (nodes, links)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TaskKind {
    Train { client: NodeId },
    Upload { client: NodeId, edge: NodeId },
    Aggregate { node: NodeId, fan_in: usize },
    Forward { src: NodeId, dst: NodeId },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskInfo {
    pub id: usize,
    #[serde(flatten)]
    pub kind: TaskKind,
    pub preds: Vec<usize>,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Record {
    Header(LogHeader),
    Arrival { t: f64, request: u64, clients: usize },
    Placement { t: f64, request: u64, decision: PlacementDecision },
    Graph { t: f64, request: u64, tasks: Vec<TaskInfo> },
    TaskStart { t: f64, request: u64, task: usize },
    TaskComplete { t: f64, request: u64, task: usize },
    RoundComplete { t: f64, request: u64, duration: f64 },
    Release { t: f64, request: u64 },
    /// Occupied capacity of the components that changed, by node/link index.
    Usage { t: f64, nodes: Vec<(usize, u32)>, links: Vec<(usize, u32)> },
    Summary(crate::metrics::RunSummary),
}

impl Record {
    pub fn time(&self) -> Option<f64> {
        match self {
            Record::Arrival { t, .. }
            | Record::Placement { t, .. }
            | Record::Graph { t, .. }
            | Record::TaskStart { t, .. }
            | Record::TaskComplete { t, .. }
            | Record::RoundComplete { t, .. }
            | Record::Release { t, .. }
            | Record::Usage { t, .. } => Some(*t),
            Record::Header(_) | Record::Summary(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsLog {
    pub header: LogHeader,
    pub records: Vec<Record>,
    pub t_total: u64,
    pub t_failed: u64,
    /// Time of the last processed event.
    pub end_time: f64,
}

impl ResultsLog {
    pub fn placements(&self) -> impl Iterator<Item = &PlacementDecision> {
        self.records.iter().filter_map(|r| match r {
            Record::Placement { decision, .. } => Some(decision),
            _ => None,
        })
    }

    pub fn to_jsonl(&self, summary: Option<&crate::metrics::RunSummary>) -> String {
        let mut out = String::new();
        let mut push = |r: &Record| {
            out.push_str(&serde_json::to_string(r).expect("records serialize"));
            out.push('\n');
        };
        push(&Record::Header(self.header.clone()));
        for r in &self.records {
            push(r);
        }
        if let Some(s) = summary {
            push(&Record::Summary(s.clone()));
        }
        out
    }

    /// Parses a log written by [`to_jsonl`](Self::to_jsonl).
    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut header = None;
        let mut records = Vec::new();
        let (mut t_total, mut t_failed, mut end_time) = (0, 0, 0.0f64);
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let rec: Record =
                serde_json::from_str(line).map_err(|e| Error::Parse { line: i + 1, message: e.to_string() })?;
            match rec {
                Record::Header(h) => header = Some(h),
                Record::Summary(_) => {}
                other => {
                    if let Some(t) = other.time() {
                        end_time = end_time.max(t);
                    }
                    match &other {
                        Record::Arrival { .. } => t_total += 1,
                        Record::Placement { decision, .. } if !decision.is_placed() => t_failed += 1,
                        _ => {}
                    }
                    records.push(other);
                }
            }
        }
        let header = header.ok_or_else(|| Error::Parse { line: 1, message: "missing header record".into() })?;
        Ok(Self { header, records, t_total, t_failed, end_time })
    }
}
