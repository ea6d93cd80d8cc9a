//! Discrete-event simulation of training rounds.
//!
//! Arrivals come from the workload, placement from the allocators, resource
//! pools live in [`NetworkState`], and every processed event lands in the
//! [`ResultsLog`]. A placed round expands into a task graph
//!
//! ```text
//! train(c) ─▶ upload(c→v) ─▶ aggregate(v) ─▶ forward(v→w) ─▶ … ─▶ aggregate(cloud)
//! ```
//!
//! and holds its claims from placement until its round completes. Events at
//! equal times run in kind order (round completion, release, task completion,
//! task start, arrival), then by request id, then by scheduling order.

mod latency;
mod log;
mod state;

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap};
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use latency::{aggregation_latency, training_latency, transfer_latency, LatencyConstants};
pub use log::{LinkInfo, LogHeader, NodeInfo, Record, ResultsLog, TaskInfo, TaskKind, SCHEMA_VERSION};
pub use state::NetworkState;

use crate::allocators::{place_request, MeshParams, PlacementDecision, Strategy};
use crate::error::{Error, Result};
use crate::topology::PhysicalGraph;
use crate::workload::{generate_requests, TrainingRoundRequest, WorkloadConfig, RNG_ALGORITHM};

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub graph: PhysicalGraph,
    pub workload: WorkloadConfig,
    pub strategy: Strategy,
    pub mesh: MeshParams,
    pub latency: LatencyConstants,
}

impl SimConfig {
    pub fn new(graph: PhysicalGraph, workload: WorkloadConfig, strategy: Strategy) -> Self {
        Self { graph, workload, strategy, mesh: MeshParams::default(), latency: LatencyConstants::default() }
    }

    pub fn validate(&self) -> Result<()> {
        check_params(&self.workload, &self.mesh, &self.latency)
    }
}

/// Parameter checks shared by simulation configs and scenarios.
pub fn check_params(workload: &WorkloadConfig, mesh: &MeshParams, latency: &LatencyConstants) -> Result<()> {
    workload.validate()?;
    if mesh.xi == 0 {
        return Err(Error::Config("xi must be at least 1".into()));
    }
    if !(mesh.cloud_cost_scale.is_finite() && mesh.cloud_cost_scale >= 0.0) {
        return Err(Error::Config("cloud_cost_scale must be finite and non-negative".into()));
    }
    let l = latency;
    if !(l.cycles_per_weight > 0.0 && l.cycle_rate_per_unit > 0.0 && l.bits_per_weight > 0.0) {
        return Err(Error::Config("latency constants must be positive".into()));
    }
    Ok(())
}

/// A finished run: the deterministic log plus wall-clock placement times.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub log: ResultsLog,
    pub placement_ms: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EventKind {
    RoundComplete,
    ResourceRelease,
    TaskComplete,
    TaskStart,
    RequestArrival,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimEvent {
    pub time: f64,
    pub kind: EventKind,
    pub request: u64,
    pub task: usize,
    seq: u64,
}

impl Eq for SimEvent {}

impl Ord for SimEvent {
    fn cmp(&self, o: &Self) -> Ordering {
        self.time
            .total_cmp(&o.time)
            .then(self.kind.cmp(&o.kind))
            .then(self.request.cmp(&o.request))
            .then(self.seq.cmp(&o.seq))
    }
}

impl PartialOrd for SimEvent {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Task graph of one placed round.
#[derive(Debug, Clone)]
pub struct EventGraph {
    pub tasks: Vec<TaskInfo>,
    /// Task whose completion ends the round (cloud aggregation).
    pub last: usize,
}

impl EventGraph {
    pub fn build(r: &TrainingRoundRequest, d: &PlacementDecision, c: &LatencyConstants) -> Self {
        let mut tasks: Vec<TaskInfo> = Vec::new();
        let mut add = |kind, preds: Vec<usize>, duration| {
            tasks.push(TaskInfo { id: tasks.len(), kind, preds, duration });
            tasks.len() - 1
        };
        let transfer = transfer_latency(&r.arch, r.link_demand, c);
        let train = training_latency(&r.arch, r.dataset_size);
        // Inbound flows per aggregation point.
        let mut inbound: BTreeMap<_, Vec<usize>> = BTreeMap::new();
        for f in &d.uploads {
            let t = add(TaskKind::Train { client: f.src }, vec![], train);
            let u = add(TaskKind::Upload { client: f.src, edge: f.dst }, vec![t], transfer);
            inbound.entry(f.dst).or_default().push(u);
        }
        // Overlay edges point towards the cloud; aggregate in topological order.
        let order = overlay_order(d);
        let mut agg_task = BTreeMap::new();
        for &a in &order {
            let preds = inbound.remove(&a).unwrap_or_default();
            let fan_in = preds.len();
            // Relays (no compute claim) pass the single inflow through.
            let dur = d.claims.nodes.get(&a).map_or(0.0, |&claim| aggregation_latency(&r.arch, fan_in, claim, c));
            let g = add(TaskKind::Aggregate { node: a, fan_in }, preds, dur);
            agg_task.insert(a, g);
            let dst = d.overlay.successor(a).expect("aggregator has an overlay edge");
            let f = add(TaskKind::Forward { src: a, dst }, vec![g], transfer);
            inbound.entry(dst).or_default().push(f);
        }
        let preds = inbound.remove(&d.cloud).unwrap_or_default();
        let fan_in = preds.len().max(1);
        let last = add(
            TaskKind::Aggregate { node: d.cloud, fan_in },
            preds,
            aggregation_latency(&r.arch, fan_in, r.node_demand, c),
        );
        Self { tasks, last }
    }
}

/// Aggregators ordered so that every overlay source precedes its target.
fn overlay_order(d: &PlacementDecision) -> Vec<crate::topology::NodeId> {
    let mut indeg: BTreeMap<_, usize> = d.aggregators.iter().map(|&a| (a, 0)).collect();
    for e in &d.overlay.edges {
        if let Some(x) = indeg.get_mut(&e.dst) {
            *x += 1;
        }
    }
    let mut ready: Vec<_> = indeg.iter().filter(|(_, &n)| n == 0).map(|(&a, _)| a).collect();
    let mut out = Vec::with_capacity(indeg.len());
    while let Some(a) = ready.first().copied() {
        ready.remove(0);
        out.push(a);
        if let Some(dst) = d.overlay.successor(a) {
            if let Some(x) = indeg.get_mut(&dst) {
                *x -= 1;
                if *x == 0 {
                    ready.push(dst);
                    ready.sort();
                }
            }
        }
    }
    out
}

struct Active {
    arrival: f64,
    graph: EventGraph,
    waiting: Vec<usize>,
    succ: Vec<Vec<usize>>,
}

pub fn run(cfg: &SimConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let requests = generate_requests(&cfg.graph, &cfg.workload)?;
    run_requests(cfg, &requests)
}

/// Simulates an explicit request list (arrival times taken from the requests).
pub fn run_requests(cfg: &SimConfig, requests: &[TrainingRoundRequest]) -> Result<RunOutput> {
    cfg.validate()?;
    let g = &cfg.graph;
    let (nodes, links) = LogHeader::describe(g);
    let header = LogHeader {
        schema: SCHEMA_VERSION,
        rng: RNG_ALGORITHM.to_string(),
        topology: g.name().to_string(),
        strategy: cfg.strategy,
        mesh: cfg.mesh,
        workload: cfg.workload.clone(),
        weights: *g.weights(),
        nodes,
        links,
    };
    let by_id: BTreeMap<u64, &TrainingRoundRequest> = requests.iter().map(|r| (r.id, r)).collect();
    if by_id.len() != requests.len() {
        return Err(Error::Config("duplicate request ids".into()));
    }
    let mut state = NetworkState::new(g);
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    let mut push = |heap: &mut BinaryHeap<Reverse<SimEvent>>, time, kind, request, task| {
        heap.push(Reverse(SimEvent { time, kind, request, task, seq }));
        seq += 1;
    };
    for r in requests {
        if !(r.arrival_time.is_finite() && r.arrival_time >= 0.0) {
            return Err(Error::Config(format!("request {} has invalid arrival time", r.id)));
        }
        push(&mut heap, r.arrival_time, EventKind::RequestArrival, r.id, 0);
    }

    let mut records = Vec::new();
    let mut active: BTreeMap<u64, Active> = BTreeMap::new();
    let mut placement_ms = Vec::with_capacity(requests.len());
    let (mut t_total, mut t_failed) = (0u64, 0u64);
    let mut clock = 0.0f64;

    while let Some(Reverse(ev)) = heap.pop() {
        if ev.time < clock {
            return Err(Error::Invariant(format!("event at {} before clock {clock}", ev.time)));
        }
        clock = ev.time;
        let t = clock;
        match ev.kind {
            EventKind::RequestArrival => {
                let r = by_id[&ev.request];
                t_total += 1;
                records.push(Record::Arrival { t, request: r.id, clients: r.clients.len() });
                let started = Instant::now();
                let decision = place_request(g, &state.usage, r, cfg.strategy, cfg.mesh);
                placement_ms.push(started.elapsed().as_secs_f64() * 1e3);
                if !decision.is_placed() {
                    t_failed += 1;
                    records.push(Record::Placement { t, request: r.id, decision });
                    continue;
                }
                if !decision.overlay.is_valid_forest(&decision.aggregators) {
                    return Err(Error::Invariant(format!("request {}: overlay is not a cloud-rooted forest", r.id)));
                }
                let claims = decision.claims.clone();
                state.apply(g, r.id, claims.clone())?;
                records.push(usage_record(t, g, &state, &claims));
                let graph = EventGraph::build(r, &decision, &cfg.latency);
                records.push(Record::Placement { t, request: r.id, decision });
                records.push(Record::Graph { t, request: r.id, tasks: graph.tasks.clone() });
                let mut succ = vec![Vec::new(); graph.tasks.len()];
                let mut waiting = vec![0; graph.tasks.len()];
                for task in &graph.tasks {
                    waiting[task.id] = task.preds.len();
                    for &p in &task.preds {
                        succ[p].push(task.id);
                    }
                    if task.preds.is_empty() {
                        push(&mut heap, t, EventKind::TaskStart, r.id, task.id);
                    }
                }
                active.insert(r.id, Active { arrival: t, graph, waiting, succ });
            }
            EventKind::TaskStart => {
                let a = &active[&ev.request];
                records.push(Record::TaskStart { t, request: ev.request, task: ev.task });
                let d = a.graph.tasks[ev.task].duration;
                push(&mut heap, t + d, EventKind::TaskComplete, ev.request, ev.task);
            }
            EventKind::TaskComplete => {
                records.push(Record::TaskComplete { t, request: ev.request, task: ev.task });
                let a = active.get_mut(&ev.request).expect("active round");
                if ev.task == a.graph.last {
                    push(&mut heap, t, EventKind::RoundComplete, ev.request, 0);
                    continue;
                }
                for i in 0..a.succ[ev.task].len() {
                    let s = a.succ[ev.task][i];
                    a.waiting[s] -= 1;
                    if a.waiting[s] == 0 {
                        push(&mut heap, t, EventKind::TaskStart, ev.request, s);
                    }
                }
            }
            EventKind::RoundComplete => {
                let a = &active[&ev.request];
                records.push(Record::RoundComplete { t, request: ev.request, duration: t - a.arrival });
                push(&mut heap, t, EventKind::ResourceRelease, ev.request, 0);
            }
            EventKind::ResourceRelease => {
                active.remove(&ev.request);
                let claims = state.release(g, ev.request)?;
                records.push(Record::Release { t, request: ev.request });
                records.push(usage_record(t, g, &state, &claims));
            }
        }
    }
    if !active.is_empty() || state.active() != 0 || !state.usage.is_idle() {
        return Err(Error::Invariant("capacity still claimed after the last event".into()));
    }
    state.audit_all(g)?;
    Ok(RunOutput { log: ResultsLog { header, records, t_total, t_failed, end_time: clock }, placement_ms })
}

fn usage_record(t: f64, g: &PhysicalGraph, s: &NetworkState, touched: &crate::allocators::Claims) -> Record {
    Record::Usage {
        t,
        nodes: touched
            .nodes
            .keys()
            .map(|&n| {
                let i = g.node_index(n).expect("node");
                (i, s.usage.nodes[i])
            })
            .collect(),
        links: touched.links.keys().map(|&l| (l.0, s.usage.links[l.0])).collect(),
    }
}
