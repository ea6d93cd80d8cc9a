mod common;

use std::collections::BTreeMap;

use common::{line3, node, request};
use edgeagg::engine::{run, run_requests, Record, ResultsLog, SimConfig, TaskKind};
use edgeagg::topology::{builtin_topology, LinkKind, NodeId, NodeKind, PhysicalGraph};
use edgeagg::workload::TrainingRoundRequest;
use edgeagg::{Strategy, WorkloadConfig};

/// Line client 2 – edge 1 – cloud 0 with a narrow cloud link.
fn narrow_line(cloud_mbps: u32) -> PhysicalGraph {
    PhysicalGraph::new(
        "narrow",
        vec![node(0, NodeKind::Cloud, 4000), node(1, NodeKind::Edge, 200), node(2, NodeKind::Client, 1)],
        vec![(NodeId(2), NodeId(1), LinkKind::End, 200), (NodeId(1), NodeId(0), LinkKind::Cloud, cloud_mbps)],
    )
    .unwrap()
}

fn at(mut r: TrainingRoundRequest, t: f64) -> TrainingRoundRequest {
    r.arrival_time = t;
    r
}

fn cfg(g: PhysicalGraph, strategy: Strategy) -> SimConfig {
    SimConfig::new(g, WorkloadConfig::default(), strategy)
}

fn final_usage(log: &ResultsLog) -> (Vec<u32>, Vec<u32>) {
    let mut nodes = vec![0; log.header.nodes.len()];
    let mut links = vec![0; log.header.links.len()];
    for r in &log.records {
        if let Record::Usage { nodes: ns, links: ls, .. } = r {
            for &(i, v) in ns {
                nodes[i] = v;
            }
            for &(i, v) in ls {
                links[i] = v;
            }
        }
    }
    (nodes, links)
}

#[test]
fn single_request_completes_and_releases() {
    let out = run_requests(&cfg(line3(), Strategy::Hfel), &[request(0, &[2], 3, 20)]).unwrap();
    let log = &out.log;
    assert_eq!((log.t_total, log.t_failed), (1, 0));
    assert_eq!(log.records.iter().filter(|r| matches!(r, Record::RoundComplete { .. })).count(), 1);
    let (nodes, links) = final_usage(log);
    assert!(nodes.iter().chain(&links).all(|&v| v == 0));
    assert_eq!(out.placement_ms.len(), 1);
}

#[test]
fn overload_burst_matches_hand_count() {
    // 70 Mbps cloud link, three concurrent 30 Mbps rounds: the first two fit
    // (60), the third would need 90.
    let reqs: Vec<_> = (0..3).map(|k| at(request(k, &[2], 1, 30), k as f64)).collect();
    let out = run_requests(&cfg(narrow_line(70), Strategy::Hfel), &reqs).unwrap();
    assert_eq!((out.log.t_total, out.log.t_failed), (3, 1));
    let failed: Vec<u64> = out.log.placements().filter(|d| !d.is_placed()).map(|d| d.request_id).collect();
    assert_eq!(failed, vec![2]);
    assert_eq!(edgeagg::metrics::trfr(&out.log).unwrap(), 1.0 / 3.0);
}

#[test]
fn release_precedes_arrival_at_equal_time() {
    let c = cfg(narrow_line(30), Strategy::Hfel);
    let first = run_requests(&c, &[request(0, &[2], 1, 30)]).unwrap();
    let done = first
        .log
        .records
        .iter()
        .find_map(|r| match r {
            Record::RoundComplete { t, .. } => Some(*t),
            _ => None,
        })
        .unwrap();
    let out = run_requests(&c, &[request(0, &[2], 1, 30), at(request(1, &[2], 1, 30), done)]).unwrap();
    assert_eq!(out.log.t_failed, 0);
    let just_before = run_requests(&c, &[request(0, &[2], 1, 30), at(request(1, &[2], 1, 30), done - 1e-6)]).unwrap();
    assert_eq!(just_before.log.t_failed, 1);
}

#[test]
fn identical_seed_gives_identical_log() {
    for strategy in [Strategy::Hfel, Strategy::HfelMesh] {
        let mut c = cfg(builtin_topology("medium").unwrap(), strategy);
        c.workload.horizon_requests = 60;
        c.workload.seed = 9;
        let a = run(&c).unwrap().log.to_jsonl(None);
        let b = run(&c).unwrap().log.to_jsonl(None);
        assert_eq!(a, b);
        c.workload.seed = 10;
        assert_ne!(run(&c).unwrap().log.to_jsonl(None), a);
    }
}

#[test]
fn log_round_trips_through_jsonl() {
    let mut c = cfg(builtin_topology("large").unwrap(), Strategy::HfelMesh);
    c.workload.horizon_requests = 40;
    let log = run(&c).unwrap().log;
    let back = ResultsLog::from_jsonl(&log.to_jsonl(None)).unwrap();
    assert_eq!(back, log);
    assert!(ResultsLog::from_jsonl("{\"type\":\"release\",\"t\":0.0,\"request\":1}\n").is_err());
    assert!(matches!(ResultsLog::from_jsonl("not json"), Err(edgeagg::Error::Parse { line: 1, .. })));
}

#[test]
fn clock_precedence_and_conservation_on_builtins() {
    for topo in ["medium", "large"] {
        for strategy in [Strategy::Hfel, Strategy::HfelMesh] {
            let mut c = cfg(builtin_topology(topo).unwrap(), strategy);
            c.workload.horizon_requests = 80;
            c.workload.lambda = 0.002;
            let log = run(&c).unwrap().log;

            let mut last = 0.0;
            for r in &log.records {
                let t = r.time().unwrap();
                assert!(t >= last);
                last = t;
            }

            let mut graphs: BTreeMap<u64, Vec<edgeagg::engine::TaskInfo>> = BTreeMap::new();
            let mut done: BTreeMap<(u64, usize), f64> = BTreeMap::new();
            for r in &log.records {
                match r {
                    Record::Graph { request, tasks, .. } => {
                        graphs.insert(*request, tasks.clone());
                    }
                    Record::TaskStart { t, request, task } => {
                        for p in &graphs[request][*task].preds {
                            let finished = done.get(&(*request, *p)).expect("predecessor completed");
                            assert!(finished <= t);
                        }
                    }
                    Record::TaskComplete { t, request, task } => {
                        done.insert((*request, *task), *t);
                    }
                    _ => {}
                }
            }
            // Every placed round runs all its tasks; the cloud fuses last.
            for (req, tasks) in &graphs {
                assert!(tasks.iter().all(|x| done.contains_key(&(*req, x.id))));
                let last = tasks.last().unwrap();
                assert!(matches!(last.kind, TaskKind::Aggregate { node, .. } if node == NodeId(0)));
            }

            let (nodes, links) = final_usage(&log);
            assert!(nodes.iter().chain(&links).all(|&v| v == 0));
            for d in log.placements().filter(|d| !d.is_placed()) {
                assert!(d.claims.is_empty());
            }
        }
    }
}

#[test]
fn mesh_graph_forwards_between_aggregators() {
    // Two-site instance where the mesh consolidates at edge 2.
    let mut nodes = vec![node(0, NodeKind::Cloud, 4000), node(1, NodeKind::Edge, 200), node(2, NodeKind::Edge, 200)];
    nodes.extend((3..=6).map(|i| node(i, NodeKind::Client, 1)));
    let mut links = vec![(NodeId(2), NodeId(1), LinkKind::Edge, 2000), (NodeId(1), NodeId(0), LinkKind::Cloud, 40)];
    for (c, e) in [(3, 1), (4, 1), (5, 2), (6, 2)] {
        links.push((NodeId(c), NodeId(e), LinkKind::End, 200));
    }
    let g = PhysicalGraph::new("two_sites", nodes, links).unwrap();
    let r = request(0, &[3, 4, 5, 6], 2, 30);
    let out = run_requests(&cfg(g, Strategy::HfelMesh), &[r]).unwrap();
    let tasks = out
        .log
        .records
        .iter()
        .find_map(|r| match r {
            Record::Graph { tasks, .. } => Some(tasks.clone()),
            _ => None,
        })
        .unwrap();
    let fwd = tasks.iter().filter(|t| matches!(t.kind, TaskKind::Forward { .. })).count();
    assert_eq!(fwd, 2);
    let at2 = tasks.iter().find(|t| t.kind == TaskKind::Aggregate { node: NodeId(2), fan_in: 3 }).unwrap();
    assert_eq!(at2.preds.len(), 3);
    let at0 = tasks.last().unwrap();
    assert_eq!(at0.kind, TaskKind::Aggregate { node: NodeId(0), fan_in: 1 });
}

#[test]
fn invalid_config_fails_before_running() {
    let mut c = cfg(line3(), Strategy::HfelMesh);
    c.mesh.xi = 0;
    assert!(matches!(run(&c), Err(edgeagg::Error::Config(_))));
    let mut c = cfg(line3(), Strategy::Hfel);
    c.workload.lambda = -1.0;
    assert!(run(&c).is_err());
}
