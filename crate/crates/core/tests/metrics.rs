mod common;

use common::{line3, request};
use edgeagg::engine::{run_requests, LogHeader, Record, ResultsLog, SimConfig, SCHEMA_VERSION};
use edgeagg::ilp::{build_model, solve_exact, SolveLimits};
use edgeagg::metrics::*;
use edgeagg::topology::{build_auxiliary_graph, LinkKind, PhysicalGraph};
use edgeagg::{MeshParams, Strategy, WorkloadConfig};

fn empty_log(g: &PhysicalGraph, end_time: f64) -> ResultsLog {
    let (nodes, links) = LogHeader::describe(g);
    ResultsLog {
        header: LogHeader {
            schema: SCHEMA_VERSION,
            rng: "test".into(),
            topology: g.name().into(),
            strategy: Strategy::Hfel,
            mesh: MeshParams::default(),
            workload: WorkloadConfig::default(),
            weights: *g.weights(),
            nodes,
            links,
        },
        records: Vec::new(),
        t_total: 0,
        t_failed: 0,
        end_time,
    }
}

fn cloud_link(g: &PhysicalGraph) -> usize {
    g.links().iter().find(|l| l.kind == LinkKind::Cloud).unwrap().id.0
}

#[test]
fn trfr_counts() {
    let g = line3();
    let mut log = empty_log(&g, 1.0);
    assert!(matches!(trfr(&log), Err(edgeagg::Error::UndefinedMetric(_))));
    log.t_total = 10;
    assert_eq!(trfr(&log).unwrap(), 0.0);
    log.t_failed = 3;
    assert_eq!(trfr(&log).unwrap(), 0.3);
}

#[test]
fn mur_idle_and_full() {
    let g = line3();
    let log = empty_log(&g, 10.0);
    for k in [ComponentKind::CloudLink, ComponentKind::EdgeNode, ComponentKind::EndLink] {
        assert_eq!(mur(&log, k).unwrap(), 0.0);
    }
    assert!(matches!(mur(&log, ComponentKind::EdgeLink), Err(edgeagg::Error::UndefinedMetric(_))));

    let mut full = empty_log(&g, 10.0);
    full.records.push(Record::Usage { t: 0.0, nodes: vec![], links: vec![(cloud_link(&g), 4000)] });
    assert_eq!(mur(&full, ComponentKind::CloudLink).unwrap(), 1.0);
    assert_eq!(mur(&full, ComponentKind::EndLink).unwrap(), 0.0);
}

#[test]
fn mur_is_time_weighted_and_split_invariant() {
    let g = line3();
    let l = cloud_link(&g);
    let mut log = empty_log(&g, 10.0);
    log.records.push(Record::Usage { t: 0.0, nodes: vec![], links: vec![(l, 1000)] });
    log.records.push(Record::Usage { t: 5.0, nodes: vec![], links: vec![(l, 3000)] });
    let hand = (1000.0 * 5.0 + 3000.0 * 5.0) / (10.0 * 4000.0);
    assert_eq!(mur(&log, ComponentKind::CloudLink).unwrap(), hand);

    let mut split = log.clone();
    split.records.insert(1, Record::Usage { t: 2.0, nodes: vec![], links: vec![(l, 1000)] });
    assert_eq!(mur(&split, ComponentKind::CloudLink).unwrap(), hand);

    // Edge node busy half the run at half capacity.
    let mut nodes = empty_log(&g, 10.0);
    let e = g.node_index(edgeagg::NodeId(1)).unwrap();
    nodes.records.push(Record::Usage { t: 5.0, nodes: vec![(e, 100)], links: vec![] });
    assert_eq!(mur(&nodes, ComponentKind::EdgeNode).unwrap(), 0.25);
}

#[test]
fn weighted_capacity_matches_ilp_on_the_line() {
    let g = line3();
    let r = request(0, &[2], 5, 30);
    let out = run_requests(&SimConfig::new(g.clone(), WorkloadConfig::default(), Strategy::Hfel), std::slice::from_ref(&r))
        .unwrap();
    let w = ComponentWeights::from_header(&out.log.header);
    let heuristic = cumulative_weighted_capacity(&out.log, &w).unwrap();
    let m = build_model(&g, &build_auxiliary_graph(&g, &g.edges()).unwrap(), &[r]).unwrap();
    assert_eq!(heuristic, solve_exact(&m, SolveLimits::default()).objective_value);

    assert_eq!(cumulative_weighted_capacity(&empty_log(&g, 0.0), &w).unwrap(), 0.0);
}

#[test]
fn weighted_capacity_is_linear_in_weights() {
    let g = line3();
    let out = run_requests(
        &SimConfig::new(g.clone(), WorkloadConfig::default(), Strategy::Hfel),
        &[request(0, &[2], 5, 30)],
    )
    .unwrap();
    let w = ComponentWeights::from_header(&out.log.header);
    let base = cumulative_weighted_capacity(&out.log, &w).unwrap();
    let l = cloud_link(&g);
    let mut doubled = w.clone();
    *doubled.links.get_mut(&l).unwrap() *= 2.0;
    let cloud_part = w.links[&l] * 30.0;
    assert_eq!(cumulative_weighted_capacity(&out.log, &doubled).unwrap(), base + cloud_part);

    let mut missing = w.clone();
    missing.links.remove(&l);
    let err = cumulative_weighted_capacity(&out.log, &missing).unwrap_err().to_string();
    assert!(err.contains(&format!("link {l}")), "{err}");
}

#[test]
fn summary_fields_are_consistent() {
    let g = line3();
    let out = run_requests(
        &SimConfig::new(g, WorkloadConfig::default(), Strategy::HfelMesh),
        &[request(0, &[2], 5, 30)],
    )
    .unwrap();
    let s = summarize(&out.log, Some(&out.placement_ms)).unwrap();
    assert_eq!((s.t_total, s.t_failed, s.trfr), (1, 0, 0.0));
    assert!(s.mean_round_duration_ms > 0.0);
    assert!(s.mean_placement_ms.unwrap() >= 0.0);
    // The round holds its claims for the whole run.
    assert!((s.mur_cloud_links - 30.0 / 4000.0).abs() < 1e-12);
    assert!(summarize(&out.log, None).unwrap().mean_placement_ms.is_none());
}

fn row(seed: u64) -> SweepRow {
    SweepRow {
        topology: "medium".into(),
        strategy: "hfel_mesh".into(),
        xi: 2,
        lambda: 0.00062,
        clients: None,
        seed,
        summary: RunSummary {
            trfr: 0.125,
            mur_cloud_links: 0.5,
            mur_edge_links: 0.25,
            mur_edge_nodes: 0.0625,
            cumulative_weighted_capacity: 1234.5,
            mean_round_duration_ms: 20000.0,
            mean_placement_ms: None,
            t_total: 8,
            t_failed: 1,
        },
    }
}

#[test]
fn csv_export() {
    let empty = to_csv(&[]);
    assert_eq!(empty.lines().count(), 1);
    assert_eq!(empty.trim_end(), CSV_HEADER.join(","));

    let one = to_csv(&[row(3)]);
    let lines: Vec<&str> = one.lines().collect();
    assert_eq!(lines.len(), 2);
    let cells: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(cells.len(), CSV_HEADER.len());
    assert_eq!(cells[..7], ["medium", "hfel_mesh", "2", "0.00062", "", "3", "0.125"]);
    assert_eq!(cells[12], "");
}

#[test]
fn json_round_trip() {
    let rows = vec![row(1), row(2)];
    assert_eq!(from_json(&to_json(&rows)).unwrap(), rows);
    assert_eq!(from_json(&to_json(&[])).unwrap(), vec![]);
}
