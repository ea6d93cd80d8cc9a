//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line (straight to
//! stderr, so it shows even when output is captured) and then asserts.

mod common;

use std::io::Write as _;
use std::process::Command;
use std::sync::{Mutex, OnceLock};
use std::time::{Duration, Instant};

use common::random_instance;
use edgeagg::compare::{compare, heuristic_batch};
use edgeagg::engine::{aggregation_latency, run, training_latency, transfer_latency, LatencyConstants, Record};
use edgeagg::ilp::*;
use edgeagg::metrics::summarize;
use edgeagg::topology::{build_auxiliary_graph, builtin_topology, PhysicalGraph};
use edgeagg::workload::{generate_requests, model_catalog, TrainingRoundRequest};
use edgeagg::{MeshParams, ResultsLog, RunSummary, SimConfig, Strategy, WorkloadConfig};
use rayon::prelude::*;

fn report(n: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {n:>2} [{name}]: {verdict} — {detail}");
}

/// Breaches of the simulation invariants found across criteria 3–7.
static BREACHES: Mutex<Vec<String>> = Mutex::new(Vec::new());

fn breach(msg: String) {
    BREACHES.lock().unwrap().push(msg);
}

// ---------------------------------------------------------------- ILP oracle

fn small_instances() -> Vec<(PhysicalGraph, Vec<TrainingRoundRequest>)> {
    (0..120u64).map(|s| random_instance(1000 + s, 2 + (s % 4) as u32, 1 + (s % 2) as usize)).collect()
}

#[test]
fn criterion_01_ilp_exactness() {
    let started = Instant::now();
    let instances = small_instances();
    let mut mismatches = Vec::new();
    let mut optimal = 0;
    for (i, (g, reqs)) in instances.iter().enumerate() {
        let aux = build_auxiliary_graph(g, &g.edges()).unwrap();
        let sol = solve_exact(&build_model(g, &aux, reqs).unwrap(), SolveLimits::default());
        let oracle = brute_force_oracle(g, &aux, reqs).unwrap();
        let exact = match sol.status {
            SolveStatus::Optimal => Some(sol.objective_value),
            SolveStatus::Infeasible => None,
            SolveStatus::LimitReached => {
                mismatches.push(format!("#{i} hit limits"));
                continue;
            }
        };
        optimal += exact.is_some() as usize;
        if exact != oracle {
            mismatches.push(format!("#{i}: exact {exact:?} oracle {oracle:?}"));
        }
    }
    let secs = started.elapsed().as_secs_f64();
    let pass = mismatches.is_empty() && instances.len() >= 100 && secs <= 60.0;
    report(
        1,
        "ILP exactness",
        pass,
        &format!("{} instances ({optimal} feasible), {} mismatches, {secs:.1} s (limit 60 s)", instances.len(), mismatches.len()),
    );
    assert!(pass, "{mismatches:?}");
}

#[test]
fn criterion_02_constraint_soundness() {
    let (mut checked, mut injected) = (0, 0);
    let mut problems = Vec::new();
    for (i, (g, reqs)) in small_instances().iter().enumerate() {
        let aux = build_auxiliary_graph(g, &g.edges()).unwrap();
        let m = build_model(g, &aux, reqs).unwrap();
        let sol = solve_exact(&m, SolveLimits::default());
        if sol.status != SolveStatus::Optimal {
            continue;
        }
        checked += 1;
        let v = verify_solution(&m, &sol);
        if !v.is_empty() {
            problems.push(format!("#{i}: {}", v[0]));
        }
        // Push each load variable one unit over its component's capacity.
        for n in g.nodes() {
            if let Some(var) = m.var(&VarKey::NodeLoad { n: n.id }) {
                let mut values = sol.values.clone();
                values[var] = n.capacity as f64 + 1.0;
                injected += 1;
                if !verify_values(&m, &values).iter().any(|x| x.kind == ViolationKind::Row(Family::NodeCapacity)) {
                    problems.push(format!("#{i}: node {} overshoot undetected", n.id));
                }
            }
        }
        for l in g.links() {
            if let Some(var) = m.var(&VarKey::LinkLoad { link: l.id }) {
                let mut values = sol.values.clone();
                values[var] = l.capacity as f64 + 1.0;
                injected += 1;
                if !verify_values(&m, &values).iter().any(|x| x.kind == ViolationKind::Row(Family::LinkCapacity)) {
                    problems.push(format!("#{i}: link {} overshoot undetected", l.id.0));
                }
            }
        }
    }
    let pass = problems.is_empty() && checked > 0;
    report(
        2,
        "constraint soundness",
        pass,
        &format!("{checked} optimal solutions clean, {injected} injected overshoots, {} missed", problems.len()),
    );
    assert!(pass, "{problems:?}");
}

// ------------------------------------------------------- static comparisons

struct Batch {
    clients: usize,
    ilp: Option<f64>,
    hfel: f64,
    mesh: f64,
    cloud_hfel: f64,
    cloud_mesh: f64,
}

struct Batches {
    rows: Vec<Batch>,
    secs: f64,
}

/// Medium topology, 4–10 clients per request, five seeds each, 1–10 requests.
fn batches() -> &'static Batches {
    static CELL: OnceLock<Batches> = OnceLock::new();
    CELL.get_or_init(|| {
        let started = Instant::now();
        let g = builtin_topology("medium").unwrap();
        let mesh = MeshParams::default();
        let cells: Vec<(usize, u64)> = (4..=10).flat_map(|c| (1..=5).map(move |s| (c, s))).collect();
        let rows = cells
            .par_iter()
            .map(|&(clients, seed)| {
                let w = WorkloadConfig {
                    seed: seed * 100 + clients as u64,
                    horizon_requests: 1 + (seed as usize * 7 + clients) % 10,
                    clients_per_request: Some((clients, clients)),
                    ..Default::default()
                };
                let reqs = generate_requests(&g, &w).unwrap();
                let rows = compare(&g, &reqs, mesh, SolveLimits::default()).unwrap();
                for s in [Strategy::Hfel, Strategy::HfelMesh] {
                    let (usage, _, _) = heuristic_batch(&g, &reqs, s, mesh);
                    check_usage(&g, &usage, &format!("batch c{clients} s{seed} {s}"));
                }
                Batch {
                    clients,
                    ilp: rows[0].objective,
                    hfel: rows[1].objective.unwrap(),
                    mesh: rows[2].objective.unwrap(),
                    cloud_hfel: rows[1].mur_cloud_links.unwrap(),
                    cloud_mesh: rows[2].mur_cloud_links.unwrap(),
                }
            })
            .collect();
        Batches { rows, secs: started.elapsed().as_secs_f64() }
    })
}

fn check_usage(g: &PhysicalGraph, usage: &edgeagg::Usage, what: &str) {
    for (i, n) in g.nodes().iter().enumerate() {
        if usage.nodes[i] > n.capacity {
            breach(format!("{what}: node {} over capacity", n.id));
        }
    }
    for l in g.links() {
        if usage.links[l.id.0] > l.capacity {
            breach(format!("{what}: link {} over capacity", l.id.0));
        }
    }
}

#[test]
fn criterion_03_method_ordering() {
    let b = batches();
    let mut ordered = 0;
    let mut gaps = Vec::new();
    for r in &b.rows {
        if let Some(i) = r.ilp {
            if i <= r.mesh + 1e-9 && r.mesh <= r.hfel + 1e-9 {
                ordered += 1;
            }
            if i > 0.0 {
                gaps.push((r.mesh - i) / i);
            }
        }
    }
    let share = ordered as f64 / b.rows.len() as f64;
    let gap = gaps.iter().sum::<f64>() / gaps.len().max(1) as f64;
    let pass = share >= 0.9 && gap <= 0.5 && b.secs <= 600.0 && !gaps.is_empty();
    report(
        3,
        "method ordering",
        pass,
        &format!(
            "ILP ≤ MESH ≤ HFEL in {ordered}/{} ({:.0}%, need ≥ 90%), mean MESH/ILP gap {:.1}% (≤ 50%), {:.1} s",
            b.rows.len(),
            share * 100.0,
            gap * 100.0,
            b.secs
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_04_cloud_link_relief() {
    let b = batches();
    let mut parts = Vec::new();
    let mut pass = true;
    for c in 4..=10 {
        let cell: Vec<&Batch> = b.rows.iter().filter(|r| r.clients == c).collect();
        let h = cell.iter().map(|r| r.cloud_hfel).sum::<f64>() / cell.len() as f64;
        let m = cell.iter().map(|r| r.cloud_mesh).sum::<f64>() / cell.len() as f64;
        let relief = 1.0 - m / h;
        pass &= cell.len() >= 5 && relief >= 0.15;
        parts.push(format!("{c}:{:.0}%", relief * 100.0));
    }
    report(4, "cloud-link relief", pass, &format!("relative relief per client count (need ≥ 15%): {}", parts.join(" ")));
    assert!(pass);
}

// ---------------------------------------------------------------- simulations

const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

/// Runs one configuration, checks the log's invariants, and for the first
/// seed replays it to confirm a byte-identical log.
fn checked_run(cfg: &SimConfig) -> RunSummary {
    let what = format!("{} {} xi={} λ={} seed={}", cfg.graph.name(), cfg.strategy, cfg.mesh.xi, cfg.workload.lambda, cfg.workload.seed);
    let out = match run(cfg) {
        Ok(o) => o,
        Err(e) => {
            breach(format!("{what}: {e}"));
            panic!("{what}: {e}");
        }
    };
    check_log(&out.log, &what);
    if cfg.workload.seed == SEEDS[0] && run(cfg).unwrap().log.to_jsonl(None) != out.log.to_jsonl(None) {
        breach(format!("{what}: replay differs"));
    }
    summarize(&out.log, None).unwrap()
}

fn check_log(log: &ResultsLog, what: &str) {
    let mut nodes = vec![0u32; log.header.nodes.len()];
    let mut links = vec![0u32; log.header.links.len()];
    for r in &log.records {
        match r {
            Record::Usage { nodes: ns, links: ls, .. } => {
                for &(i, v) in ns {
                    nodes[i] = v;
                    if v > log.header.nodes[i].capacity {
                        breach(format!("{what}: node {} over capacity", log.header.nodes[i].id));
                    }
                }
                for &(i, v) in ls {
                    links[i] = v;
                    if v > log.header.links[i].capacity {
                        breach(format!("{what}: link {i} over capacity"));
                    }
                }
            }
            Record::Placement { decision, .. }
                if decision.is_placed() && !decision.overlay.is_valid_forest(&decision.aggregators) =>
            {
                breach(format!("{what}: request {} overlay is not a cloud-rooted forest", decision.request_id));
            }
            _ => {}
        }
    }
    if nodes.iter().chain(&links).any(|&v| v != 0) {
        breach(format!("{what}: usage not idle at end of run"));
    }
}

fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        for &k in &idx[i..=j] {
            r[k] = (i + j) as f64 / 2.0;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation with average ranks for ties.
fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

const XIS: [u32; 5] = [1, 2, 4, 8, 16];

/// Seed-mean (cloud-link MUR, edge-node MUR) per ξ, per topology.
type XiSweep = Vec<(&'static str, Vec<(f64, f64)>)>;

fn xi_sweep() -> &'static XiSweep {
    static CELL: OnceLock<XiSweep> = OnceLock::new();
    CELL.get_or_init(|| {
        ["medium", "large"]
            .into_iter()
            .map(|topo| {
                let g = builtin_topology(topo).unwrap();
                let cells: Vec<(u32, u64)> = XIS.iter().flat_map(|&x| SEEDS.iter().map(move |&s| (x, s))).collect();
                let sums: Vec<(u32, RunSummary)> = cells
                    .par_iter()
                    .map(|&(xi, seed)| {
                        let mut cfg = SimConfig::new(g.clone(), WorkloadConfig { seed, ..Default::default() }, Strategy::HfelMesh);
                        cfg.mesh.xi = xi;
                        (xi, checked_run(&cfg))
                    })
                    .collect();
                let per_xi = XIS
                    .iter()
                    .map(|&xi| {
                        let s: Vec<&RunSummary> = sums.iter().filter(|(x, _)| *x == xi).map(|(_, s)| s).collect();
                        let n = s.len() as f64;
                        (
                            s.iter().map(|r| r.mur_cloud_links).sum::<f64>() / n,
                            s.iter().map(|r| r.mur_edge_nodes).sum::<f64>() / n,
                        )
                    })
                    .collect();
                (topo, per_xi)
            })
            .collect()
    })
}

#[test]
fn criterion_05_xi_tradeoff() {
    let x: Vec<f64> = XIS.iter().map(|&v| v as f64).collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for (topo, per_xi) in xi_sweep() {
        let cloud: Vec<f64> = per_xi.iter().map(|p| p.0).collect();
        let edge: Vec<f64> = per_xi.iter().map(|p| p.1).collect();
        let (rc, re) = (spearman(&x, &cloud), spearman(&x, &edge));
        pass &= rc >= 0.9 && re <= -0.7;
        parts.push(format!("{topo}: ρ(cloud links) {rc:.3} (≥ 0.9), ρ(edge nodes) {re:.3} (≤ −0.7)"));
    }
    report(5, "ξ trade-off", pass, &parts.join("; "));
    assert!(pass);
}

const LAMBDAS: [f64; 5] = [0.00062, 0.0006775, 0.000735, 0.0007925, 0.00085];

/// TRFR per (strategy, λ index, seed) on the large topology.
type LambdaSweep = Vec<(Strategy, usize, u64, f64)>;

fn lambda_sweep() -> &'static LambdaSweep {
    static CELL: OnceLock<LambdaSweep> = OnceLock::new();
    CELL.get_or_init(|| {
        let started = Instant::now();
        let g = builtin_topology("large").unwrap();
        let mut cells = Vec::new();
        for s in [Strategy::Hfel, Strategy::HfelMesh] {
            for li in 0..LAMBDAS.len() {
                for &seed in &SEEDS {
                    cells.push((s, li, seed));
                }
            }
        }
        let rows = cells
            .par_iter()
            .map(|&(s, li, seed)| {
                let w = WorkloadConfig { lambda: LAMBDAS[li], seed, ..Default::default() };
                (s, li, seed, checked_run(&SimConfig::new(g.clone(), w, s)).trfr)
            })
            .collect();
        let secs = started.elapsed().as_secs_f64();
        let _ = writeln!(std::io::stderr(), "λ sweep: {} runs in {secs:.1} s (limit 900 s)", cells.len());
        rows
    })
}

fn mean_trfr(s: Strategy, li: usize) -> f64 {
    let v: Vec<f64> = lambda_sweep().iter().filter(|r| r.0 == s && r.1 == li).map(|r| r.3).collect();
    v.iter().sum::<f64>() / v.len() as f64
}

#[test]
fn criterion_06_lambda_saturation() {
    let rows = lambda_sweep();
    let mut pass = true;
    let mut parts = Vec::new();
    for s in [Strategy::Hfel, Strategy::HfelMesh] {
        let lo = mean_trfr(s, 0);
        let hi = mean_trfr(s, LAMBDAS.len() - 1);
        let monotone = SEEDS.iter().all(|&seed| {
            let per: Vec<f64> = (0..LAMBDAS.len())
                .map(|li| rows.iter().find(|r| r.0 == s && r.1 == li && r.2 == seed).unwrap().3)
                .collect();
            per.windows(2).all(|w| w[0] <= w[1])
        });
        pass &= lo < 0.25 && hi > 0.6 && monotone;
        parts.push(format!(
            "{s}: TRFR {lo:.3} at λ={} (< 0.25), {hi:.3} at λ={} (> 0.6), per-seed monotone {monotone}",
            LAMBDAS[0],
            LAMBDAS[LAMBDAS.len() - 1]
        ));
    }
    report(6, "λ saturation", pass, &parts.join("; "));
    assert!(pass);
}

#[test]
fn criterion_07_mesh_advantage() {
    let mut never_worse = true;
    let mut max_gap = f64::NEG_INFINITY;
    let mut parts = Vec::new();
    for (li, lambda) in LAMBDAS.iter().enumerate() {
        let (h, m) = (mean_trfr(Strategy::Hfel, li), mean_trfr(Strategy::HfelMesh, li));
        never_worse &= m <= h;
        max_gap = max_gap.max(h - m);
        parts.push(format!("{lambda}:{h:.3}/{m:.3}"));
    }
    let pass = never_worse && max_gap >= 0.05;
    report(
        7,
        "MESH advantage",
        pass,
        &format!(
            "TRFR hfel/mesh per λ {}; MESH never worse {never_worse}, max gap {:.1} pp (≥ 5)",
            parts.join(" "),
            max_gap * 100.0
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_08_simulation_invariants() {
    // Force every run behind criteria 3–7.
    let n = batches().rows.len() + xi_sweep().len() * XIS.len() * SEEDS.len() + lambda_sweep().len();
    let breaches = BREACHES.lock().unwrap().clone();
    let pass = breaches.is_empty();
    report(
        8,
        "simulation invariants",
        pass,
        &format!("{n} runs checked for capacity, forest shape, final idleness and replay; {} breaches", breaches.len()),
    );
    assert!(pass, "{breaches:?}");
}

// ------------------------------------------------------------------ latency

#[test]
fn criterion_09_latency_formulas() {
    let c = LatencyConstants::default();
    let arch = |name: &str| model_catalog().into_iter().find(|m| m.name == name).unwrap();
    let rel = |a: f64, b: f64| if b == 0.0 { a.abs() } else { ((a - b) / b).abs() };
    let sq = arch("Squeezenet");
    let one = aggregation_latency(&sq, 1, 1, &c);
    let checks = [
        ("training Squeezenet×100", training_latency(&sq, 100), 2640.0),
        ("training Res18×59", training_latency(&arch("Res18"), 59), 1286.2),
        ("training 0 images", training_latency(&arch("Res50"), 0), 0.0),
        ("aggregation Squeezenet", one, 1.684392),
        ("aggregation fan-in 2", aggregation_latency(&sq, 2, 1, &c), 2.0 * one),
        ("aggregation claim 2", aggregation_latency(&sq, 1, 2, &c), one / 2.0),
        ("transfer Squeezenet@20", transfer_latency(&sq, 20, &c), 673.7568),
        ("transfer MobileNetV2@40", transfer_latency(&arch("MobileNetV2"), 40, &c), 2720.0),
        ("transfer doubling", transfer_latency(&sq, 40, &c), transfer_latency(&sq, 20, &c) / 2.0),
    ];
    let failed: Vec<&str> = checks.iter().filter(|(_, got, want)| rel(*got, *want) > 1e-9).map(|c| c.0).collect();
    let pass = failed.is_empty();
    report(9, "latency formulas", pass, &format!("{} oracles within 1e-9 relative, failed: {failed:?}", checks.len()));
    assert!(pass);
}

// ----------------------------------------------------------- external solver

const HIGHS: &str = "import sys, highspy
h = highspy.Highs()
h.setOptionValue('output_flag', False)
h.setOptionValue('mip_rel_gap', 0.0)
h.setOptionValue('mip_abs_gap', 0.0)
h.readModel(sys.argv[1])
h.run()
print(h.modelStatusToString(h.getModelStatus()))
print(repr(h.getInfo().objective_function_value))
";

fn highs_available() -> bool {
    Command::new("python3").args(["-c", "import highspy"]).output().map(|o| o.status.success()).unwrap_or(false)
}

#[test]
fn criterion_10_export_cross_check() {
    if !highs_available() {
        report(10, "ILP export cross-check", true, "SKIPPED: python3 with highspy not available");
        return;
    }
    let dir = std::env::temp_dir().join(format!("edgeagg-accept-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let mut parts = Vec::new();
    let mut pass = true;
    let mut found = 0;
    for seed in 0u64.. {
        if found == 3 {
            break;
        }
        let (g, reqs) = random_instance(7000 + seed, 3, 1 + (seed % 2) as usize);
        let m = build_model(&g, &build_auxiliary_graph(&g, &g.edges()).unwrap(), &reqs).unwrap();
        let sol = solve_exact(&m, SolveLimits { time: Duration::from_secs(60), ..Default::default() });
        if sol.status != SolveStatus::Optimal {
            continue;
        }
        found += 1;
        let path = dir.join(format!("inst{seed}.mps"));
        std::fs::write(&path, export_standard_form(&m)).unwrap();
        let out = Command::new("python3").args(["-c", HIGHS, path.to_str().unwrap()]).output().unwrap();
        let text = String::from_utf8_lossy(&out.stdout);
        let mut lines = text.lines();
        let status = lines.next().unwrap_or("").to_string();
        let value: Option<f64> = lines.next().and_then(|v| v.trim().parse().ok());
        let ok = status == "Optimal" && value == Some(sol.objective_value);
        pass &= ok;
        parts.push(format!("{} vars: ours {} highs {status} {value:?}", m.variables.len(), sol.objective_value));
    }
    std::fs::remove_dir_all(&dir).ok();
    report(10, "ILP export cross-check", pass, &parts.join("; "));
    assert!(pass);
}
