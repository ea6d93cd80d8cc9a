use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use edgeagg::compare::{compare, compare_to_csv, CompareRow};
use edgeagg::ilp::{build_model, export_standard_form, SolveLimits};
use edgeagg::metrics::{to_csv, to_json, SweepRow};
use edgeagg::scenario::{load_graph, parse_seeds};
use edgeagg::topology::{build_auxiliary_graph, builtin_topology, load_topology, save_topology};
use edgeagg::workload::generate_requests;
use edgeagg::{parse_scenario, Error, MeshParams, RunSpec, Scenario, Strategy, WorkloadConfig};

/// Edge-to-cloud federated aggregation simulator.
#[derive(Parser)]
#[command(name = "edgeagg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario sweep and write summaries and sweep tables.
    Run(RunArgs),
    /// Compare the ILP optimum with HFEL and HFEL-MESH on one request batch.
    Compare(CompareArgs),
    /// Check a topology file against the graph invariants.
    Validate {
        /// Topology file.
        file: PathBuf,
    },
    /// Print a builtin topology in the file format.
    Export {
        /// Builtin name (medium or large).
        name: String,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file; flags below override its keys.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Output directory (otherwise the sweep CSV goes to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Parallel runs.
    #[arg(long, env = "EDGEAGG_JOBS")]
    jobs: Option<usize>,
    /// Builtin name or topology file.
    #[arg(long)]
    topology: Option<String>,
    /// Comma-separated strategies.
    #[arg(long, value_delimiter = ',')]
    strategy: Vec<Strategy>,
    #[arg(long, value_delimiter = ',')]
    xi: Vec<u32>,
    /// Arrival rates in requests per millisecond.
    #[arg(long, value_delimiter = ',')]
    lambda: Vec<f64>,
    /// `1,2,3` or `1..5`.
    #[arg(long)]
    seeds: Option<String>,
    /// Requests per run.
    #[arg(long)]
    requests: Option<usize>,
    /// Write the full event log of every run.
    #[arg(long)]
    logs: bool,
    /// Record wall-clock placement time (makes artifacts non-reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long, default_value = "medium")]
    topology: String,
    #[arg(long, default_value_t = 1)]
    requests: usize,
    /// Clients per request; defaults to the workload's random range.
    #[arg(long)]
    clients: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    xi: u32,
    #[arg(long)]
    cloud_cost_scale: Option<f64>,
    /// Exact-solver time limit in seconds.
    #[arg(long, default_value_t = 60)]
    time_limit: u64,
    /// Write compare.csv and compare.json here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Export the ILP in MPS form to this file.
    #[arg(long)]
    mps: Option<PathBuf>,
}

/// Usage and configuration problems exit with 2, failed runs with 1.
enum Failure {
    Usage(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Parse { .. } | Error::Validation { .. } => Failure::Usage(e.to_string()),
            other => Failure::Run(other.to_string()),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::Run(format!("{}: {e}", path.display()))
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Validate { file } => cmd_validate(&file),
        Command::Export { name } => builtin_topology(&name).map(|g| print!("{}", save_topology(&g))).map_err(Into::into),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Run(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

fn build_scenario(a: &RunArgs) -> Result<Scenario, Failure> {
    let mut s = match &a.scenario {
        Some(p) => parse_scenario(&fs::read_to_string(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?)?,
        None => Scenario::default(),
    };
    if let Some(t) = &a.topology {
        s.topology = t.clone();
    }
    if !a.strategy.is_empty() {
        s.strategies = a.strategy.clone();
    }
    if !a.xi.is_empty() {
        s.xi = a.xi.clone();
    }
    if !a.lambda.is_empty() {
        s.lambda = a.lambda.clone();
    }
    if let Some(seeds) = &a.seeds {
        s.seeds = parse_seeds(seeds).ok_or_else(|| Failure::Usage(format!("bad seeds `{seeds}`")))?;
    }
    if let Some(n) = a.requests {
        s.horizon_requests = n;
    }
    if let Some(o) = &a.out {
        s.out = Some(o.clone());
    }
    s.validate()?;
    Ok(s)
}

fn run_name(spec: &RunSpec) -> String {
    let clients = spec.clients.map(|c| format!("_c{c}")).unwrap_or_default();
    format!("{}_xi{}_lambda{}{}_seed{}", spec.strategy, spec.xi, spec.lambda, clients, spec.seed)
}

fn cmd_run(a: RunArgs) -> Result<(), Failure> {
    let s = build_scenario(&a)?;
    let graph = s.load_graph()?;
    let runs = s.runs();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Failure::Usage(format!("thread pool: {e}")))?;
    eprintln!("{} runs on {} ({} jobs)", runs.len(), graph.name(), pool.current_num_threads());

    // Runs execute in parallel; results keep sweep order so artifacts are stable.
    let results: Vec<_> = pool.install(|| runs.par_iter().map(|spec| s.execute(&graph, spec, a.timing)).collect());

    let runs_dir = s.out.as_ref().map(|o| o.join("runs"));
    if let Some(d) = &runs_dir {
        fs::create_dir_all(d).map_err(|e| io_err(d, e))?;
    }
    let mut rows: Vec<SweepRow> = Vec::with_capacity(results.len());
    let mut breaches = Vec::new();
    for (spec, res) in runs.iter().zip(results) {
        match res {
            Ok((row, out)) => {
                if let Some(d) = &runs_dir {
                    let name = run_name(spec);
                    write(&d.join(format!("{name}.json")), &to_json(std::slice::from_ref(&row)))?;
                    if a.logs {
                        write(&d.join(format!("{name}.jsonl")), &out.log.to_jsonl(Some(&row.summary)))?;
                    }
                }
                rows.push(row);
            }
            Err(e) => breaches.push(format!("{}: {e}", run_name(spec))),
        }
    }

    match &s.out {
        Some(o) => {
            write(&o.join("sweep.csv"), &to_csv(&rows))?;
            write(&o.join("sweep.json"), &to_json(&rows))?;
            eprintln!("wrote {} rows to {}", rows.len(), o.display());
        }
        None => print!("{}", to_csv(&rows)),
    }
    if breaches.is_empty() {
        Ok(())
    } else {
        for b in &breaches {
            eprintln!("run failed: {b}");
        }
        Err(Failure::Run(format!("{} of {} runs failed", breaches.len(), runs.len())))
    }
}

fn opt(x: Option<f64>, digits: usize) -> String {
    x.map(|v| format!("{v:.digits$}")).unwrap_or_else(|| "-".into())
}

fn print_table(rows: &[CompareRow]) {
    println!(
        "{:<10} {:<14} {:>12} {:>7} {:>10} {:>10} {:>10} {:>10}",
        "method", "status", "objective", "placed", "mur_cloud", "mur_edge_l", "mur_edge_n", "ms"
    );
    for r in rows {
        println!(
            "{:<10} {:<14} {:>12} {:>7} {:>10} {:>10} {:>10} {:>10.2}",
            r.method,
            r.status,
            opt(r.objective, 2),
            r.placed,
            opt(r.mur_cloud_links, 4),
            opt(r.mur_edge_links, 4),
            opt(r.mur_edge_nodes, 4),
            r.solve_ms
        );
    }
}

fn cmd_compare(a: CompareArgs) -> Result<(), Failure> {
    let g = load_graph(&a.topology)?;
    let w = WorkloadConfig {
        seed: a.seed,
        horizon_requests: a.requests,
        clients_per_request: a.clients.map(|c| (c, c)),
        ..Default::default()
    };
    let reqs = if a.requests == 0 { Vec::new() } else { generate_requests(&g, &w)? };
    let mesh = MeshParams { xi: a.xi, cloud_cost_scale: a.cloud_cost_scale.unwrap_or(MeshParams::default().cloud_cost_scale) };
    edgeagg::engine::check_params(&w, &mesh, &Default::default())?;
    if let Some(p) = &a.mps {
        if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        }
        let model = build_model(&g, &build_auxiliary_graph(&g, &g.edges())?, &reqs)?;
        write(p, &export_standard_form(&model))?;
    }
    let limits = SolveLimits { time: Duration::from_secs(a.time_limit), ..Default::default() };
    let rows = compare(&g, &reqs, mesh, limits)?;
    print_table(&rows);
    if let Some(o) = &a.out {
        fs::create_dir_all(o).map_err(|e| io_err(o, e))?;
        write(&o.join("compare.csv"), &compare_to_csv(&rows))?;
        let json = serde_json::to_string_pretty(&rows).expect("rows serialize");
        write(&o.join("compare.json"), &json)?;
    }
    Ok(())
}

fn cmd_validate(file: &Path) -> Result<(), Failure> {
    let text = fs::read_to_string(file).map_err(|e| Failure::Usage(format!("{}: {e}", file.display())))?;
    let name = file.file_stem().and_then(|s| s.to_str()).unwrap_or("topology");
    let g = load_topology(name, &text)?;
    println!(
        "ok: {} nodes ({} clients, {} edge, {} cloud), {} links",
        g.node_count(),
        g.clients().len(),
        g.edges().len(),
        g.clouds().len(),
        g.link_count()
    );
    Ok(())
}
