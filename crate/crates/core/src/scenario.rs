//! Scenario files and sweep execution.
//!
//! A scenario is a `key = value` text file; `#` starts a comment. List-valued
//! keys take comma-separated values, and `seeds` also accepts an inclusive
//! range `a..b`. Every combination of strategy × ξ × λ × clients × seed is one
//! simulation run.
//!
//! ```text
//! topology = large            # builtin name or path to a topology file
//! strategy = hfel, hfel_mesh
//! xi = 1, 2, 4, 8, 16
//! lambda = 0.00062, 0.00085
//! seeds = 1..5
//! horizon_requests = 400
//! ```

use std::collections::BTreeSet;
use std::path::PathBuf;

use crate::allocators::{MeshParams, Strategy};
use crate::engine::{check_params, run, LatencyConstants, RunOutput, SimConfig};
use crate::error::{Error, Result};
use crate::metrics::{summarize, SweepRow};
use crate::topology::{builtin_topology, load_topology, PhysicalGraph, Weights};
use crate::workload::WorkloadConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub topology: String,
    pub strategies: Vec<Strategy>,
    pub xi: Vec<u32>,
    pub lambda: Vec<f64>,
    /// Fixed client counts per request; empty means the workload's fraction bounds.
    pub clients: Vec<usize>,
    pub seeds: Vec<u64>,
    pub horizon_requests: usize,
    pub client_fraction_low: f64,
    pub client_fraction_high: f64,
    pub cloud_cost_scale: f64,
    pub latency: LatencyConstants,
    pub weights: Weights,
    pub out: Option<PathBuf>,
}

impl Default for Scenario {
    fn default() -> Self {
        let w = WorkloadConfig::default();
        Self {
            topology: "medium".into(),
            strategies: vec![Strategy::HfelMesh],
            xi: vec![1],
            lambda: vec![w.lambda],
            clients: Vec::new(),
            seeds: vec![1],
            horizon_requests: w.horizon_requests,
            client_fraction_low: w.client_fraction_low,
            client_fraction_high: w.client_fraction_high,
            cloud_cost_scale: MeshParams::default().cloud_cost_scale,
            latency: LatencyConstants::default(),
            weights: Weights::default(),
            out: None,
        }
    }
}

/// Coordinates of one run within a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSpec {
    pub strategy: Strategy,
    pub xi: u32,
    pub lambda: f64,
    pub clients: Option<usize>,
    pub seed: u64,
}

fn list<T>(key: &str, value: &str, line: usize, parse: impl Fn(&str) -> Option<T>) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(s).ok_or_else(|| Error::Parse { line, message: format!("bad value `{s}` for `{key}`") }))
        .collect()
}

fn one<T>(key: &str, value: &str, line: usize, parse: impl Fn(&str) -> Option<T>) -> Result<T> {
    parse(value).ok_or_else(|| Error::Parse { line, message: format!("bad value `{value}` for `{key}`") })
}

fn float(s: &str) -> Option<f64> {
    s.parse().ok()
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut s = Scenario::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| Error::Parse { line, message: format!("expected `key = value`, got `{content}`") })?;
        match key {
            "topology" => s.topology = value.to_string(),
            "strategy" | "strategies" => s.strategies = list(key, value, line, |x| x.parse().ok())?,
            "xi" => s.xi = list(key, value, line, |x| x.parse().ok())?,
            "lambda" => s.lambda = list(key, value, line, float)?,
            "clients" => s.clients = list(key, value, line, |x| x.parse().ok())?,
            "seed" | "seeds" => s.seeds = parse_seeds(value).ok_or_else(|| Error::Parse { line, message: format!("bad seeds `{value}`") })?,
            "horizon_requests" => s.horizon_requests = one(key, value, line, |x| x.parse().ok())?,
            "client_fraction_low" => s.client_fraction_low = one(key, value, line, float)?,
            "client_fraction_high" => s.client_fraction_high = one(key, value, line, float)?,
            "cloud_cost_scale" => s.cloud_cost_scale = one(key, value, line, float)?,
            "cycles_per_weight" => s.latency.cycles_per_weight = one(key, value, line, float)?,
            "cycle_rate_per_unit" => s.latency.cycle_rate_per_unit = one(key, value, line, float)?,
            "bits_per_weight" => s.latency.bits_per_weight = one(key, value, line, float)?,
            "alpha_client" => s.weights.alpha_client = one(key, value, line, float)?,
            "alpha_edge" => s.weights.alpha_edge = one(key, value, line, float)?,
            "alpha_cloud" => s.weights.alpha_cloud = one(key, value, line, float)?,
            "beta_end" => s.weights.beta_end = one(key, value, line, float)?,
            "beta_edge" => s.weights.beta_edge = one(key, value, line, float)?,
            "beta_cloud" => s.weights.beta_cloud = one(key, value, line, float)?,
            "out" => s.out = Some(PathBuf::from(value)),
            other => return Err(Error::Parse { line, message: format!("unknown key `{other}`") }),
        }
    }
    s.validate()?;
    Ok(s)
}

/// `1, 2, 5` or `1..5` (inclusive).
pub fn parse_seeds(value: &str) -> Option<Vec<u64>> {
    if let Some((a, b)) = value.split_once("..") {
        let (a, b): (u64, u64) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
        return (a <= b).then(|| (a..=b).collect());
    }
    value.split(',').map(|s| s.trim().parse().ok()).collect()
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.strategies.is_empty() || self.xi.is_empty() || self.lambda.is_empty() || self.seeds.is_empty() {
            return Err(Error::Config("sweep axes must be nonempty".into()));
        }
        if self.seeds.iter().collect::<BTreeSet<_>>().len() != self.seeds.len() {
            return Err(Error::Config("seeds must be distinct".into()));
        }
        if self.xi.contains(&0) {
            return Err(Error::Config("xi must be at least 1".into()));
        }
        if self.clients.contains(&0) {
            return Err(Error::Config("clients per request must be at least 1".into()));
        }
        if self.horizon_requests == 0 {
            return Err(Error::Config("horizon_requests must be positive".into()));
        }
        for spec in self.runs() {
            let (w, m) = self.parameters(&spec);
            check_params(&w, &m, &self.latency)?;
        }
        Ok(())
    }

    /// Every run in sweep order: strategy, ξ, λ, clients, seed.
    pub fn runs(&self) -> Vec<RunSpec> {
        let clients: Vec<Option<usize>> =
            if self.clients.is_empty() { vec![None] } else { self.clients.iter().map(|&c| Some(c)).collect() };
        let mut out = Vec::new();
        for &strategy in &self.strategies {
            for &xi in &self.xi {
                for &lambda in &self.lambda {
                    for &c in &clients {
                        for &seed in &self.seeds {
                            out.push(RunSpec { strategy, xi, lambda, clients: c, seed });
                        }
                    }
                }
            }
        }
        out
    }

    /// Builtin name or topology file, with the scenario's weights.
    pub fn load_graph(&self) -> Result<PhysicalGraph> {
        load_graph(&self.topology).map(|g| g.with_weights(self.weights))
    }

    fn parameters(&self, spec: &RunSpec) -> (WorkloadConfig, MeshParams) {
        (
            WorkloadConfig {
                lambda: spec.lambda,
                seed: spec.seed,
                horizon_requests: self.horizon_requests,
                client_fraction_low: self.client_fraction_low,
                client_fraction_high: self.client_fraction_high,
                clients_per_request: spec.clients.map(|c| (c, c)),
            },
            MeshParams { xi: spec.xi, cloud_cost_scale: self.cloud_cost_scale },
        )
    }

    pub fn sim_config(&self, graph: PhysicalGraph, spec: &RunSpec) -> SimConfig {
        let (workload, mesh) = self.parameters(spec);
        SimConfig { graph, workload, strategy: spec.strategy, mesh, latency: self.latency }
    }

    /// Simulates one run and summarizes it.
    pub fn execute(&self, graph: &PhysicalGraph, spec: &RunSpec, timing: bool) -> Result<(SweepRow, RunOutput)> {
        let out = run(&self.sim_config(graph.clone(), spec))?;
        let summary = summarize(&out.log, timing.then_some(out.placement_ms.as_slice()))?;
        let row = SweepRow {
            topology: graph.name().to_string(),
            strategy: spec.strategy.to_string(),
            xi: spec.xi,
            lambda: spec.lambda,
            clients: spec.clients,
            seed: spec.seed,
            summary,
        };
        Ok((row, out))
    }
}

/// A builtin topology name or a path to a topology file.
pub fn load_graph(name_or_path: &str) -> Result<PhysicalGraph> {
    if crate::topology::BUILTIN_NAMES.contains(&name_or_path) {
        return builtin_topology(name_or_path);
    }
    let text = std::fs::read_to_string(name_or_path).map_err(|e| Error::Io(format!("{name_or_path}: {e}")))?;
    let stem = std::path::Path::new(name_or_path).file_stem().and_then(|s| s.to_str()).unwrap_or(name_or_path);
    load_topology(stem, &text)
}
