//! Stochastic training-round workload.
//!
//! Requests arrive as a Poisson process; each one picks a random subset of
//! all clients, a model architecture, a dataset size, and one node-demand and
//! one link-demand scalar that apply to every component the round touches.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::{NodeId, PhysicalGraph};

/// Name of the generator recorded in results logs.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.9)";

pub const DATASET_RANGE: (u32, u32) = (59, 118);
pub const NODE_DEMAND_RANGE: (u32, u32) = (1, 8);
pub const LINK_DEMAND_RANGE: (u32, u32) = (20, 40);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArch {
    pub name: String,
    /// Training time of a single image in milliseconds.
    pub per_image_train_ms: f64,
    pub weight_count: u64,
}

pub fn model_catalog() -> Vec<ModelArch> {
    [
        ("Squeezenet", 26.4, 421_098),
        ("MobileNetV2", 38.4, 3_400_000),
        ("MNas", 35.7, 3_900_000),
        ("GoogleNet", 35.9, 6_797_700),
        ("Res18", 21.8, 11_689_512),
        ("Res50", 77.8, 25_557_032),
    ]
    .into_iter()
    .map(|(name, ms, w)| ModelArch { name: name.to_string(), per_image_train_ms: ms, weight_count: w })
    .collect()
}

/// One federated training round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingRoundRequest {
    pub id: u64,
    /// Milliseconds since the start of the run.
    pub arrival_time: f64,
    /// Participating clients, ascending.
    pub clients: Vec<NodeId>,
    pub arch: ModelArch,
    /// Images per client.
    pub dataset_size: u32,
    /// Computing units per touched node.
    pub node_demand: u32,
    /// Mbps per model-update flow.
    pub link_demand: u32,
}

/// The single accessor for a request's per-flow link demand.
pub fn request_link_load(r: &TrainingRoundRequest) -> u32 {
    r.link_demand
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadConfig {
    /// Arrivals per millisecond.
    pub lambda: f64,
    pub seed: u64,
    pub horizon_requests: usize,
    /// Bounds on the client count as fractions of the clients per edge node.
    pub client_fraction_low: f64,
    pub client_fraction_high: f64,
    /// Explicit inclusive client-count range; overrides the fractions.
    pub clients_per_request: Option<(usize, usize)>,
}

impl Default for WorkloadConfig {
    fn default() -> Self {
        Self {
            lambda: 0.00062,
            seed: 1,
            horizon_requests: 400,
            client_fraction_low: 0.25,
            client_fraction_high: 0.5,
            clients_per_request: None,
        }
    }
}

impl WorkloadConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::Config(format!("lambda must be positive, got {}", self.lambda)));
        }
        let (lo, hi) = (self.client_fraction_low, self.client_fraction_high);
        if !(lo > 0.0 && hi <= 1.0 && lo <= hi) {
            return Err(Error::Config(format!("client fraction bounds must satisfy 0 < low <= high <= 1, got ({lo}, {hi})")));
        }
        if let Some((a, b)) = self.clients_per_request {
            if a == 0 || a > b {
                return Err(Error::Config(format!("invalid clients_per_request range {a}..={b}")));
            }
        }
        Ok(())
    }

    /// Inclusive client-count range for `graph`.
    pub fn client_count_range(&self, graph: &PhysicalGraph) -> (usize, usize) {
        let total = graph.clients().len();
        let (lo, hi) = match self.clients_per_request {
            Some(r) => r,
            None => {
                let per_edge = graph.clients_per_edge() as f64;
                ((self.client_fraction_low * per_edge).ceil() as usize, (self.client_fraction_high * per_edge).floor() as usize)
            }
        };
        let hi = hi.min(total).max(1);
        (lo.clamp(1, hi), hi)
    }
}

pub fn generate_requests(graph: &PhysicalGraph, cfg: &WorkloadConfig) -> Result<Vec<TrainingRoundRequest>> {
    cfg.validate()?;
    let clients = graph.clients();
    if clients.is_empty() {
        return Err(Error::Config("topology has no clients".into()));
    }
    let catalog = model_catalog();
    let (count_lo, count_hi) = cfg.client_count_range(graph);
    let inter_arrival = Exp::new(cfg.lambda).map_err(|e| Error::Config(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut t = 0.0;
    let mut out = Vec::with_capacity(cfg.horizon_requests);
    for id in 0..cfg.horizon_requests as u64 {
        t += inter_arrival.sample(&mut rng);
        let k = rng.random_range(count_lo..=count_hi);
        let mut chosen: Vec<NodeId> = index::sample(&mut rng, clients.len(), k).into_iter().map(|i| clients[i]).collect();
        chosen.sort();
        let arch = catalog[rng.random_range(0..catalog.len())].clone();
        out.push(TrainingRoundRequest {
            id,
            arrival_time: t,
            clients: chosen,
            arch,
            dataset_size: rng.random_range(DATASET_RANGE.0..=DATASET_RANGE.1),
            node_demand: rng.random_range(NODE_DEMAND_RANGE.0..=NODE_DEMAND_RANGE.1),
            link_demand: rng.random_range(LINK_DEMAND_RANGE.0..=LINK_DEMAND_RANGE.1),
        });
    }
    Ok(out)
}
