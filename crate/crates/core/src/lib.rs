//! Model-aggregation placement for federated learning at the network edge.
//!
//! The crate models an SD-WAN/MEC substrate of clients, edge nodes and cloud
//! servers, places per-round aggregators, routes model updates either in the
//! classic two-level way (`hfel`) or over an aggregator overlay forest
//! (`hfel_mesh`), and measures the outcome with a discrete-event simulator.
//! An exact integer program over the same problem is built, solved at small
//! scale, exported as MPS, and checked constraint by constraint.
//!
//! ```text
//!  workload ──▶ engine (event dispatcher) ──▶ metrics
//!                  │           ▲
//!                  ▼           │
//!             allocators ── network state
//!                  │
//!              topology ◀── ilp (exact reference)
//! ```

pub mod allocators;
pub mod compare;
pub mod engine;
pub mod error;
pub mod ilp;
pub mod metrics;
pub mod scenario;
pub mod topology;
pub mod workload;

pub use allocators::{MeshParams, PlacementDecision, Strategy};
pub use engine::{run, ResultsLog, RunOutput, SimConfig};
pub use error::{Error, Result};
pub use metrics::{summarize, RunSummary, SweepRow};
pub use scenario::{parse_scenario, RunSpec, Scenario};
pub use topology::{NodeId, NodeKind, PhysicalGraph, Usage, Weights};
pub use workload::{ModelArch, TrainingRoundRequest, WorkloadConfig};
