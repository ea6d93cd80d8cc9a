use serde::{Deserialize, Serialize};

use crate::workload::ModelArch;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyConstants {
    pub cycles_per_weight: f64,
    /// CPU cycles per second contributed by one computing unit.
    pub cycle_rate_per_unit: f64,
    pub bits_per_weight: f64,
}

impl Default for LatencyConstants {
    fn default() -> Self {
        Self { cycles_per_weight: 4.0, cycle_rate_per_unit: 1e9, bits_per_weight: 32.0 }
    }
}

/// Local training of `dataset` images, in milliseconds.
pub fn training_latency(arch: &ModelArch, dataset: u32) -> f64 {
    arch.per_image_train_ms * dataset as f64
}

/// Fusing `fan_in` models on `claim` computing units, in milliseconds.
pub fn aggregation_latency(arch: &ModelArch, fan_in: usize, claim: u32, c: &LatencyConstants) -> f64 {
    let cycles = c.cycles_per_weight * arch.weight_count as f64 * fan_in as f64;
    1e3 * cycles / (c.cycle_rate_per_unit * claim as f64)
}

/// Sending one model over a `link_claim` Mbps reservation, in milliseconds.
pub fn transfer_latency(arch: &ModelArch, link_claim: u32, c: &LatencyConstants) -> f64 {
    1e3 * c.bits_per_weight * arch.weight_count as f64 / (link_claim as f64 * 1e6)
}
