//! Online placement: HFEL and HFEL-MESH.
//!
//! Both strategies start from the same client-to-edge association. HFEL lets
//! every edge aggregator report straight to the cloud; HFEL-MESH first links
//! aggregators into an overlay forest so that models are fused on the way.

mod association;
mod cost;
mod overlay;
mod place;

pub use association::{associate, hfel_edge_association, Assignment, AssociationCosts};
pub use cost::{
    aggregator_edge_cost, cloud_report_cost, link_cost, node_cost, route_cost, CostParams, Demand, Graded,
};
pub use overlay::{greedy_overlay, hfel_mesh_overlay, MeshParams, OverlayEdge, OverlayTopology};
pub use place::{
    designated_cloud, place_request, Claims, FailureReason, Flow, PlacementDecision, PlacementStatus, Strategy,
};
