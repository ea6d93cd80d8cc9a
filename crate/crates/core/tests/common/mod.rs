#![allow(dead_code)]

use edgeagg::topology::{LinkKind, NodeId, NodeKind, PhysicalGraph, PhysicalNode};
use edgeagg::workload::{model_catalog, TrainingRoundRequest};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn node(id: u32, kind: NodeKind, capacity: u32) -> PhysicalNode {
    PhysicalNode { id: NodeId(id), kind, capacity }
}

pub fn request(id: u64, clients: &[u32], node_demand: u32, link_demand: u32) -> TrainingRoundRequest {
    TrainingRoundRequest {
        id,
        arrival_time: 0.0,
        clients: clients.iter().map(|&c| NodeId(c)).collect(),
        arch: model_catalog()[0].clone(),
        dataset_size: 100,
        node_demand,
        link_demand,
    }
}

/// Edges 1–5, cloud 6, edge links (2,1) (1,4) (5,4) (4,3), cloud link (3,6);
/// client 7 on edge 2 and client 8 on edge 5.
pub fn fig3() -> PhysicalGraph {
    let mut nodes: Vec<_> = (1..=5).map(|i| node(i, NodeKind::Edge, 200)).collect();
    nodes.push(node(6, NodeKind::Cloud, 4000));
    nodes.push(node(7, NodeKind::Client, 1));
    nodes.push(node(8, NodeKind::Client, 1));
    let e = |a, b| (NodeId(a), NodeId(b), LinkKind::Edge, 2000);
    let links = vec![
        e(2, 1),
        e(1, 4),
        e(5, 4),
        e(4, 3),
        (NodeId(3), NodeId(6), LinkKind::Cloud, 4000),
        (NodeId(7), NodeId(2), LinkKind::End, 200),
        (NodeId(8), NodeId(5), LinkKind::End, 200),
    ];
    PhysicalGraph::new("fig3", nodes, links).unwrap()
}

/// Client 2 – edge 1 – cloud 0.
pub fn line3() -> PhysicalGraph {
    PhysicalGraph::new(
        "line3",
        vec![node(0, NodeKind::Cloud, 4000), node(1, NodeKind::Edge, 200), node(2, NodeKind::Client, 1)],
        vec![(NodeId(2), NodeId(1), LinkKind::End, 200), (NodeId(1), NodeId(0), LinkKind::Cloud, 4000)],
    )
    .unwrap()
}

/// Random connected instance with `edges` edge nodes (cloud is node 0,
/// edges `1..=edges`, clients after), capacities drawn so that they bind
/// now and then, and `requests` requests.
pub fn random_instance(seed: u64, edges: u32, requests: usize) -> (PhysicalGraph, Vec<TrainingRoundRequest>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes = vec![node(0, NodeKind::Cloud, *pick(&mut rng, &[12, 4000]))];
    for i in 1..=edges {
        nodes.push(node(i, NodeKind::Edge, *pick(&mut rng, &[6, 12, 200])));
    }
    let mut links = Vec::new();
    let mut pairs = std::collections::BTreeSet::new();
    for i in 2..=edges {
        let j = rng.random_range(1..i);
        pairs.insert((j, i));
    }
    for _ in 0..rng.random_range(0..=2) {
        let a = rng.random_range(1..=edges);
        let b = rng.random_range(1..=edges);
        if a != b {
            pairs.insert((a.min(b), a.max(b)));
        }
    }
    for (a, b) in pairs {
        links.push((NodeId(a), NodeId(b), LinkKind::Edge, *pick(&mut rng, &[40, 70, 2000])));
    }
    let gateways = rng.random_range(1..=edges.min(2));
    for g in rand::seq::index::sample(&mut rng, edges as usize, gateways as usize) {
        links.push((NodeId(g as u32 + 1), NodeId(0), LinkKind::Cloud, *pick(&mut rng, &[40, 70, 4000])));
    }
    let mut next = edges + 1;
    let mut clients = Vec::new();
    for i in 1..=edges {
        for _ in 0..rng.random_range(1..=2) {
            nodes.push(node(next, NodeKind::Client, 1));
            links.push((NodeId(next), NodeId(i), LinkKind::End, *pick(&mut rng, &[40, 200])));
            clients.push(next);
            next += 1;
        }
    }
    let g = PhysicalGraph::new(format!("rand{seed}"), nodes, links).unwrap();
    let reqs = (0..requests)
        .map(|k| {
            let n = rng.random_range(1..=clients.len().min(4));
            let mut chosen: Vec<u32> =
                rand::seq::index::sample(&mut rng, clients.len(), n).into_iter().map(|i| clients[i]).collect();
            chosen.sort();
            request(k as u64, &chosen, rng.random_range(1..=8), rng.random_range(20..=40))
        })
        .collect();
    (g, reqs)
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, xs: &'a [T]) -> &'a T {
    &xs[rng.random_range(0..xs.len())]
}
