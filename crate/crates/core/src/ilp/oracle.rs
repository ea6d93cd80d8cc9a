//! Exhaustive reference for the exact model, written against the raw graph.
//!
//! Per request: every aggregator set, every overlay forest over sources and
//! aggregators, every realization of each overlay edge as a simple physical
//! path. A candidate is priced by the model's rules: links once, the
//! destination and every overlay target once, and every node where two
//! distinct inbound flows meet once. Candidates of different requests are
//! then combined under the capacity limits.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::topology::{AuxiliaryGraph, LinkKind, NodeId, NodeKind, PhysicalGraph};
use crate::workload::{request_link_load, TrainingRoundRequest};

pub const ORACLE_MAX_EDGES: usize = 6;
pub const ORACLE_MAX_REQUESTS: usize = 3;

/// Minimum weighted cost over all feasible placements, `None` if infeasible.
pub fn brute_force_oracle(g: &PhysicalGraph, a: &AuxiliaryGraph, reqs: &[TrainingRoundRequest]) -> Result<Option<f64>> {
    if g.edges().len() > ORACLE_MAX_EDGES || reqs.len() > ORACLE_MAX_REQUESTS {
        return Err(Error::TooLarge(format!(
            "oracle handles at most {ORACLE_MAX_EDGES} edge nodes and {ORACLE_MAX_REQUESTS} requests, got {} and {}",
            g.edges().len(),
            reqs.len()
        )));
    }
    if reqs.is_empty() {
        return Ok(Some(0.0));
    }
    let net = Net::new(g)?;
    let mut per_request = Vec::with_capacity(reqs.len());
    for r in reqs {
        let opts = net.options(g, a, r);
        if opts.is_empty() {
            return Ok(None);
        }
        per_request.push(opts);
    }
    let mut node_used: HashMap<NodeId, u64> = HashMap::new();
    let mut link_used = vec![0u64; g.link_count()];
    let mut best = f64::INFINITY;
    combine(g, &per_request, 0, 0.0, &mut node_used, &mut link_used, &mut best);
    Ok(best.is_finite().then_some(best))
}

/// Priced candidate of one request.
#[derive(Debug, Clone)]
struct Option_ {
    cost: f64,
    nodes: Vec<(NodeId, u32)>,
    links: Vec<(usize, u32)>,
}

fn combine(
    g: &PhysicalGraph,
    per_request: &[Vec<Option_>],
    k: usize,
    spent: f64,
    node_used: &mut HashMap<NodeId, u64>,
    link_used: &mut Vec<u64>,
    best: &mut f64,
) {
    if k == per_request.len() {
        *best = best.min(spent);
        return;
    }
    let rest_min: f64 = per_request[k + 1..].iter().map(|o| o[0].cost).sum();
    for opt in &per_request[k] {
        if spent + opt.cost + rest_min >= *best {
            break;
        }
        let fits = opt.nodes.iter().all(|&(n, d)| {
            node_used.get(&n).copied().unwrap_or(0) + d as u64 <= g.node(n).map_or(0, |x| x.capacity) as u64
        }) && opt.links.iter().all(|&(l, d)| link_used[l] + d as u64 <= g.links()[l].capacity as u64);
        if !fits {
            continue;
        }
        for &(n, d) in &opt.nodes {
            *node_used.entry(n).or_insert(0) += d as u64;
        }
        for &(l, d) in &opt.links {
            link_used[l] += d as u64;
        }
        combine(g, per_request, k + 1, spent + opt.cost, node_used, link_used, best);
        for &(n, d) in &opt.nodes {
            *node_used.get_mut(&n).unwrap() -= d as u64;
        }
        for &(l, d) in &opt.links {
            link_used[l] -= d as u64;
        }
    }
}

/// Non-client part of the graph with directed arcs as bit positions.
struct Net {
    /// `(tail, head, link index)` per arc bit.
    arcs: Vec<(NodeId, NodeId, usize)>,
    adj: BTreeMap<NodeId, Vec<(NodeId, usize)>>,
}

impl Net {
    fn new(g: &PhysicalGraph) -> Result<Self> {
        let mut arcs = Vec::new();
        for (li, l) in g.links().iter().enumerate() {
            if l.kind == LinkKind::End {
                continue;
            }
            arcs.push((l.a, l.b, li));
            arcs.push((l.b, l.a, li));
        }
        if arcs.len() > 64 {
            return Err(Error::TooLarge(format!("{} directed arcs exceed the oracle's 64", arcs.len())));
        }
        let mut adj: BTreeMap<NodeId, Vec<(NodeId, usize)>> = BTreeMap::new();
        for n in g.nodes().iter().filter(|n| n.kind != NodeKind::Client) {
            adj.insert(n.id, Vec::new());
        }
        for (bit, &(u, v, _)) in arcs.iter().enumerate() {
            adj.get_mut(&u).unwrap().push((v, bit));
        }
        for list in adj.values_mut() {
            list.sort();
        }
        Ok(Self { arcs, adj })
    }

    /// Arc masks of every simple path from `u` to `v`.
    fn simple_paths(&self, u: NodeId, v: NodeId) -> Vec<u64> {
        fn go(net: &Net, cur: NodeId, dst: NodeId, seen: &mut HashSet<NodeId>, mask: u64, out: &mut Vec<u64>) {
            if cur == dst {
                out.push(mask);
                return;
            }
            for &(next, bit) in &net.adj[&cur] {
                if seen.insert(next) {
                    go(net, next, dst, seen, mask | (1 << bit), out);
                    seen.remove(&next);
                }
            }
        }
        let mut out = Vec::new();
        let mut seen = HashSet::from([u]);
        go(self, u, v, &mut seen, 0, &mut out);
        out
    }

    /// All distinct priced candidates of one request, cheapest first.
    fn options(&self, g: &PhysicalGraph, a: &AuxiliaryGraph, r: &TrainingRoundRequest) -> Vec<Option_> {
        let sn = r.node_demand;
        let se = request_link_load(r);
        let root = *g.clouds().iter().min().expect("graph has a cloud");
        let mut clients_at: BTreeMap<NodeId, usize> = BTreeMap::new();
        let mut end_links = Vec::new();
        for &c in &r.clients {
            let (edge, link) = g.attachment(c).expect("client attached");
            *clients_at.entry(edge).or_insert(0) += 1;
            end_links.push(link.0);
        }
        let sources: Vec<NodeId> = clients_at.keys().copied().collect();
        if sources.iter().any(|s| !a.nodes.contains(s)) {
            return Vec::new();
        }
        let relays: Vec<NodeId> = a.nodes.iter().copied().filter(|n| *n != root && !sources.contains(n)).collect();

        let mut paths: HashMap<(NodeId, NodeId), Vec<u64>> = HashMap::new();
        // (arc mask, sorted overlay targets) seen so far.
        let mut seen: HashSet<(u64, Vec<NodeId>)> = HashSet::new();
        let mut out: HashMap<(Vec<usize>, Vec<NodeId>), Option_> = HashMap::new();

        for relay_mask in 0u32..(1 << relays.len()) {
            let mut members: Vec<NodeId> = sources.clone();
            members.extend(relays.iter().enumerate().filter(|(i, _)| relay_mask >> i & 1 == 1).map(|(_, &n)| n));
            let targets_pool: Vec<NodeId> = members.iter().copied().chain([root]).collect();
            // Every successor function over the members, acyclic only.
            let choices = targets_pool.len();
            let total = (choices as u64).pow(members.len() as u32);
            for code in 0..total {
                let mut succ = Vec::with_capacity(members.len());
                let mut c = code;
                let mut ok = true;
                for &m in &members {
                    let t = targets_pool[(c % choices as u64) as usize];
                    c /= choices as u64;
                    if t == m {
                        ok = false;
                        break;
                    }
                    succ.push((m, t));
                }
                if !ok || !reaches_root(&succ, root) {
                    continue;
                }
                // Relays must receive something, otherwise they are not aggregators.
                if succ.iter().any(|&(m, _)| !sources.contains(&m) && !succ.iter().any(|&(_, t)| t == m)) {
                    continue;
                }
                let mut targets: Vec<NodeId> = succ.iter().map(|&(_, t)| t).collect();
                targets.sort();
                targets.dedup();
                // Realize each overlay edge, merging identical unions.
                let mut masks: HashSet<u64> = HashSet::from([0]);
                for &(u, v) in &succ {
                    let ps = paths.entry((u, v)).or_insert_with(|| self.simple_paths(u, v));
                    let mut next = HashSet::with_capacity(masks.len() * ps.len());
                    for &m in &masks {
                        for &p in ps.iter() {
                            next.insert(m | p);
                        }
                    }
                    masks = next;
                }
                for mask in masks {
                    if !seen.insert((mask, targets.clone())) {
                        continue;
                    }
                    let opt = self.price(g, mask, &targets, &clients_at, &end_links, root, sn, se);
                    let key = (opt.links.iter().map(|l| l.0).collect(), opt.nodes.iter().map(|n| n.0).collect());
                    out.entry(key).or_insert(opt);
                }
            }
        }
        // Only candidates that fit an empty network can ever be combined.
        let mut v: Vec<Option_> = out
            .into_values()
            .filter(|o| {
                o.nodes.iter().all(|&(n, d)| d <= g.node(n).unwrap().capacity)
                    && o.links.iter().all(|&(l, d)| d <= g.links()[l].capacity)
            })
            .collect();
        v.sort_by(|x, y| x.cost.total_cmp(&y.cost).then_with(|| x.links.cmp(&y.links)).then_with(|| x.nodes.cmp(&y.nodes)));
        v
    }

    #[allow(clippy::too_many_arguments)]
    fn price(
        &self,
        g: &PhysicalGraph,
        mask: u64,
        targets: &[NodeId],
        clients_at: &BTreeMap<NodeId, usize>,
        end_links: &[usize],
        root: NodeId,
        sn: u32,
        se: u32,
    ) -> Option_ {
        let w = g.weights();
        let mut links: Vec<usize> = end_links.to_vec();
        let mut in_tails: HashMap<NodeId, HashSet<NodeId>> = HashMap::new();
        for (bit, &(u, v, l)) in self.arcs.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                links.push(l);
                in_tails.entry(v).or_default().insert(u);
            }
        }
        links.sort();
        links.dedup();
        let mut charged: Vec<NodeId> = targets.to_vec();
        charged.push(root);
        for (&n, tails) in &in_tails {
            if tails.len() + clients_at.get(&n).copied().unwrap_or(0) >= 2 {
                charged.push(n);
            }
        }
        for (&n, &c) in clients_at {
            if c >= 2 {
                charged.push(n);
            }
        }
        charged.sort();
        charged.dedup();
        let mut cost = 0.0;
        for &n in &charged {
            cost += w.alpha(g.kind(n).unwrap()) * sn as f64;
        }
        for &l in &links {
            cost += w.beta(g.links()[l].kind) * se as f64;
        }
        Option_ { cost, nodes: charged.into_iter().map(|n| (n, sn)).collect(), links: links.into_iter().map(|l| (l, se)).collect() }
    }
}

fn reaches_root(succ: &[(NodeId, NodeId)], root: NodeId) -> bool {
    let map: HashMap<NodeId, NodeId> = succ.iter().copied().collect();
    succ.iter().all(|&(start, _)| {
        let mut cur = start;
        for _ in 0..=succ.len() {
            match map.get(&cur) {
                Some(&n) => cur = n,
                None => return cur == root,
            }
        }
        false
    })
}
