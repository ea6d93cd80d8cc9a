//! Exact solver for [`IlpModel`].
//!
//! For a single request the model reduces to choosing an in-tree rooted at the
//! destination cloud that spans every pair source: each used link pays
//! `β·σ_e` once, the root and every node merging two or more inbound flows
//! (client uploads included) pay `α·σ_n`. Aux-link paths, realizations and
//! aggregator flags are then implied by the tree, so enumerating trees is
//! enumerating the binary space up to dominated (wasteful) assignments.
//!
//! The search proceeds in two stages:
//!
//! 1. A subset dynamic program (Dreyfus–Wagner style, with an inflow class of
//!    one or two-plus per partial tree) gives every request's optimum under
//!    its own capacity filter. The argmin tree is rebuilt and re-priced; if it
//!    is legal and the price agrees, the request is solved exactly. Otherwise
//!    the DP value still serves as a lower bound.
//! 2. If the per-request optima fit together, the sum is optimal. When they
//!    compete for capacity, a depth-first branch-and-bound over requests
//!    enumerates trees request by request, pruning with the DP bounds of the
//!    requests not yet fixed.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::model::{Arc, IlpModel, VarKey};
use crate::topology::{LinkId, NodeId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveLimits {
    pub time: Duration,
    /// Search nodes (path extensions) explored across all stages.
    pub node_budget: u64,
}

impl Default for SolveLimits {
    fn default() -> Self {
        Self { time: Duration::from_secs(60), node_budget: 50_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    LimitReached,
}

/// Routing tree of one request, arcs sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequestTree {
    pub arcs: Vec<Arc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IlpSolution {
    /// One value per model variable; all zero when there is no incumbent.
    pub values: Vec<f64>,
    /// `+∞` when there is no incumbent.
    pub objective_value: f64,
    pub status: SolveStatus,
    pub trees: Vec<RequestTree>,
    pub explored_nodes: u64,
}

/// Price and load of one request's tree.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeEval {
    pub cost: f64,
    pub charged: Vec<NodeId>,
    pub links: Vec<LinkId>,
}

/// Prices `arcs` as the routing tree of request `k`. Returns `None` when the
/// arcs do not form an in-tree rooted at the request's cloud whose leaves are
/// exactly pair sources, or when some source is not connected.
pub fn evaluate_tree(m: &IlpModel, k: usize, arcs: &[Arc]) -> Option<TreeEval> {
    let rd = &m.requests[k];
    let mut out: HashMap<NodeId, NodeId> = HashMap::new();
    let mut inflow: HashMap<NodeId, usize> = HashMap::new();
    let mut links: Vec<LinkId> = Vec::with_capacity(arcs.len() + rd.end_links.len());
    for a in arcs {
        if a.from == rd.root || out.insert(a.from, a.to).is_some() {
            return None;
        }
        *inflow.entry(a.to).or_insert(0) += 1;
        links.push(a.link);
    }
    for (&n, &c) in &rd.clients_at {
        *inflow.entry(n).or_insert(0) += c;
    }
    // Every tail must drain into the root, and every leaf must be a source.
    for &start in out.keys() {
        let mut cur = start;
        let mut steps = 0;
        while let Some(&next) = out.get(&cur) {
            cur = next;
            steps += 1;
            if steps > out.len() {
                return None;
            }
        }
        if cur != rd.root {
            return None;
        }
        if !inflow.contains_key(&start) {
            return None;
        }
    }
    for &s in &rd.sources {
        if s != rd.root && !out.contains_key(&s) {
            return None;
        }
    }
    links.sort();
    let before = links.len();
    links.dedup();
    if links.len() != before {
        return None;
    }
    links.extend(rd.end_links.iter().copied());
    let mut charged: Vec<NodeId> = inflow.iter().filter(|&(_, &d)| d >= 2).map(|(&n, _)| n).collect();
    if !charged.contains(&rd.root) {
        charged.push(rd.root);
    }
    charged.sort();
    let w = m.graph.weights();
    let mut cost = 0.0;
    for &n in &charged {
        cost += w.alpha(m.graph.kind(n)?) * rd.node_demand as f64;
    }
    for &l in &links {
        cost += w.beta(m.graph.link(l).kind) * rd.link_demand as f64;
    }
    Some(TreeEval { cost, charged, links })
}

pub fn solve_exact(m: &IlpModel, limits: SolveLimits) -> IlpSolution {
    let mut search = Search::new(m, limits);
    let n_req = m.requests.len();
    if n_req == 0 {
        return finish(m, SolveStatus::Optimal, Some(Vec::new()), 0);
    }

    // Stage 1: per-request optimum or bound.
    let mut bounds = Vec::with_capacity(n_req);
    let mut singles: Vec<Option<(Vec<Arc>, TreeEval)>> = Vec::with_capacity(n_req);
    for k in 0..n_req {
        let rg = RequestGraph::new(m, k, &m.node_capacity, &m.link_capacity);
        let Some((lb, tree)) = rg.subset_dp() else {
            return finish(m, SolveStatus::Infeasible, None, search.explored);
        };
        bounds.push(lb);
        let exact = tree.and_then(|arcs| {
            let eval = evaluate_tree(m, k, &arcs)?;
            close(eval.cost, lb).then_some((arcs, eval))
        });
        singles.push(exact);
    }

    if singles.iter().all(Option::is_some) {
        let trees: Vec<Vec<Arc>> = singles.iter().map(|s| s.as_ref().unwrap().0.clone()).collect();
        let evals: Vec<&TreeEval> = singles.iter().map(|s| &s.as_ref().unwrap().1).collect();
        if fits_together(m, &evals) {
            return finish(m, SolveStatus::Optimal, Some(trees), search.explored);
        }
    }

    // Stage 2: joint branch-and-bound, seeded with a sequential incumbent.
    search.best = sequential_incumbent(m);
    let mut suffix = vec![0.0; n_req + 1];
    for k in (0..n_req).rev() {
        suffix[k] = suffix[k + 1] + bounds[k];
    }
    let mut node_res = m.node_capacity.clone();
    let mut link_res = m.link_capacity.clone();
    let mut chosen = Vec::with_capacity(n_req);
    search.joint(0, 0.0, &suffix, &mut node_res, &mut link_res, &mut chosen);
    let explored = search.explored;
    match (search.best, search.hit_limit) {
        (Some((_, trees)), false) => finish(m, SolveStatus::Optimal, Some(trees), explored),
        (None, false) => finish(m, SolveStatus::Infeasible, None, explored),
        (best, true) => finish(m, SolveStatus::LimitReached, best.map(|b| b.1), explored),
    }
}

/// Places requests one after another, each on its DP tree under the
/// capacity left by the previous ones.
fn sequential_incumbent(m: &IlpModel) -> Option<(f64, Vec<Vec<Arc>>)> {
    let mut node_res = m.node_capacity.clone();
    let mut link_res = m.link_capacity.clone();
    let mut total = 0.0;
    let mut trees = Vec::with_capacity(m.requests.len());
    for (k, rd) in m.requests.iter().enumerate() {
        let rg = RequestGraph::new(m, k, &node_res, &link_res);
        let arcs = rg.subset_dp()?.1?;
        let eval = evaluate_tree(m, k, &arcs)?;
        if !rg.chargeable(&eval) {
            return None;
        }
        for n in &eval.charged {
            let r = node_res.get_mut(n)?;
            *r = r.checked_sub(rd.node_demand)?;
        }
        for l in &eval.links {
            link_res[l.0] = link_res[l.0].checked_sub(rd.link_demand)?;
        }
        total += eval.cost;
        trees.push(arcs);
    }
    Some((total, trees))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

fn fits_together(m: &IlpModel, evals: &[&TreeEval]) -> bool {
    let mut node_load: HashMap<NodeId, u64> = HashMap::new();
    let mut link_load = vec![0u64; m.link_capacity.len()];
    for (k, e) in evals.iter().enumerate() {
        let rd = &m.requests[k];
        for n in &e.charged {
            *node_load.entry(*n).or_insert(0) += rd.node_demand as u64;
        }
        for l in &e.links {
            link_load[l.0] += rd.link_demand as u64;
        }
    }
    node_load.iter().all(|(n, &u)| u <= m.node_capacity[n] as u64)
        && link_load.iter().zip(&m.link_capacity).all(|(&u, &c)| u <= c as u64)
}

fn finish(m: &IlpModel, status: SolveStatus, trees: Option<Vec<Vec<Arc>>>, explored: u64) -> IlpSolution {
    match trees {
        Some(trees) => {
            let values = assignment_from_trees(m, &trees);
            IlpSolution {
                objective_value: m.objective_value(&values),
                values,
                status,
                trees: trees.into_iter().map(|mut arcs| {
                    arcs.sort();
                    RequestTree { arcs }
                }).collect(),
                explored_nodes: explored,
            }
        }
        None => IlpSolution {
            values: vec![0.0; m.variables.len()],
            objective_value: f64::INFINITY,
            status,
            trees: Vec::new(),
            explored_nodes: explored,
        },
    }
}

/// Expands one routing tree per request into a full variable assignment.
///
/// Aux links are the tree segments between consecutive stops, where a stop
/// is the root or a charged node that is an aux node.
pub fn assignment_from_trees(m: &IlpModel, trees: &[Vec<Arc>]) -> Vec<f64> {
    let mut v = vec![0.0; m.variables.len()];
    let set = |key: VarKey, val: f64, v: &mut Vec<f64>| {
        if let Some(i) = m.var(&key) {
            v[i] = val;
        }
    };
    let mut node_load: HashMap<NodeId, f64> = HashMap::new();
    let mut link_load = vec![0.0; m.graph.link_count()];
    for (k, arcs) in trees.iter().enumerate() {
        let rd = &m.requests[k];
        let eval = evaluate_tree(m, k, arcs).expect("tree must be legal");
        let out: HashMap<NodeId, Arc> = arcs.iter().map(|a| (a.from, *a)).collect();
        let mut inflow: HashMap<NodeId, usize> = HashMap::new();
        for a in arcs {
            *inflow.entry(a.to).or_insert(0) += 1;
        }
        for (&n, &c) in &rd.clients_at {
            *inflow.entry(n).or_insert(0) += c;
        }
        let is_stop = |n: NodeId| n == rd.root || (eval.charged.contains(&n) && m.aux.contains(n));
        // Segment starting at `u`: (head, arcs).
        let segment = |u: NodeId| -> (NodeId, Vec<Arc>) {
            let mut path = Vec::new();
            let mut cur = u;
            loop {
                let a = out[&cur];
                path.push(a);
                cur = a.to;
                if is_stop(cur) {
                    return (cur, path);
                }
            }
        };
        let mut segments: HashMap<NodeId, (NodeId, Vec<Arc>)> = HashMap::new();
        for &s in &rd.sources {
            let mut u = s;
            while u != rd.root {
                let seg = segments.entry(u).or_insert_with(|| segment(u)).clone();
                set(VarKey::Q { i: u, j: seg.0, source: s, k }, 1.0, &mut v);
                u = seg.0;
            }
            set(VarKey::Accept { source: s, k }, 1.0, &mut v);
        }
        for (&u, (t, path)) in &segments {
            set(VarKey::AuxUse { i: u, j: *t, k }, 1.0, &mut v);
            set(VarKey::NodeUse { n: *t, k }, 1.0, &mut v);
            for a in path {
                set(VarKey::X { u: a.from, v: a.to, i: u, j: *t, k }, 1.0, &mut v);
            }
        }
        for a in arcs {
            set(VarKey::ArcUse { u: a.from, v: a.to, k }, 1.0, &mut v);
        }
        for &l in &eval.links {
            set(VarKey::LinkUse { link: l, k }, 1.0, &mut v);
            link_load[l.0] += rd.link_demand as f64;
        }
        for (&n, &d) in &inflow {
            if d >= 2 && m.nodes.contains(&n) {
                set(VarKey::Merge { n, k }, 1.0, &mut v);
            }
        }
        for &n in &eval.charged {
            set(VarKey::NodeCharge { n, k }, 1.0, &mut v);
            *node_load.entry(n).or_insert(0.0) += rd.node_demand as f64;
        }
    }
    for &n in &m.nodes {
        set(VarKey::NodeLoad { n }, node_load.get(&n).copied().unwrap_or(0.0), &mut v);
    }
    for l in m.graph.links() {
        set(VarKey::LinkLoad { link: l.id }, link_load[l.id.0], &mut v);
    }
    v
}

/// Capacity-filtered view of one request over the non-client nodes.
struct RequestGraph<'a> {
    m: &'a IlpModel,
    k: usize,
    ids: Vec<NodeId>,
    /// `(head, arc)` per tail index, in arc order.
    out: Vec<Vec<(usize, Arc)>>,
    root: usize,
    /// `α·σ_n` where the node may be charged, `None` otherwise.
    charge: Vec<Option<f64>>,
    arc_cost: HashMap<LinkId, f64>,
    /// Source index and its client count.
    terminals: Vec<(usize, usize)>,
    /// Root charge plus end links; `None` if the request cannot be served.
    fixed: Option<f64>,
}

impl<'a> RequestGraph<'a> {
    fn new(
        m: &'a IlpModel,
        k: usize,
        node_res: &std::collections::BTreeMap<NodeId, u32>,
        link_res: &[u32],
    ) -> Self {
        let rd = &m.requests[k];
        let w = m.graph.weights();
        let ids = m.nodes.clone();
        let idx: HashMap<NodeId, usize> = ids.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let mut out = vec![Vec::new(); ids.len()];
        let mut arc_cost = HashMap::new();
        for a in &m.arcs {
            if link_res[a.link.0] >= rd.link_demand {
                let kind = m.graph.link(a.link).kind;
                arc_cost.insert(a.link, w.beta(kind) * rd.link_demand as f64);
                out[idx[&a.from]].push((idx[&a.to], *a));
            }
        }
        let charge = ids
            .iter()
            .map(|n| {
                (node_res[n] >= rd.node_demand)
                    .then(|| w.alpha(m.graph.kind(*n).expect("node")) * rd.node_demand as f64)
            })
            .collect::<Vec<_>>();
        let root = idx[&rd.root];
        let mut fixed = charge[root];
        for &l in &rd.end_links {
            let kind = m.graph.link(l).kind;
            fixed = fixed.filter(|_| link_res[l.0] >= rd.link_demand).map(|f| f + w.beta(kind) * rd.link_demand as f64);
        }
        let terminals = rd.sources.iter().map(|s| (idx[s], rd.clients_at[s])).collect();
        Self { m, k, ids, out, root, charge, arc_cost, terminals, fixed }
    }

    /// Lower bound under this request's capacity filter and, when the
    /// argmin is reconstructible, its tree. `None` if no tree exists.
    fn subset_dp(&self) -> Option<(f64, Option<Vec<Arc>>)> {
        let fixed = self.fixed?;
        let t = self.terminals.len();
        let n = self.ids.len();
        let full = (1usize << t) - 1;
        let inf = f64::INFINITY;
        let mut open1 = vec![vec![inf; n]; full + 1];
        let mut open2 = vec![vec![inf; n]; full + 1];
        let mut closed = vec![vec![inf; n]; full + 1];
        let mut back1 = vec![vec![Back1::None; n]; full + 1];
        let mut back2 = vec![vec![Back2::None; n]; full + 1];
        let mut closed_from2 = vec![vec![false; n]; full + 1];

        for mask in 1..=full {
            if mask.count_ones() == 1 {
                let i = mask.trailing_zeros() as usize;
                let (v, clients) = self.terminals[i];
                if clients >= 2 {
                    open2[mask][v] = 0.0;
                    back2[mask][v] = Back2::Base;
                } else {
                    open1[mask][v] = 0.0;
                    back1[mask][v] = Back1::Base;
                }
            }
            // Merge two disjoint partial trees meeting at v.
            let mut sub = (mask - 1) & mask;
            while sub > 0 {
                let rest = mask ^ sub;
                if sub < rest {
                    for v in 0..n {
                        for (c1, a) in [(1u8, open1[sub][v]), (2, open2[sub][v])] {
                            if a == inf {
                                continue;
                            }
                            for (c2, b) in [(1u8, open1[rest][v]), (2, open2[rest][v])] {
                                if a + b < open2[mask][v] {
                                    open2[mask][v] = a + b;
                                    back2[mask][v] = Back2::Merge { sub, c1, c2 };
                                }
                            }
                        }
                    }
                }
                sub = (sub - 1) & mask;
            }
            // Close (charge merges) and extend along arcs, Dijkstra-style.
            let mut dist = vec![inf; n];
            for v in 0..n {
                let via2 = if v == self.root { Some(0.0) } else { self.charge[v] };
                let c2 = via2.map_or(inf, |c| open2[mask][v] + c);
                if c2 < open1[mask][v] {
                    dist[v] = c2;
                    closed_from2[mask][v] = true;
                } else {
                    dist[v] = open1[mask][v];
                }
            }
            let mut done = vec![false; n];
            loop {
                let mut best = None;
                for v in 0..n {
                    if !done[v] && dist[v] < inf && best.is_none_or(|b: usize| dist[v] < dist[b]) {
                        best = Some(v);
                    }
                }
                let Some(u) = best else { break };
                done[u] = true;
                if u == self.root {
                    continue;
                }
                for &(v, arc) in &self.out[u] {
                    let nd = dist[u] + self.arc_cost[&arc.link];
                    if nd < open1[mask][v] {
                        open1[mask][v] = nd;
                        back1[mask][v] = Back1::Extend { from: u, arc };
                        if nd < dist[v] {
                            dist[v] = nd;
                            closed_from2[mask][v] = false;
                        }
                    }
                }
            }
            closed[mask] = dist;
        }

        let r = self.root;
        let best = open1[full][r].min(open2[full][r]);
        if best == inf {
            return None;
        }
        let bound = best + fixed;
        let state = if open1[full][r] <= open2[full][r] { State::Open1 } else { State::Open2 };
        let mut arcs = Vec::new();
        let mut steps = 0usize;
        let ok = Rebuild { back1: &back1, back2: &back2, closed_from2: &closed_from2, steps: &mut steps, limit: 64 * n * (full + 1) }
            .run(full, r, state, &mut arcs);
        Some((bound, ok.then_some(arcs)))
    }

    /// Enumerates every legal tree of this request whose price stays below
    /// `bound()`, calling `visit` with each complete tree.
    fn enumerate(
        &self,
        search: &mut Budget,
        bound: &mut dyn FnMut() -> f64,
        visit: &mut dyn FnMut(&[Arc], &TreeEval, &mut Budget),
    ) {
        let Some(_) = self.fixed else { return };
        let n = self.ids.len();
        let mut in_tree = vec![false; n];
        in_tree[self.root] = true;
        let mut arcs: Vec<Arc> = Vec::new();
        let mut on_path = vec![false; n];
        self.grow(0, &mut in_tree, &mut on_path, &mut arcs, search, bound, visit);
    }

    #[allow(clippy::too_many_arguments)]
    fn grow(
        &self,
        next: usize,
        in_tree: &mut Vec<bool>,
        on_path: &mut Vec<bool>,
        arcs: &mut Vec<Arc>,
        search: &mut Budget,
        bound: &mut dyn FnMut() -> f64,
        visit: &mut dyn FnMut(&[Arc], &TreeEval, &mut Budget),
    ) {
        if search.stop() {
            return;
        }
        let Some(&(s, _)) = self.terminals.get(next) else {
            if let Some(eval) = evaluate_tree(self.m, self.k, arcs) {
                if self.chargeable(&eval) && eval.cost < bound() - 1e-9 {
                    visit(arcs, &eval, search);
                }
            }
            return;
        };
        if in_tree[s] {
            self.grow(next + 1, in_tree, on_path, arcs, search, bound, visit);
            return;
        }
        on_path[s] = true;
        self.walk(s, next, in_tree, on_path, arcs, search, bound, visit);
        on_path[s] = false;
    }

    #[allow(clippy::too_many_arguments)]
    fn walk(
        &self,
        u: usize,
        next: usize,
        in_tree: &mut Vec<bool>,
        on_path: &mut Vec<bool>,
        arcs: &mut Vec<Arc>,
        search: &mut Budget,
        bound: &mut dyn FnMut() -> f64,
        visit: &mut dyn FnMut(&[Arc], &TreeEval, &mut Budget),
    ) {
        for &(v, arc) in &self.out[u] {
            if on_path[v] || search.tick() {
                continue;
            }
            arcs.push(arc);
            if self.partial_cost(arcs) < bound() - 1e-9 {
                if in_tree[v] {
                    // Commit the current path and move to the next source.
                    let mut committed = Vec::new();
                    for (i, flag) in on_path.iter_mut().enumerate() {
                        if *flag {
                            in_tree[i] = true;
                            committed.push(i);
                        }
                    }
                    let saved = std::mem::replace(on_path, vec![false; on_path.len()]);
                    self.grow(next + 1, in_tree, on_path, arcs, search, bound, visit);
                    *on_path = saved;
                    for i in committed {
                        in_tree[i] = false;
                    }
                } else {
                    on_path[v] = true;
                    self.walk(v, next, in_tree, on_path, arcs, search, bound, visit);
                    on_path[v] = false;
                }
            }
            arcs.pop();
        }
    }

    fn chargeable(&self, eval: &TreeEval) -> bool {
        eval.charged.iter().all(|n| {
            let i = self.ids.binary_search(n).expect("model node");
            i == self.root || self.charge[i].is_some()
        })
    }

    /// Price of a partial tree: used links, fixed costs, and merges so far.
    /// Non-decreasing as the tree grows; `∞` once an uncharged node merges.
    fn partial_cost(&self, arcs: &[Arc]) -> f64 {
        let mut inflow = vec![0usize; self.ids.len()];
        let mut cost = self.fixed.unwrap_or(f64::INFINITY);
        for a in arcs {
            inflow[self.ids.binary_search(&a.to).expect("node")] += 1;
            cost += self.arc_cost[&a.link];
        }
        for &(v, c) in &self.terminals {
            inflow[v] += c;
        }
        for (v, &d) in inflow.iter().enumerate() {
            if d >= 2 && v != self.root {
                match self.charge[v] {
                    Some(c) => cost += c,
                    None => return f64::INFINITY,
                }
            }
        }
        cost
    }
}

#[derive(Debug, Clone, Copy)]
enum Back1 {
    None,
    Base,
    Extend { from: usize, arc: Arc },
}

#[derive(Debug, Clone, Copy)]
enum Back2 {
    None,
    Base,
    Merge { sub: usize, c1: u8, c2: u8 },
}

#[derive(Debug, Clone, Copy)]
enum State {
    Open1,
    Open2,
    Closed,
}

struct Rebuild<'b> {
    back1: &'b [Vec<Back1>],
    back2: &'b [Vec<Back2>],
    closed_from2: &'b [Vec<bool>],
    steps: &'b mut usize,
    limit: usize,
}

impl Rebuild<'_> {
    fn run(&mut self, mask: usize, v: usize, state: State, arcs: &mut Vec<Arc>) -> bool {
        *self.steps += 1;
        if *self.steps > self.limit {
            return false;
        }
        match state {
            State::Closed => {
                let s = if self.closed_from2[mask][v] { State::Open2 } else { State::Open1 };
                self.run(mask, v, s, arcs)
            }
            State::Open1 => match self.back1[mask][v] {
                Back1::None => false,
                Back1::Base => true,
                Back1::Extend { from, arc } => {
                    arcs.push(arc);
                    self.run(mask, from, State::Closed, arcs)
                }
            },
            State::Open2 => match self.back2[mask][v] {
                Back2::None => false,
                Back2::Base => true,
                Back2::Merge { sub, c1, c2 } => {
                    let s = |c| if c == 1 { State::Open1 } else { State::Open2 };
                    self.run(sub, v, s(c1), arcs) && self.run(mask ^ sub, v, s(c2), arcs)
                }
            },
        }
    }
}

struct Budget {
    explored: u64,
    limit: u64,
    deadline: Instant,
    hit: bool,
}

impl Budget {
    /// Counts one search node; `true` once a limit is hit.
    fn tick(&mut self) -> bool {
        self.explored += 1;
        if self.explored > self.limit || (self.explored.is_multiple_of(4096) && Instant::now() >= self.deadline) {
            self.hit = true;
        }
        self.hit
    }

    fn stop(&self) -> bool {
        self.hit
    }
}

struct Search<'a> {
    m: &'a IlpModel,
    budget: Budget,
    best: Option<(f64, Vec<Vec<Arc>>)>,
    explored: u64,
    hit_limit: bool,
}

impl<'a> Search<'a> {
    fn new(m: &'a IlpModel, limits: SolveLimits) -> Self {
        Self {
            m,
            budget: Budget {
                explored: 0,
                limit: limits.node_budget,
                deadline: Instant::now() + limits.time,
                hit: false,
            },
            best: None,
            explored: 0,
            hit_limit: false,
        }
    }

    fn joint(
        &mut self,
        k: usize,
        spent: f64,
        suffix: &[f64],
        node_res: &mut std::collections::BTreeMap<NodeId, u32>,
        link_res: &mut Vec<u32>,
        chosen: &mut Vec<Vec<Arc>>,
    ) {
        let m = self.m;
        if k == m.requests.len() {
            if self.best.as_ref().is_none_or(|(b, _)| spent < *b - 1e-9) {
                self.best = Some((spent, chosen.clone()));
            }
            return;
        }
        let rd = &m.requests[k];
        let rg = RequestGraph::new(m, k, node_res, link_res);
        // Trees found for this request, collected first so the recursion
        // below can mutate the residuals.
        let incumbent = self.best.as_ref().map_or(f64::INFINITY, |b| b.0);
        let mut options: Vec<(Vec<Arc>, TreeEval)> = Vec::new();
        let cap = incumbent - spent - suffix[k + 1];
        rg.enumerate(&mut self.budget, &mut || cap, &mut |arcs, eval, _| {
            options.push((arcs.to_vec(), eval.clone()));
        });
        options.sort_by(|a, b| a.1.cost.total_cmp(&b.1.cost));
        for (arcs, eval) in options {
            let incumbent = self.best.as_ref().map_or(f64::INFINITY, |b| b.0);
            if spent + eval.cost + suffix[k + 1] >= incumbent - 1e-9 || self.budget.stop() {
                break;
            }
            for n in &eval.charged {
                *node_res.get_mut(n).expect("node") -= rd.node_demand;
            }
            for l in &eval.links {
                link_res[l.0] -= rd.link_demand;
            }
            chosen.push(arcs);
            self.joint(k + 1, spent + eval.cost, suffix, node_res, link_res, chosen);
            chosen.pop();
            for n in &eval.charged {
                *node_res.get_mut(n).expect("node") += rd.node_demand;
            }
            for l in &eval.links {
                link_res[l.0] += rd.link_demand;
            }
        }
        self.explored = self.budget.explored;
        self.hit_limit = self.budget.hit;
    }
}
