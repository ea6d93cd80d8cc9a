use std::collections::BTreeMap;

use crate::allocators::Claims;
use crate::error::{Error, Result};
use crate::topology::{PhysicalGraph, Usage};

/// Occupied capacity plus the per-request claims it is made of.
#[derive(Debug, Clone)]
pub struct NetworkState {
    pub usage: Usage,
    ledger: BTreeMap<u64, Claims>,
}

impl NetworkState {
    pub fn new(g: &PhysicalGraph) -> Self {
        Self { usage: Usage::idle(g), ledger: BTreeMap::new() }
    }

    pub fn active(&self) -> usize {
        self.ledger.len()
    }

    pub fn apply(&mut self, g: &PhysicalGraph, request: u64, claims: Claims) -> Result<()> {
        for (&n, &c) in &claims.nodes {
            let i = g.node_index(n).ok_or_else(|| Error::Invariant(format!("claim on unknown node {n}")))?;
            self.usage.nodes[i] += c;
        }
        for (&l, &c) in &claims.links {
            self.usage.links[l.0] += c;
        }
        let touched = claims.clone();
        if self.ledger.insert(request, claims).is_some() {
            return Err(Error::Invariant(format!("request {request} claimed twice")));
        }
        self.audit(g, &touched)
    }

    pub fn release(&mut self, g: &PhysicalGraph, request: u64) -> Result<Claims> {
        let claims = self
            .ledger
            .remove(&request)
            .ok_or_else(|| Error::Invariant(format!("release of unknown request {request}")))?;
        for (&n, &c) in &claims.nodes {
            let i = g.node_index(n).expect("claimed node exists");
            self.usage.nodes[i] = self.usage.nodes[i]
                .checked_sub(c)
                .ok_or_else(|| Error::Invariant(format!("node {n} released below zero")))?;
        }
        for (&l, &c) in &claims.links {
            self.usage.links[l.0] = self.usage.links[l.0]
                .checked_sub(c)
                .ok_or_else(|| Error::Invariant(format!("link {} released below zero", l.0)))?;
        }
        self.audit(g, &claims)?;
        Ok(claims)
    }

    /// Ledger sums and capacity bounds on the components `touched` mentions.
    pub fn audit(&self, g: &PhysicalGraph, touched: &Claims) -> Result<()> {
        for &n in touched.nodes.keys() {
            let sum: u32 = self.ledger.values().filter_map(|c| c.nodes.get(&n)).sum();
            let used = self.usage.node_used(g, n);
            if sum != used {
                return Err(Error::Invariant(format!("node {n}: ledger {sum} != used {used}")));
            }
            if used > g.node(n).map_or(0, |x| x.capacity) {
                return Err(Error::Invariant(format!("node {n} over capacity ({used})")));
            }
        }
        for &l in touched.links.keys() {
            let sum: u32 = self.ledger.values().filter_map(|c| c.links.get(&l)).sum();
            let used = self.usage.links[l.0];
            if sum != used {
                return Err(Error::Invariant(format!("link {}: ledger {sum} != used {used}", l.0)));
            }
            if used > g.link(l).capacity {
                return Err(Error::Invariant(format!("link {} over capacity ({used})", l.0)));
            }
        }
        Ok(())
    }

    /// Full audit over every component.
    pub fn audit_all(&self, g: &PhysicalGraph) -> Result<()> {
        let all = Claims {
            nodes: g.nodes().iter().map(|n| (n.id, 0)).collect(),
            links: g.links().iter().map(|l| (l.id, 0)).collect(),
        };
        self.audit(g, &all)
    }
}
