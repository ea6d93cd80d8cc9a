use std::fmt;

use serde::{Deserialize, Serialize};

use super::model::{Family, IlpModel, Sense, VarKind};
use super::solve::IlpSolution;

const TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    Row(Family),
    Bound,
    Integrality,
    /// The assignment does not have one value per variable.
    Shape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Row or column name.
    pub name: String,
    /// Amount by which the constraint is missed (always positive).
    pub residual: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ViolationKind::Row(fam) => fam.label(),
            ViolationKind::Bound => "bound",
            ViolationKind::Integrality => "integrality",
            ViolationKind::Shape => "shape",
        };
        write!(f, "[{kind}] {} off by {}", self.name, self.residual)
    }
}

/// Every violated row, bound and integrality requirement; empty iff feasible.
pub fn verify_solution(m: &IlpModel, s: &IlpSolution) -> Vec<Violation> {
    verify_values(m, &s.values)
}

pub fn verify_values(m: &IlpModel, values: &[f64]) -> Vec<Violation> {
    if values.len() != m.variables.len() {
        return vec![Violation {
            kind: ViolationKind::Shape,
            name: format!("{} values for {} variables", values.len(), m.variables.len()),
            residual: (values.len() as f64 - m.variables.len() as f64).abs(),
        }];
    }
    let mut out = Vec::new();
    for (var, &x) in m.variables.iter().zip(values) {
        let miss = (var.lower - x).max(x - var.upper);
        if miss > TOL {
            out.push(Violation { kind: ViolationKind::Bound, name: var.key.column_name(), residual: miss });
        }
        if matches!(var.kind, VarKind::Binary | VarKind::Integer) && (x - x.round()).abs() > TOL {
            out.push(Violation { kind: ViolationKind::Integrality, name: var.key.column_name(), residual: (x - x.round()).abs() });
        }
    }
    for c in &m.constraints {
        let lhs: f64 = c.terms.iter().map(|&(v, a)| a * values[v]).sum();
        let miss = match c.sense {
            Sense::Le => lhs - c.rhs,
            Sense::Ge => c.rhs - lhs,
            Sense::Eq => (lhs - c.rhs).abs(),
        };
        if miss > TOL {
            out.push(Violation { kind: ViolationKind::Row(c.family), name: c.name.clone(), residual: miss });
        }
    }
    out
}
