//! Free-format MPS export.
//!
//! Columns are named by [`VarKey::column_name`](super::VarKey::column_name):
//! `q_i_j_s_k`, `x_u_v_i_j_k`, `w_i_j_k`, `y_u_v_k`, `mue_l_k`, `mu_n_k`,
//! `zeta_n_k`, `nu_n_k`, `z_s_k`, `etan_n`, `etae_l`. Rows carry the
//! constraint names of the model (`auxflow_…`, `linkcap_…`, …); the objective
//! row is `obj`. Binary columns get `BV` bounds, fixed ones `FX`, loads are
//! general integers in `[0, +∞)`.

use std::fmt::Write as _;

use super::model::{IlpModel, Sense, VarKind};

pub fn export_standard_form(m: &IlpModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "NAME {}", sanitize(m.graph.name()));
    let _ = writeln!(out, "ROWS");
    let _ = writeln!(out, " N obj");
    for c in &m.constraints {
        let tag = match c.sense {
            Sense::Le => 'L',
            Sense::Ge => 'G',
            Sense::Eq => 'E',
        };
        let _ = writeln!(out, " {tag} {}", c.name);
    }

    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m.variables.len()];
    for (r, c) in m.constraints.iter().enumerate() {
        for &(v, coef) in &c.terms {
            by_col[v].push((r, coef));
        }
    }
    let mut obj = vec![0.0; m.variables.len()];
    for &(v, c) in &m.objective {
        obj[v] += c;
    }

    let _ = writeln!(out, "COLUMNS");
    let mut in_int = false;
    for (v, var) in m.variables.iter().enumerate() {
        let is_int = matches!(var.kind, VarKind::Binary | VarKind::Integer);
        if is_int != in_int {
            let tag = if is_int { "INTORG" } else { "INTEND" };
            let _ = writeln!(out, "    MARKER 'MARKER' '{tag}'");
            in_int = is_int;
        }
        let name = var.key.column_name();
        let _ = writeln!(out, "    {name} obj {}", obj[v]);
        for &(r, coef) in &by_col[v] {
            let _ = writeln!(out, "    {name} {} {coef}", m.constraints[r].name);
        }
    }
    if in_int {
        let _ = writeln!(out, "    MARKER 'MARKER' 'INTEND'");
    }

    let _ = writeln!(out, "RHS");
    for c in m.constraints.iter().filter(|c| c.rhs != 0.0) {
        let _ = writeln!(out, "    rhs {} {}", c.name, c.rhs);
    }

    let _ = writeln!(out, "BOUNDS");
    for var in &m.variables {
        let name = var.key.column_name();
        if var.lower == var.upper {
            let _ = writeln!(out, " FX bnd {name} {}", var.lower);
        } else if var.kind == VarKind::Binary {
            let _ = writeln!(out, " BV bnd {name}");
        } else {
            let _ = writeln!(out, " LO bnd {name} {}", var.lower);
            if var.upper.is_finite() {
                let _ = writeln!(out, " UP bnd {name} {}", var.upper);
            } else {
                let _ = writeln!(out, " PL bnd {name}");
            }
        }
    }
    let _ = writeln!(out, "ENDATA");
    out
}

fn sanitize(name: &str) -> String {
    let s: String = name.chars().map(|c| if c.is_whitespace() { '_' } else { c }).collect();
    if s.is_empty() {
        "model".into()
    } else {
        s
    }
}
