//! Canonical text form of a [`SourceFile`]; `parse(render(f)) == f`.

use std::fmt::Write;

use num_traits::One;

use super::ast::*;
use crate::prob::{self, Prob};

pub fn render(file: &SourceFile) -> String {
    let mut out = String::new();
    for (i, block) in file.blocks.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        match block {
            Block::Scm(b) => render_scm(&mut out, b),
            Block::Query(q) => render_query(&mut out, q),
        }
    }
    out
}

fn render_scm(out: &mut String, block: &ScmBlock) {
    let _ = writeln!(out, "scm {} {{", block.name);
    for stmt in &block.stmts {
        out.push_str("    ");
        match stmt {
            Stmt::Exo { name, dist } => {
                let _ = write!(out, "exo {name} ~ {}", render_dist(dist));
            }
            Stmt::Var { name, expr } => {
                let _ = write!(out, "var {name} = {}", render_expr(expr));
            }
            Stmt::Mixture { name, components } => {
                let _ = write!(out, "mixture {name} = tuple({})", components.join(", "));
            }
            Stmt::Label(l) => {
                let body = match &l.body {
                    LabelBody::Expr(e) => render_expr(e),
                    LabelBody::Bayes(t) => format!("bayes({t})"),
                };
                let _ = write!(out, "label {} uses {{{}}} = {body}", l.name, l.uses.join(", "));
            }
        }
        out.push('\n');
    }
    out.push_str("}\n");
}

fn render_query(out: &mut String, q: &QueryBlock) {
    let assigns = |xs: &[(String, i64)]| {
        xs.iter().map(|(n, v)| format!("{n} = {v}")).collect::<Vec<_>>().join(", ")
    };
    let _ = write!(
        out,
        "query {} on {} = P({} = {} | do({})",
        q.name,
        q.scm,
        q.outcome.0,
        q.outcome.1,
        assigns(&q.intervention)
    );
    if !q.evidence.is_empty() {
        let _ = write!(out, " ; given {}", assigns(&q.evidence));
    }
    out.push_str(")\n");
}

pub fn render_dist(dist: &DistSpec) -> String {
    match dist {
        DistSpec::Bernoulli(p) => format!("bernoulli({})", render_prob(p)),
        DistSpec::Categorical(ps) => {
            let ps: Vec<_> = ps.iter().map(render_prob).collect();
            format!("categorical({})", ps.join(", "))
        }
    }
}

/// Terminating decimals print as decimals (`0.4`); everything else as an
/// exact fraction (`1/18`).
pub fn render_prob(p: &Prob) -> String {
    let mut d = p.denom().clone();
    let mut max_power = 0usize;
    for f in [2u32, 5] {
        let mut power = 0;
        while (&d % f) == 0u32.into() {
            d /= f;
            power += 1;
        }
        max_power = max_power.max(power);
    }
    if d.is_one() {
        // numer * 10^k / denom is an integer for k = max_power.
        let digits = p.numer().to_string().len() + max_power;
        prob::decimal(p, digits.max(1))
    } else {
        prob::fraction(p)
    }
}

pub fn render_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e, 0, false);
    out
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Binary(op, _, _) => op.precedence(),
        Expr::Int(v) if *v < 0 => 5,
        _ => 7,
    }
}

fn write_expr(out: &mut String, e: &Expr, parent: u8, right: bool) {
    let p = prec(e);
    let comparison_child = parent == 4 && p == 4;
    let wrap = p < parent || (p == parent && right) || comparison_child;
    if wrap {
        out.push('(');
    }
    match e {
        Expr::Int(v) if *v < 0 => {
            let _ = write!(out, "0 - {}", v.unsigned_abs());
        }
        Expr::Int(v) => {
            let _ = write!(out, "{v}");
        }
        Expr::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Expr::Var(n) => out.push_str(n),
        Expr::Not(inner) => {
            out.push_str("not ");
            write_expr(out, inner, 7, false);
        }
        Expr::Indicator(inner) => {
            out.push_str("indicator(");
            write_expr(out, inner, 0, false);
            out.push(')');
        }
        Expr::Binary(op, a, b) => {
            write_expr(out, a, p, false);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(out, b, p, true);
        }
    }
    if wrap {
        out.push(')');
    }
}
