//! SMT-LIB encoding of the decrease condition.
//!
//! Program variables become `<name>_<version>` in SSA form; network terms
//! use `pre!` and `post!` prefixes, which cannot clash with program names.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use super::RankingCandidate;
use crate::cfg::{Action, LocId, LoopPath};
use crate::lang::{BinOp, CmpOp, Cond, Expr, Program, VarId};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EncodeError {
    #[error("candidate expects {got} variables but the program has {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("candidate variable {index} is `{got}`, program has `{expected}`")]
    VariableOrder { index: usize, expected: String, got: String },
}

/// One solver query: `unsat` means the path decreases the candidate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VcQuery {
    pub path: usize,
    pub header: LocId,
    pub script: String,
    /// Names of the constants standing for the path's havocs, in order.
    pub havocs: Vec<String>,
    pub nonlinear: bool,
}

fn lit(v: i128) -> String {
    if v < 0 {
        format!("(- {})", v.unsigned_abs())
    } else {
        v.to_string()
    }
}

fn expr(e: &Expr, names: &[String]) -> String {
    match e {
        Expr::Const(c) => lit(*c as i128),
        Expr::Var(v) => names[v.0].clone(),
        Expr::Neg(inner) => format!("(- {})", expr(inner, names)),
        Expr::Bin(op, a, b) => {
            let op = match op {
                BinOp::Add => "+",
                BinOp::Sub => "-",
                BinOp::Mul => "*",
            };
            format!("({op} {} {})", expr(a, names), expr(b, names))
        }
    }
}

fn cond(c: &Cond, names: &[String]) -> String {
    match c {
        Cond::Cmp(op, a, b) => {
            let (a, b) = (expr(a, names), expr(b, names));
            match op {
                CmpOp::Eq => format!("(= {a} {b})"),
                CmpOp::Ne => format!("(not (= {a} {b}))"),
                _ => format!("({} {a} {b})", op.symbol()),
            }
        }
        Cond::And(a, b) => format!("(and {} {})", cond(a, names), cond(b, names)),
        Cond::Or(a, b) => format!("(or {} {})", cond(a, names), cond(b, names)),
        Cond::Not(inner) => format!("(not {})", cond(inner, names)),
    }
}

fn nary(op: &str, mut items: Vec<String>, empty: &str) -> String {
    match items.len() {
        0 => empty.to_string(),
        1 => items.pop().unwrap(),
        _ => format!("({op} {})", items.join(" ")),
    }
}

fn check_dimensions(p: &Program, cand: &RankingCandidate) -> Result<(), EncodeError> {
    if cand.n != p.num_vars() || cand.variable_order.len() != p.num_vars() {
        return Err(EncodeError::Dimension { expected: p.num_vars(), got: cand.n });
    }
    for (index, (want, got)) in p.variables().zip(&cand.variable_order).enumerate() {
        if want != got {
            return Err(EncodeError::VariableOrder { index, expected: want.into(), got: got.clone() });
        }
    }
    Ok(())
}

/// Appends `define-fun`s for the hidden units and outputs over `names`,
/// leaving out variables not in `live`.
fn network_defs(out: &mut String, cand: &RankingCandidate, side: &str, names: &[String], live: &BTreeSet<VarId>) {
    for u in 0..cand.hidden() {
        let mut terms = Vec::new();
        for (i, (w, x)) in cand.row(u).iter().zip(names).enumerate() {
            if !live.contains(&VarId(i)) {
                continue;
            }
            match *w {
                0 => {}
                1 => terms.push(x.clone()),
                -1 => terms.push(format!("(- {x})")),
                w => terms.push(format!("(* {} {x})", lit(w as i128))),
            }
        }
        if cand.biases[u] != 0 {
            terms.push(lit(cand.biases[u] as i128));
        }
        let a = format!("{side}!a{}", u + 1);
        let _ = writeln!(out, "(define-fun {a} () Int {})", nary("+", terms, "0"));
        let _ = writeln!(out, "(define-fun {side}!r{} () Int (ite (>= {a} 0) {a} 0))", u + 1);
    }
    for j in 0..cand.m {
        let rs = (j * cand.h..(j + 1) * cand.h).map(|u| format!("{side}!r{}", u + 1)).collect();
        let _ = writeln!(out, "(define-fun {side}!o{} () Int {})", j + 1, nary("+", rs, "0"));
    }
}

fn decrease(cand: &RankingCandidate, j: usize) -> String {
    let (pre, post) = (format!("pre!o{j}"), format!("post!o{j}"));
    let s = cand.delta_v.shift();
    let num = lit(cand.delta_v.numerator());
    if s == 0 {
        format!("(<= {post} (- {pre} {num}))")
    } else {
        let scale = 1u128 << s;
        format!("(<= (* {scale} {post}) (- (* {scale} {pre}) {num}))")
    }
}

fn lex_condition(cand: &RankingCandidate) -> String {
    let options = (1..=cand.m)
        .map(|j| {
            let mut parts: Vec<String> = (1..j).map(|i| format!("(<= post!o{i} pre!o{i})")).collect();
            parts.push(decrease(cand, j));
            nary("and", parts, "true")
        })
        .collect();
    nary("or", options, "false")
}

fn pre_names(p: &Program) -> Vec<String> {
    p.variables().map(|v| format!("{v}_0")).collect()
}

fn preamble(out: &mut String, logic: &str, names: &[String]) {
    let _ = writeln!(out, "(set-option :produce-models true)");
    let _ = writeln!(out, "(set-logic {logic})");
    for n in names {
        let _ = writeln!(out, "(declare-const {n} Int)");
    }
}

fn encode_path(p: &Program, path: &LoopPath, cand: &RankingCandidate) -> VcQuery {
    let nonlinear = path.is_nonlinear();
    let mut out = String::new();
    let _ = writeln!(out, "; neuroterm decrease query: {}, header {}, path {}", p.name, path.header, path.id);
    for a in &path.actions {
        let _ = writeln!(out, ";   {}", a.render(p));
    }
    let mut names = pre_names(p);
    preamble(&mut out, if nonlinear { "QF_NIA" } else { "QF_LIA" }, &names);
    let mut version = alloc::vec![0usize; p.num_vars()];
    let mut havocs = Vec::new();
    for a in &path.actions {
        match a {
            Action::Assume(c) => {
                let _ = writeln!(out, "(assert {})", cond(c, &names));
            }
            Action::Assign(v, e) => {
                version[v.0] += 1;
                let name = format!("{}_{}", p.var_name(*v), version[v.0]);
                let _ = writeln!(out, "(define-fun {name} () Int {})", expr(e, &names));
                names[v.0] = name;
            }
            Action::Havoc(v) => {
                version[v.0] += 1;
                let name = format!("{}_{}", p.var_name(*v), version[v.0]);
                let _ = writeln!(out, "(declare-const {name} Int)");
                havocs.push(name.clone());
                names[v.0] = name;
            }
        }
    }
    network_defs(&mut out, cand, "pre", &pre_names(p), &path.live);
    network_defs(&mut out, cand, "post", &names, &path.live);
    let _ = writeln!(out, "(assert (not {}))", lex_condition(cand));
    out.push_str("(check-sat)\n");
    VcQuery { path: path.id, header: path.header, script: out, havocs, nonlinear }
}

/// Encodes one decrease query per loop path.
pub fn encode_vc(p: &Program, paths: &[LoopPath], cand: &RankingCandidate) -> Result<Vec<VcQuery>, EncodeError> {
    check_dimensions(p, cand)?;
    Ok(paths.iter().map(|path| encode_path(p, path, cand)).collect())
}

/// Sanity query asserting that some output is negative. The ReLU encoding
/// makes this `unsat` for every candidate.
pub fn encode_bounded(p: &Program, cand: &RankingCandidate) -> Result<String, EncodeError> {
    check_dimensions(p, cand)?;
    let mut out = String::new();
    let _ = writeln!(out, "; neuroterm boundedness query: {}", p.name);
    let names = pre_names(p);
    preamble(&mut out, "QF_LIA", &names);
    let all = (0..p.num_vars()).map(VarId).collect();
    network_defs(&mut out, cand, "pre", &names, &all);
    let neg = (1..=cand.m).map(|j| format!("(< pre!o{j} 0)")).collect();
    let _ = writeln!(out, "(assert {})", nary("or", neg, "false"));
    out.push_str("(check-sat)\n");
    Ok(out)
}
