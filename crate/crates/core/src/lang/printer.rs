use alloc::string::String;
use core::fmt::Write;

use super::{BinOp, Cond, Expr, Program, Stmt};

/// Renders the canonical source form of a program.
///
/// Variable declarations are hoisted into a single `var` line, nested blocks
/// are indented by two spaces, and parentheses appear only where the parser
/// needs them to rebuild the same tree.
pub fn pretty_print(p: &Program) -> String {
    let mut out = String::new();
    let _ = write!(out, "fn {}({})", p.name, p.params.join(", "));
    let has_body = p.body.iter().any(|s| *s != Stmt::Skip);
    if p.locals.is_empty() && !has_body {
        out.push_str("{ }\n");
        return out;
    }
    out.push_str("{\n");
    if !p.locals.is_empty() {
        let _ = writeln!(out, "  var {};", p.locals.join(", "));
    }
    for s in &p.body {
        stmt(&mut out, p, s, 1);
    }
    out.push_str("}\n");
    out
}

/// Canonical text of a single expression.
pub fn expr_text(p: &Program, e: &Expr) -> String {
    let mut out = String::new();
    expr(&mut out, p, e, 0);
    out
}

/// Canonical text of a single condition.
pub fn cond_text(p: &Program, c: &Cond) -> String {
    let mut out = String::new();
    cond(&mut out, p, c, 0);
    out
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn block(out: &mut String, p: &Program, stmts: &[Stmt], level: usize) {
    if stmts.iter().all(|s| *s == Stmt::Skip) {
        out.push_str("{ }");
        return;
    }
    out.push_str("{\n");
    for s in stmts {
        stmt(out, p, s, level + 1);
    }
    indent(out, level);
    out.push('}');
}

fn if_chain(out: &mut String, p: &Program, s: &Stmt, level: usize) {
    let Stmt::If { cond: c, then_branch, else_branch } = s else { unreachable!() };
    out.push_str("if (");
    cond(out, p, c, 0);
    out.push_str(") ");
    block(out, p, then_branch, level);
    let live: alloc::vec::Vec<&Stmt> = else_branch.iter().filter(|s| **s != Stmt::Skip).collect();
    match live.as_slice() {
        [] => {}
        [inner @ Stmt::If { .. }] => {
            out.push_str(" else ");
            if_chain(out, p, inner, level);
        }
        _ => {
            out.push_str(" else ");
            block(out, p, else_branch, level);
        }
    }
}

fn stmt(out: &mut String, p: &Program, s: &Stmt, level: usize) {
    match s {
        Stmt::Skip => return,
        Stmt::Assign(v, e) => {
            indent(out, level);
            let _ = write!(out, "{} = ", p.var_name(*v));
            expr(out, p, e, 0);
            out.push(';');
        }
        Stmt::If { .. } => {
            indent(out, level);
            if_chain(out, p, s, level);
        }
        Stmt::While { cond: c, body, .. } => {
            indent(out, level);
            out.push_str("while (");
            cond(out, p, c, 0);
            out.push_str(") ");
            block(out, p, body, level);
        }
    }
    out.push('\n');
}

fn expr_prec(e: &Expr) -> u8 {
    match e {
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        Expr::Bin(BinOp::Mul, ..) => 2,
        Expr::Neg(_) => 3,
        Expr::Const(c) if *c < 0 => 3,
        Expr::Const(_) | Expr::Var(_) => 4,
    }
}

fn expr(out: &mut String, p: &Program, e: &Expr, min_prec: u8) {
    let prec = expr_prec(e);
    let paren = prec < min_prec;
    if paren {
        out.push('(');
    }
    match e {
        Expr::Const(c) => {
            let _ = write!(out, "{c}");
        }
        Expr::Var(v) => out.push_str(p.var_name(*v)),
        Expr::Neg(inner) => {
            out.push('-');
            // `-5` would re-parse as a literal and `--x` as a decrement.
            let needs = matches!(**inner, Expr::Const(_) | Expr::Neg(_));
            expr(out, p, inner, if needs { 5 } else { 3 });
        }
        Expr::Bin(op, a, b) => {
            let sym = match op {
                BinOp::Add => "+",
                BinOp::Sub => "-",
                BinOp::Mul => "*",
            };
            expr(out, p, a, prec);
            let _ = write!(out, " {sym} ");
            expr(out, p, b, prec + 1);
        }
    }
    if paren {
        out.push(')');
    }
}

fn cond_prec(c: &Cond) -> u8 {
    match c {
        Cond::Or(..) => 1,
        Cond::And(..) => 2,
        Cond::Not(_) | Cond::Cmp(..) => 3,
    }
}

fn cond(out: &mut String, p: &Program, c: &Cond, min_prec: u8) {
    let prec = cond_prec(c);
    let paren = prec < min_prec;
    if paren {
        out.push('(');
    }
    match c {
        Cond::Cmp(op, a, b) => {
            expr(out, p, a, 0);
            let _ = write!(out, " {} ", op.symbol());
            expr(out, p, b, 0);
        }
        Cond::And(a, b) | Cond::Or(a, b) => {
            let sym = if matches!(c, Cond::And(..)) { "&&" } else { "||" };
            cond(out, p, a, prec);
            let _ = write!(out, " {sym} ");
            cond(out, p, b, prec + 1);
        }
        Cond::Not(inner) => {
            out.push_str("!(");
            cond(out, p, inner, 0);
            out.push(')');
        }
    }
    if paren {
        out.push(')');
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse_program, VarId};
    use alloc::vec;

    #[test]
    fn empty_body_is_single_line() {
        let p = Program { name: "f".into(), params: vec![], locals: vec![], body: vec![Stmt::Skip] };
        assert_eq!(pretty_print(&p), "fn f(){ }\n");
    }

    #[test]
    fn nested_while_indentation() {
        let p = parse_program("fn nested(i,k){var j; while(i<k){j=0;while(j<i){j++;} i++;}}").unwrap();
        let want = "\
fn nested(i, k){
  var j;
  while (i < k) {
    j = 0;
    while (j < i) {
      j = j + 1;
    }
    i = i + 1;
  }
}
";
        assert_eq!(pretty_print(&p), want);
    }

    #[test]
    fn else_if_chain_and_empty_blocks() {
        let p = parse_program("fn f(x, y){ while (x > 0) { } if (x > 0) { x--; } else if (y > 0) { } else { y--; } }")
            .unwrap();
        let want = "\
fn f(x, y){
  while (x > 0) { }
  if (x > 0) {
    x = x - 1;
  } else if (y > 0) { } else {
    y = y - 1;
  }
}
";
        assert_eq!(pretty_print(&p), want);
    }

    #[test]
    fn parentheses_preserve_structure() {
        let src = "fn f(a, b, c){ a = a - (b - c); b = -(a * (b + c)); c = -(-a) - -3; \
                   while (a > 0 && (b > 0 || c > 0) || !(a == b)) { a--; } }";
        let p = parse_program(src).unwrap();
        let text = pretty_print(&p);
        assert!(text.contains("a = a - (b - c);"), "{text}");
        assert!(text.contains("b = -(a * (b + c));"), "{text}");
        assert!(text.contains("c = -(-a) - -3;"), "{text}");
        assert!(text.contains("a > 0 && (b > 0 || c > 0) || !(a == b)"), "{text}");
        assert_eq!(parse_program(&text).unwrap(), p);
    }

    #[test]
    fn negated_literal_node_round_trips() {
        let p = Program {
            name: "g".into(),
            params: vec!["x".into()],
            locals: vec![],
            body: vec![Stmt::Assign(VarId(0), Expr::Neg(Expr::Const(5).into()))],
        };
        let text = pretty_print(&p);
        assert_eq!(parse_program(&text).unwrap(), p);
    }
}
