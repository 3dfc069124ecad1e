//! Concrete evaluation shared by the tracer, segment replay and the
//! brute-force oracle.
//!
//! Program integers are mathematical integers; the evaluator works on `i64`
//! and reports leaving that range instead of wrapping.

use crate::lang::{BinOp, CmpOp, Cond, Expr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("integer overflow during evaluation")]
pub struct Overflow;

pub fn eval_expr(e: &Expr, state: &[i64]) -> Result<i64, Overflow> {
    match e {
        Expr::Const(c) => Ok(*c),
        Expr::Var(v) => Ok(state[v.0]),
        Expr::Neg(inner) => eval_expr(inner, state)?.checked_neg().ok_or(Overflow),
        Expr::Bin(op, a, b) => {
            let (a, b) = (eval_expr(a, state)?, eval_expr(b, state)?);
            match op {
                BinOp::Add => a.checked_add(b),
                BinOp::Sub => a.checked_sub(b),
                BinOp::Mul => a.checked_mul(b),
            }
            .ok_or(Overflow)
        }
    }
}

pub fn eval_cond(c: &Cond, state: &[i64]) -> Result<bool, Overflow> {
    Ok(match c {
        Cond::Cmp(op, a, b) => {
            let (a, b) = (eval_expr(a, state)?, eval_expr(b, state)?);
            match op {
                CmpOp::Lt => a < b,
                CmpOp::Le => a <= b,
                CmpOp::Gt => a > b,
                CmpOp::Ge => a >= b,
                CmpOp::Eq => a == b,
                CmpOp::Ne => a != b,
            }
        }
        Cond::And(a, b) => eval_cond(a, state)? && eval_cond(b, state)?,
        Cond::Or(a, b) => eval_cond(a, state)? || eval_cond(b, state)?,
        Cond::Not(inner) => !eval_cond(inner, state)?,
    })
}
