//! Abstract syntax of the analyzed mini-language.
//!
//! A program is a single function over unbounded integers: its parameters
//! are the sampled inputs, its locals start at 0, and the body is built from
//! assignments, `if`/`else` and `while`. Variables are resolved to indices
//! into [`Program::variables`] at parse time, which also fixes the layout of
//! every observation vector.

mod parser;
mod printer;

use alloc::string::String;
use alloc::vec::Vec;

pub use parser::{parse_program, ParseError};
pub use printer::{cond_text, expr_text, pretty_print};

/// Index of a variable in the program's fixed order (params, then locals).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

/// Source-order identifier of a `while` statement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LoopId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub name: String,
    pub params: Vec<String>,
    pub locals: Vec<String>,
    pub body: Vec<Stmt>,
}

impl Program {
    /// Number of traced variables (`params ∪ locals`).
    pub fn num_vars(&self) -> usize {
        self.params.len() + self.locals.len()
    }

    /// All variable names in observation order.
    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.params.iter().chain(self.locals.iter()).map(String::as_str)
    }

    pub fn var_name(&self, v: VarId) -> &str {
        if v.0 < self.params.len() {
            &self.params[v.0]
        } else {
            &self.locals[v.0 - self.params.len()]
        }
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.variables().position(|n| n == name).map(VarId)
    }

    /// Total number of `while` statements.
    pub fn loop_count(&self) -> usize {
        fn count(stmts: &[Stmt]) -> usize {
            stmts
                .iter()
                .map(|s| match s {
                    Stmt::While { body, .. } => 1 + count(body),
                    Stmt::If { then_branch, else_branch, .. } => count(then_branch) + count(else_branch),
                    Stmt::Assign(..) | Stmt::Skip => 0,
                })
                .sum()
        }
        count(&self.body)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    Assign(VarId, Expr),
    If { cond: Cond, then_branch: Vec<Stmt>, else_branch: Vec<Stmt> },
    While { id: LoopId, cond: Cond, body: Vec<Stmt> },
    Skip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Const(i64),
    Var(VarId),
    Neg(alloc::boxed::Box<Expr>),
    Bin(BinOp, alloc::boxed::Box<Expr>, alloc::boxed::Box<Expr>),
}

impl Expr {
    pub fn bin(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Bin(op, lhs.into(), rhs.into())
    }

    /// True if the expression contains no variables.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Const(_) => true,
            Expr::Var(_) => false,
            Expr::Neg(e) => e.is_constant(),
            Expr::Bin(_, a, b) => a.is_constant() && b.is_constant(),
        }
    }

    /// True if some product has variables on both sides.
    pub fn is_nonlinear(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Var(_) => false,
            Expr::Neg(e) => e.is_nonlinear(),
            Expr::Bin(op, a, b) => {
                (*op == BinOp::Mul && !a.is_constant() && !b.is_constant()) || a.is_nonlinear() || b.is_nonlinear()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cond {
    Cmp(CmpOp, Expr, Expr),
    And(alloc::boxed::Box<Cond>, alloc::boxed::Box<Cond>),
    Or(alloc::boxed::Box<Cond>, alloc::boxed::Box<Cond>),
    Not(alloc::boxed::Box<Cond>),
}

impl Cond {
    pub fn negate(c: Cond) -> Cond {
        Cond::Not(c.into())
    }

    pub fn is_nonlinear(&self) -> bool {
        match self {
            Cond::Cmp(_, a, b) => a.is_nonlinear() || b.is_nonlinear(),
            Cond::And(a, b) | Cond::Or(a, b) => a.is_nonlinear() || b.is_nonlinear(),
            Cond::Not(c) => c.is_nonlinear(),
        }
    }
}
