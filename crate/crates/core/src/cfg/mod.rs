//! Control-flow graphs over the mini-language.
//!
//! Edges carry straight-line action lists (guards and assignments), so the
//! graph only needs locations for the entry, the exit, each loop header and
//! each branch join.

mod live;
mod loops;
mod paths;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::interp::{eval_cond, eval_expr, Overflow};
use crate::lang::{cond_text, expr_text, Cond, Expr, LoopId, Program, Stmt, VarId};

pub use live::{live_before, live_variables, mask_dead};
pub use loops::{find_loop_headers, CfgError, LoopInfo};
pub use paths::{header_segments, loop_paths, LoopPath, Segment, DEFAULT_SEGMENT_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LocId(pub usize);

impl fmt::Display for LocId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocKind {
    Entry,
    Exit,
    /// Guard-evaluation point of a `while` statement.
    Loop(LoopId),
    Join,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    Assume(Cond),
    Assign(VarId, Expr),
    /// Arbitrary new value; only produced when summarizing inner loops.
    Havoc(VarId),
}

impl Action {
    pub fn render(&self, p: &Program) -> String {
        match self {
            Action::Assume(c) => alloc::format!("[{}]", cond_text(p, c)),
            Action::Assign(v, e) => alloc::format!("{} := {}", p.var_name(*v), expr_text(p, e)),
            Action::Havoc(v) => alloc::format!("havoc {}", p.var_name(*v)),
        }
    }

    pub fn is_nonlinear(&self) -> bool {
        match self {
            Action::Assume(c) => c.is_nonlinear(),
            Action::Assign(_, e) => e.is_nonlinear(),
            Action::Havoc(_) => false,
        }
    }
}

/// Runs an action list on a state.
///
/// Returns `Ok(None)` when an `Assume` fails. `havoc` supplies the value of
/// every `Havoc` in order.
pub fn run_actions(
    actions: &[Action],
    state: &[i64],
    havoc: &mut dyn FnMut(VarId) -> i64,
) -> Result<Option<Vec<i64>>, Overflow> {
    let mut s = state.to_vec();
    for a in actions {
        match a {
            Action::Assume(c) => {
                if !eval_cond(c, &s)? {
                    return Ok(None);
                }
            }
            Action::Assign(v, e) => s[v.0] = eval_expr(e, &s)?,
            Action::Havoc(v) => s[v.0] = havoc(*v),
        }
    }
    Ok(Some(s))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub src: LocId,
    pub dst: LocId,
    pub actions: Vec<Action>,
}

#[derive(Debug, Clone)]
pub struct Cfg {
    pub kinds: Vec<LocKind>,
    pub edges: Vec<Edge>,
    pub entry: LocId,
    pub exits: Vec<LocId>,
}

impl Cfg {
    pub fn num_locations(&self) -> usize {
        self.kinds.len()
    }

    pub fn kind(&self, l: LocId) -> LocKind {
        self.kinds[l.0]
    }

    pub fn is_exit(&self, l: LocId) -> bool {
        self.exits.contains(&l)
    }

    pub fn successors(&self, l: LocId) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.src == l)
    }

    /// Location created for each `while` statement.
    pub fn loop_locations(&self) -> BTreeMap<LoopId, LocId> {
        self.kinds
            .iter()
            .enumerate()
            .filter_map(|(i, k)| match k {
                LocKind::Loop(id) => Some((*id, LocId(i))),
                _ => None,
            })
            .collect()
    }
}

struct Builder {
    kinds: Vec<LocKind>,
    edges: Vec<Edge>,
}

impl Builder {
    fn loc(&mut self, kind: LocKind) -> LocId {
        self.kinds.push(kind);
        LocId(self.kinds.len() - 1)
    }

    fn edge(&mut self, src: LocId, dst: LocId, actions: Vec<Action>) {
        self.edges.push(Edge { src, dst, actions });
    }

    fn seq(&mut self, stmts: &[Stmt], mut at: LocId, mut pending: Vec<Action>) -> (LocId, Vec<Action>) {
        for s in stmts {
            match s {
                Stmt::Skip => {}
                Stmt::Assign(v, e) => pending.push(Action::Assign(*v, e.clone())),
                Stmt::If { cond, then_branch, else_branch } => {
                    let mut pt = pending.clone();
                    pt.push(Action::Assume(cond.clone()));
                    let mut pe = core::mem::take(&mut pending);
                    pe.push(Action::Assume(Cond::negate(cond.clone())));
                    let (lt, at_t) = self.seq(then_branch, at, pt);
                    let (le, at_e) = self.seq(else_branch, at, pe);
                    let join = self.loc(LocKind::Join);
                    self.edge(lt, join, at_t);
                    self.edge(le, join, at_e);
                    at = join;
                }
                Stmt::While { id, cond, body } => {
                    let header = self.loc(LocKind::Loop(*id));
                    self.edge(at, header, core::mem::take(&mut pending));
                    let (lb, pb) = self.seq(body, header, alloc::vec![Action::Assume(cond.clone())]);
                    self.edge(lb, header, pb);
                    at = header;
                    pending.push(Action::Assume(Cond::negate(cond.clone())));
                }
            }
        }
        (at, pending)
    }
}

/// Builds the control-flow graph of a program.
pub fn build_cfg(p: &Program) -> Cfg {
    let mut b = Builder { kinds: Vec::new(), edges: Vec::new() };
    let entry = b.loc(LocKind::Entry);
    let (last, pending) = b.seq(&p.body, entry, Vec::new());
    let exit = b.loc(LocKind::Exit);
    b.edge(last, exit, pending);
    Cfg { kinds: b.kinds, edges: b.edges, entry, exits: alloc::vec![exit] }
}
