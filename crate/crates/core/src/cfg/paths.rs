//! Path enumeration between loop headers.
//!
//! [`header_segments`] gives the exact header-to-header transition relation
//! used to replay traces. [`loop_paths`] gives one entry per way of going
//! once around a loop, with nested loops summarized by havocking what they
//! assign; those are the units the verifier checks.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use super::{run_actions, Action, Cfg, CfgError, LocId, LoopInfo};
use crate::interp::Overflow;
use crate::lang::VarId;

pub const DEFAULT_SEGMENT_CAP: usize = 4096;

/// Acyclic path from a header to the next header visit (or to an exit).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub id: usize,
    pub from: LocId,
    pub to: LocId,
    pub to_exit: bool,
    pub actions: Vec<Action>,
}

impl Segment {
    /// Executes the segment; `None` if one of its guards fails.
    pub fn apply(&self, state: &[i64]) -> Result<Option<Vec<i64>>, Overflow> {
        run_actions(&self.actions, state, &mut |_| unreachable!("segments never havoc"))
    }
}

/// Enumerates every header-to-header and header-to-exit segment.
pub fn header_segments(g: &Cfg, li: &LoopInfo, cap: usize) -> Result<Vec<Segment>, CfgError> {
    let mut out = Vec::new();
    for &h in &li.headers {
        let mut stack: Vec<(LocId, Vec<Action>)> = Vec::new();
        push_successors(g, h, &[], &mut stack);
        while let Some((at, acts)) = stack.pop() {
            if li.is_header(at) || g.is_exit(at) {
                if out.len() == cap {
                    return Err(CfgError::SegmentCap { cap });
                }
                out.push(Segment { id: out.len(), from: h, to: at, to_exit: g.is_exit(at), actions: acts });
            } else {
                push_successors(g, at, &acts, &mut stack);
            }
        }
    }
    Ok(out)
}

fn push_successors(g: &Cfg, at: LocId, prefix: &[Action], stack: &mut Vec<(LocId, Vec<Action>)>) {
    // Reverse so that the first edge is explored first.
    let succ: Vec<_> = g.successors(at).collect();
    for e in succ.into_iter().rev() {
        let mut acts = prefix.to_vec();
        acts.extend(e.actions.iter().cloned());
        stack.push((e.dst, acts));
    }
}

/// One iteration of a loop: from its header back to the same header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopPath {
    pub id: usize,
    pub header: LocId,
    pub actions: Vec<Action>,
    /// Variables live at the header.
    pub live: BTreeSet<VarId>,
}

impl LoopPath {
    pub fn havoc_count(&self) -> usize {
        self.actions.iter().filter(|a| matches!(a, Action::Havoc(_))).count()
    }

    pub fn is_nonlinear(&self) -> bool {
        self.actions.iter().any(Action::is_nonlinear)
    }

    /// State as seen by the ranking function at the header.
    pub fn project(&self, state: &[i64]) -> Vec<i64> {
        super::mask_dead(&self.live, state)
    }

    /// Executes the path with the given values for its havocs, in order.
    pub fn apply(&self, state: &[i64], havocs: &[i64]) -> Result<Option<Vec<i64>>, Overflow> {
        let mut next = havocs.iter().copied();
        run_actions(&self.actions, state, &mut |_| next.next().unwrap_or(0))
    }
}

fn assigned_in_loop(g: &Cfg, li: &LoopInfo, q: LocId) -> Vec<VarId> {
    let body = &li.body[&q];
    let mut vars = BTreeSet::new();
    for e in g.edges.iter().filter(|e| body.contains(&e.src) && body.contains(&e.dst)) {
        for a in &e.actions {
            match a {
                Action::Assign(v, _) | Action::Havoc(v) => {
                    vars.insert(*v);
                }
                Action::Assume(_) => {}
            }
        }
    }
    vars.into_iter().collect()
}

/// Enumerates the iteration paths of every loop.
///
/// A path that reaches a nested header continues along that loop's exit
/// edges after havocking every variable the nested loop assigns.
pub fn loop_paths(g: &Cfg, li: &LoopInfo, cap: usize) -> Result<Vec<LoopPath>, CfgError> {
    let mut out = Vec::new();
    for &h in &li.headers {
        let body = &li.body[&h];
        let mut stack: Vec<(LocId, Vec<Action>)> = Vec::new();
        push_successors(g, h, &[], &mut stack);
        while let Some((at, mut acts)) = stack.pop() {
            if at == h {
                if out.len() == cap {
                    return Err(CfgError::SegmentCap { cap });
                }
                out.push(LoopPath { id: out.len(), header: h, actions: acts, live: li.live[&h].clone() });
            } else if !body.contains(&at) {
                continue;
            } else if li.is_header(at) {
                let inner = &li.body[&at];
                acts.extend(assigned_in_loop(g, li, at).into_iter().map(Action::Havoc));
                let exits: Vec<_> = g.successors(at).filter(|e| !inner.contains(&e.dst)).collect();
                for e in exits.into_iter().rev() {
                    let mut a = acts.clone();
                    a.extend(e.actions.iter().cloned());
                    stack.push((e.dst, a));
                }
            } else {
                push_successors(g, at, &acts, &mut stack);
            }
            if stack.len() > cap.saturating_mul(4) {
                return Err(CfgError::SegmentCap { cap });
            }
        }
    }
    Ok(out)
}
