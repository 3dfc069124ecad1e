//! Sampling, execution and loop-header snapshots.

mod sampler;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::cfg::{LocId, LoopInfo};
use crate::interp::{eval_cond, eval_expr, Overflow};
use crate::lang::{Program, Stmt};

pub use sampler::{sample_inputs, ConfigError, Draw, Sampler, SamplerConfig, Strategy};

pub const DEFAULT_MAX_TRACE_LEN: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    pub header: LocId,
    /// All variables in declaration order (params, then locals).
    pub values: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub input: Vec<i64>,
    pub steps: Vec<Snapshot>,
    /// Set when the snapshot cap was hit or a value left the `i64` range.
    pub truncated: bool,
    /// Variable state when execution stopped.
    pub final_state: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservationPair {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// 1-based lexicographic index of the header both snapshots come from.
    pub j: usize,
}

enum Stop {
    Cap,
    Overflow,
}

impl From<Overflow> for Stop {
    fn from(_: Overflow) -> Stop {
        Stop::Overflow
    }
}

struct Run<'a> {
    li: &'a LoopInfo,
    state: Vec<i64>,
    steps: Vec<Snapshot>,
    max_len: usize,
}

impl Run<'_> {
    fn block(&mut self, stmts: &[Stmt]) -> Result<(), Stop> {
        for s in stmts {
            match s {
                Stmt::Skip => {}
                Stmt::Assign(v, e) => self.state[v.0] = eval_expr(e, &self.state)?,
                Stmt::If { cond, then_branch, else_branch } => {
                    if eval_cond(cond, &self.state)? {
                        self.block(then_branch)?;
                    } else {
                        self.block(else_branch)?;
                    }
                }
                Stmt::While { id, cond, body } => {
                    let header = self.li.loop_of[id];
                    loop {
                        if self.steps.len() == self.max_len {
                            return Err(Stop::Cap);
                        }
                        self.steps.push(Snapshot { header, values: self.state.clone() });
                        if !eval_cond(cond, &self.state)? {
                            break;
                        }
                        self.block(body)?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Runs the program on one input, snapshotting every loop-header visit
/// before its guard is evaluated.
///
/// # Panics
///
/// If `input` does not have one value per parameter.
pub fn execute_trace(p: &Program, li: &LoopInfo, input: &[i64], max_len: usize) -> Trace {
    assert_eq!(input.len(), p.params.len(), "one input value per parameter");
    let mut state = input.to_vec();
    state.resize(p.num_vars(), 0);
    let mut run = Run { li, state, steps: Vec::new(), max_len };
    let truncated = run.block(&p.body).is_err();
    Trace { input: input.to_vec(), steps: run.steps, truncated, final_state: run.state }
}

/// Sliding-window pairs of consecutive snapshots at the same header within
/// one run of its loop, with variables dead at the header zeroed.
pub fn build_pairs(traces: &[Trace], li: &LoopInfo) -> Vec<ObservationPair> {
    let mut out = Vec::new();
    for t in traces {
        let mut last: BTreeMap<LocId, usize> = BTreeMap::new();
        for (i, s) in t.steps.iter().enumerate() {
            // Returning to a header means every loop nested in it has exited.
            last.retain(|h, _| *h == s.header || !li.body[&s.header].contains(h));
            if let Some(prev) = last.insert(s.header, i) {
                out.push(ObservationPair {
                    x: to_real(&li.project(s.header, &t.steps[prev].values)),
                    y: to_real(&li.project(s.header, &s.values)),
                    j: li.lex_of(s.header),
                });
            }
        }
    }
    out
}

fn to_real(v: &[i64]) -> Vec<f64> {
    v.iter().map(|&x| x as f64).collect()
}
