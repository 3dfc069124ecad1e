//! Integer ranking candidates, verification conditions and verdicts.
//!
//! A candidate is checked one loop iteration path at a time. For every path
//! the encoder emits an SMT-LIB query asserting that some enabled run of the
//! path fails the lexicographic decrease; `unsat` on every query means the
//! candidate is valid.

mod brute;
mod encode;
mod model;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::cfg::LocId;
use crate::learner::SorNetwork;
use crate::numeric::Dyadic;

pub use brute::{brute_force_check, BruteForceError};
pub use encode::{encode_bounded, encode_vc, EncodeError, VcQuery};
pub use model::{counterexample_from_model, parse_response, ReplayError, SolverAnswer};

/// Largest parameter magnitude a candidate may carry, which keeps every
/// output computation on `i64` states inside `i128`.
pub const MAX_PARAMETER: i64 = 1 << 40;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CandidateError {
    #[error("parameter {index} is not an integer")]
    NonIntegral { index: usize },
    #[error("parameter magnitude exceeds 2^40")]
    TooLarge,
    #[error("margin must be positive")]
    NonPositiveMargin,
    #[error("network has {got} inputs but {expected} variables were given")]
    Dimension { expected: usize, got: usize },
}

/// A sum-of-ReLU ranking function with integer parameters and an exact
/// decrease margin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankingCandidate {
    pub n: usize,
    pub m: usize,
    pub h: usize,
    /// Row-major `(m * h) x n`, same layout as [`SorNetwork`].
    pub weights: Vec<i64>,
    pub biases: Vec<i64>,
    /// Binary digits kept when rounding; informational.
    pub k: u32,
    pub delta_v: Dyadic,
    pub variable_order: Vec<String>,
}

impl RankingCandidate {
    /// Wraps an already rounded and rescaled network.
    pub fn from_network(
        net: &SorNetwork,
        k: u32,
        delta_v: Dyadic,
        variable_order: Vec<String>,
    ) -> Result<RankingCandidate, CandidateError> {
        if variable_order.len() != net.n {
            return Err(CandidateError::Dimension { expected: variable_order.len(), got: net.n });
        }
        if !delta_v.is_positive() {
            return Err(CandidateError::NonPositiveMargin);
        }
        let conv = |(index, v): (usize, &f64)| -> Result<i64, CandidateError> {
            if !v.is_finite() || *v != libm::trunc(*v) {
                return Err(CandidateError::NonIntegral { index });
            }
            if v.abs() > MAX_PARAMETER as f64 {
                return Err(CandidateError::TooLarge);
            }
            Ok(*v as i64)
        };
        Ok(RankingCandidate {
            n: net.n,
            m: net.m,
            h: net.h,
            weights: net.weights.iter().enumerate().map(conv).collect::<Result<_, _>>()?,
            biases: net
                .biases
                .iter()
                .enumerate()
                .map(|(i, b)| conv((net.weights.len() + i, b)))
                .collect::<Result<_, _>>()?,
            k,
            delta_v,
            variable_order,
        })
    }

    pub fn hidden(&self) -> usize {
        self.m * self.h
    }

    pub fn row(&self, u: usize) -> &[i64] {
        &self.weights[u * self.n..(u + 1) * self.n]
    }

    pub fn to_network(&self) -> SorNetwork {
        SorNetwork {
            n: self.n,
            m: self.m,
            h: self.h,
            weights: self.weights.iter().map(|&w| w as f64).collect(),
            biases: self.biases.iter().map(|&b| b as f64).collect(),
        }
    }

    /// Exact outputs on an integer state.
    pub fn outputs(&self, state: &[i64]) -> Vec<i128> {
        assert_eq!(state.len(), self.n, "state dimension");
        let mut out = alloc::vec![0i128; self.m];
        for u in 0..self.hidden() {
            let a: i128 = self.row(u).iter().zip(state).map(|(&w, &x)| w as i128 * x as i128).sum::<i128>()
                + self.biases[u] as i128;
            out[u / self.h] += a.max(0);
        }
        out
    }

    /// First index (1-based) at which `after` lexicographically decreases
    /// from `before`, or `None` if it does not.
    pub fn lex_witness(&self, before: &[i128], after: &[i128]) -> Option<usize> {
        for j in 0..self.m {
            if self.delta_v.decrease_holds(before[j], after[j]) {
                return Some(j + 1);
            }
            if after[j] > before[j] {
                return None;
            }
        }
        None
    }
}

/// A concrete run of one loop path that breaks the decrease condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub path: usize,
    pub header: LocId,
    pub state: Vec<i64>,
    /// Values chosen for the path's havocs, in order.
    pub havocs: Vec<i64>,
    pub post: Vec<i64>,
    pub before: Vec<i128>,
    pub after: Vec<i128>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum UnknownReason {
    Timeout,
    SolverUnknown(String),
    SegmentCap,
}

impl fmt::Display for UnknownReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnknownReason::Timeout => f.write_str("timeout"),
            UnknownReason::SolverUnknown(s) if s.is_empty() => f.write_str("solver-unknown"),
            UnknownReason::SolverUnknown(s) => write!(f, "solver-unknown: {s}"),
            UnknownReason::SegmentCap => f.write_str("segment-cap"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    Counterexample(alloc::boxed::Box<Counterexample>),
    Unknown(UnknownReason),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }
}

/// Aggregates per-query verdicts. A counterexample beats unknown beats
/// valid; ties go to the lowest path id or the smallest reason, so the
/// result does not depend on the order of `vs`.
pub fn combine<I: IntoIterator<Item = Verdict>>(vs: I) -> Verdict {
    let mut best_cex: Option<alloc::boxed::Box<Counterexample>> = None;
    let mut best_unknown: Option<UnknownReason> = None;
    for v in vs {
        match v {
            Verdict::Valid => {}
            Verdict::Counterexample(c) => {
                if best_cex.as_ref().is_none_or(|b| (c.path, &c.state) < (b.path, &b.state)) {
                    best_cex = Some(c);
                }
            }
            Verdict::Unknown(r) => {
                if best_unknown.as_ref().is_none_or(|b| r < *b) {
                    best_unknown = Some(r);
                }
            }
        }
    }
    match (best_cex, best_unknown) {
        (Some(c), _) => Verdict::Counterexample(c),
        (None, Some(r)) => Verdict::Unknown(r),
        (None, None) => Verdict::Valid,
    }
}
