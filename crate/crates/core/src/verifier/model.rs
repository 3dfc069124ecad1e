//! Reading solver answers and turning models into counterexamples.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{Counterexample, RankingCandidate, VcQuery};
use crate::cfg::LoopPath;
use crate::interp::Overflow;
use crate::lang::Program;
use crate::sexp::{parse_all, Sexp};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolverAnswer {
    /// Integer model values by constant name.
    Sat(BTreeMap<String, i128>),
    Unsat,
    /// `unknown`, or output that could not be read, with the raw text.
    Unknown(String),
}

/// Interprets the stdout of a `(check-sat)` run, optionally followed by
/// `(get-model)`.
///
/// `unsat` counts only when it is the whole answer; trailing output such as
/// an error makes the answer unknown.
pub fn parse_response(stdout: &str) -> SolverAnswer {
    let unknown = || SolverAnswer::Unknown(stdout.trim().into());
    let Ok(items) = parse_all(stdout) else {
        return unknown();
    };
    match (items.first().and_then(Sexp::as_atom), items.len()) {
        (Some("unsat"), 1) => SolverAnswer::Unsat,
        (Some("sat"), 1) => SolverAnswer::Sat(BTreeMap::new()),
        (Some("sat"), 2) => {
            let Some(defs) = items[1].as_list() else {
                return unknown();
            };
            let mut model = BTreeMap::new();
            for d in defs {
                if let Some([Sexp::Atom(kw), Sexp::Atom(name), _, _, value]) = d.as_list() {
                    if kw == "define-fun" {
                        if let Some(v) = value.as_int() {
                            model.insert(name.clone(), v);
                        }
                    }
                }
            }
            SolverAnswer::Sat(model)
        }
        _ => unknown(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error("model value for `{0}` does not fit in i64")]
    OutOfRange(String),
    #[error("model state does not enable path {0}")]
    NotEnabled(usize),
    #[error("replaying the model overflowed")]
    Overflow,
    #[error("model state decreases the candidate on replay")]
    NotAViolation,
}

impl From<Overflow> for ReplayError {
    fn from(_: Overflow) -> ReplayError {
        ReplayError::Overflow
    }
}

/// Builds a counterexample from a `sat` model and replays it concretely.
///
/// Constants the solver left out of the model are irrelevant to the query
/// and default to 0.
pub fn counterexample_from_model(
    p: &Program,
    path: &LoopPath,
    query: &VcQuery,
    cand: &RankingCandidate,
    model: &BTreeMap<String, i128>,
) -> Result<Box<Counterexample>, ReplayError> {
    let get = |name: &str| -> Result<i64, ReplayError> {
        let v = model.get(name).copied().unwrap_or(0);
        i64::try_from(v).map_err(|_| ReplayError::OutOfRange(name.to_string()))
    };
    let state: Vec<i64> = p.variables().map(|v| get(&alloc::format!("{v}_0"))).collect::<Result<_, _>>()?;
    let havocs: Vec<i64> = query.havocs.iter().map(|h| get(h)).collect::<Result<_, _>>()?;
    let post = path.apply(&state, &havocs)?.ok_or(ReplayError::NotEnabled(path.id))?;
    let before = cand.outputs(&path.project(&state));
    let after = cand.outputs(&path.project(&post));
    if cand.lex_witness(&before, &after).is_some() {
        return Err(ReplayError::NotAViolation);
    }
    Ok(Box::new(Counterexample { path: path.id, header: path.header, state, havocs, post, before, after }))
}
