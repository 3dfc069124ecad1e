//! Exhaustive checking over a finite box, used as a test oracle.

use alloc::boxed::Box;
use alloc::vec;

use super::{Counterexample, RankingCandidate, Verdict};
use crate::cfg::LoopPath;
use crate::lang::Program;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum BruteForceError {
    #[error("enumeration needs {needed} runs, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("candidate has {got} inputs, program has {expected} variables")]
    Dimension { expected: usize, got: usize },
}

/// Runs every path from every state in `[-bound, bound]^n`, with every
/// havoc also ranging over the box, and reports the first violation.
///
/// `Valid` only means no violation inside the box. Runs that overflow
/// `i64` are skipped.
pub fn brute_force_check(
    p: &Program,
    cand: &RankingCandidate,
    bound: i64,
    paths: &[LoopPath],
    budget: u128,
) -> Result<Verdict, BruteForceError> {
    if cand.n != p.num_vars() {
        return Err(BruteForceError::Dimension { expected: p.num_vars(), got: cand.n });
    }
    let side = 2 * bound as u128 + 1;
    let mut needed: u128 = 0;
    for path in paths {
        let dims = (p.num_vars() + path.havoc_count()) as u32;
        needed = side.checked_pow(dims).and_then(|c| needed.checked_add(c)).unwrap_or(u128::MAX);
    }
    if needed > budget {
        return Err(BruteForceError::BudgetExceeded { needed, budget });
    }
    for path in paths {
        let n = p.num_vars();
        let mut point = vec![-bound; n + path.havoc_count()];
        loop {
            let (state, havocs) = point.split_at(n);
            if let Ok(Some(post)) = path.apply(state, havocs) {
                let before = cand.outputs(&path.project(state));
                let after = cand.outputs(&path.project(&post));
                if cand.lex_witness(&before, &after).is_none() {
                    return Ok(Verdict::Counterexample(Box::new(Counterexample {
                        path: path.id,
                        header: path.header,
                        state: state.to_vec(),
                        havocs: havocs.to_vec(),
                        post,
                        before,
                        after,
                    })));
                }
            }
            if !advance(&mut point, bound) {
                break;
            }
        }
    }
    Ok(Verdict::Valid)
}

/// Odometer step; false once every point has been visited.
fn advance(point: &mut [i64], bound: i64) -> bool {
    for v in point.iter_mut() {
        if *v < bound {
            *v += 1;
            return true;
        }
        *v = -bound;
    }
    false
}
