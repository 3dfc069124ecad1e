//! Live variables, used to hide dead values from ranking functions.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use super::{Action, Cfg};
use crate::lang::{Cond, Expr, VarId};

fn expr_uses(e: &Expr, out: &mut BTreeSet<VarId>) {
    match e {
        Expr::Const(_) => {}
        Expr::Var(v) => {
            out.insert(*v);
        }
        Expr::Neg(inner) => expr_uses(inner, out),
        Expr::Bin(_, a, b) => {
            expr_uses(a, out);
            expr_uses(b, out);
        }
    }
}

fn cond_uses(c: &Cond, out: &mut BTreeSet<VarId>) {
    match c {
        Cond::Cmp(_, a, b) => {
            expr_uses(a, out);
            expr_uses(b, out);
        }
        Cond::And(a, b) | Cond::Or(a, b) => {
            cond_uses(a, out);
            cond_uses(b, out);
        }
        Cond::Not(inner) => cond_uses(inner, out),
    }
}

/// Variables live before `actions`, given those live after them.
pub fn live_before(actions: &[Action], after: &BTreeSet<VarId>) -> BTreeSet<VarId> {
    let mut live = after.clone();
    for a in actions.iter().rev() {
        match a {
            Action::Assume(c) => cond_uses(c, &mut live),
            Action::Assign(v, e) => {
                live.remove(v);
                expr_uses(e, &mut live);
            }
            Action::Havoc(v) => {
                live.remove(v);
            }
        }
    }
    live
}

/// Live variables at every location. Nothing is live at the exits.
pub fn live_variables(g: &Cfg) -> Vec<BTreeSet<VarId>> {
    let mut live = vec![BTreeSet::new(); g.num_locations()];
    let mut changed = true;
    while changed {
        changed = false;
        for e in g.edges.iter().rev() {
            let before = live_before(&e.actions, &live[e.dst.0]);
            if !before.is_subset(&live[e.src.0]) {
                live[e.src.0].extend(before);
                changed = true;
            }
        }
    }
    live
}

/// Copy of `values` with every variable outside `live` set to zero.
pub fn mask_dead(live: &BTreeSet<VarId>, values: &[i64]) -> Vec<i64> {
    values.iter().enumerate().map(|(i, &v)| if live.contains(&VarId(i)) { v } else { 0 }).collect()
}
