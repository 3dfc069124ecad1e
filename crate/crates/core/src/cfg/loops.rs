use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use super::{Cfg, LocId, LocKind};
use crate::lang::{LoopId, VarId};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CfgError {
    #[error("irreducible control flow: edge {from} -> {to} closes a cycle without a dominating header")]
    Irreducible { from: LocId, to: LocId },
    #[error("segment enumeration exceeded the cap of {cap}")]
    SegmentCap { cap: usize },
}

/// Loop headers with their nesting structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopInfo {
    /// Sorted by (depth, location).
    pub headers: Vec<LocId>,
    pub depth: BTreeMap<LocId, usize>,
    /// Lexicographic component (1-based) trained and checked at each header.
    pub lex_index: BTreeMap<LocId, usize>,
    pub loop_of: BTreeMap<LoopId, LocId>,
    /// Natural loop of each header, header included.
    pub body: BTreeMap<LocId, BTreeSet<LocId>>,
    /// Number of lexicographic components, the maximum nesting depth.
    pub m: usize,
    /// Variables live at each header. Ranking functions only see these.
    pub live: BTreeMap<LocId, BTreeSet<VarId>>,
}

impl LoopInfo {
    pub fn is_header(&self, l: LocId) -> bool {
        self.depth.contains_key(&l)
    }

    pub fn lex_of(&self, l: LocId) -> usize {
        self.lex_index[&l]
    }

    /// Header snapshot with dead variables zeroed.
    pub fn project(&self, h: LocId, values: &[i64]) -> Vec<i64> {
        super::mask_dead(&self.live[&h], values)
    }
}

fn reverse_postorder(g: &Cfg, succ: &[Vec<usize>]) -> Vec<usize> {
    let n = g.num_locations();
    let mut seen = vec![false; n];
    let mut post = Vec::with_capacity(n);
    let mut stack = vec![(g.entry.0, 0usize)];
    seen[g.entry.0] = true;
    while let Some((v, i)) = stack.pop() {
        if i < succ[v].len() {
            stack.push((v, i + 1));
            let w = succ[v][i];
            if !seen[w] {
                seen[w] = true;
                stack.push((w, 0));
            }
        } else {
            post.push(v);
        }
    }
    post.reverse();
    post
}

/// Immediate dominators (Cooper, Harvey and Kennedy's iterative scheme).
fn immediate_dominators(g: &Cfg, rpo: &[usize], preds: &[Vec<usize>]) -> Vec<Option<usize>> {
    let n = g.num_locations();
    let mut order = vec![usize::MAX; n];
    for (i, &v) in rpo.iter().enumerate() {
        order[v] = i;
    }
    let mut idom: Vec<Option<usize>> = vec![None; n];
    idom[g.entry.0] = Some(g.entry.0);
    let intersect = |idom: &[Option<usize>], mut a: usize, mut b: usize| {
        while a != b {
            while order[a] > order[b] {
                a = idom[a].unwrap();
            }
            while order[b] > order[a] {
                b = idom[b].unwrap();
            }
        }
        a
    };
    let mut changed = true;
    while changed {
        changed = false;
        for &v in rpo.iter().skip(1) {
            let mut new = None;
            for &p in &preds[v] {
                if idom[p].is_none() {
                    continue;
                }
                new = Some(match new {
                    None => p,
                    Some(cur) => intersect(&idom, p, cur),
                });
            }
            if new.is_some() && idom[v] != new {
                idom[v] = new;
                changed = true;
            }
        }
    }
    idom
}

fn dominates(idom: &[Option<usize>], entry: usize, a: usize, mut b: usize) -> bool {
    loop {
        if a == b {
            return true;
        }
        if b == entry {
            return false;
        }
        match idom[b] {
            Some(p) => b = p,
            None => return false,
        }
    }
}

/// Finds loop headers as the dominating entries of the graph's cycles.
pub fn find_loop_headers(g: &Cfg) -> Result<LoopInfo, CfgError> {
    let n = g.num_locations();
    let mut succ = vec![Vec::new(); n];
    let mut preds = vec![Vec::new(); n];
    for e in &g.edges {
        succ[e.src.0].push(e.dst.0);
        preds[e.dst.0].push(e.src.0);
    }
    let rpo = reverse_postorder(g, &succ);
    let idom = immediate_dominators(g, &rpo, &preds);
    let reachable: Vec<bool> = idom.iter().map(Option::is_some).collect();

    // An edge into a location still on the DFS stack is retreating; in a
    // reducible graph every retreating edge targets a dominator.
    let mut on_stack = vec![false; n];
    let mut seen = vec![false; n];
    let mut stack = vec![(g.entry.0, 0usize)];
    seen[g.entry.0] = true;
    on_stack[g.entry.0] = true;
    let mut back_edges: Vec<(usize, usize)> = Vec::new();
    while let Some(&(v, i)) = stack.last() {
        if i < succ[v].len() {
            stack.last_mut().unwrap().1 += 1;
            let w = succ[v][i];
            if on_stack[w] {
                if !dominates(&idom, g.entry.0, w, v) {
                    return Err(CfgError::Irreducible { from: LocId(v), to: LocId(w) });
                }
                back_edges.push((v, w));
            } else if !seen[w] {
                seen[w] = true;
                on_stack[w] = true;
                stack.push((w, 0));
            }
        } else {
            on_stack[v] = false;
            stack.pop();
        }
    }
    let mut body: BTreeMap<LocId, BTreeSet<LocId>> = BTreeMap::new();
    for &(u, h) in &back_edges {
        let set = body.entry(LocId(h)).or_insert_with(|| BTreeSet::from([LocId(h)]));
        let mut work = vec![u];
        while let Some(x) = work.pop() {
            if set.insert(LocId(x)) {
                work.extend(preds[x].iter().copied().filter(|&p| reachable[p]));
            }
        }
    }

    let depth: BTreeMap<LocId, usize> =
        body.keys().map(|&h| (h, body.values().filter(|b| b.contains(&h)).count())).collect();
    let mut headers: Vec<LocId> = depth.keys().copied().collect();
    headers.sort_by_key(|h| (depth[h], *h));
    let m = depth.values().copied().max().unwrap_or(0);
    let loop_of = headers
        .iter()
        .filter_map(|&h| match g.kind(h) {
            LocKind::Loop(id) => Some((id, h)),
            _ => None,
        })
        .collect();
    let all_live = super::live_variables(g);
    let live = headers.iter().map(|&h| (h, all_live[h.0].clone())).collect();
    Ok(LoopInfo { headers, lex_index: depth.clone(), depth, loop_of, body, m, live })
}
