use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;

use neuroterm_core::cfg::DEFAULT_SEGMENT_CAP;
use neuroterm_core::tracer::{build_pairs, execute_trace, sample_inputs, DEFAULT_MAX_TRACE_LEN};
use neuroterm_core::{build_cfg, find_loop_headers, header_segments, parse_program, Program, SamplerConfig, Strategy};
use proptest::prelude::*;

fn suite() -> Vec<(String, Program)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../suite");
    let mut out: Vec<(String, Program)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "nt"))
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            let prog = parse_program(&fs::read_to_string(&p).unwrap()).unwrap();
            (name, prog)
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

fn small_inputs(n: usize, seed: u64) -> Vec<Vec<i64>> {
    let cfg = SamplerConfig { strategy: Strategy::Uniform, count: 200, seed, uniform_range: 12, ..Default::default() };
    sample_inputs(&cfg, n).unwrap()
}

#[test]
fn traces_replay_through_exactly_one_segment() {
    for (name, p) in suite() {
        let g = build_cfg(&p);
        let li = find_loop_headers(&g).unwrap();
        let segs = header_segments(&g, &li, DEFAULT_SEGMENT_CAP).unwrap();
        let mut checked = 0;
        for input in small_inputs(p.params.len(), 7) {
            let t = execute_trace(&p, &li, &input, 500);
            for w in t.steps.windows(2) {
                let matching: Vec<_> = segs
                    .iter()
                    .filter(|s| s.from == w[0].header && s.to == w[1].header && !s.to_exit)
                    .filter(|s| s.apply(&w[0].values).ok().flatten().as_ref() == Some(&w[1].values))
                    .collect();
                assert_eq!(matching.len(), 1, "{name}: {:?} -> {:?}", w[0], w[1]);
                checked += 1;
            }
            if let (false, Some(last)) = (t.truncated, t.steps.last()) {
                let exits = segs
                    .iter()
                    .filter(|s| s.from == last.header && s.to_exit)
                    .filter(|s| s.apply(&last.values).ok().flatten().as_ref() == Some(&t.final_state))
                    .count();
                assert_eq!(exits, 1, "{name}: exit from {last:?}");
            }
        }
        if !li.headers.is_empty() {
            assert!(checked > 0, "{name}: no transitions observed");
        }
    }
}

/// Every cycle meets a header iff the graph without headers is acyclic.
fn acyclic_without(p: &Program) -> bool {
    let g = build_cfg(p);
    let li = find_loop_headers(&g).unwrap();
    let n = g.num_locations();
    let keep: Vec<bool> = (0..n).map(|i| !li.headers.iter().any(|h| h.0 == i)).collect();
    let mut indeg = vec![0usize; n];
    let edges: Vec<(usize, usize)> =
        g.edges.iter().map(|e| (e.src.0, e.dst.0)).filter(|&(s, d)| keep[s] && keep[d]).collect();
    for &(_, d) in &edges {
        indeg[d] += 1;
    }
    let mut ready: Vec<usize> = (0..n).filter(|&i| keep[i] && indeg[i] == 0).collect();
    let mut seen = 0;
    while let Some(v) = ready.pop() {
        seen += 1;
        for &(s, d) in &edges {
            if s == v {
                indeg[d] -= 1;
                if indeg[d] == 0 {
                    ready.push(d);
                }
            }
        }
    }
    seen == keep.iter().filter(|&&k| k).count()
}

#[test]
fn every_cycle_has_a_header() {
    for (name, p) in suite() {
        assert!(acyclic_without(&p), "{name}");
    }
    let deep = parse_program(
        "fn f(a, b){ var c; while (a > 0) { if (b > 0) { while (c < b) { c++; } } else { while (b < 0) { b++; while (c > 0) { c--; } } } a--; } }",
    )
    .unwrap();
    assert!(acyclic_without(&deep));
}

#[test]
fn nested_counting_depths() {
    let p = suite().into_iter().find(|(n, _)| n == "nested_counting").unwrap().1;
    let li = find_loop_headers(&build_cfg(&p)).unwrap();
    assert_eq!(li.m, 2);
    let idx: BTreeSet<usize> = li.headers.iter().map(|h| li.lex_of(*h)).collect();
    assert_eq!(idx, BTreeSet::from([1, 2]));
}

#[test]
fn triple_nesting_and_siblings() {
    let p = parse_program(
        "fn f(a){ var i, j, k; while (i < a) { j = 0; while (j < i) { k = 0; while (k < j) { k++; } j++; } \
         while (k > 0) { k--; } i++; } }",
    )
    .unwrap();
    let li = find_loop_headers(&build_cfg(&p)).unwrap();
    assert_eq!(li.m, 3);
    let depths: Vec<usize> = li.headers.iter().map(|h| li.depth[h]).collect();
    assert_eq!(depths, [1, 2, 2, 3]);
    for h in &li.headers {
        assert_eq!(li.lex_of(*h), li.depth[h]);
    }
}

#[test]
fn pairs_are_adjacent_visits() {
    for (name, p) in suite() {
        let li = find_loop_headers(&build_cfg(&p)).unwrap();
        for input in small_inputs(p.params.len(), 3).into_iter().take(40) {
            let t = execute_trace(&p, &li, &input, 300);
            let pairs = build_pairs(std::slice::from_ref(&t), &li);
            // Recompute the expected pairs directly from the snapshot list.
            let mut expected = Vec::new();
            for (i, s) in t.steps.iter().enumerate() {
                let prev = t.steps[..i].iter().rposition(|q| {
                    q.header == s.header || (li.body[&q.header].contains(&s.header) && q.header != s.header)
                });
                if let Some(k) = prev.filter(|&k| t.steps[k].header == s.header) {
                    let x: Vec<f64> = li.project(s.header, &t.steps[k].values).iter().map(|&v| v as f64).collect();
                    let y: Vec<f64> = li.project(s.header, &s.values).iter().map(|&v| v as f64).collect();
                    expected.push((x, y, li.lex_of(s.header)));
                }
            }
            let got: Vec<_> = pairs.into_iter().map(|q| (q.x, q.y, q.j)).collect();
            assert_eq!(got, expected, "{name} on {input:?}");
        }
    }
}

#[test]
fn countdown_pairs() {
    let p = parse_program("fn f(x){ while (x > 0) { x--; } }").unwrap();
    let li = find_loop_headers(&build_cfg(&p)).unwrap();
    let pairs = build_pairs(&[execute_trace(&p, &li, &[3], 100)], &li);
    let got: Vec<_> = pairs.iter().map(|q| (q.x[0], q.y[0], q.j)).collect();
    assert_eq!(got, [(3.0, 2.0, 1), (2.0, 1.0, 1), (1.0, 0.0, 1)]);
    let single = build_pairs(&[execute_trace(&p, &li, &[0], 100)], &li);
    assert!(single.is_empty());
}

#[test]
fn nested_counting_outer_adjacency() {
    let p = parse_program("fn nested(i, k){ var j; while (i < k) { j = 0; while (j < i) { j++; } i++; } }").unwrap();
    let li = find_loop_headers(&build_cfg(&p)).unwrap();
    let pairs = build_pairs(&[execute_trace(&p, &li, &[0, 2], 100)], &li);
    let outer: Vec<_> = pairs.iter().filter(|q| q.j == 1).map(|q| (q.x.clone(), q.y.clone())).collect();
    assert_eq!(outer, [(vec![0.0, 2.0, 0.0], vec![1.0, 2.0, 0.0]), (vec![1.0, 2.0, 0.0], vec![2.0, 2.0, 0.0])]);
}

#[test]
fn tracing_is_deterministic() {
    for (_, p) in suite() {
        let li = find_loop_headers(&build_cfg(&p)).unwrap();
        let cfg = SamplerConfig { count: 100, seed: 42, ..Default::default() };
        let a = sample_inputs(&cfg, p.params.len()).unwrap();
        let b = sample_inputs(&cfg, p.params.len()).unwrap();
        assert_eq!(a, b);
        let ta: Vec<_> = a.iter().map(|i| execute_trace(&p, &li, i, DEFAULT_MAX_TRACE_LEN)).collect();
        let tb: Vec<_> = b.iter().map(|i| execute_trace(&p, &li, i, DEFAULT_MAX_TRACE_LEN)).collect();
        assert_eq!(ta, tb);
    }
}

proptest! {
    #[test]
    fn traces_respect_the_cap(x in -5000i64..5000, y in -5000i64..5000, cap in 1usize..200) {
        let p = parse_program("fn f(x, y){ while (x != 0) { if (x > 0) { x--; } else { x++; } y = y + x; } }").unwrap();
        let li = find_loop_headers(&build_cfg(&p)).unwrap();
        let t = execute_trace(&p, &li, &[x, y], cap);
        prop_assert!(t.steps.len() <= cap);
        prop_assert_eq!(t.truncated, x.unsigned_abs() as usize + 1 > cap);
    }

    #[test]
    fn overflow_truncates(x in (i64::MAX - 50)..=i64::MAX) {
        let p = parse_program("fn f(x){ while (x > 0) { x++; } }").unwrap();
        let li = find_loop_headers(&build_cfg(&p)).unwrap();
        let t = execute_trace(&p, &li, &[x], 1000);
        prop_assert!(t.truncated);
        prop_assert_eq!(t.steps.last().unwrap().values[0], i64::MAX);
    }
}
