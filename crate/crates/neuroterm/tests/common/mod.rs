#![allow(dead_code)]

use std::path::PathBuf;
use std::process::{Command, Stdio};

use neuroterm_core::cfg::{LoopPath, DEFAULT_SEGMENT_CAP};
use neuroterm_core::numeric::Dyadic;
use neuroterm_core::{build_cfg, find_loop_headers, loop_paths, parse_program, Program, RankingCandidate};

pub fn suite_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../suite")
}

pub fn suite_file(name: &str) -> PathBuf {
    suite_dir().join(format!("{name}.nt"))
}

pub fn z3_available() -> bool {
    Command::new("z3").arg("-version").stdout(Stdio::null()).stderr(Stdio::null()).status().is_ok_and(|s| s.success())
}

pub fn setup(src: &str) -> (Program, Vec<LoopPath>) {
    let p = parse_program(src).unwrap();
    let g = build_cfg(&p);
    let li = find_loop_headers(&g).unwrap();
    let paths = loop_paths(&g, &li, DEFAULT_SEGMENT_CAP).unwrap();
    (p, paths)
}

/// Integer candidate with `m` groups of `h` units and margin `delta_v`.
pub fn cand(p: &Program, m: usize, h: usize, weights: &[i64], biases: &[i64], delta_v: Dyadic) -> RankingCandidate {
    assert_eq!(weights.len(), m * h * p.num_vars());
    assert_eq!(biases.len(), m * h);
    RankingCandidate {
        n: p.num_vars(),
        m,
        h,
        weights: weights.to_vec(),
        biases: biases.to_vec(),
        k: 0,
        delta_v,
        variable_order: p.variables().map(String::from).collect(),
    }
}

pub struct OracleCase {
    pub name: &'static str,
    pub program: Program,
    pub paths: Vec<LoopPath>,
    pub candidate: RankingCandidate,
    /// Whether the candidate is a valid ranking argument for the loop paths.
    pub valid: bool,
}

#[allow(clippy::too_many_arguments)]
fn case(
    name: &'static str,
    src: &str,
    m: usize,
    h: usize,
    w: &[i64],
    b: &[i64],
    delta: Dyadic,
    valid: bool,
) -> OracleCase {
    let (program, paths) = setup(src);
    let candidate = cand(&program, m, h, w, b, delta);
    OracleCase { name, program, paths, candidate, valid }
}

/// Hand-built programs and candidates, with violations (where any) inside
/// the box `[-20, 20]^n`.
pub fn oracle_cases() -> Vec<OracleCase> {
    let one = Dyadic::integer(1);
    let sor = "fn sor(x, y, z){ while (x > z || y > z) { if (x > z) { x--; } else if (y > z) { y--; } } }";
    let nested = "fn nested(i, k){ var j; while (i < k) { j = 0; while (j < i) { j++; } i++; } }";
    vec![
        case("countdown", "fn f(x){ while (x > 0) { x = x - 1; } }", 1, 1, &[1], &[0], one, true),
        case("countup", "fn f(x){ while (x > 0) { x = x + 1; } }", 1, 1, &[1], &[0], one, false),
        case("sor", sor, 1, 2, &[1, 0, -1, 0, 1, -1], &[0, 0], one, true),
        case("sor_x_only", sor, 1, 2, &[1, 0, -1, 0, 0, 0], &[0, 0], one, false),
        case("nested_lex", nested, 2, 1, &[-1, 1, 0, 1, 0, -1], &[0, 0], one, true),
        case("nested_inner_k", nested, 2, 1, &[-1, 1, 0, 0, 1, -1], &[0, 0], one, false),
        case("step2", "fn f(x){ while (x >= 0) { x = x - 2; } }", 1, 1, &[1], &[1], one, true),
        case("margin_too_big", "fn f(x){ while (x > 0) { x = x - 1; } }", 1, 1, &[1], &[0], Dyadic::new(3, 1), false),
        case("up_to_ten", "fn f(x){ while (x < 10) { x++; } }", 1, 1, &[-1], &[10], one, true),
        case("up_to_ten_short", "fn f(x){ while (x < 10) { x++; } }", 1, 1, &[-1], &[5], one, false),
        case(
            "conjunction_x",
            "fn f(x, y){ while (x > 0 && y > 0) { x = x - 1; y = y + 1; } }",
            1,
            1,
            &[1, 0],
            &[0],
            one,
            true,
        ),
        case(
            "conjunction_y",
            "fn f(x, y){ while (x > 0 && y > 0) { x = x - 1; y = y + 1; } }",
            1,
            1,
            &[0, 1],
            &[0],
            one,
            false,
        ),
        case(
            "inner_havoc",
            "fn f(x){ var y; while (x > 0) { y = x; while (y > 0) { y--; } x--; } }",
            2,
            1,
            &[1, 0, 0, 1],
            &[0, 0],
            one,
            true,
        ),
        case(
            "two_phase_x_only",
            "fn f(x, y){ while (x > 0) { if (y > 0) { y--; } else { x--; } } }",
            1,
            1,
            &[1, 0],
            &[0],
            one,
            false,
        ),
        case(
            "lex_two_phase_weighted",
            "fn f(x, y){ while (x > 0 && y < 20) { if (y > 0) { y--; } else { x--; y = 5; } } }",
            1,
            2,
            &[6, 0, 0, 1],
            &[0, 0],
            one,
            true,
        ),
    ]
}
