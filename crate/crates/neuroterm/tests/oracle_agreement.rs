mod common;

use neuroterm::{check_candidate, SolverConfig};
use neuroterm_core::verifier::brute_force_check;
use neuroterm_core::Verdict;

#[test]
fn smt_and_brute_force_agree() {
    if !common::z3_available() {
        eprintln!("skipped: z3 not found");
        return;
    }
    let cases = common::oracle_cases();
    assert!(cases.len() >= 10);
    for c in cases {
        let brute = brute_force_check(&c.program, &c.candidate, 20, &c.paths, 1 << 32).unwrap();
        let report = check_candidate(&c.program, &c.paths, &c.candidate, &SolverConfig::default()).unwrap();
        assert_eq!(report.bounded, Verdict::Valid, "{}: outputs can be negative", c.name);
        match (&report.verdict, &brute) {
            (Verdict::Valid, Verdict::Valid) => {
                assert!(c.valid, "{}: both oracles accept an invalid candidate", c.name)
            }
            (Verdict::Counterexample(cex), Verdict::Counterexample(_)) => {
                assert!(!c.valid, "{}: both oracles reject a valid candidate", c.name);
                let path = &c.paths[cex.path];
                assert_eq!(path.apply(&cex.state, &cex.havocs).unwrap().as_ref(), Some(&cex.post), "{}", c.name);
                let before = c.candidate.outputs(&path.project(&cex.state));
                let after = c.candidate.outputs(&path.project(&cex.post));
                assert_eq!(c.candidate.lex_witness(&before, &after), None, "{}: not a violation", c.name);
            }
            (smt, bf) => panic!("{}: solver says {smt:?}, brute force says {bf:?}", c.name),
        }
    }
}
