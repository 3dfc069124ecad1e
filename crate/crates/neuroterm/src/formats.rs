//! Text formats: trace dumps, certificates and Graphviz CFGs.

use std::fmt::Write as _;
use std::io::{self, Write};

use neuroterm_core::cfg::LocKind;
use neuroterm_core::numeric::Dyadic;
use neuroterm_core::verifier::RankingCandidate;
use neuroterm_core::{Cfg, Program, Trace};

/// CSV with one row per header snapshot.
pub fn write_traces(w: &mut impl Write, p: &Program, traces: &[Trace]) -> io::Result<()> {
    write!(w, "trace_id,step,header_id")?;
    for v in p.variables() {
        write!(w, ",{v}")?;
    }
    writeln!(w)?;
    for (t, trace) in traces.iter().enumerate() {
        for (s, snap) in trace.steps.iter().enumerate() {
            write!(w, "{t},{s},{}", snap.header.0)?;
            for v in &snap.values {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
    }
    Ok(())
}

/// Certificate text: a `n m h k delta_v` line, then one line per hidden
/// unit with its 1-based output group, weights and bias. Weights follow the
/// program's variable order (parameters, then locals).
pub fn certificate_text(c: &RankingCandidate) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} {} {} {} {}", c.n, c.m, c.h, c.k, c.delta_v);
    for u in 0..c.hidden() {
        let _ = write!(s, "{}", u / c.h + 1);
        for w in c.row(u) {
            let _ = write!(s, " {w}");
        }
        let _ = writeln!(s, " {}", c.biases[u]);
    }
    s
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("certificate line {line}: {msg}")]
pub struct CertificateError {
    pub line: usize,
    pub msg: String,
}

/// Parses a certificate whose weights are laid out over `variable_order`.
pub fn parse_certificate(text: &str, variable_order: &[String]) -> Result<RankingCandidate, CertificateError> {
    let err = |line: usize, msg: &str| CertificateError { line, msg: msg.into() };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    let (ln, head) = lines.next().ok_or_else(|| err(1, "empty certificate"))?;
    let f: Vec<&str> = head.split_whitespace().collect();
    if f.len() != 5 {
        return Err(err(ln, "expected `n m h k delta_v`"));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| err(ln, "bad dimension"));
    let (n, m, h) = (num(f[0])?, num(f[1])?, num(f[2])?);
    let k = f[3].parse::<u32>().map_err(|_| err(ln, "bad digit count"))?;
    let delta_v = Dyadic::parse(f[4]).ok_or_else(|| err(ln, "bad margin"))?;
    if !delta_v.is_positive() {
        return Err(err(ln, "margin must be positive"));
    }
    if variable_order.len() != n {
        return Err(err(ln, &format!("n is {n} but the program has {} variables", variable_order.len())));
    }
    let mut weights = Vec::with_capacity(m * h * n);
    let mut biases = Vec::with_capacity(m * h);
    for u in 0..m * h {
        let (ln, row) = lines.next().ok_or_else(|| err(0, "missing hidden unit lines"))?;
        let vals: Vec<i64> =
            row.split_whitespace().map(|t| t.parse().map_err(|_| err(ln, "bad integer"))).collect::<Result<_, _>>()?;
        if vals.len() != n + 2 {
            return Err(err(ln, "expected group, n weights and a bias"));
        }
        if vals[0] != (u / h + 1) as i64 {
            return Err(err(ln, "hidden units must be listed group by group"));
        }
        weights.extend_from_slice(&vals[1..=n]);
        biases.push(vals[n + 1]);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(err(ln, "trailing content"));
    }
    Ok(RankingCandidate { n, m, h, weights, biases, k, delta_v, variable_order: variable_order.to_vec() })
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering with one edge label line per action.
pub fn cfg_dot(p: &Program, g: &Cfg) -> String {
    let mut s = String::from("digraph cfg {\n  node [shape=box];\n");
    for (i, kind) in g.kinds.iter().enumerate() {
        let label = match kind {
            LocKind::Entry => "entry".to_string(),
            LocKind::Exit => "exit".to_string(),
            LocKind::Loop(id) => format!("loop {}", id.0),
            LocKind::Join => "join".to_string(),
        };
        let _ = writeln!(s, "  L{i} [label=\"L{i} {label}\"];");
    }
    for e in &g.edges {
        let label: Vec<String> = e.actions.iter().map(|a| escape(&a.render(p))).collect();
        let _ = writeln!(s, "  {} -> {} [label=\"{}\"];", e.src, e.dst, label.join("\\n"));
    }
    s.push_str("}\n");
    s
}
