//! Running an external SMT solver and checking candidates with it.

use std::io::{Read, Write};
use std::process::{Command, ExitStatus, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use neuroterm_core::cfg::LoopPath;
use neuroterm_core::verifier::{
    combine, counterexample_from_model, encode_bounded, encode_vc, parse_response, EncodeError, RankingCandidate,
    SolverAnswer, UnknownReason, VcQuery, Verdict,
};
use neuroterm_core::Program;
use rayon::prelude::*;

pub const DEFAULT_SOLVER: &str = "z3 -in";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverConfig {
    /// Program and arguments; the script is written to its stdin.
    pub command: Vec<String>,
    pub timeout: Duration,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { command: split_command(DEFAULT_SOLVER), timeout: DEFAULT_TIMEOUT }
    }
}

pub fn split_command(s: &str) -> Vec<String> {
    s.split_whitespace().map(String::from).collect()
}

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("solver `{0}` not found")]
    Missing(String),
    #[error("empty solver command")]
    EmptyCommand,
    #[error("solver I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Encode(#[from] EncodeError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RawOutcome {
    Finished { status: ExitStatus, stdout: String, stderr: String },
    Timeout,
}

/// Runs the solver on one script, killing it after the timeout.
pub fn run_solver(cfg: &SolverConfig, script: &str) -> Result<RawOutcome, SolverError> {
    let (prog, args) = cfg.command.split_first().ok_or(SolverError::EmptyCommand)?;
    let mut cmd = Command::new(prog);
    cmd.args(args).stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped());
    // Own process group, so a timeout also reaches processes a wrapper
    // script started.
    #[cfg(unix)]
    std::os::unix::process::CommandExt::process_group(&mut cmd, 0);
    let mut child = cmd.spawn().map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => SolverError::Missing(prog.clone()),
        _ => SolverError::Io(e),
    })?;

    let mut stdin = child.stdin.take().expect("piped stdin");
    let script = script.to_owned();
    let writer = thread::spawn(move || {
        // A solver that exits early closes the pipe; that is not our error.
        let _ = stdin.write_all(script.as_bytes());
    });
    let mut out = child.stdout.take().expect("piped stdout");
    let mut err = child.stderr.take().expect("piped stderr");
    let out_reader = thread::spawn(move || {
        let mut s = String::new();
        let _ = out.read_to_string(&mut s);
        s
    });
    let err_reader = thread::spawn(move || {
        let mut s = String::new();
        let _ = err.read_to_string(&mut s);
        s
    });

    let start = Instant::now();
    let status = loop {
        if let Some(status) = child.try_wait()? {
            break status;
        }
        if start.elapsed() >= cfg.timeout {
            kill_tree(&mut child);
            let _ = child.wait();
            // Readers finish on their own once every holder of the pipes
            // is gone; don't wait for stragglers.
            return Ok(RawOutcome::Timeout);
        }
        thread::sleep(Duration::from_millis(2));
    };
    let _ = writer.join();
    let stdout = out_reader.join().unwrap_or_default();
    let stderr = err_reader.join().unwrap_or_default();
    Ok(RawOutcome::Finished { status, stdout, stderr })
}

fn kill_tree(child: &mut std::process::Child) {
    #[cfg(unix)]
    if let Ok(pid) = libc::pid_t::try_from(child.id()) {
        // SAFETY: plain syscall on the group created at spawn.
        unsafe {
            libc::killpg(pid, libc::SIGKILL);
        }
    }
    let _ = child.kill();
}

/// Maps a raw run to a solver answer; `None` on timeout.
///
/// A failed exit status or unreadable output is `Unknown` carrying the
/// captured output, whatever was printed before.
pub fn interpret(raw: &RawOutcome) -> Option<SolverAnswer> {
    match raw {
        RawOutcome::Timeout => None,
        RawOutcome::Finished { status, stdout, stderr } => {
            let answer = parse_response(stdout);
            if status.success() && !matches!(answer, SolverAnswer::Unknown(_)) {
                return Some(answer);
            }
            let text = format!("{} {} ({status})", stdout.trim(), stderr.trim());
            Some(SolverAnswer::Unknown(text.split_whitespace().collect::<Vec<_>>().join(" ")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryResult {
    pub path: usize,
    pub verdict: Verdict,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub verdict: Verdict,
    pub queries: Vec<QueryResult>,
    /// Result of the output-non-negativity sanity query.
    pub bounded: Verdict,
}

fn check_query(
    p: &Program,
    path: &LoopPath,
    q: &VcQuery,
    cand: &RankingCandidate,
    solver: &SolverConfig,
) -> Result<QueryResult, SolverError> {
    let start = Instant::now();
    let unknown = |text: String| Verdict::Unknown(UnknownReason::SolverUnknown(text));
    let verdict = match interpret(&run_solver(solver, &q.script)?) {
        None => Verdict::Unknown(UnknownReason::Timeout),
        Some(SolverAnswer::Unsat) => Verdict::Valid,
        Some(SolverAnswer::Unknown(text)) => unknown(text),
        // Ask again for the model; the first run has no `(get-model)` so
        // that an `unsat` answer is never followed by an error.
        Some(SolverAnswer::Sat(_)) => match interpret(&run_solver(solver, &format!("{}(get-model)\n", q.script))?) {
            None => Verdict::Unknown(UnknownReason::Timeout),
            Some(SolverAnswer::Sat(model)) => match counterexample_from_model(p, path, q, cand, &model) {
                Ok(c) => Verdict::Counterexample(c),
                Err(e) => unknown(format!("model replay failed: {e}")),
            },
            Some(SolverAnswer::Unsat) => unknown("solver changed its answer when asked for a model".into()),
            Some(SolverAnswer::Unknown(text)) => unknown(text),
        },
    };
    Ok(QueryResult { path: q.path, verdict, elapsed: start.elapsed() })
}

/// Checks already encoded queries in parallel.
pub fn check_queries(
    p: &Program,
    paths: &[LoopPath],
    queries: &[VcQuery],
    bounded_script: &str,
    cand: &RankingCandidate,
    solver: &SolverConfig,
) -> Result<CheckReport, SolverError> {
    let results: Vec<QueryResult> =
        queries.par_iter().map(|q| check_query(p, &paths[q.path], q, cand, solver)).collect::<Result<_, _>>()?;
    let bounded = match interpret(&run_solver(solver, bounded_script)?) {
        None => Verdict::Unknown(UnknownReason::Timeout),
        Some(SolverAnswer::Unsat) => Verdict::Valid,
        Some(SolverAnswer::Sat(_)) => {
            Verdict::Unknown(UnknownReason::SolverUnknown("network output can be negative".into()))
        }
        Some(SolverAnswer::Unknown(text)) => Verdict::Unknown(UnknownReason::SolverUnknown(text)),
    };
    let verdict = combine(results.iter().map(|r| r.verdict.clone()).chain([bounded.clone()]));
    Ok(CheckReport { verdict, queries: results, bounded })
}

/// Encodes and checks a candidate against every loop path.
pub fn check_candidate(
    p: &Program,
    paths: &[LoopPath],
    cand: &RankingCandidate,
    solver: &SolverConfig,
) -> Result<CheckReport, SolverError> {
    let queries = encode_vc(p, paths, cand)?;
    let bounded = encode_bounded(p, cand)?;
    check_queries(p, paths, &queries, &bounded, cand, solver)
}
