//! Sample, trace, train, round and verify.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use log::{debug, info};
use neuroterm_core::cfg::{CfgError, LoopPath, DEFAULT_SEGMENT_CAP};
use neuroterm_core::lang::ParseError;
use neuroterm_core::learner::{round_parameters, train, TrainError};
use neuroterm_core::numeric::Dyadic;
use neuroterm_core::tracer::{build_pairs, execute_trace, sample_inputs, ConfigError, DEFAULT_MAX_TRACE_LEN};
use neuroterm_core::verifier::{encode_bounded, encode_vc, RankingCandidate, UnknownReason, Verdict};
use neuroterm_core::{
    build_cfg, find_loop_headers, loop_paths, parse_program, Program, SamplerConfig, SorNetwork, Trace, TrainConfig,
    TrainingReport,
};
use rayon::prelude::*;

use crate::solver::{check_candidate, check_queries, QueryResult, SolverConfig, SolverError};

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub sampler: SamplerConfig,
    pub train: TrainConfig,
    pub hidden: usize,
    pub solver: SolverConfig,
    pub round_digits_max: u32,
    /// Training restarts after the first attempt, each with a fresh seed.
    pub retries: usize,
    pub max_trace_len: usize,
    pub segment_cap: usize,
    /// Where `vc_<path>.smt2` files go; `None` writes nothing.
    pub out_dir: Option<PathBuf>,
    /// Drop hidden units and biases from a verified certificate while it
    /// stays valid.
    pub simplify: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            sampler: SamplerConfig::default(),
            train: TrainConfig::default(),
            hidden: 5,
            solver: SolverConfig::default(),
            round_digits_max: 3,
            retries: 3,
            max_trace_len: DEFAULT_MAX_TRACE_LEN,
            segment_cap: DEFAULT_SEGMENT_CAP,
            out_dir: None,
            simplify: true,
        }
    }
}

impl PipelineConfig {
    /// Sets the seed of every random component.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.sampler.seed = seed;
        self.train.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), AnalyzeError> {
        self.sampler.validate()?;
        self.train.validate().map_err(AnalyzeError::Config)?;
        if self.hidden == 0 {
            return Err(AnalyzeError::Config(TrainError::InvalidConfig("hidden must be positive")));
        }
        if self.max_trace_len == 0 {
            return Err(AnalyzeError::Config(TrainError::InvalidConfig("max trace length must be positive")));
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AnalyzeError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("sampler configuration: {0}")]
    Sampler(#[from] ConfigError),
    #[error("configuration: {0}")]
    Config(TrainError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Terminating,
    Unknown,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Outcome::Terminating => "TERMINATING",
            Outcome::Unknown => "UNKNOWN",
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct Timings {
    pub trace: Duration,
    pub train: Duration,
    pub verify: Duration,
}

#[derive(Debug, Clone)]
pub struct RoundResult {
    pub k: u32,
    pub verdict: Verdict,
    pub queries: Vec<QueryResult>,
}

#[derive(Debug, Clone)]
pub struct Attempt {
    pub init_seed: u64,
    pub training: Result<TrainingReport, TrainError>,
    pub rounds: Vec<RoundResult>,
}

#[derive(Debug, Clone)]
pub struct AnalysisReport {
    pub program: String,
    pub outcome: Outcome,
    pub certificate: Option<RankingCandidate>,
    pub loop_free: bool,
    pub m: usize,
    pub paths: usize,
    pub traces: usize,
    pub truncated_traces: usize,
    pub pairs: usize,
    pub attempts: Vec<Attempt>,
    pub timings: Timings,
    pub diagnostic: String,
}

impl AnalysisReport {
    /// Iterations of the successful attempt, or of all attempts otherwise.
    pub fn training_iterations(&self) -> usize {
        self.attempts.iter().filter_map(|a| a.training.as_ref().ok()).map(|t| t.iters_used).sum()
    }
}

/// Result of sampling and tracing, kept for dumps.
pub struct Observations {
    pub traces: Vec<Trace>,
}

pub fn collect_traces(p: &Program, cfg: &PipelineConfig) -> Result<Observations, AnalyzeError> {
    let li = find_loop_headers(&build_cfg(p)).expect("structured programs are reducible");
    let inputs = sample_inputs(&cfg.sampler, p.params.len())?;
    let traces = inputs.par_iter().map(|i| execute_trace(p, &li, i, cfg.max_trace_len)).collect();
    Ok(Observations { traces })
}

pub fn analyze_file(path: &Path, cfg: &PipelineConfig) -> Result<AnalysisReport, AnalyzeError> {
    let src = fs::read_to_string(path).map_err(|source| AnalyzeError::Io { path: path.into(), source })?;
    analyze_source(&src, cfg)
}

pub fn analyze_source(src: &str, cfg: &PipelineConfig) -> Result<AnalysisReport, AnalyzeError> {
    let p = parse_program(src)?;
    analyze(&p, cfg)
}

fn write_scripts(dir: &Path, queries: &[neuroterm_core::verifier::VcQuery], bounded: &str) -> Result<(), AnalyzeError> {
    let io = |source| AnalyzeError::Io { path: dir.into(), source };
    fs::create_dir_all(dir).map_err(io)?;
    for q in queries {
        let file = dir.join(format!("vc_{}.smt2", q.path));
        fs::write(&file, &q.script).map_err(|source| AnalyzeError::Io { path: file, source })?;
    }
    let file = dir.join("vc_bounded.smt2");
    fs::write(&file, bounded).map_err(|source| AnalyzeError::Io { path: file, source })
}

/// Rounds, encodes and checks one trained network at every precision until
/// one verifies.
fn verify_network(
    p: &Program,
    paths: &[LoopPath],
    net: &SorNetwork,
    cfg: &PipelineConfig,
) -> Result<(Vec<RoundResult>, Option<RankingCandidate>), AnalyzeError> {
    let delta = Dyadic::from_f64(cfg.train.delta).expect("validated delta");
    let vars: Vec<String> = p.variables().map(String::from).collect();
    let mut rounds = Vec::new();
    for k in 0..=cfg.round_digits_max {
        let rounded = round_parameters(net, k);
        let cand = match RankingCandidate::from_network(&rounded, k, delta.mul_pow2(k), vars.clone()) {
            Ok(c) => c,
            Err(e) => {
                debug!("k={k}: {e}");
                continue;
            }
        };
        let queries = encode_vc(p, paths, &cand).map_err(SolverError::from)?;
        let bounded = encode_bounded(p, &cand).map_err(SolverError::from)?;
        if let Some(dir) = &cfg.out_dir {
            write_scripts(dir, &queries, &bounded)?;
        }
        let report = check_queries(p, paths, &queries, &bounded, &cand, &cfg.solver)?;
        debug!("k={k}: {:?}", report.verdict);
        let valid = report.verdict.is_valid();
        rounds.push(RoundResult { k, verdict: report.verdict, queries: report.queries });
        if valid {
            return Ok((rounds, Some(cand)));
        }
    }
    Ok((rounds, None))
}

/// Greedily zeroes whole hidden units, then biases, keeping each change
/// only if the candidate still verifies.
pub fn simplify(
    p: &Program,
    paths: &[LoopPath],
    cand: &RankingCandidate,
    solver: &SolverConfig,
) -> Result<RankingCandidate, SolverError> {
    let mut best = cand.clone();
    for u in 0..best.hidden() {
        let mut trial = best.clone();
        trial.weights[u * trial.n..(u + 1) * trial.n].fill(0);
        trial.biases[u] = 0;
        if trial != best && check_candidate(p, paths, &trial, solver)?.verdict.is_valid() {
            best = trial;
        }
    }
    for u in 0..best.hidden() {
        if best.biases[u] != 0 {
            let mut trial = best.clone();
            trial.biases[u] = 0;
            if check_candidate(p, paths, &trial, solver)?.verdict.is_valid() {
                best = trial;
            }
        }
    }
    Ok(best)
}

fn describe(v: &Verdict, p: &Program) -> String {
    match v {
        Verdict::Valid => "valid".into(),
        Verdict::Unknown(r) => format!("unknown ({r})"),
        Verdict::Counterexample(c) => {
            let state: Vec<String> = p.variables().zip(&c.state).map(|(n, v)| format!("{n}={v}")).collect();
            format!(
                "counterexample on path {} from {}: outputs {:?} -> {:?}",
                c.path,
                state.join(" "),
                c.before,
                c.after
            )
        }
    }
}

pub fn analyze(p: &Program, cfg: &PipelineConfig) -> Result<AnalysisReport, AnalyzeError> {
    cfg.validate()?;
    let g = build_cfg(p);
    let li = find_loop_headers(&g).expect("structured programs are reducible");
    let mut report = AnalysisReport {
        program: p.name.clone(),
        outcome: Outcome::Unknown,
        certificate: None,
        loop_free: li.headers.is_empty(),
        m: li.m,
        paths: 0,
        traces: 0,
        truncated_traces: 0,
        pairs: 0,
        attempts: Vec::new(),
        timings: Timings::default(),
        diagnostic: String::new(),
    };
    if report.loop_free {
        report.outcome = Outcome::Terminating;
        report.certificate = Some(RankingCandidate {
            n: p.num_vars(),
            m: 0,
            h: cfg.hidden,
            weights: Vec::new(),
            biases: Vec::new(),
            k: 0,
            delta_v: Dyadic::integer(1),
            variable_order: p.variables().map(String::from).collect(),
        });
        report.diagnostic = "no loops".into();
        return Ok(report);
    }
    let paths = match loop_paths(&g, &li, cfg.segment_cap) {
        Ok(ps) => ps,
        Err(CfgError::SegmentCap { cap }) => {
            report.diagnostic = format!("unknown ({}): more than {cap} loop paths", UnknownReason::SegmentCap);
            return Ok(report);
        }
        Err(e) => {
            report.diagnostic = e.to_string();
            return Ok(report);
        }
    };
    report.paths = paths.len();

    let t0 = Instant::now();
    let obs = collect_traces(p, cfg)?;
    let pairs = build_pairs(&obs.traces, &li);
    report.timings.trace = t0.elapsed();
    report.traces = obs.traces.len();
    report.truncated_traces = obs.traces.iter().filter(|t| t.truncated).count();
    report.pairs = pairs.len();
    info!("{}: {} traces, {} pairs, {} loop paths", p.name, report.traces, report.pairs, report.paths);
    if pairs.is_empty() {
        report.diagnostic = "no loop iterations observed".into();
        return Ok(report);
    }

    let mut last = String::new();
    for attempt in 0..=cfg.retries {
        let init_seed = cfg.train.seed.wrapping_add(attempt as u64);
        let net0 = SorNetwork::init(p.num_vars(), li.m, cfg.hidden, cfg.train.init_scale, init_seed);
        let t = Instant::now();
        let trained = train(&net0, &pairs, &cfg.train);
        report.timings.train += t.elapsed();
        let (net, training) = match trained {
            Ok((net, tr)) => (net, tr),
            Err(e) => {
                last = format!("training failed: {e}");
                report.attempts.push(Attempt { init_seed, training: Err(e), rounds: Vec::new() });
                continue;
            }
        };
        info!(
            "{}: attempt {attempt}: loss {:.4} after {} iterations (converged: {})",
            p.name, training.final_loss, training.iters_used, training.converged
        );
        let t = Instant::now();
        let verified = verify_network(p, &paths, &net, cfg);
        report.timings.verify += t.elapsed();
        let (rounds, cert) = verified?;
        if let Some(r) = rounds.last() {
            last = describe(&r.verdict, p);
        }
        report.attempts.push(Attempt { init_seed, training: Ok(training), rounds });
        if let Some(mut c) = cert {
            if cfg.simplify {
                let t = Instant::now();
                c = simplify(p, &paths, &c, &cfg.solver)?;
                if let Some(dir) = &cfg.out_dir {
                    let queries = encode_vc(p, &paths, &c).map_err(SolverError::from)?;
                    write_scripts(dir, &queries, &encode_bounded(p, &c).map_err(SolverError::from)?)?;
                }
                report.timings.verify += t.elapsed();
            }
            report.outcome = Outcome::Terminating;
            report.certificate = Some(c);
            report.diagnostic = "valid".into();
            return Ok(report);
        }
    }
    report.diagnostic = last;
    Ok(report)
}
