use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use neuroterm::bench::bench;
use neuroterm::config::{apply_config, CONFIG_FILE, SOLVER_ENV};
use neuroterm::formats::{certificate_text, cfg_dot, parse_certificate, write_traces};
use neuroterm::pipeline::collect_traces;
use neuroterm::solver::split_command;
use neuroterm::{analyze, check_candidate, AnalyzeError, Outcome, PipelineConfig, SolverError};
use neuroterm_core::cfg::DEFAULT_SEGMENT_CAP;
use neuroterm_core::verifier::Verdict;
use neuroterm_core::{build_cfg, find_loop_headers, loop_paths, parse_program, Program, Strategy};

const EXIT_UNKNOWN: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_PARSE: u8 = 4;
const EXIT_SOLVER_MISSING: u8 = 5;
const EXIT_USAGE: u8 = 6;

#[derive(Parser)]
#[command(name = "neuroterm", version, about = "Learn and verify neural ranking functions for termination")]
struct Cli {
    /// Configuration file (default: ./neuroterm.cfg if present).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Analyze one program.
    Analyze {
        /// Program to analyze.
        file: PathBuf,
        #[command(flatten)]
        opts: Opts,
        /// Write the sampled traces as CSV.
        #[arg(long, value_name = "P")]
        dump_traces: Option<PathBuf>,
        /// Write the verified certificate.
        #[arg(long, value_name = "P")]
        dump_model: Option<PathBuf>,
        /// Write the control-flow graph as `cfg.dot` in the output directory.
        #[arg(long)]
        dump_cfg: bool,
    },
    /// Analyze every `.nt` file in a directory for several seeds.
    Bench {
        /// Directory of `.nt` programs.
        dir: PathBuf,
        #[command(flatten)]
        opts: Opts,
        /// Comma-separated seeds.
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4")]
        seeds: Vec<u64>,
        /// Run hidden widths 1 to 10 instead of a single width.
        #[arg(long)]
        hidden_sweep: bool,
        /// Write per-run results as CSV.
        #[arg(long, value_name = "P")]
        csv: Option<PathBuf>,
    },
    /// Re-verify a stored certificate against a program.
    Check {
        /// Program the certificate belongs to.
        file: PathBuf,
        /// Certificate file written by `analyze --dump-model`.
        #[arg(long, value_name = "P")]
        model: PathBuf,
        /// SMT solver command line.
        #[arg(long, value_name = "CMD")]
        solver: Option<String>,
        /// Per-query solver timeout in seconds.
        #[arg(long, value_name = "S")]
        timeout: Option<f64>,
    },
}

#[derive(Args)]
struct Opts {
    /// Number of sampled inputs.
    #[arg(long, value_name = "N")]
    samples: Option<usize>,
    /// Input sampler: uniform, gaussian or pas.
    #[arg(long, value_parser = clap::value_parser!(Strategy))]
    strategy: Option<Strategy>,
    /// Hidden units per ranking component.
    #[arg(long, value_name = "H")]
    hidden: Option<usize>,
    /// Required decrease between consecutive loop visits.
    #[arg(long, value_name = "D")]
    delta: Option<f64>,
    /// Learning rate.
    #[arg(long, value_name = "R")]
    lr: Option<f64>,
    /// Seed for sampling and training.
    #[arg(long, value_name = "S")]
    seed: Option<u64>,
    /// Longest trace kept per input.
    #[arg(long, value_name = "L")]
    max_trace_len: Option<usize>,
    /// Training iteration limit.
    #[arg(long, value_name = "N")]
    max_iters: Option<usize>,
    /// SMT solver command line.
    #[arg(long, value_name = "CMD")]
    solver: Option<String>,
    /// Per-query solver timeout in seconds.
    #[arg(long, value_name = "S")]
    timeout: Option<f64>,
    /// Largest number of binary digits tried when rounding.
    #[arg(long, value_name = "K")]
    round_digits: Option<u32>,
    /// Extra training runs after a failed verification.
    #[arg(long, value_name = "N")]
    retries: Option<usize>,
    /// Directory for verification scripts.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Keep the verified certificate as trained instead of pruning it.
    #[arg(long)]
    no_simplify: bool,
}

enum Failure {
    Usage(String),
    Io(String),
    Analyze(AnalyzeError),
}

impl From<AnalyzeError> for Failure {
    fn from(e: AnalyzeError) -> Self {
        Failure::Analyze(e)
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn timeout(secs: f64) -> Result<Duration, Failure> {
    Duration::try_from_secs_f64(secs).map_err(|_| Failure::Usage(format!("invalid timeout {secs}")))
}

/// Defaults, then the config file, then the environment, then flags.
fn base_config(cli_config: Option<&Path>) -> Result<PipelineConfig, Failure> {
    let mut cfg = PipelineConfig { out_dir: Some(PathBuf::from("out")), ..PipelineConfig::default() };
    let path = cli_config.map(Path::to_path_buf).or_else(|| {
        let p = PathBuf::from(CONFIG_FILE);
        p.is_file().then_some(p)
    });
    if let Some(path) = path {
        let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
        apply_config(&mut cfg, &text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    }
    if let Ok(cmd) = std::env::var(SOLVER_ENV) {
        if !cmd.trim().is_empty() {
            cfg.solver.command = split_command(&cmd);
        }
    }
    Ok(cfg)
}

fn apply_opts(cfg: &mut PipelineConfig, o: &Opts) -> Result<(), Failure> {
    if let Some(v) = o.samples {
        cfg.sampler.count = v;
    }
    if let Some(v) = o.strategy {
        cfg.sampler.strategy = v;
    }
    if let Some(v) = o.hidden {
        cfg.hidden = v;
    }
    if let Some(v) = o.delta {
        cfg.train.delta = v;
    }
    if let Some(v) = o.lr {
        cfg.train.lr = v;
    }
    if let Some(v) = o.seed {
        cfg.sampler.seed = v;
        cfg.train.seed = v;
    }
    if let Some(v) = o.max_trace_len {
        cfg.max_trace_len = v;
    }
    if let Some(v) = o.max_iters {
        cfg.train.max_iters = v;
    }
    if let Some(v) = &o.solver {
        cfg.solver.command = split_command(v);
    }
    if let Some(v) = o.timeout {
        cfg.solver.timeout = timeout(v)?;
    }
    if let Some(v) = o.round_digits {
        cfg.round_digits_max = v;
    }
    if let Some(v) = o.retries {
        cfg.retries = v;
    }
    if let Some(v) = &o.out {
        cfg.out_dir = Some(v.clone());
    }
    if o.no_simplify {
        cfg.simplify = false;
    }
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))
}

fn load_program(path: &Path) -> Result<Program, Failure> {
    let src = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_program(&src).map_err(|e| Failure::Analyze(AnalyzeError::Parse(e)))
}

fn run_analyze(
    cfg: &PipelineConfig,
    file: &Path,
    dump_traces: Option<&Path>,
    dump_model: Option<&Path>,
    dump_cfg: bool,
) -> Result<u8, Failure> {
    let p = load_program(file)?;
    if dump_cfg {
        let dir = cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
        fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        let path = dir.join("cfg.dot");
        fs::write(&path, cfg_dot(&p, &build_cfg(&p))).map_err(|e| io_err(&path, e))?;
    }
    if let Some(path) = dump_traces {
        let obs = collect_traces(&p, cfg)?;
        let mut f = std::io::BufWriter::new(fs::File::create(path).map_err(|e| io_err(path, e))?);
        write_traces(&mut f, &p, &obs.traces).map_err(|e| io_err(path, e))?;
    }
    let report = analyze(&p, cfg)?;
    println!("{}", report.outcome);
    println!("program: {}", report.program);
    if !report.loop_free {
        println!("loops: m = {}, {} loop paths", report.m, report.paths);
        println!("traces: {} ({} truncated), {} pairs", report.traces, report.truncated_traces, report.pairs);
    }
    for (i, a) in report.attempts.iter().enumerate() {
        match &a.training {
            Ok(t) => println!(
                "attempt {i} (init seed {}): loss {:.6} max {:.6} after {} iterations, converged: {}",
                a.init_seed, t.final_loss, t.final_max_loss, t.iters_used, t.converged
            ),
            Err(e) => println!("attempt {i} (init seed {}): training failed: {e}", a.init_seed),
        }
        for r in &a.rounds {
            let kind = |v: &Verdict| match v {
                Verdict::Valid => "valid",
                Verdict::Counterexample(_) => "counterexample",
                Verdict::Unknown(_) => "unknown",
            };
            let per: Vec<String> = r.queries.iter().map(|q| format!("path {}: {}", q.path, kind(&q.verdict))).collect();
            println!("  k = {}: {} [{}]", r.k, kind(&r.verdict), per.join(", "));
        }
    }
    println!(
        "time: trace {:.2}s, train {:.2}s, verify {:.2}s",
        report.timings.trace.as_secs_f64(),
        report.timings.train.as_secs_f64(),
        report.timings.verify.as_secs_f64()
    );
    match &report.certificate {
        Some(c) => {
            print!("certificate:\n{}", certificate_text(c));
            if let Some(path) = dump_model {
                fs::write(path, certificate_text(c)).map_err(|e| io_err(path, e))?;
            }
        }
        None => println!("diagnostic: {}", report.diagnostic),
    }
    Ok(if report.outcome == Outcome::Terminating { 0 } else { EXIT_UNKNOWN })
}

fn run_check(cfg: &PipelineConfig, file: &Path, model: &Path) -> Result<u8, Failure> {
    let p = load_program(file)?;
    let text = fs::read_to_string(model).map_err(|e| io_err(model, e))?;
    let vars: Vec<String> = p.variables().map(String::from).collect();
    let cand = parse_certificate(&text, &vars).map_err(|e| Failure::Usage(e.to_string()))?;
    let g = build_cfg(&p);
    let li = find_loop_headers(&g).expect("structured programs are reducible");
    let paths = loop_paths(&g, &li, DEFAULT_SEGMENT_CAP).map_err(|e| Failure::Usage(e.to_string()))?;
    let report = check_candidate(&p, &paths, &cand, &cfg.solver).map_err(AnalyzeError::from)?;
    for q in &report.queries {
        println!("path {}: {:?}", q.path, q.verdict);
    }
    if report.verdict.is_valid() {
        println!("VALID");
        Ok(0)
    } else {
        println!("NOT VALID: {:?}", report.verdict);
        Ok(EXIT_UNKNOWN)
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let mut cfg = base_config(cli.config.as_deref())?;
    match cli.command {
        Cmd::Analyze { file, opts, dump_traces, dump_model, dump_cfg } => {
            apply_opts(&mut cfg, &opts)?;
            run_analyze(&cfg, &file, dump_traces.as_deref(), dump_model.as_deref(), dump_cfg)
        }
        Cmd::Bench { dir, opts, seeds, hidden_sweep, csv } => {
            apply_opts(&mut cfg, &opts)?;
            let widths: Vec<usize> = if hidden_sweep { (1..=10).collect() } else { vec![cfg.hidden] };
            let summary = bench(&dir, &cfg, &seeds, &widths).map_err(|e| io_err(&dir, e))?;
            print!("{}", summary.to_table());
            if let Some(path) = csv {
                fs::write(&path, summary.to_csv()).map_err(|e| io_err(&path, e))?;
            }
            Ok(0)
        }
        Cmd::Check { file, model, solver, timeout: t } => {
            if let Some(s) = solver {
                cfg.solver.command = split_command(&s);
            }
            if let Some(t) = t {
                cfg.solver.timeout = timeout(t)?;
            }
            run_check(&cfg, &file, &model)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            let (code, msg) = match f {
                Failure::Usage(m) => (EXIT_USAGE, m),
                Failure::Io(m) => (EXIT_IO, m),
                Failure::Analyze(e) => {
                    let code = match &e {
                        AnalyzeError::Io { .. } => EXIT_IO,
                        AnalyzeError::Parse(_) => EXIT_PARSE,
                        AnalyzeError::Solver(SolverError::Missing(_) | SolverError::EmptyCommand) => {
                            EXIT_SOLVER_MISSING
                        }
                        AnalyzeError::Solver(_) => EXIT_IO,
                        AnalyzeError::Sampler(_) | AnalyzeError::Config(_) => EXIT_USAGE,
                    };
                    (code, e.to_string())
                }
            };
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
