//! Running the analyzer over a directory for several seeds and widths.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::pipeline::{analyze_file, Outcome, PipelineConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub file: String,
    pub seed: u64,
    pub hidden: usize,
    pub solved: bool,
    pub iterations: usize,
    pub wall: Duration,
    /// Operational failure, if the analysis did not run to completion.
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct BenchSummary {
    pub files: Vec<String>,
    pub rows: Vec<BenchRow>,
}

/// Lists `.nt` files in `dir`, sorted by name.
pub fn list_programs(dir: &Path) -> io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "nt") && p.is_file())
        .collect();
    files.sort();
    Ok(files)
}

fn file_name(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Analyzes every program for every seed and hidden width. Individual
/// failures are recorded in their row.
pub fn bench(dir: &Path, base: &PipelineConfig, seeds: &[u64], hidden: &[usize]) -> io::Result<BenchSummary> {
    let files = list_programs(dir)?;
    let mut jobs = Vec::new();
    for f in &files {
        for &h in hidden {
            for &s in seeds {
                jobs.push((f.clone(), h, s));
            }
        }
    }
    let rows = jobs
        .par_iter()
        .map(|(f, h, s)| {
            let mut cfg = base.clone().with_seed(*s);
            cfg.hidden = *h;
            cfg.out_dir = None;
            let start = Instant::now();
            let r = analyze_file(f, &cfg);
            let wall = start.elapsed();
            let (solved, iterations, error) = match r {
                Ok(rep) => (rep.outcome == Outcome::Terminating, rep.training_iterations(), None),
                Err(e) => (false, 0, Some(e.to_string())),
            };
            log::info!("{} h={h} seed={s}: solved={solved} ({:.1}s)", file_name(f), wall.as_secs_f64());
            BenchRow { file: file_name(f), seed: *s, hidden: *h, solved, iterations, wall, error }
        })
        .collect();
    Ok(BenchSummary { files: files.iter().map(|f| file_name(f)).collect(), rows })
}

impl BenchSummary {
    /// Solved programs for one `(hidden, seed)` run.
    pub fn solved_count(&self, hidden: usize, seed: u64) -> usize {
        self.rows.iter().filter(|r| r.hidden == hidden && r.seed == seed && r.solved).count()
    }

    /// Mean solve rate over seeds for one width, in `[0, 1]`.
    pub fn average_rate(&self, hidden: usize) -> f64 {
        let seeds: Vec<u64> = self.seeds(hidden);
        if seeds.is_empty() || self.files.is_empty() {
            return 0.0;
        }
        let total: usize = seeds.iter().map(|&s| self.solved_count(hidden, s)).sum();
        total as f64 / (seeds.len() * self.files.len()) as f64
    }

    pub fn seeds(&self, hidden: usize) -> Vec<u64> {
        let mut s: Vec<u64> = self.rows.iter().filter(|r| r.hidden == hidden).map(|r| r.seed).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    pub fn widths(&self) -> Vec<usize> {
        let mut h: Vec<usize> = self.rows.iter().map(|r| r.hidden).collect();
        h.sort_unstable();
        h.dedup();
        h
    }

    pub fn is_solved(&self, file: &str, hidden: usize, seed: u64) -> bool {
        self.rows.iter().any(|r| r.file == file && r.hidden == hidden && r.seed == seed && r.solved)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("file,hidden,seed,solved,iterations,wall_ms,error\n");
        let mut rows: Vec<&BenchRow> = self.rows.iter().collect();
        rows.sort_by(|a, b| (&a.file, a.hidden, a.seed).cmp(&(&b.file, b.hidden, b.seed)));
        for r in rows {
            let err = r.error.as_deref().unwrap_or("").replace(['"', '\n'], " ");
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},\"{}\"",
                r.file,
                r.hidden,
                r.seed,
                r.solved,
                r.iterations,
                r.wall.as_millis(),
                err
            );
        }
        s
    }

    /// Per-file marks for every seed, then per-seed and average rates for
    /// every width.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let name_w = self.files.iter().map(|f| f.len()).max().unwrap_or(4).max(7);
        for h in self.widths() {
            let seeds = self.seeds(h);
            let _ = write!(s, "hidden = {h}\n{:name_w$}", "program");
            for seed in &seeds {
                let _ = write!(s, " {:>6}", format!("s{seed}"));
            }
            s.push('\n');
            for f in &self.files {
                let _ = write!(s, "{f:name_w$}");
                for &seed in &seeds {
                    let _ = write!(s, " {:>6}", if self.is_solved(f, h, seed) { "yes" } else { "-" });
                }
                s.push('\n');
            }
            let _ = write!(s, "{:name_w$}", "solved");
            for &seed in &seeds {
                let _ = write!(s, " {:>6}", format!("{}/{}", self.solved_count(h, seed), self.files.len()));
            }
            let _ = writeln!(s, "\naverage solve rate: {:.1}%\n", 100.0 * self.average_rate(h));
        }
        if self.widths().len() > 1 {
            s.push_str("hidden  average solve rate\n");
            let rates: BTreeMap<usize, f64> = self.widths().into_iter().map(|h| (h, self.average_rate(h))).collect();
            for (h, r) in rates {
                let _ = writeln!(s, "{h:>6}  {:.1}%", 100.0 * r);
            }
        }
        s
    }
}
