//! Command-line side of the analyzer: solver processes, the end-to-end
//! pipeline, benchmarks, configuration and file formats.

pub mod bench;
pub mod config;
pub mod formats;
pub mod pipeline;
pub mod solver;

pub use pipeline::{analyze, analyze_file, analyze_source, AnalysisReport, AnalyzeError, Outcome, PipelineConfig};
pub use solver::{check_candidate, SolverConfig, SolverError};
