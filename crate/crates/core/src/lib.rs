//! Core of the `neuroterm` termination analyzer.
//!
//! Everything in this crate is pure computation over owned data and runs
//! without `std`: the mini-language frontend, control-flow graphs and loop
//! headers, the tracing interpreter and input samplers, the sum-of-ReLU
//! learner, and the verification-condition encoder with its brute-force
//! oracle. Process management, file formats and the CLI live in the
//! `neuroterm` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod cfg;
pub mod interp;
pub mod lang;
pub mod learner;
pub mod numeric;
pub mod sexp;
pub mod tracer;
pub mod verifier;

pub use cfg::{build_cfg, find_loop_headers, header_segments, loop_paths, Cfg, LocId, LoopInfo};
pub use lang::{parse_program, pretty_print, Program};
pub use learner::{SorNetwork, TrainConfig, TrainingReport};
pub use tracer::{ObservationPair, SamplerConfig, Strategy, Trace};
pub use verifier::{RankingCandidate, Verdict};
