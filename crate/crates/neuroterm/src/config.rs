//! `neuroterm.cfg`: plain `key = value` lines, `#` starts a comment.

use std::path::PathBuf;
use std::time::Duration;

use neuroterm_core::Strategy;

use crate::pipeline::PipelineConfig;
use crate::solver::split_command;

pub const CONFIG_FILE: &str = "neuroterm.cfg";
pub const SOLVER_ENV: &str = "NEUROTERM_SOLVER";

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("config line {line}: {msg}")]
pub struct ConfigFileError {
    pub line: usize,
    pub msg: String,
}

fn parse_value<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T, ConfigFileError> {
    v.parse().map_err(|_| ConfigFileError { line, msg: format!("invalid value `{v}` for `{key}`") })
}

/// Applies every setting in `text` on top of `cfg`.
pub fn apply_config(cfg: &mut PipelineConfig, text: &str) -> Result<(), ConfigFileError> {
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| ConfigFileError { line, msg: "expected `key = value`".into() })?;
        match key {
            "samples" => cfg.sampler.count = parse_value(line, key, value)?,
            "strategy" => cfg.sampler.strategy = parse_value::<Strategy>(line, key, value)?,
            "uniform_range" => cfg.sampler.uniform_range = parse_value(line, key, value)?,
            "gaussian_variance" => cfg.sampler.gaussian_variance = parse_value(line, key, value)?,
            "hidden" => cfg.hidden = parse_value(line, key, value)?,
            "delta" => cfg.train.delta = parse_value(line, key, value)?,
            "lr" => cfg.train.lr = parse_value(line, key, value)?,
            "max_iters" => cfg.train.max_iters = parse_value(line, key, value)?,
            "seed" => {
                let s: u64 = parse_value(line, key, value)?;
                cfg.sampler.seed = s;
                cfg.train.seed = s;
            }
            "max_trace_len" => cfg.max_trace_len = parse_value(line, key, value)?,
            "solver" => cfg.solver.command = split_command(value),
            "timeout" => cfg.solver.timeout = Duration::from_secs_f64(parse_value(line, key, value)?),
            "round_digits" => cfg.round_digits_max = parse_value(line, key, value)?,
            "retries" => cfg.retries = parse_value(line, key, value)?,
            "segment_cap" => cfg.segment_cap = parse_value(line, key, value)?,
            "simplify" => cfg.simplify = parse_value(line, key, value)?,
            "out" => cfg.out_dir = Some(PathBuf::from(value)),
            _ => return Err(ConfigFileError { line, msg: format!("unknown key `{key}`") }),
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_are_applied() {
        let mut cfg = PipelineConfig::default();
        apply_config(
            &mut cfg,
            "# settings\nsamples = 50\nstrategy = uniform\nhidden=2\nsolver = z3 -in -T:5  # inline\nseed = 7\n\ntimeout = 1.5\n",
        )
        .unwrap();
        assert_eq!(cfg.sampler.count, 50);
        assert_eq!(cfg.sampler.strategy, Strategy::Uniform);
        assert_eq!(cfg.hidden, 2);
        assert_eq!(cfg.solver.command, ["z3", "-in", "-T:5"]);
        assert_eq!((cfg.sampler.seed, cfg.train.seed), (7, 7));
        assert_eq!(cfg.solver.timeout, Duration::from_millis(1500));
    }

    #[test]
    fn errors_name_the_line() {
        let mut cfg = PipelineConfig::default();
        assert_eq!(apply_config(&mut cfg, "samples = 3\nbogus = 1").unwrap_err().line, 2);
        assert_eq!(apply_config(&mut cfg, "hidden 3").unwrap_err().line, 1);
        assert_eq!(apply_config(&mut cfg, "hidden = -3").unwrap_err().line, 1);
    }
}
