use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Uniform,
    Gaussian,
    /// Pairwise anticorrelated sampling.
    Pas,
}

impl core::str::FromStr for Strategy {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(Strategy::Uniform),
            "gaussian" => Ok(Strategy::Gaussian),
            "pas" => Ok(Strategy::Pas),
            _ => Err(ConfigError::UnknownStrategy),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("sample count must be positive")]
    ZeroCount,
    #[error("variances must be positive and finite")]
    BadVariance,
    #[error("PAS covariance must satisfy cov^2 < pair_variance^2")]
    NotPositiveDefinite,
    #[error("uniform range must be non-negative")]
    BadRange,
    #[error("unknown sampling strategy (expected uniform, gaussian or pas)")]
    UnknownStrategy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub strategy: Strategy,
    pub count: usize,
    pub seed: u64,
    /// Uniform draws come from `[-uniform_range, uniform_range]`.
    pub uniform_range: i64,
    pub gaussian_variance: f64,
    pub pas_pair_variance: f64,
    pub pas_pair_covariance: f64,
    pub pas_other_variance: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            strategy: Strategy::Pas,
            count: 1000,
            seed: 0,
            uniform_range: 1000,
            gaussian_variance: 1000.0,
            pas_pair_variance: 100.0,
            pas_pair_covariance: -99.0,
            pas_other_variance: 1.0,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.count == 0 {
            return Err(ConfigError::ZeroCount);
        }
        if self.uniform_range < 0 {
            return Err(ConfigError::BadRange);
        }
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.gaussian_variance)
            || !positive(self.pas_pair_variance)
            || !positive(self.pas_other_variance)
            || !self.pas_pair_covariance.is_finite()
        {
            return Err(ConfigError::BadVariance);
        }
        if self.pas_pair_covariance * self.pas_pair_covariance >= self.pas_pair_variance * self.pas_pair_variance {
            return Err(ConfigError::NotPositiveDefinite);
        }
        Ok(())
    }
}

/// One sampled input vector; `pair` names the anticorrelated coordinates
/// when the PAS strategy chose one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Draw {
    pub values: Vec<i64>,
    pub pair: Option<(usize, usize)>,
}

/// Seeded input generator.
pub struct Sampler {
    cfg: SamplerConfig,
    n_params: usize,
    rng: ChaCha8Rng,
}

fn round_to_int(v: f64) -> i64 {
    libm::round(v) as i64
}

impl Sampler {
    pub fn new(cfg: &SamplerConfig, n_params: usize) -> Result<Sampler, ConfigError> {
        cfg.validate()?;
        Ok(Sampler { cfg: cfg.clone(), n_params, rng: ChaCha8Rng::seed_from_u64(cfg.seed) })
    }

    fn normal(&mut self, variance: f64) -> f64 {
        let z: f64 = StandardNormal.sample(&mut self.rng);
        z * libm::sqrt(variance)
    }

    pub fn draw(&mut self) -> Draw {
        let n = self.n_params;
        match self.cfg.strategy {
            Strategy::Uniform => {
                let b = self.cfg.uniform_range;
                let values = (0..n).map(|_| self.rng.random_range(-b..=b)).collect();
                Draw { values, pair: None }
            }
            Strategy::Gaussian => {
                let var = self.cfg.gaussian_variance;
                let values = (0..n).map(|_| round_to_int(self.normal(var))).collect();
                Draw { values, pair: None }
            }
            Strategy::Pas => {
                let other = self.cfg.pas_other_variance;
                if n < 2 {
                    let values = (0..n).map(|_| round_to_int(self.normal(other))).collect();
                    return Draw { values, pair: None };
                }
                // Uniform choice among the n(n-1)/2 unordered pairs.
                let a = self.rng.random_range(0..n);
                let mut b = self.rng.random_range(0..n - 1);
                if b >= a {
                    b += 1;
                }
                let (a, b) = (a.min(b), a.max(b));
                let mut values = Vec::with_capacity(n);
                for i in 0..n {
                    if i != a && i != b {
                        values.push(round_to_int(self.normal(other)));
                    } else {
                        values.push(0);
                    }
                }
                // Cholesky factor of [[v, c], [c, v]].
                let v = self.cfg.pas_pair_variance;
                let c = self.cfg.pas_pair_covariance;
                let sd = libm::sqrt(v);
                let rho = c / v;
                let z1: f64 = StandardNormal.sample(&mut self.rng);
                let z2: f64 = StandardNormal.sample(&mut self.rng);
                values[a] = round_to_int(sd * z1);
                values[b] = round_to_int(sd * (rho * z1 + libm::sqrt(1.0 - rho * rho) * z2));
                Draw { values, pair: Some((a, b)) }
            }
        }
    }
}

/// Draws `cfg.count` input vectors of length `n_params`.
pub fn sample_inputs(cfg: &SamplerConfig, n_params: usize) -> Result<Vec<Vec<i64>>, ConfigError> {
    let mut s = Sampler::new(cfg, n_params)?;
    Ok((0..cfg.count).map(|_| s.draw().values).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_from_seed() {
        let cfg = SamplerConfig { count: 50, seed: 7, ..Default::default() };
        assert_eq!(sample_inputs(&cfg, 3).unwrap(), sample_inputs(&cfg, 3).unwrap());
        let other = SamplerConfig { seed: 8, ..cfg.clone() };
        assert_ne!(sample_inputs(&cfg, 3).unwrap(), sample_inputs(&other, 3).unwrap());
    }

    #[test]
    fn zero_params_gives_empty_vectors() {
        let cfg = SamplerConfig { count: 4, ..Default::default() };
        assert_eq!(sample_inputs(&cfg, 0).unwrap(), vec![Vec::<i64>::new(); 4]);
    }

    #[test]
    fn single_param_pas_degenerates() {
        let cfg = SamplerConfig { count: 2000, ..Default::default() };
        let mut s = Sampler::new(&cfg, 1).unwrap();
        let draws: Vec<Draw> = (0..2000).map(|_| s.draw()).collect();
        assert!(draws.iter().all(|d| d.pair.is_none()));
        // Variance 1: essentially everything lands in [-5, 5].
        assert!(draws.iter().all(|d| d.values[0].abs() <= 6));
    }

    #[test]
    fn uniform_respects_range() {
        let cfg = SamplerConfig { strategy: Strategy::Uniform, uniform_range: 3, count: 500, ..Default::default() };
        let xs = sample_inputs(&cfg, 2).unwrap();
        assert!(xs.iter().flatten().all(|v| (-3..=3).contains(v)));
        assert!(xs.iter().flatten().any(|v| *v == -3) && xs.iter().flatten().any(|v| *v == 3));
    }

    #[test]
    fn invalid_configs() {
        let bad = SamplerConfig { pas_pair_covariance: 100.0, ..Default::default() };
        assert_eq!(bad.validate(), Err(ConfigError::NotPositiveDefinite));
        let bad = SamplerConfig { count: 0, ..Default::default() };
        assert_eq!(bad.validate(), Err(ConfigError::ZeroCount));
        let bad = SamplerConfig { gaussian_variance: -1.0, ..Default::default() };
        assert_eq!(bad.validate(), Err(ConfigError::BadVariance));
        assert_eq!("pas".parse::<Strategy>(), Ok(Strategy::Pas));
        assert!("normal".parse::<Strategy>().is_err());
    }

    #[test]
    fn pas_pairs_cover_all_choices() {
        let cfg = SamplerConfig { count: 1, ..Default::default() };
        let mut s = Sampler::new(&cfg, 4).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..600 {
            seen.insert(s.draw().pair.unwrap());
        }
        assert_eq!(seen.len(), 6);
    }
}
