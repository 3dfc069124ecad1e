//! Sum-of-ReLU ranking networks and their training.
//!
//! A network has `n` inputs and `m` outputs. Its `m * h` hidden ReLU units
//! are split into `m` consecutive groups of `h`, and output `j` is the plain
//! sum of group `j`. The output weights are fixed to 1 and never trained, so
//! every output is non-negative whatever the first-layer parameters are.

mod round;
mod train;

use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::tracer::ObservationPair;

pub use round::round_parameters;
pub use train::{loss_and_gradient, train, Batch, Gradient, TrainConfig, TrainError, TrainingReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("expected an input of dimension {expected}, got {got}")]
pub struct DimensionMismatch {
    pub expected: usize,
    pub got: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SorNetwork {
    pub n: usize,
    pub m: usize,
    pub h: usize,
    /// Row-major `(m * h) x n` first-layer weights.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

#[inline]
pub(crate) fn relu(v: f64) -> f64 {
    if v > 0.0 {
        v
    } else {
        0.0
    }
}

impl SorNetwork {
    pub fn zeros(n: usize, m: usize, h: usize) -> SorNetwork {
        SorNetwork { n, m, h, weights: vec![0.0; m * h * n], biases: vec![0.0; m * h] }
    }

    /// Gaussian weights with standard deviation `init_scale`, zero biases.
    pub fn init(n: usize, m: usize, h: usize, init_scale: f64, seed: u64) -> SorNetwork {
        let mut net = SorNetwork::zeros(n, m, h);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dist = Normal::new(0.0, init_scale).expect("init_scale must be positive and finite");
        for w in &mut net.weights {
            *w = dist.sample(&mut rng);
        }
        net
    }

    pub fn hidden(&self) -> usize {
        self.m * self.h
    }

    /// Output group (0-based) of hidden unit `k`.
    pub fn group_of(&self, k: usize) -> usize {
        k / self.h
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.weights[k * self.n..(k + 1) * self.n]
    }

    pub fn pre_activation(&self, k: usize, x: &[f64]) -> f64 {
        self.row(k).iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.biases[k]
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, DimensionMismatch> {
        if x.len() != self.n {
            return Err(DimensionMismatch { expected: self.n, got: x.len() });
        }
        let mut out = vec![0.0; self.m];
        for k in 0..self.hidden() {
            out[self.group_of(k)] += relu(self.pre_activation(k, x));
        }
        Ok(out)
    }

    pub fn num_params(&self) -> usize {
        self.weights.len() + self.biases.len()
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().chain(&self.biases).all(|v| v.is_finite())
    }
}

/// Lexicographic ranking loss of one observation pair, given the outputs at
/// both ends.
///
/// `max(o_j(y) - o_j(x) + delta, 0) + sum_{i<j} max(o_i(y) - o_i(x), 0)`.
pub fn lex_loss(ox: &[f64], oy: &[f64], j: usize, delta: f64) -> f64 {
    debug_assert!(j >= 1 && j <= ox.len());
    let target = relu(oy[j - 1] - ox[j - 1] + delta);
    let prefix: f64 = (0..j - 1).map(|i| relu(oy[i] - ox[i])).sum();
    target + prefix
}

pub fn pair_loss(net: &SorNetwork, p: &ObservationPair, delta: f64) -> f64 {
    let ox = net.forward(&p.x).expect("pair dimension");
    let oy = net.forward(&p.y).expect("pair dimension");
    lex_loss(&ox, &oy, p.j, delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sor_figure_net() -> SorNetwork {
        SorNetwork { n: 3, m: 1, h: 2, weights: vec![1.0, 0.0, -1.0, 0.0, 1.0, -1.0], biases: vec![0.0, 0.0] }
    }

    #[test]
    fn sor_figure_forward() {
        let net = sor_figure_net();
        assert_eq!(net.forward(&[5.0, 3.0, 2.0]).unwrap(), [4.0]);
        assert_eq!(net.forward(&[1.0, 1.0, 2.0]).unwrap(), [0.0]);
    }

    #[test]
    fn zero_network_is_zero() {
        let net = SorNetwork::zeros(3, 2, 4);
        assert_eq!(net.forward(&[9.0, -4.0, 1.0]).unwrap(), [0.0, 0.0]);
    }

    #[test]
    fn dimension_mismatch() {
        let net = SorNetwork::zeros(3, 1, 1);
        assert_eq!(net.forward(&[1.0]), Err(DimensionMismatch { expected: 3, got: 1 }));
    }

    #[test]
    fn group_assignment_is_consecutive() {
        let net = SorNetwork::zeros(1, 3, 2);
        let groups: Vec<usize> = (0..net.hidden()).map(|k| net.group_of(k)).collect();
        assert_eq!(groups, [0, 0, 1, 1, 2, 2]);
    }

    #[test]
    fn lex_loss_examples() {
        assert_eq!(lex_loss(&[5.0], &[3.0], 1, 1.0), 0.0);
        assert_eq!(lex_loss(&[3.0], &[3.0], 1, 1.0), 1.0);
        assert_eq!(lex_loss(&[4.0, 7.0], &[4.5, 5.0], 2, 1.0), 0.5);
    }

    #[test]
    fn pair_loss_uses_network() {
        let net = sor_figure_net();
        let p = ObservationPair { x: vec![5.0, 3.0, 2.0], y: vec![4.0, 3.0, 2.0], j: 1 };
        assert_eq!(pair_loss(&net, &p, 1.0), 0.0);
        let p = ObservationPair { x: vec![5.0, 3.0, 2.0], y: vec![5.0, 3.0, 2.0], j: 1 };
        assert_eq!(pair_loss(&net, &p, 1.0), 1.0);
    }
}
