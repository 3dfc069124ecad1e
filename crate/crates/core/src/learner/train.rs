use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{lex_loss, DimensionMismatch, SorNetwork};
use crate::tracer::ObservationPair;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Batch {
    Full,
    Mini(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub delta: f64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps_adam: f64,
    pub max_iters: usize,
    pub batch: Batch,
    /// Training stops once the largest per-pair loss is at most this.
    pub loss_tol: f64,
    pub init_scale: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            delta: 1.0,
            lr: 0.05,
            beta1: 0.9,
            beta2: 0.999,
            eps_adam: 1e-8,
            max_iters: 20_000,
            batch: Batch::Full,
            loss_tol: 0.0,
            init_scale: 0.1,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !pos(self.delta) {
            return Err(TrainError::InvalidConfig("delta must be positive"));
        }
        if !pos(self.lr) {
            return Err(TrainError::InvalidConfig("learning rate must be positive"));
        }
        if !pos(self.init_scale) {
            return Err(TrainError::InvalidConfig("init_scale must be positive"));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) || !pos(self.eps_adam) {
            return Err(TrainError::InvalidConfig("Adam constants out of range"));
        }
        if self.loss_tol.is_nan() || self.loss_tol < 0.0 {
            return Err(TrainError::InvalidConfig("loss_tol must be non-negative"));
        }
        if self.batch == Batch::Mini(0) {
            return Err(TrainError::InvalidConfig("minibatch size must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingReport {
    /// Mean pair loss of the returned parameters.
    pub final_loss: f64,
    /// Largest single-pair loss of the returned parameters.
    pub final_max_loss: f64,
    pub iters_used: usize,
    /// `(iteration, mean loss)` every few iterations.
    pub loss_history: Vec<(usize, f64)>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrainError {
    #[error("no observation pairs to train on")]
    EmptyData,
    #[error(transparent)]
    Dimension(#[from] DimensionMismatch),
    #[error("pair index {j} outside 1..={m}")]
    BadIndex { j: usize, m: usize },
    #[error("invalid training configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("loss became non-finite at iteration {iter}")]
    Diverged { iter: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

struct Weighted<'a> {
    x: &'a [f64],
    y: &'a [f64],
    j: usize,
    weight: f64,
}

/// Merges identical pairs into one weighted entry; the weighted mean equals
/// the mean over the original multiset.
fn deduplicate(data: &[ObservationPair]) -> Vec<Weighted<'_>> {
    type Key = (Vec<u64>, Vec<u64>, usize);
    let mut counts: BTreeMap<Key, (usize, usize)> = BTreeMap::new();
    for (i, p) in data.iter().enumerate() {
        let key = (p.x.iter().map(|v| v.to_bits()).collect(), p.y.iter().map(|v| v.to_bits()).collect(), p.j);
        counts.entry(key).or_insert((i, 0)).1 += 1;
    }
    counts
        .into_values()
        .map(|(i, c)| Weighted { x: &data[i].x, y: &data[i].y, j: data[i].j, weight: c as f64 })
        .collect()
}

struct Eval {
    mean: f64,
    max: f64,
    grad: Option<Gradient>,
}

fn evaluate(net: &SorNetwork, pairs: &[Weighted<'_>], delta: f64, want_grad: bool) -> Eval {
    let hidden = net.hidden();
    let mut grad = want_grad.then(|| Gradient { weights: vec![0.0; net.weights.len()], biases: vec![0.0; hidden] });
    let (mut sum, mut max, mut total) = (0.0, 0.0f64, 0.0);
    let mut pre_x = vec![0.0; hidden];
    let mut pre_y = vec![0.0; hidden];
    let mut ox = vec![0.0; net.m];
    let mut oy = vec![0.0; net.m];
    for p in pairs {
        ox.iter_mut().for_each(|v| *v = 0.0);
        oy.iter_mut().for_each(|v| *v = 0.0);
        for k in 0..hidden {
            pre_x[k] = net.pre_activation(k, p.x);
            pre_y[k] = net.pre_activation(k, p.y);
            let g = net.group_of(k);
            ox[g] += super::relu(pre_x[k]);
            oy[g] += super::relu(pre_y[k]);
        }
        let loss = lex_loss(&ox, &oy, p.j, delta);
        sum += p.weight * loss;
        total += p.weight;
        max = max.max(loss);
        let Some(grad) = grad.as_mut() else { continue };
        if loss == 0.0 {
            continue;
        }
        // Active hinges; the subgradient at a kink is 0.
        let active = |g: usize| {
            if g + 1 == p.j {
                oy[g] - ox[g] + delta > 0.0
            } else {
                g + 1 < p.j && oy[g] - ox[g] > 0.0
            }
        };
        for k in 0..hidden {
            let g = net.group_of(k);
            if !active(g) {
                continue;
            }
            let row = &mut grad.weights[k * net.n..(k + 1) * net.n];
            if pre_y[k] > 0.0 {
                for (r, v) in row.iter_mut().zip(p.y) {
                    *r += p.weight * v;
                }
                grad.biases[k] += p.weight;
            }
            if pre_x[k] > 0.0 {
                for (r, v) in row.iter_mut().zip(p.x) {
                    *r -= p.weight * v;
                }
                grad.biases[k] -= p.weight;
            }
        }
    }
    if let Some(grad) = grad.as_mut() {
        grad.weights.iter_mut().chain(grad.biases.iter_mut()).for_each(|v| *v /= total);
    }
    Eval { mean: sum / total, max, grad }
}

fn check_data(net: &SorNetwork, data: &[ObservationPair]) -> Result<(), TrainError> {
    if data.is_empty() {
        return Err(TrainError::EmptyData);
    }
    for p in data {
        for v in [&p.x, &p.y] {
            if v.len() != net.n {
                return Err(DimensionMismatch { expected: net.n, got: v.len() }.into());
            }
        }
        if p.j == 0 || p.j > net.m {
            return Err(TrainError::BadIndex { j: p.j, m: net.m });
        }
    }
    Ok(())
}

/// Mean lexicographic loss over `data` and its (sub)gradient with respect
/// to the first-layer weights and biases.
pub fn loss_and_gradient(
    net: &SorNetwork,
    data: &[ObservationPair],
    delta: f64,
) -> Result<(f64, Gradient), TrainError> {
    check_data(net, data)?;
    let pairs: Vec<Weighted<'_>> = data.iter().map(|p| Weighted { x: &p.x, y: &p.y, j: p.j, weight: 1.0 }).collect();
    let e = evaluate(net, &pairs, delta, true);
    Ok((e.mean, e.grad.unwrap()))
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn step(&mut self, cfg: &TrainConfig, params: &mut [f64], grads: impl Iterator<Item = f64>) {
        self.t += 1;
        let c1 = 1.0 - libm::pow(cfg.beta1, self.t as f64);
        let c2 = 1.0 - libm::pow(cfg.beta2, self.t as f64);
        for (i, g) in grads.enumerate() {
            self.m[i] = cfg.beta1 * self.m[i] + (1.0 - cfg.beta1) * g;
            self.v[i] = cfg.beta2 * self.v[i] + (1.0 - cfg.beta2) * g * g;
            let mhat = self.m[i] / c1;
            let vhat = self.v[i] / c2;
            params[i] -= cfg.lr * mhat / (libm::sqrt(vhat) + cfg.eps_adam);
        }
    }
}

const HISTORY_STRIDE: usize = 10;

/// Minimizes the mean lexicographic loss with Adam.
///
/// Stops as soon as every pair's loss is at most `cfg.loss_tol`; otherwise
/// runs `cfg.max_iters` updates and returns the iterate with the lowest
/// mean loss.
pub fn train(
    net0: &SorNetwork,
    data: &[ObservationPair],
    cfg: &TrainConfig,
) -> Result<(SorNetwork, TrainingReport), TrainError> {
    cfg.validate()?;
    check_data(net0, data)?;
    let pairs = deduplicate(data);
    let mut net = net0.clone();
    let nw = net.weights.len();
    let mut params: Vec<f64> = net.weights.iter().chain(&net.biases).copied().collect();
    let mut adam = Adam { m: vec![0.0; params.len()], v: vec![0.0; params.len()], t: 0 };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    let mut cursor = order.len();
    let mut history = Vec::new();
    let mut best: Option<(f64, f64, Vec<f64>)> = None;

    for it in 0..=cfg.max_iters {
        let full = evaluate(&net, &pairs, cfg.delta, cfg.batch == Batch::Full);
        if !full.mean.is_finite() || !net.is_finite() {
            return Err(TrainError::Diverged { iter: it });
        }
        if it % HISTORY_STRIDE == 0 {
            history.push((it, full.mean));
        }
        if full.max <= cfg.loss_tol {
            if history.last().map(|h| h.0) != Some(it) {
                history.push((it, full.mean));
            }
            let report = TrainingReport {
                final_loss: full.mean,
                final_max_loss: full.max,
                iters_used: it,
                loss_history: history,
                converged: true,
            };
            return Ok((net, report));
        }
        if best.as_ref().is_none_or(|b| full.mean < b.0) {
            best = Some((full.mean, full.max, params.clone()));
        }
        if it == cfg.max_iters {
            break;
        }
        let grad = match cfg.batch {
            Batch::Full => full.grad.unwrap(),
            Batch::Mini(size) => {
                let mut batch = Vec::with_capacity(size);
                while batch.len() < size.min(pairs.len()) {
                    if cursor == order.len() {
                        order.shuffle(&mut rng);
                        cursor = 0;
                    }
                    let p = &pairs[order[cursor]];
                    batch.push(Weighted { x: p.x, y: p.y, j: p.j, weight: p.weight });
                    cursor += 1;
                }
                evaluate(&net, &batch, cfg.delta, true).grad.unwrap()
            }
        };
        adam.step(cfg, &mut params, grad.weights.iter().chain(&grad.biases).copied());
        net.weights.copy_from_slice(&params[..nw]);
        net.biases.copy_from_slice(&params[nw..]);
    }

    let (mean, max, p) = best.expect("at least one evaluation");
    net.weights.copy_from_slice(&p[..nw]);
    net.biases.copy_from_slice(&p[nw..]);
    history.push((cfg.max_iters, mean));
    Ok((
        net,
        TrainingReport {
            final_loss: mean,
            final_max_loss: max,
            iters_used: cfg.max_iters,
            loss_history: history,
            converged: false,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn countdown_pairs() -> Vec<ObservationPair> {
        (1..=6).map(|x| ObservationPair { x: vec![x as f64], y: vec![(x - 1) as f64], j: 1 }).collect()
    }

    #[test]
    fn already_decreasing_data_converges_immediately() {
        let net = SorNetwork { n: 1, m: 1, h: 1, weights: vec![2.0], biases: vec![0.0] };
        let (out, report) = train(&net, &countdown_pairs(), &TrainConfig::default()).unwrap();
        assert!(report.converged);
        assert_eq!(report.iters_used, 0);
        assert_eq!(out, net);
    }

    #[test]
    fn learns_countdown_with_one_neuron() {
        let mut found = false;
        for seed in 0..4 {
            let net0 = SorNetwork::init(1, 1, 1, 0.1, seed);
            let cfg = TrainConfig { seed, ..Default::default() };
            let (net, report) = train(&net0, &countdown_pairs(), &cfg).unwrap();
            if report.converged {
                assert!(net.weights[0] > 0.0);
                assert_eq!(report.final_max_loss, 0.0);
                found = true;
            }
        }
        assert!(found);
    }

    #[test]
    fn empty_and_malformed_data() {
        let net = SorNetwork::zeros(1, 1, 1);
        assert_eq!(train(&net, &[], &TrainConfig::default()).unwrap_err(), TrainError::EmptyData);
        let bad = [ObservationPair { x: vec![1.0, 2.0], y: vec![0.0, 0.0], j: 1 }];
        assert!(matches!(train(&net, &bad, &TrainConfig::default()), Err(TrainError::Dimension(_))));
        let bad = [ObservationPair { x: vec![1.0], y: vec![0.0], j: 2 }];
        assert_eq!(train(&net, &bad, &TrainConfig::default()).unwrap_err(), TrainError::BadIndex { j: 2, m: 1 });
        let cfg = TrainConfig { delta: 0.0, ..Default::default() };
        assert!(matches!(train(&net, &countdown_pairs(), &cfg), Err(TrainError::InvalidConfig(_))));
    }

    #[test]
    fn divergence_is_reported() {
        let net = SorNetwork { n: 1, m: 1, h: 1, weights: vec![f64::INFINITY], biases: vec![0.0] };
        assert!(matches!(
            train(&net, &countdown_pairs(), &TrainConfig::default()),
            Err(TrainError::Diverged { iter: 0 })
        ));
    }

    #[test]
    fn deduplicated_loss_matches_plain_mean() {
        let mut data = countdown_pairs();
        data.extend(countdown_pairs().into_iter().take(2));
        let net = SorNetwork { n: 1, m: 1, h: 2, weights: vec![0.3, -0.2], biases: vec![0.5, 0.1] };
        let plain: f64 = data.iter().map(|p| super::super::pair_loss(&net, p, 1.0)).sum::<f64>() / data.len() as f64;
        let e = evaluate(&net, &deduplicate(&data), 1.0, false);
        assert!((e.mean - plain).abs() < 1e-12);
    }

    #[test]
    fn minibatch_training_runs() {
        let net0 = SorNetwork::init(1, 1, 2, 0.1, 3);
        let cfg = TrainConfig { batch: Batch::Mini(2), max_iters: 3000, ..Default::default() };
        let (_, report) = train(&net0, &countdown_pairs(), &cfg).unwrap();
        assert!(report.loss_history.iter().all(|(_, l)| l.is_finite() && *l >= 0.0));
    }
}
