use super::SorNetwork;

/// Rounds every parameter to `k` binary fraction digits and rescales the
/// first layer by `2^k`, so the result has integer parameters.
///
/// Ties round away from zero. The rescaled network computes exactly `2^k`
/// times the rounded one, so a margin `delta` carries over as `delta * 2^k`.
pub fn round_parameters(net: &SorNetwork, k: u32) -> SorNetwork {
    let scale = libm::exp2(k as f64);
    let r = |p: &f64| libm::round(p * scale);
    SorNetwork {
        n: net.n,
        m: net.m,
        h: net.h,
        weights: net.weights.iter().map(r).collect(),
        biases: net.biases.iter().map(r).collect(),
    }
}
