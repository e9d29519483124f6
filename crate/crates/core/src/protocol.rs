//! One key-generation round.
//!
//! Every node feeds the natural log of its Gaussian prime through the
//! channel: the transmitter divides by its estimate of the small-scale gain,
//! the channel applies the true gain and the path loss, and the receiver
//! compensates the known path-loss amplitude, which scales its thermal noise
//! up by the same factor. Summing the per-link slots and exponentiating
//! turns the sum of logs back into the product of primes; each node then
//! multiplies its own prime in (its own log never crossed the channel).

use num_complex::Complex64;
use rand::Rng;

use crate::channel::ChannelRealization;
use crate::error::ProtocolError;
use crate::gaussint::GaussianInt;

/// Per-node state for one round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeState {
    pub index: usize,
    pub own_prime: GaussianInt,
    /// Principal-branch `ln(own_prime)`; any branch would do since only the
    /// exponential of a sum of logs is ever consumed.
    pub own_log: Complex64,
}

impl NodeState {
    pub fn new(index: usize, own_prime: GaussianInt) -> Self {
        Self {
            index,
            own_prime,
            own_log: own_prime.to_complex().ln(),
        }
    }
}

/// Transmitter-side pre-processing: `ln(x) / estimated_gain`.
pub fn preprocess(x: GaussianInt, estimated_gain: Complex64) -> Result<Complex64, ProtocolError> {
    if x.re == 0 && x.im == 0 {
        return Err(ProtocolError::ZeroInput);
    }
    if estimated_gain == Complex64::new(0.0, 0.0) {
        return Err(ProtocolError::DegenerateChannel);
    }
    Ok(x.to_complex().ln() / estimated_gain)
}

/// Receiver-side post-processing: `e^y`.
pub fn postprocess(y: Complex64) -> Complex64 {
    y.exp()
}

/// Everything one round produces, per node plus exact ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundOutcome {
    pub recovered_keys: Vec<Complex64>,
    /// `|recovered_key|²` per node; the quantity handed to the factor search.
    pub noisy_norms: Vec<f64>,
    /// Set when a node saw a degenerate channel or its post-processing
    /// overflowed; such a node counts as a failed trial, never an abort.
    pub node_failed: Vec<bool>,
    pub true_key: GaussianInt,
    pub true_norm: u64,
}

/// Run one round over a fixed channel realization.
///
/// For receiver `j` the per-link slots sum to
/// `y_j = Σ_{i≠j} (g_ij / ĝ_ij)·ln(x_i) + n_{j,i}/a_ij`
/// with `ĝ` the estimated gain the transmitter inverted, `n` fresh complex
/// noise of total variance `sigma_n²` per link, and `a` the link's
/// path-loss amplitude the receiver compensated. The node recovers
/// `x_j · e^{y_j}`, computed as `exp(ln x_j + y_j)` so the ideal two-node
/// case is exactly symmetric.
///
/// Noise is drawn in a fixed (receiver, sender) order regardless of error
/// flags, so a round consumes the same number of draws on every path.
pub fn run_round<R: Rng + ?Sized>(
    nodes: &[NodeState],
    realization: &ChannelRealization,
    sigma_n: f64,
    rng: &mut R,
) -> RoundOutcome {
    let n = nodes.len();
    assert!(n >= 2, "need at least 2 nodes");
    assert_eq!(n, realization.node_count(), "realization/node mismatch");

    let true_key = nodes
        .iter()
        .skip(1)
        .fold(nodes[0].own_prime, |acc, node| {
            acc.checked_mul(&node.own_prime)
                .expect("key product overflows i64: pool too large")
        });
    let true_norm = true_key.norm();

    let noise_scale = (sigma_n * sigma_n / 2.0).sqrt();
    let mut recovered_keys = Vec::with_capacity(n);
    let mut noisy_norms = Vec::with_capacity(n);
    let mut node_failed = Vec::with_capacity(n);

    for j in 0..n {
        let mut y = Complex64::new(0.0, 0.0);
        let mut failed = false;
        for (i, sender) in nodes.iter().enumerate() {
            if i == j {
                continue;
            }
            let re: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, rng);
            let im: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, rng);
            let noise = Complex64::new(noise_scale * re, noise_scale * im);
            let link = realization.link(i, j);
            if link.estimated_gain == Complex64::new(0.0, 0.0) {
                failed = true;
                continue;
            }
            let bracket = link.true_gain / link.estimated_gain;
            y += bracket * sender.own_log + noise / link.pathloss_amplitude;
        }
        let recovered = postprocess(nodes[j].own_log + y);
        let noisy_norm = recovered.norm_sqr();
        if !noisy_norm.is_finite() {
            failed = true;
        }
        recovered_keys.push(recovered);
        noisy_norms.push(noisy_norm);
        node_failed.push(failed);
    }

    RoundOutcome {
        recovered_keys,
        noisy_norms,
        node_failed,
        true_key,
        true_norm,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{realize, Geometry, PathLossMode, RicianParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ideal_realization(node_count: usize, distance: f64, k: f64, seed: u64) -> ChannelRealization {
        let geom = Geometry::equidistant(node_count, distance, 0.125).unwrap();
        let params = RicianParams::new(k).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        realize(&geom, &params, 0.0, PathLossMode::Normalized, &mut rng).unwrap()
    }

    #[test]
    fn preprocess_examples() {
        let one = Complex64::new(1.0, 0.0);
        let y = preprocess(GaussianInt::new(3, 2), one).unwrap();
        assert!((y.re - 1.28247).abs() < 1e-5);
        assert!((y.im - 0.58800).abs() < 1e-5);

        assert_eq!(preprocess(GaussianInt::new(1, 0), one).unwrap(), Complex64::new(0.0, 0.0));

        let two = Complex64::new(2.0, 0.0);
        let expected = GaussianInt::new(2, 1).to_complex().ln() / 2.0;
        assert_eq!(preprocess(GaussianInt::new(2, 1), two).unwrap(), expected);

        assert_eq!(
            preprocess(GaussianInt::new(2, 1), Complex64::new(0.0, 0.0)),
            Err(ProtocolError::DegenerateChannel)
        );
        assert_eq!(
            preprocess(GaussianInt::new(0, 0), one),
            Err(ProtocolError::ZeroInput)
        );
    }

    #[test]
    fn postprocess_examples() {
        assert_eq!(postprocess(Complex64::new(0.0, 0.0)), Complex64::new(1.0, 0.0));

        let x = Complex64::new(3.0, 2.0);
        let roundtrip = postprocess(x.ln());
        assert!((roundtrip - x).norm() < 1e-12);

        let sum = Complex64::new(2.0, 1.0).ln() + Complex64::new(3.0, 2.0).ln();
        let product = postprocess(sum);
        assert!((product - Complex64::new(4.0, 7.0)).norm() < 1e-12);
    }

    #[test]
    fn two_node_ideal_round_recovers_the_product() {
        let nodes = [
            NodeState::new(0, GaussianInt::new(2, 1)),
            NodeState::new(1, GaussianInt::new(3, 2)),
        ];
        let realization = ideal_realization(2, 15.0, 3.0, 11);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let out = run_round(&nodes, &realization, 0.0, &mut rng);
        assert_eq!(out.true_key, GaussianInt::new(4, 7));
        assert_eq!(out.true_norm, 65);
        for (k, nn) in out.recovered_keys.iter().zip(&out.noisy_norms) {
            assert!((k - Complex64::new(4.0, 7.0)).norm() < 1e-9);
            assert!((nn - 65.0).abs() < 1e-6);
        }
        assert!(!out.node_failed.iter().any(|&f| f));
    }

    #[test]
    fn three_node_ideal_round() {
        let nodes = [
            NodeState::new(0, GaussianInt::new(2, 1)),
            NodeState::new(1, GaussianInt::new(3, 2)),
            NodeState::new(2, GaussianInt::new(4, 1)),
        ];
        let realization = ideal_realization(3, 15.0, 0.0, 21);
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let out = run_round(&nodes, &realization, 0.0, &mut rng);
        assert_eq!(out.true_norm, 5 * 13 * 17);
        for nn in &out.noisy_norms {
            assert!((nn - 1105.0).abs() / 1105.0 < 1e-9);
        }
    }

    #[test]
    fn ideal_round_is_independent_of_k_and_distance() {
        let nodes = [
            NodeState::new(0, GaussianInt::new(2, 1)),
            NodeState::new(1, GaussianInt::new(3, 2)),
        ];
        let mut outputs = Vec::new();
        for (k, d, seed) in [(0.0, 1.0, 31), (3.0, 15.0, 32), (20.0, 150.0, 33)] {
            let realization = ideal_realization(2, d, k, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(34);
            outputs.push(run_round(&nodes, &realization, 0.0, &mut rng).recovered_keys);
        }
        // Gains cancel exactly and the noise is exactly zero, so the
        // recovered keys are bit-identical across channels.
        assert_eq!(outputs[0], outputs[1]);
        assert_eq!(outputs[1], outputs[2]);
    }

    #[test]
    fn two_node_ideal_round_is_bit_symmetric() {
        let pool = crate::gaussint::PrimePool::generate(5, 61).unwrap();
        for a in pool.members() {
            for b in pool.members() {
                if a == b {
                    continue;
                }
                let nodes = [NodeState::new(0, *a), NodeState::new(1, *b)];
                let realization = ideal_realization(2, 15.0, 3.0, 41);
                let mut rng = ChaCha8Rng::seed_from_u64(42);
                let out = run_round(&nodes, &realization, 0.0, &mut rng);
                assert_eq!(out.recovered_keys[0], out.recovered_keys[1], "{a} {b}");
            }
        }
    }

    #[test]
    fn log_exp_identity_over_prime_multisets() {
        let pool = crate::gaussint::PrimePool::generate(5, 61).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for _ in 0..500 {
            let len = rand::Rng::random_range(&mut rng, 2..=3);
            let picks: Vec<GaussianInt> = (0..len)
                .map(|_| pool.members()[rand::Rng::random_range(&mut rng, 0..pool.len())])
                .collect();
            let sum: Complex64 = picks.iter().map(|p| p.to_complex().ln()).sum();
            let exact = picks
                .iter()
                .skip(1)
                .fold(picks[0], |acc, p| acc.mul(p))
                .to_complex();
            let err = (sum.exp() - exact).norm() / exact.norm();
            assert!(err < 1e-10, "relative error {err}");
        }
    }

    #[test]
    fn degenerate_estimated_gain_flags_the_receiver() {
        use crate::channel::Link;
        // Hand-build a realization with a zeroed estimate.
        let geom = Geometry::equidistant(2, 15.0, 0.125).unwrap();
        let params = RicianParams::new(3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let mut realization =
            realize(&geom, &params, 0.0, PathLossMode::Normalized, &mut rng).unwrap();
        let link = realization.link(0, 1);
        let zeroed = Link {
            estimated_gain: Complex64::new(0.0, 0.0),
            ..*link
        };
        // Reconstruct with the zeroed link through the public surface.
        realization = {
            let mut clone = realization.clone();
            clone.links_mut()[0] = zeroed;
            clone
        };
        let nodes = [
            NodeState::new(0, GaussianInt::new(2, 1)),
            NodeState::new(1, GaussianInt::new(3, 2)),
        ];
        let out = run_round(&nodes, &realization, 0.01, &mut rng);
        assert!(out.node_failed.iter().all(|&f| f));
    }

    /// Mean absolute norm error grows with distance: the receiver's
    /// path-loss compensation amplifies its thermal noise.
    #[test]
    fn distance_degrades_norm_accuracy() {
        let trials = 2000;
        let sigma_h = 0.03;
        let sigma_n = 0.01;
        let params = RicianParams::new(3.0).unwrap();
        let nodes = [
            NodeState::new(0, GaussianInt::new(2, 1)),
            NodeState::new(1, GaussianInt::new(3, 2)),
        ];
        let mut stats = Vec::new();
        for (di, d) in [1.0, 15.0, 50.0, 150.0].into_iter().enumerate() {
            let geom = Geometry::equidistant(2, d, 0.125).unwrap();
            let mut devs = Vec::with_capacity(trials);
            for t in 0..trials {
                let mut rng = ChaCha8Rng::seed_from_u64(7_000_000 + (di * trials + t) as u64);
                let realization =
                    realize(&geom, &params, sigma_h, PathLossMode::Normalized, &mut rng).unwrap();
                let out = run_round(&nodes, &realization, sigma_n, &mut rng);
                devs.push((out.noisy_norms[0] - out.true_norm as f64).abs());
            }
            let mean = devs.iter().sum::<f64>() / trials as f64;
            let var = devs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
            stats.push((mean, var / trials as f64));
        }
        for w in stats.windows(2) {
            let (m0, se0) = w[0];
            let (m1, se1) = w[1];
            // One-sided 95% margin on the difference of means.
            let margin = 1.645 * (se0 + se1).sqrt();
            assert!(m1 >= m0 - margin, "{m1} < {m0} - {margin}");
        }
    }
}
