//! Monte Carlo engine: deterministic trials, parameter sweeps, success-rate
//! aggregation.
//!
//! Every trial owns an independent ChaCha substream keyed by
//! `(master_seed, k-factor index, channel-coordinate index, trial index)`.
//! The key deliberately excludes the tolerance and the factor policy: those
//! only affect the post-processing search, so sweeping them re-analyzes the
//! exact same channel noise. That is what makes tolerance nesting and the
//! limited-vs-unlimited comparison exact per trial rather than statistical,
//! and it makes results independent of execution order, so parallel and
//! sequential sweeps are bit-identical.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{self, Geometry, PathLossMode, RicianParams};
use crate::error::ConfigError;
use crate::factorint::{self, FactorPolicy};
use crate::gaussint::PrimePool;
use crate::protocol::{self, NodeState};
use crate::SPEED_OF_LIGHT_M_S;

/// Which nodes must recover the key for a trial to count as a success.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuccessScope {
    /// Every participant holds the key (decentralized agreement).
    AllNodes,
    AnyNode,
    Node0,
}

/// A parameter that is either fixed or swept over a list of values.
#[derive(Debug, Clone, PartialEq)]
pub enum Sweepable<T> {
    Fixed(T),
    Sweep(Vec<T>),
}

impl<T: Copy> Sweepable<T> {
    pub fn is_sweep(&self) -> bool {
        matches!(self, Sweepable::Sweep(_))
    }

    pub fn values(&self) -> Vec<T> {
        match self {
            Sweepable::Fixed(v) => vec![*v],
            Sweepable::Sweep(vs) => vs.clone(),
        }
    }
}

/// The sweep dimension of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    SigmaH,
    DistanceM,
    Tolerance,
}

impl SweepParam {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepParam::SigmaH => "sigma_h",
            SweepParam::DistanceM => "distance_m",
            SweepParam::Tolerance => "tolerance",
        }
    }
}

/// Inclusive linear grid with `points` entries from `start` to `end`.
pub fn linspace(start: f64, end: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        n => (0..n)
            .map(|i| start + (end - start) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

pub const DEFAULT_MASTER_SEED: u64 = 1729;

/// Full experiment description. The defaults are the common simulation
/// parameters: 20000 trials, 2 nodes, tolerance 1500, thermal deviation
/// 0.01, 15 m spacing, estimation-error sweep 0.01–0.1, K ∈ {0, 3, 20},
/// 2.4 GHz carrier.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub trials: u64,
    pub node_count: usize,
    pub sigma_n: f64,
    pub sigma_h: Sweepable<f64>,
    pub distance_m: Sweepable<f64>,
    pub tolerance: Sweepable<u64>,
    pub k_factors: Vec<f64>,
    pub carrier_hz: f64,
    pub pool_norm_min: u64,
    pub pool_norm_max: u64,
    pub pathloss_mode: PathLossMode,
    pub policy: FactorPolicy,
    pub success_scope: SuccessScope,
    pub master_seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            trials: 20_000,
            node_count: 2,
            sigma_n: 0.01,
            sigma_h: Sweepable::Sweep(linspace(0.01, 0.1, 10)),
            distance_m: Sweepable::Fixed(15.0),
            tolerance: Sweepable::Fixed(1500),
            k_factors: vec![0.0, 3.0, 20.0],
            carrier_hz: 2.4e9,
            pool_norm_min: 5,
            pool_norm_max: 61,
            pathloss_mode: PathLossMode::Normalized,
            policy: FactorPolicy::default(),
            success_scope: SuccessScope::AllNodes,
            master_seed: DEFAULT_MASTER_SEED,
        }
    }
}

impl SimulationConfig {
    /// The active sweep dimension; `None` when every parameter is fixed.
    /// More than one sweep is a configuration error.
    pub fn sweep_param(&self) -> Result<Option<SweepParam>, ConfigError> {
        let mut dims = Vec::new();
        if self.sigma_h.is_sweep() {
            dims.push(SweepParam::SigmaH);
        }
        if self.distance_m.is_sweep() {
            dims.push(SweepParam::DistanceM);
        }
        if self.tolerance.is_sweep() {
            dims.push(SweepParam::Tolerance);
        }
        match dims.len() {
            0 => Ok(None),
            1 => Ok(Some(dims[0])),
            _ => Err(ConfigError::ConflictingSweeps(format!(
                "{} are all sweep lists; exactly one parameter may sweep",
                dims.iter()
                    .map(|d| d.as_str())
                    .collect::<Vec<_>>()
                    .join(", ")
            ))),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::InvalidParameter(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.node_count < 2 {
            return bad(format!("node_count must be at least 2, got {}", self.node_count));
        }
        if !(self.sigma_n.is_finite() && self.sigma_n >= 0.0) {
            return bad(format!("sigma_n must be non-negative, got {}", self.sigma_n));
        }
        for v in self.sigma_h.values() {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("sigma_h values must be non-negative, got {v}"));
            }
        }
        for v in self.distance_m.values() {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("distance values must be positive, got {v}"));
            }
        }
        if self.sigma_h.values().is_empty()
            || self.distance_m.values().is_empty()
            || self.tolerance.values().is_empty()
        {
            return bad("sweep lists must be non-empty".into());
        }
        if self.k_factors.is_empty() {
            return bad("k_factors must be non-empty".into());
        }
        for &k in &self.k_factors {
            RicianParams::new(k).map_err(|e| ConfigError::InvalidParameter(e.to_string()))?;
        }
        if !(self.carrier_hz.is_finite() && self.carrier_hz > 0.0) {
            return bad(format!("carrier_hz must be positive, got {}", self.carrier_hz));
        }
        self.sweep_param()?;
        let pool = PrimePool::generate(self.pool_norm_min, self.pool_norm_max)?;
        if pool.len() < self.node_count {
            return Err(ConfigError::PoolTooSmall {
                nodes: self.node_count,
                pool: pool.len(),
            });
        }
        pool.max_product_norm(self.node_count)
            .ok_or(ConfigError::PoolProductOverflow {
                nodes: self.node_count,
            })?;
        Ok(())
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT_M_S / self.carrier_hz
    }
}

/// One fully resolved sweep cell: a single (sweep value, K) coordinate with
/// every scalar pinned. `run_trial` is a pure function of a cell and a
/// trial index.
#[derive(Debug, Clone)]
pub struct CellParams {
    pub sweep_param: SweepParam,
    pub sweep_value: f64,
    pub k_index: u32,
    /// Index of the sweep value when the sweep dimension shapes the channel
    /// (sigma_h or distance); 0 for tolerance sweeps, which must reuse the
    /// same channel randomness across cells.
    pub channel_coord_index: u32,
    pub trials: u64,
    pub node_count: usize,
    pub sigma_n: f64,
    pub sigma_h: f64,
    pub tolerance: u64,
    pub rician: RicianParams,
    pub pathloss_mode: PathLossMode,
    pub policy: FactorPolicy,
    pub success_scope: SuccessScope,
    pub master_seed: u64,
    pub pool: PrimePool,
    pub geometry: Geometry,
}

/// Expand a configuration into its sweep cells, ordered by
/// (sweep value, K factor).
pub fn resolve_cells(config: &SimulationConfig) -> Result<Vec<CellParams>, ConfigError> {
    config.validate()?;
    let pool = PrimePool::generate(config.pool_norm_min, config.pool_norm_max)?;
    let wavelength = config.wavelength_m();
    let sweep_param = config.sweep_param()?.unwrap_or(SweepParam::SigmaH);

    let sweep_values: Vec<f64> = match sweep_param {
        SweepParam::SigmaH => config.sigma_h.values(),
        SweepParam::DistanceM => config.distance_m.values(),
        SweepParam::Tolerance => config.tolerance.values().iter().map(|&t| t as f64).collect(),
    };

    let fixed_sigma_h = config.sigma_h.values()[0];
    let fixed_distance = config.distance_m.values()[0];
    let fixed_tolerance = config.tolerance.values()[0];

    let mut cells = Vec::with_capacity(sweep_values.len() * config.k_factors.len());
    for (ci, &value) in sweep_values.iter().enumerate() {
        let (sigma_h, distance, tolerance) = match sweep_param {
            SweepParam::SigmaH => (value, fixed_distance, fixed_tolerance),
            SweepParam::DistanceM => (fixed_sigma_h, value, fixed_tolerance),
            SweepParam::Tolerance => (fixed_sigma_h, fixed_distance, value as u64),
        };
        let channel_coord_index = match sweep_param {
            SweepParam::SigmaH | SweepParam::DistanceM => ci as u32,
            SweepParam::Tolerance => 0,
        };
        let geometry = Geometry::equidistant(config.node_count, distance, wavelength)
            .map_err(|e| ConfigError::InvalidParameter(e.to_string()))?;
        for (ki, &k) in config.k_factors.iter().enumerate() {
            cells.push(CellParams {
                sweep_param,
                sweep_value: value,
                k_index: ki as u32,
                channel_coord_index,
                trials: config.trials,
                node_count: config.node_count,
                sigma_n: config.sigma_n,
                sigma_h,
                tolerance,
                rician: RicianParams::new(k)
                    .map_err(|e| ConfigError::InvalidParameter(e.to_string()))?,
                pathloss_mode: config.pathloss_mode,
                policy: config.policy,
                success_scope: config.success_scope,
                master_seed: config.master_seed,
                pool: pool.clone(),
                geometry: geometry.clone(),
            });
        }
    }
    Ok(cells)
}

/// Counter-based substream: a fresh ChaCha keyed directly by the trial
/// coordinates, so any trial can be generated in isolation and in any
/// order.
fn trial_rng(master_seed: u64, k_index: u32, coord_index: u32, trial_index: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&master_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&trial_index.to_le_bytes());
    seed[16..20].copy_from_slice(&k_index.to_le_bytes());
    seed[20..24].copy_from_slice(&coord_index.to_le_bytes());
    seed[24..32].copy_from_slice(b"kfmc0001");
    ChaCha8Rng::from_seed(seed)
}

/// Uniform ordered draw of `amount` distinct pool indices (partial
/// Fisher–Yates; the draw order assigns primes to nodes).
fn draw_distinct<R: Rng + ?Sized>(rng: &mut R, pool_len: usize, amount: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pool_len).collect();
    for slot in 0..amount {
        let j = rng.random_range(slot..pool_len);
        idx.swap(slot, j);
    }
    idx.truncate(amount);
    idx
}

/// Run one trial: draw primes, realize the channel, run the round, and
/// search the tolerance window per node. Returns one success flag per node.
/// Deterministic in `(cell, trial_index)`; degenerate channels are recorded
/// as failures, never as errors.
pub fn run_trial(cell: &CellParams, trial_index: u64) -> Vec<bool> {
    let mut rng = trial_rng(
        cell.master_seed,
        cell.k_index,
        cell.channel_coord_index,
        trial_index,
    );
    let picks = draw_distinct(&mut rng, cell.pool.len(), cell.node_count);
    let nodes: Vec<NodeState> = picks
        .iter()
        .enumerate()
        .map(|(slot, &i)| NodeState::new(slot, cell.pool.members()[i]))
        .collect();
    let realization = channel::realize(
        &cell.geometry,
        &cell.rician,
        cell.sigma_h,
        cell.pathloss_mode,
        &mut rng,
    )
    .expect("geometry validated at configuration time");
    let outcome = protocol::run_round(&nodes, &realization, cell.sigma_n, &mut rng);
    // Ground truth must be complete even when the policy under test is
    // limited.
    let truth = factorint::factor(outcome.true_norm, &cell.policy.as_unlimited())
        .expect("true norm is a product of pool primes");
    (0..cell.node_count)
        .map(|j| {
            !outcome.node_failed[j]
                && factorint::noisy_factor_search(
                    outcome.noisy_norms[j],
                    &truth,
                    cell.tolerance,
                    &cell.policy,
                )
                .success
        })
        .collect()
}

/// Collapse per-node flags into one trial verdict.
pub fn trial_success(scope: SuccessScope, node_flags: &[bool]) -> bool {
    match scope {
        SuccessScope::AllNodes => node_flags.iter().all(|&f| f),
        SuccessScope::AnyNode => node_flags.iter().any(|&f| f),
        SuccessScope::Node0 => node_flags[0],
    }
}

/// Success statistics at one sweep coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPointResult {
    pub sweep_param: SweepParam,
    pub sweep_value: f64,
    pub k_factor: f64,
    pub successes: u64,
    pub trials: u64,
    pub success_rate: f64,
    pub ci95_halfwidth: f64,
}

fn cell_result(cell: &CellParams, successes: u64) -> SweepPointResult {
    let rate = successes as f64 / cell.trials as f64;
    SweepPointResult {
        sweep_param: cell.sweep_param,
        sweep_value: cell.sweep_value,
        k_factor: cell.rician.k_factor(),
        successes,
        trials: cell.trials,
        success_rate: rate,
        ci95_halfwidth: 1.96 * (rate * (1.0 - rate) / cell.trials as f64).sqrt(),
    }
}

fn cell_successes_seq(cell: &CellParams) -> u64 {
    (0..cell.trials)
        .filter(|&t| trial_success(cell.success_scope, &run_trial(cell, t)))
        .count() as u64
}

#[cfg(feature = "parallel")]
fn cell_successes_par(cell: &CellParams) -> u64 {
    use rayon::prelude::*;
    (0..cell.trials)
        .into_par_iter()
        .filter(|&t| trial_success(cell.success_scope, &run_trial(cell, t)))
        .count() as u64
}

fn sweep_impl<F>(
    config: &SimulationConfig,
    successes_of: impl Fn(&CellParams) -> u64,
    mut progress: F,
) -> Result<Vec<SweepPointResult>, ConfigError>
where
    F: FnMut(usize, usize, &SweepPointResult),
{
    let cells = resolve_cells(config)?;
    let total = cells.len();
    let mut results = Vec::with_capacity(total);
    for (done, cell) in cells.iter().enumerate() {
        let result = cell_result(cell, successes_of(cell));
        progress(done + 1, total, &result);
        results.push(result);
    }
    Ok(results)
}

/// Run the configured sweep; trials execute on the rayon pool when the
/// `parallel` feature is enabled, sequentially otherwise. Results are
/// bit-identical either way.
pub fn run_sweep(config: &SimulationConfig) -> Result<Vec<SweepPointResult>, ConfigError> {
    run_sweep_with_progress(config, |_, _, _| {})
}

/// [`run_sweep`] with a per-cell progress callback
/// `(cells_done, cells_total, result)`.
pub fn run_sweep_with_progress<F>(
    config: &SimulationConfig,
    progress: F,
) -> Result<Vec<SweepPointResult>, ConfigError>
where
    F: FnMut(usize, usize, &SweepPointResult),
{
    #[cfg(feature = "parallel")]
    return sweep_impl(config, cell_successes_par, progress);
    #[cfg(not(feature = "parallel"))]
    return sweep_impl(config, cell_successes_seq, progress);
}

/// Strictly sequential sweep, available regardless of features.
pub fn run_sweep_seq(config: &SimulationConfig) -> Result<Vec<SweepPointResult>, ConfigError> {
    sweep_impl(config, cell_successes_seq, |_, _, _| {})
}

/// Parallel sweep on the current rayon pool.
#[cfg(feature = "parallel")]
pub fn run_sweep_par(config: &SimulationConfig) -> Result<Vec<SweepPointResult>, ConfigError> {
    sweep_impl(config, cell_successes_par, |_, _, _| {})
}

/// Exact success probability in the vanishing-signal limit, where a node's
/// recovered key degenerates to its own prime and the window search succeeds
/// iff `|norm(x_j) − Π norms| ≤ tolerance`.
///
/// Enumerates every ordered distinct draw of `node_count` primes and applies
/// the per-node condition under the given scope (the scope matching the
/// measured sweep must be used when comparing against simulated rates).
pub fn plateau_oracle(
    pool: &PrimePool,
    node_count: usize,
    tolerance: u64,
    scope: SuccessScope,
) -> f64 {
    assert!(node_count >= 2, "need at least 2 nodes");
    assert!(pool.len() >= node_count, "pool too small for draw");
    let norms: Vec<u64> = pool.members().iter().map(|m| m.norm()).collect();

    fn recurse(
        norms: &[u64],
        scope: SuccessScope,
        tolerance: u64,
        picked: &mut Vec<u64>,
        used: &mut Vec<bool>,
        depth_left: usize,
        hits: &mut u64,
        total: &mut u64,
    ) {
        if depth_left == 0 {
            let product = picked
                .iter()
                .try_fold(1u64, |acc, &q| acc.checked_mul(q))
                .expect("pool capacity validated");
            let node_ok = |q: u64| product.abs_diff(q) <= tolerance;
            let ok = match scope {
                SuccessScope::AllNodes => picked.iter().all(|&q| node_ok(q)),
                SuccessScope::AnyNode => picked.iter().any(|&q| node_ok(q)),
                SuccessScope::Node0 => node_ok(picked[0]),
            };
            *total += 1;
            if ok {
                *hits += 1;
            }
            return;
        }
        for i in 0..norms.len() {
            if used[i] {
                continue;
            }
            used[i] = true;
            picked.push(norms[i]);
            recurse(norms, scope, tolerance, picked, used, depth_left - 1, hits, total);
            picked.pop();
            used[i] = false;
        }
    }

    let mut hits = 0u64;
    let mut total = 0u64;
    recurse(
        &norms,
        scope,
        tolerance,
        &mut Vec::new(),
        &mut vec![false; norms.len()],
        node_count,
        &mut hits,
        &mut total,
    );
    hits as f64 / total as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ideal_config() -> SimulationConfig {
        SimulationConfig {
            trials: 50,
            sigma_n: 0.0,
            sigma_h: Sweepable::Fixed(0.0),
            ..SimulationConfig::default()
        }
    }

    #[test]
    fn trials_are_deterministic() {
        let cfg = SimulationConfig {
            trials: 10,
            sigma_h: Sweepable::Fixed(0.05),
            ..SimulationConfig::default()
        };
        let cells = resolve_cells(&cfg).unwrap();
        for cell in &cells {
            for t in 0..10 {
                assert_eq!(run_trial(cell, t), run_trial(cell, t));
            }
        }
    }

    #[test]
    fn ideal_channel_always_succeeds() {
        for nodes in [2usize, 3] {
            let cfg = SimulationConfig {
                node_count: nodes,
                ..ideal_config()
            };
            for r in run_sweep(&cfg).unwrap() {
                assert_eq!(r.successes, r.trials, "N={nodes} K={}", r.k_factor);
                assert_eq!(r.success_rate, 1.0);
            }
        }
    }

    #[test]
    fn pessimal_corner_rarely_succeeds() {
        let cfg = SimulationConfig {
            trials: 1000,
            sigma_h: Sweepable::Fixed(0.1),
            distance_m: Sweepable::Fixed(150.0),
            tolerance: Sweepable::Fixed(0),
            k_factors: vec![0.0],
            ..SimulationConfig::default()
        };
        let results = run_sweep(&cfg).unwrap();
        assert_eq!(results.len(), 1);
        assert!(
            results[0].success_rate < 0.01,
            "rate = {}",
            results[0].success_rate
        );
    }

    #[test]
    fn sweep_shape_and_ordering() {
        let cfg = SimulationConfig {
            trials: 4,
            ..SimulationConfig::default()
        };
        let results = run_sweep(&cfg).unwrap();
        assert_eq!(results.len(), 30); // 10 sigma_h values x 3 K values
        let sigmas = linspace(0.01, 0.1, 10);
        for (i, r) in results.iter().enumerate() {
            assert_eq!(r.sweep_param, SweepParam::SigmaH);
            assert_eq!(r.sweep_value, sigmas[i / 3]);
            assert_eq!(r.k_factor, [0.0, 3.0, 20.0][i % 3]);
        }
    }

    #[test]
    fn conflicting_sweeps_are_rejected() {
        let cfg = SimulationConfig {
            distance_m: Sweepable::Sweep(vec![1.0, 15.0]),
            ..SimulationConfig::default()
        };
        assert!(matches!(
            cfg.validate(),
            Err(ConfigError::ConflictingSweeps(_))
        ));
    }

    #[test]
    fn tolerance_sweep_shares_channel_randomness() {
        let cfg = SimulationConfig {
            trials: 300,
            sigma_h: Sweepable::Fixed(0.05),
            tolerance: Sweepable::Sweep(vec![0, 500, 1500, 3000]),
            k_factors: vec![3.0],
            ..SimulationConfig::default()
        };
        let cells = resolve_cells(&cfg).unwrap();
        assert_eq!(cells.len(), 4);
        // Per-trial success sets must be nested as the window widens.
        for t in 0..cfg.trials {
            let mut prev = false;
            for cell in &cells {
                let now = trial_success(cell.success_scope, &run_trial(cell, t));
                assert!(now || !prev, "trial {t} succeeded at a narrower window only");
                prev = now;
            }
        }
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let cfg = SimulationConfig {
            trials: 64,
            sigma_h: Sweepable::Sweep(linspace(0.01, 0.1, 3)),
            ..SimulationConfig::default()
        };
        let seq = run_sweep_seq(&cfg).unwrap();
        let auto = run_sweep(&cfg).unwrap();
        assert_eq!(seq, auto);
        #[cfg(feature = "parallel")]
        assert_eq!(seq, run_sweep_par(&cfg).unwrap());
    }

    #[test]
    fn plateau_oracle_examples() {
        let tiny = PrimePool::generate(5, 13).unwrap(); // norms {5, 13}
        assert_eq!(plateau_oracle(&tiny, 2, 1500, SuccessScope::AllNodes), 1.0);
        assert_eq!(plateau_oracle(&tiny, 2, 10, SuccessScope::AllNodes), 0.0);

        let pool = PrimePool::generate(5, 61).unwrap();
        let max_product = pool.max_product_norm(2).unwrap();
        for scope in [SuccessScope::AllNodes, SuccessScope::AnyNode, SuccessScope::Node0] {
            assert_eq!(plateau_oracle(&pool, 2, max_product, scope), 1.0);
        }
        // Reference-node probability dominates the all-nodes probability.
        let all = plateau_oracle(&pool, 2, 1500, SuccessScope::AllNodes);
        let one = plateau_oracle(&pool, 2, 1500, SuccessScope::Node0);
        assert!(all <= one);
    }

    #[test]
    fn pool_capacity_is_validated() {
        let cfg = SimulationConfig {
            node_count: 9,
            ..SimulationConfig::default()
        };
        assert_eq!(
            cfg.validate(),
            Err(ConfigError::PoolTooSmall { nodes: 9, pool: 8 })
        );
    }
}
