//! Experiment presets: one per reported figure family. A preset is a set of
//! configuration overrides on top of the defaults; comparison presets
//! expand into several blocks sharing one seed.

use clap::ValueEnum;

use keyforge_core::harness::{SimulationConfig, Sweepable};
use keyforge_core::FactorMode;

/// Fixed estimation-error deviation used by presets that must pin sigma_h
/// (the distance experiment's published constant).
pub const FIXED_SIGMA_H: f64 = 0.03;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Success rate vs. channel-estimation error.
    SweepError,
    /// Success rate vs. node spacing at fixed sigma_h.
    SweepDistance,
    /// Success rate vs. tolerance window at fixed sigma_h.
    SweepTolerance,
    /// Error sweep under unlimited and limited factorization, same seed.
    CompareLimited,
    /// Error sweep with 2 and with 3 nodes, same seed.
    CompareNodes,
    /// One coordinate, no sweep.
    SingleRun,
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::SweepError => "sweep-error",
            Preset::SweepDistance => "sweep-distance",
            Preset::SweepTolerance => "sweep-tolerance",
            Preset::CompareLimited => "compare-limited",
            Preset::CompareNodes => "compare-nodes",
            Preset::SingleRun => "single-run",
        }
    }

    /// Apply this preset's overrides to a default configuration.
    pub fn apply(&self, cfg: &mut SimulationConfig) {
        match self {
            // The defaults already describe the error sweep; the comparison
            // presets reuse it and differ only per block.
            Preset::SweepError | Preset::CompareLimited | Preset::CompareNodes => {}
            Preset::SweepDistance => {
                cfg.sigma_h = Sweepable::Fixed(FIXED_SIGMA_H);
                cfg.distance_m = Sweepable::Sweep(vec![
                    1.0, 5.0, 10.0, 25.0, 50.0, 75.0, 100.0, 125.0, 150.0,
                ]);
            }
            Preset::SweepTolerance => {
                cfg.sigma_h = Sweepable::Fixed(FIXED_SIGMA_H);
                cfg.tolerance = Sweepable::Sweep(vec![0, 500, 1500, 3000]);
            }
            Preset::SingleRun => {
                cfg.sigma_h = Sweepable::Fixed(FIXED_SIGMA_H);
            }
        }
    }

    /// Expand the effective configuration into the blocks this preset runs.
    /// Every block shares the master seed, so comparison presets see the
    /// exact same trials.
    pub fn blocks(&self, cfg: &SimulationConfig) -> Vec<SimulationConfig> {
        match self {
            Preset::CompareLimited => {
                let mut unlimited = cfg.clone();
                unlimited.policy.mode = FactorMode::Unlimited;
                let mut limited = cfg.clone();
                limited.policy.mode = FactorMode::Limited;
                vec![unlimited, limited]
            }
            Preset::CompareNodes => {
                let mut two = cfg.clone();
                two.node_count = 2;
                let mut three = cfg.clone();
                three.node_count = 3;
                vec![two, three]
            }
            _ => vec![cfg.clone()],
        }
    }
}
