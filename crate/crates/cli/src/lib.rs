//! Command-line front end for the key-agreement simulator: experiment
//! presets mirroring the standard figure families, `key = value`
//! configuration files, and CSV report emission.
//!
//! Configuration is merged defaults ← preset ← config file ← flags,
//! rightmost wins.

pub mod config_file;
pub mod csv;
pub mod experiment;
pub mod preset;

use clap::Parser;

use keyforge_core::harness::{SimulationConfig, Sweepable};
use keyforge_core::FactorMode;

pub use experiment::{run_experiment, RunError};
pub use preset::Preset;

/// Exit statuses: 0 success, 1 usage/config error, 2 runtime I/O error.
pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_IO: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "afc-keyforge",
    version,
    about = "Monte Carlo error analysis of over-the-air secret-key agreement",
    after_help = "Sweep syntax: a plain number fixes the parameter; A:B:STEPS sweeps a linear grid."
)]
pub struct Cli {
    /// Experiment preset.
    #[arg(value_enum)]
    pub preset: Preset,
    /// `key = value` configuration file applied over the preset.
    #[arg(long, value_name = "FILE")]
    pub config: Option<std::path::PathBuf>,
    /// Monte Carlo trials per sweep point.
    #[arg(long, value_name = "N")]
    pub trials: Option<u64>,
    /// Number of nodes.
    #[arg(long, value_name = "N")]
    pub nodes: Option<usize>,
    /// Master seed for the deterministic trial streams.
    #[arg(long, value_name = "S")]
    pub seed: Option<u64>,
    /// Thermal-noise standard deviation.
    #[arg(long = "sigma-n", value_name = "X")]
    pub sigma_n: Option<f64>,
    /// Channel-estimation error deviation: X or A:B:STEPS.
    #[arg(long = "sigma-h", value_name = "X|A:B:STEPS")]
    pub sigma_h: Option<String>,
    /// Node spacing in meters: X or A:B:POINTS.
    #[arg(long, value_name = "X|A:B:POINTS")]
    pub distance: Option<String>,
    /// Factorization tolerance window half-width.
    #[arg(long, value_name = "N")]
    pub tolerance: Option<u64>,
    /// Rician K factor; repeat the flag for several curves.
    #[arg(long = "k-factor", value_name = "X")]
    pub k_factor: Vec<f64>,
    /// Smallest pool norm.
    #[arg(long = "pool-min", value_name = "N")]
    pub pool_min: Option<u64>,
    /// Largest pool norm.
    #[arg(long = "pool-max", value_name = "N")]
    pub pool_max: Option<u64>,
    /// Restrict factorization to bounded trial division.
    #[arg(long)]
    pub limited: bool,
    /// Path-loss model.
    #[arg(long, value_name = "MODE")]
    pub pathloss: Option<String>,
    /// CSV output path; `-` writes the CSV to standard output.
    #[arg(long, value_name = "PATH", default_value = "results.csv")]
    pub out: std::path::PathBuf,
}

impl Cli {
    /// Produce the effective configuration: defaults, then preset, then
    /// file, then flags.
    pub fn effective_config(&self) -> Result<SimulationConfig, String> {
        let mut cfg = SimulationConfig::default();
        self.preset.apply(&mut cfg);
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read config file {}: {e}", path.display()))?;
            config_file::apply(&mut cfg, &text)?;
        }
        self.apply_flags(&mut cfg)?;
        if self.nodes.is_some() && self.preset == Preset::CompareNodes {
            return Err("--nodes conflicts with the compare-nodes preset, which runs \
                        2- and 3-node blocks by definition"
                .into());
        }
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }

    fn apply_flags(&self, cfg: &mut SimulationConfig) -> Result<(), String> {
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(n) = self.nodes {
            cfg.node_count = n;
        }
        if let Some(s) = self.seed {
            cfg.master_seed = s;
        }
        if let Some(v) = self.sigma_n {
            cfg.sigma_n = v;
        }
        if let Some(spec) = &self.sigma_h {
            cfg.sigma_h = config_file::parse_sweep_f64(spec)
                .map_err(|e| format!("--sigma-h: {e}"))?;
        }
        if let Some(spec) = &self.distance {
            cfg.distance_m = config_file::parse_sweep_f64(spec)
                .map_err(|e| format!("--distance: {e}"))?;
        }
        if let Some(t) = self.tolerance {
            cfg.tolerance = Sweepable::Fixed(t);
        }
        if !self.k_factor.is_empty() {
            cfg.k_factors = self.k_factor.clone();
        }
        if let Some(m) = self.pool_min {
            cfg.pool_norm_min = m;
        }
        if let Some(m) = self.pool_max {
            cfg.pool_norm_max = m;
        }
        if self.limited {
            cfg.policy.mode = FactorMode::Limited;
        }
        if let Some(mode) = &self.pathloss {
            cfg.pathloss_mode = config_file::parse_pathloss(mode)
                .map_err(|e| format!("--pathloss: {e}"))?;
        }
        Ok(())
    }
}
