//! Line-oriented `key = value` configuration files.
//!
//! `#` starts a comment, blank lines are ignored, unknown keys are errors.
//! Values use the same grammar as the command-line flags: a plain number
//! fixes a parameter, `A:B:STEPS` sweeps a linear grid, and a
//! comma-separated list gives explicit sweep values.

use keyforge_core::harness::{SimulationConfig, SuccessScope, Sweepable};
use keyforge_core::{FactorMode, PathLossMode};

/// Apply a config-file text over `cfg`. On error the message names the
/// offending key.
pub fn apply(cfg: &mut SimulationConfig, text: &str) -> Result<(), String> {
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected `key = value`, got `{line}`", lineno + 1))?;
        apply_key(cfg, key.trim(), value.trim())?;
    }
    Ok(())
}

fn apply_key(cfg: &mut SimulationConfig, key: &str, value: &str) -> Result<(), String> {
    let bad = |what: &str| format!("key `{key}`: invalid {what} `{value}`");
    match key {
        "trials" => cfg.trials = value.parse().map_err(|_| bad("count"))?,
        "nodes" => cfg.node_count = value.parse().map_err(|_| bad("count"))?,
        "seed" => cfg.master_seed = value.parse().map_err(|_| bad("seed"))?,
        "sigma_n" => cfg.sigma_n = value.parse().map_err(|_| bad("number"))?,
        "sigma_h" => cfg.sigma_h = parse_sweep_f64(value).map_err(|e| format!("key `{key}`: {e}"))?,
        "distance" => {
            cfg.distance_m = parse_sweep_f64(value).map_err(|e| format!("key `{key}`: {e}"))?
        }
        "tolerance" => {
            cfg.tolerance = parse_sweep_u64(value).map_err(|e| format!("key `{key}`: {e}"))?
        }
        "k_factors" => {
            cfg.k_factors = value
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| s.trim().parse().map_err(|_| bad("number list")))
                .collect::<Result<_, _>>()?
        }
        "carrier_hz" => cfg.carrier_hz = value.parse().map_err(|_| bad("frequency"))?,
        "pool_min" => cfg.pool_norm_min = value.parse().map_err(|_| bad("norm"))?,
        "pool_max" => cfg.pool_norm_max = value.parse().map_err(|_| bad("norm"))?,
        "policy" => {
            cfg.policy.mode = match value {
                "unlimited" => FactorMode::Unlimited,
                "limited" => FactorMode::Limited,
                _ => return Err(bad("policy (unlimited|limited)")),
            }
        }
        "trial_division_bound" => {
            cfg.policy.trial_division_bound = value.parse().map_err(|_| bad("bound"))?
        }
        "rho_max_iterations" => {
            cfg.policy.rho_max_iterations = value.parse().map_err(|_| bad("count"))?
        }
        "digit_threshold" => cfg.policy.digit_threshold = value.parse().map_err(|_| bad("count"))?,
        "pathloss" => {
            cfg.pathloss_mode = parse_pathloss(value).map_err(|e| format!("key `{key}`: {e}"))?
        }
        "success_scope" => {
            cfg.success_scope = match value {
                "all_nodes" => SuccessScope::AllNodes,
                "any_node" => SuccessScope::AnyNode,
                "node_0" => SuccessScope::Node0,
                _ => return Err(bad("scope (all_nodes|any_node|node_0)")),
            }
        }
        _ => return Err(format!("unknown configuration key `{key}`")),
    }
    Ok(())
}

/// `X` fixes the parameter, `A:B:STEPS` sweeps a linear grid, `v1,v2,…`
/// sweeps explicit values.
pub fn parse_sweep_f64(value: &str) -> Result<Sweepable<f64>, String> {
    if value.contains(':') {
        let parts: Vec<&str> = value.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected A:B:STEPS, got `{value}`"));
        }
        let a: f64 = parts[0].trim().parse().map_err(|_| format!("bad start `{}`", parts[0]))?;
        let b: f64 = parts[1].trim().parse().map_err(|_| format!("bad end `{}`", parts[1]))?;
        let steps: usize = parts[2].trim().parse().map_err(|_| format!("bad step count `{}`", parts[2]))?;
        if steps < 2 {
            return Err(format!("a sweep needs at least 2 steps, got {steps}"));
        }
        Ok(Sweepable::Sweep(keyforge_core::harness::linspace(a, b, steps)))
    } else if value.contains(',') {
        let vs: Vec<f64> = value
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse().map_err(|_| format!("bad number `{s}`")))
            .collect::<Result<_, _>>()?;
        if vs.is_empty() {
            return Err("empty sweep list".into());
        }
        Ok(Sweepable::Sweep(vs))
    } else {
        Ok(Sweepable::Fixed(
            value.parse().map_err(|_| format!("bad number `{value}`"))?,
        ))
    }
}

/// Integer variant of [`parse_sweep_f64`]; grids use integer rounding.
pub fn parse_sweep_u64(value: &str) -> Result<Sweepable<u64>, String> {
    if value.contains(',') {
        let vs: Vec<u64> = value
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse().map_err(|_| format!("bad integer `{s}`")))
            .collect::<Result<_, _>>()?;
        if vs.is_empty() {
            return Err("empty sweep list".into());
        }
        Ok(Sweepable::Sweep(vs))
    } else {
        Ok(Sweepable::Fixed(
            value.parse().map_err(|_| format!("bad integer `{value}`"))?,
        ))
    }
}

pub fn parse_pathloss(value: &str) -> Result<PathLossMode, String> {
    match value {
        "physical" => Ok(PathLossMode::Physical),
        "normalized" => Ok(PathLossMode::Normalized),
        _ => Err(format!("expected physical|normalized, got `{value}`")),
    }
}

fn sweep_f64_to_string(v: &Sweepable<f64>) -> String {
    match v {
        Sweepable::Fixed(x) => x.to_string(),
        Sweepable::Sweep(xs) => {
            let mut s = xs
                .iter()
                .map(f64::to_string)
                .collect::<Vec<_>>()
                .join(",");
            if xs.len() == 1 {
                s.push(','); // keep the list shape on reload
            }
            s
        }
    }
}

fn sweep_u64_to_string(v: &Sweepable<u64>) -> String {
    match v {
        Sweepable::Fixed(x) => x.to_string(),
        Sweepable::Sweep(xs) => {
            let mut s = xs.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
            if xs.len() == 1 {
                s.push(',');
            }
            s
        }
    }
}

/// Serialize an effective configuration; reloading the text over defaults
/// reproduces the configuration exactly.
pub fn to_config_string(cfg: &SimulationConfig) -> String {
    let mode = match cfg.policy.mode {
        FactorMode::Unlimited => "unlimited",
        FactorMode::Limited => "limited",
    };
    let pathloss = match cfg.pathloss_mode {
        PathLossMode::Physical => "physical",
        PathLossMode::Normalized => "normalized",
    };
    let scope = match cfg.success_scope {
        SuccessScope::AllNodes => "all_nodes",
        SuccessScope::AnyNode => "any_node",
        SuccessScope::Node0 => "node_0",
    };
    format!(
        "trials = {}\n\
         nodes = {}\n\
         seed = {}\n\
         sigma_n = {}\n\
         sigma_h = {}\n\
         distance = {}\n\
         tolerance = {}\n\
         k_factors = {}\n\
         carrier_hz = {}\n\
         pool_min = {}\n\
         pool_max = {}\n\
         policy = {}\n\
         trial_division_bound = {}\n\
         rho_max_iterations = {}\n\
         digit_threshold = {}\n\
         pathloss = {}\n\
         success_scope = {}\n",
        cfg.trials,
        cfg.node_count,
        cfg.master_seed,
        cfg.sigma_n,
        sweep_f64_to_string(&cfg.sigma_h),
        sweep_f64_to_string(&cfg.distance_m),
        sweep_u64_to_string(&cfg.tolerance),
        cfg.k_factors
            .iter()
            .map(f64::to_string)
            .collect::<Vec<_>>()
            .join(","),
        cfg.carrier_hz,
        cfg.pool_norm_min,
        cfg.pool_norm_max,
        mode,
        cfg.policy.trial_division_bound,
        cfg.policy.rho_max_iterations,
        cfg.policy.digit_threshold,
        pathloss,
        scope,
    )
}
