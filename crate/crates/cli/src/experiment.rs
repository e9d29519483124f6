//! Experiment execution: expand the preset into blocks, run the sweeps,
//! emit the CSV report and a per-K summary.

use std::io::Write;
use std::path::Path;

use keyforge_core::harness::{run_sweep_with_progress, SimulationConfig, SweepPointResult};
use keyforge_core::FactorMode;

use crate::csv::{self, ResultRow};
use crate::preset::Preset;

#[derive(Debug)]
pub enum RunError {
    /// Invalid preset/config combination, detected before any simulation.
    Config(String),
    Io(std::io::Error),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(msg) => write!(f, "{msg}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

fn policy_label(cfg: &SimulationConfig) -> &'static str {
    match cfg.policy.mode {
        FactorMode::Unlimited => "unlimited",
        FactorMode::Limited => "limited",
    }
}

/// Run every block of the preset and return the CSV rows in emission order.
pub fn collect_rows(preset: Preset, config: &SimulationConfig) -> Result<Vec<ResultRow>, RunError> {
    let blocks = preset.blocks(config);
    for block in &blocks {
        block.validate().map_err(|e| RunError::Config(e.to_string()))?;
    }
    let mut rows = Vec::new();
    for block in &blocks {
        let label = policy_label(block);
        let nodes = block.node_count;
        let fixed_tolerance = block.tolerance.values()[0];
        let progress = |done: usize, total: usize, r: &SweepPointResult| {
            eprintln!(
                "[{} n={nodes} {label} {done}/{total}] {}={} K={} rate={:.4}",
                preset.name(),
                r.sweep_param.as_str(),
                csv::format_sig6(r.sweep_value),
                r.k_factor,
                r.success_rate,
            );
        };
        let results = run_sweep_with_progress(block, progress)
            .map_err(|e| RunError::Config(e.to_string()))?;
        rows.extend(
            results
                .iter()
                .map(|r| ResultRow::from_result(preset.name(), nodes, fixed_tolerance, label, r)),
        );
    }
    Ok(rows)
}

/// One line per (block, K): the min and max rate across the sweep.
pub fn summaries(rows: &[ResultRow]) -> Vec<String> {
    let mut keys: Vec<(usize, &'static str, f64)> = Vec::new();
    for row in rows {
        let key = (row.node_count, row.policy_mode, row.k_factor);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.iter()
        .map(|&(nodes, policy, k)| {
            let rates: Vec<f64> = rows
                .iter()
                .filter(|r| (r.node_count, r.policy_mode, r.k_factor) == (nodes, policy, k))
                .map(|r| r.success_rate)
                .collect();
            let min = rates.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = rates.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            format!(
                "{} nodes, {policy}, K={}: success rate {} .. {} over {} points",
                nodes,
                csv::format_sig6(k),
                csv::format_sig6(min),
                csv::format_sig6(max),
                rates.len()
            )
        })
        .collect()
}

/// Execute a preset and write its CSV to `out` (`-` for standard output).
pub fn run_experiment(
    preset: Preset,
    config: &SimulationConfig,
    out: &Path,
) -> Result<(), RunError> {
    let rows = collect_rows(preset, config)?;
    let text = csv::render(&rows);
    if out.as_os_str() == "-" {
        std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(RunError::Io)?;
    } else {
        std::fs::write(out, text.as_bytes()).map_err(RunError::Io)?;
        println!("wrote {} rows to {}", rows.len(), out.display());
    }
    for line in summaries(&rows) {
        println!("{line}");
    }
    Ok(())
}
