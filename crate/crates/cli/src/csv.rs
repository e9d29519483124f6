//! CSV report rendering: one row per sweep point, LF line endings, reals
//! at a fixed 6 significant digits.

use keyforge_core::harness::{SweepParam, SweepPointResult};

pub const HEADER: &str = "experiment,sweep_param_name,sweep_value,k_factor,node_count,\
                          tolerance,policy_mode,trials,successes,success_rate,ci95";

/// One CSV row.
#[derive(Debug, Clone)]
pub struct ResultRow {
    pub experiment: &'static str,
    pub sweep_param_name: &'static str,
    pub sweep_value: f64,
    pub k_factor: f64,
    pub node_count: usize,
    pub tolerance: u64,
    pub policy_mode: &'static str,
    pub trials: u64,
    pub successes: u64,
    pub success_rate: f64,
    pub ci95: f64,
}

impl ResultRow {
    pub fn from_result(
        experiment: &'static str,
        node_count: usize,
        fixed_tolerance: u64,
        policy_mode: &'static str,
        r: &SweepPointResult,
    ) -> Self {
        let tolerance = match r.sweep_param {
            SweepParam::Tolerance => r.sweep_value as u64,
            _ => fixed_tolerance,
        };
        Self {
            experiment,
            sweep_param_name: r.sweep_param.as_str(),
            sweep_value: r.sweep_value,
            k_factor: r.k_factor,
            node_count,
            tolerance,
            policy_mode,
            trials: r.trials,
            successes: r.successes,
            success_rate: r.success_rate,
            ci95: r.ci95_halfwidth,
        }
    }

    fn render(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.experiment,
            self.sweep_param_name,
            format_sig6(self.sweep_value),
            format_sig6(self.k_factor),
            self.node_count,
            self.tolerance,
            self.policy_mode,
            self.trials,
            self.successes,
            format_sig6(self.success_rate),
            format_sig6(self.ci95),
        )
    }
}

/// Header plus one line per row, LF line endings throughout.
pub fn render(rows: &[ResultRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.render());
        out.push('\n');
    }
    out
}

/// Fixed 6-significant-digit rendering. The decimal exponent comes from the
/// `{:e}` formatter rather than a log, so boundary values cannot waver.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp: i32 = format!("{:e}", x.abs())
        .split('e')
        .nth(1)
        .and_then(|e| e.parse().ok())
        .unwrap_or(0);
    if (-5..15).contains(&exp) {
        format!("{:.*}", (5 - exp).max(0) as usize, x)
    } else {
        format!("{x:.5e}")
    }
}
