//! Closed-form thresholds and bounds.

use serde::{Deserialize, Serialize};

use crate::error::{domain, parameter, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdVariant {
    /// `1 − ((1 − c)/(L − 1))^{1/(L − 1)}`.
    Corollary,
    /// `(ln(L − 1) − ln(1 − c))/(L − 1)`.
    Remark,
}

fn log_in(x: f64, base: f64) -> f64 {
    x.ln() / base.ln()
}

fn check_log_params(k: f64, base: f64) -> Result<()> {
    if !(k >= 1.0 && base > 1.0) {
        return Err(parameter("need k >= 1 and a log base above 1"));
    }
    Ok(())
}

fn threshold_from_level(level: f64, c: f64, variant: ThresholdVariant) -> Result<f64> {
    if !(0.0..=1.0).contains(&c) {
        return Err(parameter(format!("c = {c} is outside [0, 1]")));
    }
    if level.is_nan() || level <= 1.0 {
        return Err(domain(format!("log level {level} must exceed 1")));
    }
    if c == 1.0 {
        return Ok(1.0);
    }
    let m = level - 1.0;
    let p = match variant {
        ThresholdVariant::Corollary => 1.0 - ((1.0 - c) / m).powf(1.0 / m),
        ThresholdVariant::Remark => (m.ln() - (1.0 - c).ln()) / m,
    };
    Ok(p.clamp(0.0, 1.0))
}

/// Edge probability above which Erdős–Rényi graphs meet the
/// logarithmic-cost condition, with `L = log_base(n)^k`.
pub fn er_fast_threshold(n: usize, k: f64, c: f64, variant: ThresholdVariant, log_base: f64) -> Result<f64> {
    check_log_params(k, log_base)?;
    let level = log_in(n as f64, log_base).powf(k);
    threshold_from_level(level, c, variant)
}

/// The multi-parent threshold: the single-parent one evaluated at the level
/// `log(c1 · log^k(n))^k`.
pub fn er_multiparent_threshold(n: usize, k: f64, c0: f64, c1: f64, log_base: f64) -> Result<f64> {
    check_log_params(k, log_base)?;
    if c1 <= 0.0 {
        return Err(parameter("c1 must be positive"));
    }
    let inner = c1 * log_in(n as f64, log_base).powf(k);
    let level = log_in(inner, log_base).powf(k);
    threshold_from_level(level, c0, ThresholdVariant::Corollary)
}

/// Samples per intervention setting so that every ancestor and descendant
/// declaration of the statistical search holds with probability `1 − δ`:
/// `⌈max(32/Δ² · ln(8nK/δ), 8/ε² · ln(8n²K²/δ))⌉`.
pub fn required_batch_size(n: usize, k: usize, reward_gap: f64, effect_gap: f64, failure_prob: f64) -> Result<u64> {
    if n == 0 || k == 0 {
        return Err(parameter("node and category counts must be positive"));
    }
    if !(reward_gap > 0.0 && effect_gap > 0.0) {
        return Err(parameter("gaps must be positive"));
    }
    if !(0.0 < failure_prob && failure_prob < 1.0) {
        return Err(parameter("failure probability must lie in (0, 1)"));
    }
    let (n, k) = (n as f64, k as f64);
    let reward = 32.0 / (reward_gap * reward_gap) * (8.0 * n * k / failure_prob).ln();
    let effect = 8.0 / (effect_gap * effect_gap) * (8.0 * n * n * k * k / failure_prob).ln();
    Ok(reward.max(effect).ceil().max(1.0) as u64)
}

/// `(n + 1)(d − 1) / (d (log_d(n + 1) + 1))`, a lower bound on the expected
/// interventions in a perfect `d`-ary tree where `n + 1` is a power of `d`.
pub fn dary_tree_bound(n: usize, d: usize) -> Result<f64> {
    if d < 2 {
        return Err(parameter(format!("arity must be at least 2, got {d}")));
    }
    let mut power = d;
    let mut levels = 1u32;
    while power < n + 1 {
        power = power
            .checked_mul(d)
            .ok_or_else(|| parameter("tree size overflows"))?;
        levels += 1;
    }
    if n == 0 || power != n + 1 {
        return Err(parameter(format!("{n} + 1 is not a power of {d}")));
    }
    let (n, d) = (n as f64, d as f64);
    Ok((n + 1.0) * (d - 1.0) / (d * (f64::from(levels) + 1.0)))
}

/// `H_n = Σ_{i=1}^{n} 1/i`.
pub fn harmonic(n: usize) -> f64 {
    (1..=n).rev().map(|i| 1.0 / i as f64).sum()
}
