use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{parameter, Result};
use crate::gen::FamilyKind;
use crate::theory::{er_fast_threshold, er_multiparent_threshold, ThresholdVariant};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    ExactVsEmpirical,
    ErFast,
    ErSlow,
    Multiparent,
    RegretHead2head,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::ExactVsEmpirical => "exact_vs_empirical",
            ExperimentKind::ErFast => "er_fast",
            ExperimentKind::ErSlow => "er_slow",
            ExperimentKind::Multiparent => "multiparent",
            ExperimentKind::RegretHead2head => "regret_head2head",
        }
    }
}

/// How the edge probability of a sweep point is chosen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum PRule {
    Explicit { p: f64 },
    /// Sweeps the listed probabilities at every `n`.
    ExplicitGrid { values: Vec<f64> },
    /// `count` log-spaced probabilities in `[lo, hi]`, swept at every `n`.
    LogGrid { lo: f64, hi: f64, count: usize },
    /// `1 − ((1 − c)/(L − 1))^{1/(L − 1)}` with `L = log_base(n)^k`.
    CorollaryThreshold {
        c: f64,
        #[serde(default = "one")]
        k: f64,
        #[serde(default = "two")]
        base: f64,
    },
    /// `ln(n)/n`.
    LnNOverN,
    /// The corollary threshold at level `log(c1 · log^k n)^k`.
    MultiparentThreshold {
        c0: f64,
        c1: f64,
        #[serde(default = "one")]
        k: f64,
        #[serde(default = "two")]
        base: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

impl PRule {
    /// Probabilities swept at node count `n`.
    pub fn values(&self, n: usize) -> Result<Vec<f64>> {
        let v = match self {
            PRule::Explicit { p } => vec![*p],
            PRule::ExplicitGrid { values } => values.clone(),
            PRule::LogGrid { lo, hi, count } => {
                if !(*lo > 0.0 && lo <= hi && *count >= 1) {
                    return Err(parameter("log grid needs 0 < lo <= hi and count >= 1"));
                }
                if *count == 1 {
                    vec![*lo]
                } else {
                    let (a, b) = (lo.ln(), hi.ln());
                    (0..*count)
                        .map(|i| (a + (b - a) * i as f64 / (*count - 1) as f64).exp())
                        .collect()
                }
            }
            PRule::CorollaryThreshold { c, k, base } => {
                vec![er_fast_threshold(n, *k, *c, ThresholdVariant::Corollary, *base)?]
            }
            PRule::LnNOverN => vec![((n as f64).ln() / n as f64).min(1.0)],
            PRule::MultiparentThreshold { c0, c1, k, base } => {
                vec![er_multiparent_threshold(n, *k, *c0, *c1, *base)?]
            }
        };
        if let Some(bad) = v.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(parameter(format!("edge probability {bad} outside [0, 1]")));
        }
        Ok(v)
    }
}

/// Settings of the regret comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegretSettings {
    #[serde(default = "default_horizon")]
    pub horizon: u64,
    #[serde(default = "default_k")]
    pub k: usize,
    /// Gaps the model is built to exceed and the detector assumes.
    #[serde(default = "default_gap")]
    pub reward_gap: f64,
    #[serde(default = "default_gap")]
    pub effect_gap: f64,
    /// Failure probability; `None` uses `min{1, √(K ln T / T)}`.
    #[serde(default)]
    pub failure_prob: Option<f64>,
    /// Rounds at which cumulative regret is reported.
    #[serde(default = "default_checkpoints")]
    pub checkpoints: Vec<u64>,
    #[serde(default)]
    pub budget: crate::bandit::Budget,
}

fn default_horizon() -> u64 {
    100_000
}

fn default_k() -> usize {
    2
}

fn default_gap() -> f64 {
    0.3
}

fn default_checkpoints() -> Vec<u64> {
    vec![1_000, 10_000, 100_000]
}

impl Default for RegretSettings {
    fn default() -> Self {
        RegretSettings {
            horizon: default_horizon(),
            k: default_k(),
            reward_gap: default_gap(),
            effect_gap: default_gap(),
            failure_prob: None,
            checkpoints: default_checkpoints(),
            budget: Default::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub n_list: Vec<usize>,
    pub p_rule: PRule,
    #[serde(default = "default_runs")]
    pub runs_per_point: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    /// Parent counts swept by the multi-parent experiment.
    #[serde(default = "default_m_list")]
    pub m_list: Vec<usize>,
    /// Draw a new graph for every run instead of one graph per point.
    /// Defaults to one graph per point for `exact_vs_empirical` and a fresh
    /// graph per run otherwise.
    #[serde(default)]
    pub fresh_graph_per_run: Option<bool>,
    /// Write measured wall time; off by default so output is reproducible
    /// byte for byte.
    #[serde(default)]
    pub record_wall_time: bool,
    /// Graph family of the regret comparison.
    #[serde(default = "default_regret_family")]
    pub family: FamilyKind,
    #[serde(default)]
    pub regret: RegretSettings,
}

fn default_runs() -> usize {
    20
}

fn default_m_list() -> Vec<usize> {
    vec![1, 2, 3]
}

fn default_regret_family() -> FamilyKind {
    FamilyKind::Line
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind, n_list: Vec<usize>, p_rule: PRule) -> Self {
        ExperimentConfig {
            experiment,
            n_list,
            p_rule,
            runs_per_point: default_runs(),
            master_seed: 0,
            output_path: None,
            m_list: default_m_list(),
            fresh_graph_per_run: None,
            record_wall_time: false,
            family: default_regret_family(),
            regret: RegretSettings::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn fresh_graphs(&self) -> bool {
        self.fresh_graph_per_run
            .unwrap_or(self.experiment != ExperimentKind::ExactVsEmpirical)
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs_per_point < 1 {
            return Err(parameter("runs_per_point must be at least 1"));
        }
        if self.n_list.is_empty() {
            return Err(parameter("n_list must not be empty"));
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(parameter("n_list must be strictly ascending"));
        }
        if self.n_list[0] == 0 {
            return Err(parameter("graphs need at least one node"));
        }
        if self.experiment == ExperimentKind::Multiparent {
            if self.m_list.is_empty() || self.m_list.contains(&0) {
                return Err(parameter("m_list must hold positive parent counts"));
            }
            if self.m_list.iter().any(|&m| m > self.n_list[0]) {
                return Err(parameter("more parents than nodes"));
            }
        }
        if self.experiment == ExperimentKind::RegretHead2head {
            let r = &self.regret;
            if r.horizon == 0 || r.k < 2 {
                return Err(parameter("regret needs a positive horizon and at least two categories"));
            }
        }
        for &n in &self.n_list {
            if self.experiment != ExperimentKind::RegretHead2head {
                self.p_rule.values(n)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let cfg = ExperimentConfig::from_json(
            r#"{"experiment": "er_slow", "n_list": [64, 128], "p_rule": {"rule": "ln_n_over_n"}}"#,
        )
        .unwrap();
        assert_eq!(cfg.runs_per_point, 20);
        assert!(cfg.fresh_graphs());
        let p = cfg.p_rule.values(64).unwrap()[0];
        assert!((p - 64f64.ln() / 64.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = [
            r#"{"experiment": "er_slow", "n_list": [], "p_rule": {"rule": "ln_n_over_n"}}"#,
            r#"{"experiment": "er_slow", "n_list": [8, 4], "p_rule": {"rule": "ln_n_over_n"}}"#,
            r#"{"experiment": "er_slow", "n_list": [8], "runs_per_point": 0, "p_rule": {"rule": "ln_n_over_n"}}"#,
            r#"{"experiment": "er_fast", "n_list": [2], "p_rule": {"rule": "corollary_threshold", "c": 0.5}}"#,
            r#"{"experiment": "er_slow", "n_list": [8], "p_rule": {"rule": "explicit", "p": 1.5}}"#,
            r#"{"experiment": "nope", "n_list": [8], "p_rule": {"rule": "ln_n_over_n"}}"#,
            r#"{"experiment": "er_slow", "n_list": [8], "runs": 3, "p_rule": {"rule": "ln_n_over_n"}}"#,
        ];
        for text in bad {
            assert!(ExperimentConfig::from_json(text).is_err(), "{text}");
        }
    }

    #[test]
    fn log_grid_endpoints() {
        let v = PRule::LogGrid { lo: 1e-3, hi: 0.5, count: 20 }.values(10).unwrap();
        assert_eq!(v.len(), 20);
        assert!((v[0] - 1e-3).abs() < 1e-15 && (v[19] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fast_rule_uses_the_threshold() {
        let rule = PRule::CorollaryThreshold { c: 0.5, k: 1.0, base: 2.0 };
        let p = rule.values(1024).unwrap()[0];
        assert!((p - (1.0 - (0.5f64 / 9.0).powf(1.0 / 9.0))).abs() < 1e-15);
    }
}
