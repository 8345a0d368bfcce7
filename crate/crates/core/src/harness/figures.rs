use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind, PRule};
use super::run::{persist, sweep, RunOutcome};
use crate::error::Result;

/// Size of the preset sweeps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    /// Desk scale: panel (a) at n = 300 over 10 probabilities.
    #[default]
    Reduced,
    /// Panel (a) at n = 1000 over 20 probabilities.
    Full,
}

impl std::str::FromStr for Scale {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reduced" => Ok(Scale::Reduced),
            "full" => Ok(Scale::Full),
            other => Err(crate::error::parameter(format!("unknown scale `{other}`"))),
        }
    }
}

fn powers_of_two(lo: u32, hi: u32) -> Vec<usize> {
    (lo..=hi).map(|e| 1usize << e).collect()
}

/// Panel (a): one graph per probability, 20 runs on it.
pub fn panel_a(scale: Scale, master_seed: u64) -> ExperimentConfig {
    let (n, count) = match scale {
        Scale::Reduced => (300, 10),
        Scale::Full => (1000, 20),
    };
    ExperimentConfig {
        master_seed,
        ..ExperimentConfig::new(ExperimentKind::ExactVsEmpirical, vec![n], PRule::LogGrid {
            lo: 1e-3,
            hi: 0.5,
            count,
        })
    }
}

/// Panel (b): the fast regime at the corollary threshold with c = 0.5.
pub fn panel_b(master_seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        master_seed,
        ..ExperimentConfig::new(ExperimentKind::ErFast, powers_of_two(4, 12), PRule::CorollaryThreshold {
            c: 0.5,
            k: 1.0,
            base: 2.0,
        })
    }
}

/// Panel (c): the slow regime at `p = ln(n)/n`.
pub fn panel_c(master_seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        master_seed,
        ..ExperimentConfig::new(ExperimentKind::ErSlow, powers_of_two(6, 12), PRule::LnNOverN)
    }
}

/// Panel (d): repeated search for 1–3 parents at the multi-parent threshold
/// with `c0 = 0.5`, `c1 = 1`, `k = 1`.
pub fn panel_d(master_seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        master_seed,
        ..ExperimentConfig::new(ExperimentKind::Multiparent, powers_of_two(6, 10), PRule::MultiparentThreshold {
            c0: 0.5,
            c1: 1.0,
            k: 1.0,
            base: 2.0,
        })
    }
}

/// Runs all four panels and writes `panel_a.csv` … `panel_d.csv` into
/// `dir`. Returns the paths with the outcomes of each panel.
pub fn figures_data(dir: &Path, scale: Scale, master_seed: u64) -> Result<Vec<(PathBuf, Vec<RunOutcome>)>> {
    std::fs::create_dir_all(dir)?;
    let panels = [
        ("panel_a", panel_a(scale, master_seed)),
        ("panel_b", panel_b(master_seed)),
        ("panel_c", panel_c(master_seed)),
        ("panel_d", panel_d(master_seed)),
    ];
    let mut out = Vec::new();
    for (name, cfg) in panels {
        let outcomes = sweep(&cfg)?;
        let path = dir.join(format!("{name}.csv"));
        persist(&path, &outcomes)?;
        out.push((path, outcomes));
    }
    Ok(out)
}
