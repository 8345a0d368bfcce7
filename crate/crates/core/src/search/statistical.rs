//! Parent search answered from samples of an SCM.

use rand::Rng;

use super::{run_search, Probe, Prober, SearchTrace, Uniform};
use crate::error::{parameter, Result};
use crate::nodeset::NodeSet;
use crate::scm::{Intervention, Scm};
use crate::theory::required_batch_size;

/// Thresholds and batch size of the empirical ancestor and descendant
/// tests.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectorConfig {
    /// Reward gap Δ; a node is declared an ancestor of the parent when some
    /// intervention moves the mean reward by more than Δ/2.
    pub reward_gap: f64,
    /// Ancestral effect ε; `Y` is declared a descendant when some marginal
    /// moves by more than ε/2.
    pub effect_gap: f64,
    /// Failure probability δ the batch size was chosen for.
    pub failure_prob: f64,
    /// Samples per intervention setting, B.
    pub batch: u64,
    /// Category count K.
    pub k: usize,
}

impl DetectorConfig {
    pub fn new(reward_gap: f64, effect_gap: f64, failure_prob: f64, batch: u64, k: usize) -> Result<Self> {
        if !(reward_gap > 0.0 && effect_gap > 0.0) {
            return Err(parameter("detection gaps must be positive"));
        }
        if !(0.0 < failure_prob && failure_prob < 1.0) {
            return Err(parameter("failure probability must lie in (0, 1)"));
        }
        if batch < 1 {
            return Err(parameter("batch size must be at least 1"));
        }
        if k < 2 {
            return Err(parameter("at least two categories are needed"));
        }
        Ok(DetectorConfig {
            reward_gap,
            effect_gap,
            failure_prob,
            batch,
            k,
        })
    }

    /// Batch size from the concentration bound for `n` nodes.
    pub fn from_bound(n: usize, k: usize, reward_gap: f64, effect_gap: f64, failure_prob: f64) -> Result<Self> {
        let batch = required_batch_size(n, k, reward_gap, effect_gap, failure_prob)?;
        Self::new(reward_gap, effect_gap, failure_prob, batch, k)
    }

    pub fn with_batch(self, batch: u64) -> Result<Self> {
        Self::new(self.reward_gap, self.effect_gap, self.failure_prob, batch, self.k)
    }
}

/// One batch of samples drawn under a fixed intervention.
#[derive(Clone, Debug, PartialEq)]
pub struct BatchRecord {
    pub intervention: Intervention,
    pub samples: u64,
    pub reward_sum: f64,
}

/// Physical samples drawn by a statistical search.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SampleLedger {
    pub batch: u64,
    /// Samples drawn for the baselines the probes are compared against.
    pub observational: u64,
    pub interventional: u64,
    /// Every batch in the order it was drawn.
    pub batches: Vec<BatchRecord>,
}

impl SampleLedger {
    pub fn total(&self) -> u64 {
        self.observational + self.interventional
    }

    pub(crate) fn record(&mut self, intervention: Intervention, samples: u64, stats: &BatchStats, baseline: bool) {
        if baseline {
            self.observational += samples;
        } else {
            self.interventional += samples;
        }
        self.batches.push(BatchRecord {
            intervention,
            samples,
            reward_sum: stats.mean * samples as f64,
        });
    }
}

/// Batch statistics under one intervention: per-node marginals and the
/// mean reward.
pub(crate) struct BatchStats {
    pub marginals: Vec<Vec<f64>>,
    pub mean: f64,
}

pub(crate) fn collect_batch<R: Rng + ?Sized>(scm: &Scm, iv: &Intervention, batch: u64, rng: &mut R) -> Result<BatchStats> {
    let fixed = scm.fixing(iv)?;
    let (n, k) = (scm.n(), scm.k());
    let mut counts = vec![0u64; n * k];
    let mut assignment = vec![0; n];
    let mut reward = 0.0;
    for _ in 0..batch {
        reward += scm.sample_fixed(&fixed, &mut assignment, rng);
        for (v, &value) in assignment.iter().enumerate() {
            counts[v * k + value] += 1;
        }
    }
    let b = batch as f64;
    Ok(BatchStats {
        marginals: counts.chunks(k).map(|c| c.iter().map(|&x| x as f64 / b).collect()).collect(),
        mean: reward / b,
    })
}

/// Largest marginal shift of any value of `y`.
pub(crate) fn marginal_shift(a: &BatchStats, b: &BatchStats, y: usize) -> f64 {
    a.marginals[y]
        .iter()
        .zip(&b.marginals[y])
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max)
}

struct Empirical<'a, R: Rng + ?Sized> {
    scm: &'a Scm,
    cfg: DetectorConfig,
    base: BatchStats,
    rng: &'a mut R,
    ledger: SampleLedger,
    error: Option<crate::error::Error>,
}

impl<R: Rng + ?Sized> Prober for Empirical<'_, R> {
    fn probe(&mut self, x: usize, _candidates: &NodeSet) -> Probe {
        let n = self.scm.n();
        let mut ancestor = false;
        let mut descendants = NodeSet::singleton(n, x);
        for value in 0..self.cfg.k {
            let iv = Intervention::atomic(x, value);
            let stats = match collect_batch(self.scm, &iv, self.cfg.batch, self.rng) {
                Ok(s) => s,
                Err(e) => {
                    self.error.get_or_insert(e);
                    continue;
                }
            };
            self.ledger.record(iv, self.cfg.batch, &stats, false);
            ancestor |= (self.base.mean - stats.mean).abs() > self.cfg.reward_gap / 2.0;
            for y in 0..n {
                if marginal_shift(&self.base, &stats, y) > self.cfg.effect_gap / 2.0 {
                    descendants.insert(y);
                }
            }
        }
        Probe { ancestor, descendants }
    }
}

/// Parent search where each query is answered by comparing B samples of
/// every `do(X=x)` against one shared observational batch.
pub fn raps_statistical<R: Rng + ?Sized>(scm: &Scm, cfg: &DetectorConfig, rng: &mut R) -> Result<(SearchTrace, SampleLedger)> {
    scm.parents().sole()?;
    if cfg.k != scm.k() {
        return Err(parameter(format!(
            "detector expects {} categories, model has {}",
            cfg.k,
            scm.k()
        )));
    }
    let base = collect_batch(scm, &Intervention::observational(), cfg.batch, rng)?;
    let mut ledger = SampleLedger {
        batch: cfg.batch,
        ..SampleLedger::default()
    };
    ledger.record(Intervention::observational(), cfg.batch, &base, true);
    // node draws come from a child stream so the sampling stream stays
    // exclusively borrowed by the prober
    let mut picker_rng = crate::rng::from_seed(rng.random());
    let mut prober = Empirical {
        scm,
        cfg: *cfg,
        base,
        rng,
        ledger,
        error: None,
    };
    let mut trace = run_search(scm.dag().all_nodes(), &mut prober, &mut Uniform(&mut picker_rng));
    if let Some(e) = prober.error {
        return Err(e);
    }
    trace.samples_used = Some(prober.ledger.total());
    Ok((trace, prober.ledger))
}

/// Whether every declaration in `trace` matches the model's graph: the
/// ancestor flag agrees with reachability of the parent and the declared
/// descendant set is exactly the true one.
pub fn event_holds(scm: &Scm, trace: &SearchTrace) -> bool {
    let dag = scm.dag();
    let parent = scm.parents().set();
    trace.steps.iter().all(|s| {
        let truth = dag.descendants(s.intervened);
        s.was_ancestor == truth.intersects(parent) && s.discovered_descendants == *truth
    })
}
