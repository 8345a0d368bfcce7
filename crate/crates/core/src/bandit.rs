//! Bandit play over interventions and regret accounting.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dag::ParentSpec;
use crate::error::{parameter, Error, Result};
use crate::scm::{Inference, Intervention, Scm, MAX_EXACT_NODES};
use crate::search::{event_holds, raps_statistical, DetectorConfig};

/// Monte Carlo draws per mean when exact inference is out of reach.
pub const MC_MEAN_SAMPLES: usize = 1_000_000;

/// Chooses the next arm from running counts and reward sums.
pub trait ArmPolicy {
    /// `round` is 1-based and counts rounds of this policy only.
    fn select(&mut self, round: u64, counts: &[u64], sums: &[f64]) -> usize;
}

/// Plays every arm once, then the arm maximising
/// `mean + √(2 ln t / count)`; ties go to the lowest index.
#[derive(Clone, Copy, Debug, Default)]
pub struct Ucb1;

impl ArmPolicy for Ucb1 {
    fn select(&mut self, round: u64, counts: &[u64], sums: &[f64]) -> usize {
        if let Some(unplayed) = counts.iter().position(|&c| c == 0) {
            return unplayed;
        }
        let log_t = (round as f64).ln();
        let mut best = 0;
        let mut best_index = f64::NEG_INFINITY;
        for (arm, (&c, &s)) in counts.iter().zip(sums).enumerate() {
            let c = c as f64;
            let index = s / c + (2.0 * log_t / c).sqrt();
            if index > best_index {
                best_index = index;
                best = arm;
            }
        }
        best
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Discovery,
    Ucb,
    /// Rounds after a search that found no parent; nothing is worth
    /// intervening on, so the learner observes.
    Observe,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Discovery => "discovery",
            Phase::Ucb => "ucb",
            Phase::Observe => "observe",
        }
    }
}

/// A run of consecutive rounds spent on one intervention.
#[derive(Clone, Debug, PartialEq)]
pub struct Play {
    pub phase: Phase,
    pub intervention: Intervention,
    pub rounds: u64,
    pub reward_sum: f64,
}

/// Whether discovery samples count against the horizon.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Budget {
    /// Discovery and bandit rounds together make up the horizon.
    #[default]
    Budgeted,
    /// The bandit phase gets the full horizon on top of discovery.
    Unbudgeted,
}

#[derive(Clone, Debug)]
pub struct RegretRecord {
    pub horizon: u64,
    /// Samples the parent search drew, each counted as one round.
    pub discovery_samples: u64,
    /// Logical interventions of the parent search.
    pub search_interventions: usize,
    pub plays: Vec<Play>,
    /// Expected regret accumulated up to and including each round.
    pub cumulative_regret: Vec<f64>,
    pub optimum: f64,
    /// Standard error of `optimum`; zero when computed exactly.
    pub optimum_std_error: f64,
    pub ucb_arms: Vec<Intervention>,
    pub ucb_means: Vec<f64>,
    pub ucb_counts: Vec<u64>,
    /// Parent set the learner acted on.
    pub discovered: ParentSpec,
    pub parent_correct: bool,
    /// Whether every declaration of the search was correct; `None` without
    /// a search.
    pub event_e_held: Option<bool>,
    /// Expected regret of a recommendation drawn from the UCB-phase play
    /// frequencies.
    pub simple_regret: Option<f64>,
}

impl RegretRecord {
    pub fn final_regret(&self) -> f64 {
        self.cumulative_regret.last().copied().unwrap_or(0.0)
    }

    /// Cumulative regret after `round` rounds (1-based).
    pub fn regret_at(&self, round: usize) -> Option<f64> {
        round.checked_sub(1).and_then(|i| self.cumulative_regret.get(i)).copied()
    }

    pub fn rounds(&self) -> u64 {
        self.cumulative_regret.len() as u64
    }

    pub fn ucb_rounds(&self) -> u64 {
        self.ucb_counts.iter().sum()
    }

    /// Phase of every round, in order.
    pub fn phases(&self) -> impl Iterator<Item = Phase> + '_ {
        self.plays
            .iter()
            .flat_map(|p| std::iter::repeat_n(p.phase, p.rounds as usize))
    }
}

/// Mean rewards under interventions, cached per intervention.
pub struct MeanTable<'a> {
    scm: &'a Scm,
    exact: bool,
    seed: u64,
    cache: HashMap<Intervention, f64>,
}

impl<'a> MeanTable<'a> {
    pub fn new(scm: &'a Scm, seed: u64) -> Self {
        MeanTable {
            scm,
            exact: scm.n() <= MAX_EXACT_NODES,
            seed,
            cache: HashMap::new(),
        }
    }

    pub fn mean(&mut self, iv: &Intervention) -> Result<f64> {
        if let Some(&m) = self.cache.get(iv) {
            return Ok(m);
        }
        let mode = if self.exact {
            Inference::Exact
        } else {
            Inference::MonteCarlo {
                samples: MC_MEAN_SAMPLES,
                seed: self.seed ^ self.cache.len() as u64,
            }
        };
        let m = self.scm.interventional_mean(iv, mode)?;
        self.cache.insert(iv.clone(), m);
        Ok(m)
    }

    /// The best mean and its standard error.
    pub fn optimum(&mut self) -> Result<(f64, f64)> {
        if self.exact {
            return Ok((self.scm.optimal_mean(), 0.0));
        }
        let best = self.scm.optimal_intervention();
        let mut rng = crate::rng::from_seed(self.seed.wrapping_add(1));
        let est = self.scm.monte_carlo_mean(&best, MC_MEAN_SAMPLES, &mut rng)?;
        self.cache.insert(best, est.mean);
        Ok((est.mean, est.std_error))
    }
}

/// Every joint assignment of `nodes`, first node most significant.
pub fn parent_arms(nodes: &[usize], k: usize) -> Vec<Intervention> {
    let count = k.pow(nodes.len() as u32);
    (0..count)
        .map(|mut r| {
            let mut values = vec![0; nodes.len()];
            for slot in values.iter_mut().rev() {
                *slot = r % k;
                r /= k;
            }
            Intervention::new(nodes.iter().copied().zip(values)).expect("distinct nodes")
        })
        .collect()
}

/// Every atomic intervention `do(X = x)`.
pub fn atomic_arms(n: usize, k: usize) -> Vec<Intervention> {
    (0..n)
        .flat_map(|x| (0..k).map(move |v| Intervention::atomic(x, v)))
        .collect()
}

struct Tape {
    plays: Vec<Play>,
    cumulative: Vec<f64>,
}

impl Tape {
    fn new(capacity: usize) -> Self {
        Tape {
            plays: Vec::new(),
            cumulative: Vec::with_capacity(capacity),
        }
    }

    fn push(&mut self, phase: Phase, iv: &Intervention, rounds: u64, reward_sum: f64, gap: f64) {
        let mut total = self.cumulative.last().copied().unwrap_or(0.0);
        for _ in 0..rounds {
            total += gap;
            self.cumulative.push(total);
        }
        match self.plays.last_mut() {
            Some(last) if last.phase == phase && last.intervention == *iv => {
                last.rounds += rounds;
                last.reward_sum += reward_sum;
            }
            _ => self.plays.push(Play {
                phase,
                intervention: iv.clone(),
                rounds,
                reward_sum,
            }),
        }
    }
}

struct BanditOutcome {
    counts: Vec<u64>,
    means: Vec<f64>,
}

#[allow(clippy::too_many_arguments)]
fn play_bandit<P: ArmPolicy + ?Sized, R: Rng + ?Sized>(
    scm: &Scm,
    arms: &[Intervention],
    means: &mut MeanTable<'_>,
    optimum: f64,
    rounds: u64,
    policy: &mut P,
    tape: &mut Tape,
    rng: &mut R,
) -> Result<BanditOutcome> {
    let fixings = arms.iter().map(|a| scm.fixing(a)).collect::<Result<Vec<_>>>()?;
    let arm_means = arms.iter().map(|a| means.mean(a)).collect::<Result<Vec<_>>>()?;
    let mut counts = vec![0u64; arms.len()];
    let mut sums = vec![0.0; arms.len()];
    let mut assignment = vec![0; scm.n()];
    for t in 1..=rounds {
        let arm = policy.select(t, &counts, &sums);
        let reward = scm.sample_fixed(&fixings[arm], &mut assignment, rng);
        counts[arm] += 1;
        sums[arm] += reward;
        tape.push(Phase::Ucb, &arms[arm], 1, reward, optimum - arm_means[arm]);
    }
    Ok(BanditOutcome {
        counts,
        means: arm_means,
    })
}

fn expected_simple_regret(optimum: f64, counts: &[u64], means: &[f64]) -> Option<f64> {
    let total: u64 = counts.iter().sum();
    (total > 0).then(|| {
        counts
            .iter()
            .zip(means)
            .map(|(&c, &m)| c as f64 * (optimum - m))
            .sum::<f64>()
            / total as f64
    })
}

/// Runs `policy` over the given arms for `horizon` rounds.
pub fn bandit_run_with<P: ArmPolicy + ?Sized, R: Rng + ?Sized>(
    scm: &Scm,
    arms: Vec<Intervention>,
    horizon: u64,
    policy: &mut P,
    rng: &mut R,
) -> Result<RegretRecord> {
    if arms.is_empty() {
        return Err(parameter("no arms to play"));
    }
    if horizon < arms.len() as u64 {
        return Err(parameter(format!(
            "horizon {horizon} is shorter than the {} arms",
            arms.len()
        )));
    }
    let mut means = MeanTable::new(scm, rng.random());
    let (optimum, optimum_std_error) = means.optimum()?;
    let mut tape = Tape::new(horizon as usize);
    let out = play_bandit(scm, &arms, &mut means, optimum, horizon, policy, &mut tape, rng)?;
    Ok(RegretRecord {
        horizon,
        discovery_samples: 0,
        search_interventions: 0,
        plays: tape.plays,
        cumulative_regret: tape.cumulative,
        optimum,
        optimum_std_error,
        simple_regret: expected_simple_regret(optimum, &out.counts, &out.means),
        ucb_arms: arms,
        ucb_means: out.means,
        ucb_counts: out.counts,
        discovered: ParentSpec::none(scm.n()),
        parent_correct: false,
        event_e_held: None,
    })
}

/// UCB over the joint assignments of `arm_nodes`.
pub fn ucb_run<R: Rng + ?Sized>(scm: &Scm, arm_nodes: &ParentSpec, horizon: u64, rng: &mut R) -> Result<RegretRecord> {
    if arm_nodes.is_empty() {
        return Err(parameter("UCB needs at least one node to intervene on"));
    }
    let mut record = bandit_run_with(scm, parent_arms(&arm_nodes.nodes(), scm.k()), horizon, &mut Ucb1, rng)?;
    record.discovered = arm_nodes.clone();
    record.parent_correct = arm_nodes == scm.parents();
    Ok(record)
}

/// UCB over all `n·K` atomic interventions, ignoring the graph.
pub fn flat_ucb_run<R: Rng + ?Sized>(scm: &Scm, horizon: u64, rng: &mut R) -> Result<RegretRecord> {
    bandit_run_with(scm, atomic_arms(scm.n(), scm.k()), horizon, &mut Ucb1, rng)
}

/// `min{1, √(K ln T / T)}`, kept just below one so that it stays a valid
/// failure probability.
pub fn default_failure_prob(k: usize, horizon: u64) -> f64 {
    let t = horizon as f64;
    (k as f64 * t.ln() / t).sqrt().min(1.0 - f64::EPSILON)
}

/// Statistical parent search followed by UCB on the discovered parent.
///
/// Every search sample is one round charged at the gap between the optimum
/// and the mean of the intervention it was drawn under.
pub fn end_to_end<R: Rng + ?Sized>(
    scm: &Scm,
    cfg: &DetectorConfig,
    horizon: u64,
    budget: Budget,
    rng: &mut R,
) -> Result<RegretRecord> {
    let (trace, ledger) = raps_statistical(scm, cfg, rng)?;
    let discovery = ledger.total();
    let remaining = match budget {
        Budget::Budgeted => horizon.checked_sub(discovery).filter(|&r| r > 0).ok_or_else(|| {
            parameter(format!(
                "discovery used {discovery} samples, leaving nothing of the horizon {horizon}"
            ))
        })?,
        Budget::Unbudgeted => horizon,
    };
    let mut means = MeanTable::new(scm, rng.random());
    let (optimum, optimum_std_error) = means.optimum()?;
    let mut tape = Tape::new((discovery + remaining) as usize);
    for batch in &ledger.batches {
        let gap = optimum - means.mean(&batch.intervention)?;
        tape.push(Phase::Discovery, &batch.intervention, batch.samples, batch.reward_sum, gap);
    }
    let discovered = trace.result.clone();
    let (arms, out) = if discovered.is_empty() {
        let observe = Intervention::observational();
        let gap = optimum - means.mean(&observe)?;
        let fixed = scm.fixing(&observe)?;
        let mut assignment = vec![0; scm.n()];
        for _ in 0..remaining {
            let reward = scm.sample_fixed(&fixed, &mut assignment, rng);
            tape.push(Phase::Observe, &observe, 1, reward, gap);
        }
        (Vec::new(), BanditOutcome {
            counts: Vec::new(),
            means: Vec::new(),
        })
    } else {
        let arms = parent_arms(&discovered.nodes(), scm.k());
        if remaining < arms.len() as u64 {
            return Err(parameter("too few rounds left to try every arm"));
        }
        let out = play_bandit(scm, &arms, &mut means, optimum, remaining, &mut Ucb1, &mut tape, rng)?;
        (arms, out)
    };
    Ok(RegretRecord {
        horizon,
        discovery_samples: discovery,
        search_interventions: trace.interventions(),
        plays: tape.plays,
        cumulative_regret: tape.cumulative,
        optimum,
        optimum_std_error,
        simple_regret: expected_simple_regret(optimum, &out.counts, &out.means),
        ucb_arms: arms,
        ucb_means: out.means,
        ucb_counts: out.counts,
        parent_correct: discovered == *scm.parents(),
        discovered,
        event_e_held: Some(event_holds(scm, &trace)),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Recommendation {
    pub intervention: Intervention,
    pub simple_regret: f64,
}

/// Draws an arm with probability proportional to its UCB-phase plays.
pub fn simple_regret_recommend<R: Rng + ?Sized>(record: &RegretRecord, rng: &mut R) -> Result<Recommendation> {
    let total = record.ucb_rounds();
    if total == 0 {
        return Err(Error::State("no post-discovery rounds to recommend from".into()));
    }
    let mut draw = rng.random_range(0..total);
    for (arm, &c) in record.ucb_counts.iter().enumerate() {
        if draw < c {
            return Ok(Recommendation {
                intervention: record.ucb_arms[arm].clone(),
                simple_regret: record.optimum - record.ucb_means[arm],
            });
        }
        draw -= c;
    }
    unreachable!("draw below the total play count")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dag::Dag;
    use crate::rng;
    use crate::scm::RewardNoise;

    fn two_arms(low: f64, high: f64) -> Scm {
        Scm::from_parts(
            Dag::empty(1),
            ParentSpec::single(1, 0),
            2,
            vec![vec![0.5, 0.5]],
            vec![low, high],
            RewardNoise::default(),
        )
        .unwrap()
    }

    #[test]
    fn single_arm_has_no_regret() {
        let scm = Scm::from_parts(
            Dag::empty(1),
            ParentSpec::single(1, 0),
            1,
            vec![vec![1.0]],
            vec![0.4],
            RewardNoise::default(),
        )
        .unwrap();
        let rec = ucb_run(&scm, &ParentSpec::single(1, 0), 100, &mut rng::from_seed(0)).unwrap();
        assert_eq!(rec.final_regret(), 0.0);
        assert_eq!(rec.ucb_counts, vec![100]);
    }

    #[test]
    fn ucb_regret_is_monotone_and_small() {
        let scm = two_arms(0.1, 0.9);
        let rec = ucb_run(&scm, &ParentSpec::single(1, 0), 10_000, &mut rng::from_seed(1)).unwrap();
        assert!(rec.cumulative_regret.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(rec.rounds(), 10_000);
        assert!(rec.final_regret() <= 250.0, "{}", rec.final_regret());
    }

    #[test]
    fn horizon_must_cover_arms() {
        let scm = two_arms(0.1, 0.9);
        assert!(ucb_run(&scm, &ParentSpec::single(1, 0), 1, &mut rng::from_seed(1)).is_err());
    }

    #[test]
    fn recommendation_follows_play_counts() {
        let scm = two_arms(0.1, 0.9);
        let mut rec = ucb_run(&scm, &ParentSpec::single(1, 0), 100, &mut rng::from_seed(1)).unwrap();
        rec.ucb_counts = vec![0, 100];
        let r = simple_regret_recommend(&rec, &mut rng::from_seed(2)).unwrap();
        assert_eq!(r.intervention, Intervention::atomic(0, 1));
        assert_eq!(r.simple_regret, 0.0);
        rec.ucb_counts = vec![0, 0];
        assert!(matches!(simple_regret_recommend(&rec, &mut rng::from_seed(2)), Err(Error::State(_))));
    }

    #[test]
    fn one_node_end_to_end_decomposes() {
        let scm = two_arms(0.1, 0.9);
        let cfg = DetectorConfig::from_bound(1, 2, 0.3, 0.3, 0.1).unwrap();
        let rec = end_to_end(&scm, &cfg, 20_000, Budget::Budgeted, &mut rng::from_seed(3)).unwrap();
        assert_eq!(rec.rounds(), 20_000);
        assert!(rec.parent_correct);
        let b = cfg.batch as f64;
        // observational batch at gap 0.4, then B rounds at each arm
        let discovery = b * 0.4 + b * 0.8 + b * 0.0;
        let at = rec.regret_at(rec.discovery_samples as usize).unwrap();
        assert!((at - discovery).abs() < 1e-6 * discovery);
        let ucb: f64 = rec
            .ucb_counts
            .iter()
            .zip(&rec.ucb_means)
            .map(|(&c, &m)| c as f64 * (rec.optimum - m))
            .sum();
        assert!((rec.final_regret() - discovery - ucb).abs() < 1e-6 * rec.final_regret());
    }

    #[test]
    fn arms_enumerate_assignments() {
        let arms = parent_arms(&[2, 5], 2);
        assert_eq!(arms.len(), 4);
        assert_eq!(arms[1], Intervention::new([(2, 0), (5, 1)]).unwrap());
        assert_eq!(atomic_arms(3, 2).len(), 6);
    }

    #[test]
    fn failure_prob_default() {
        let d = default_failure_prob(2, 100_000);
        assert!((d - (2.0 * (1e5f64).ln() / 1e5).sqrt()).abs() < 1e-15);
        assert!(default_failure_prob(2, 2) < 1.0);
    }
}
