//! Repeated parent search for rewards with several parents.
//!
//! Each round runs the single-parent search on the start set `S`, with the
//! parents found so far held fixed by intervention. A round that returns a
//! node adds it to the discovered set and removes its descendants from `S`;
//! the first round returning nothing ends the search.

use std::collections::VecDeque;

use itertools::Itertools;
use rand::Rng;

use super::statistical::{collect_batch, marginal_shift, BatchStats};
use super::{run_search, DetectorConfig, Probe, Prober, SampleLedger, SearchTrace, Uniform};
use crate::dag::{Dag, ParentSpec};
use crate::error::{parameter, Error, Result};
use crate::nodeset::NodeSet;
use crate::scm::{Intervention, Scm};

/// How inner ancestor queries are answered.
#[derive(Clone, Copy, Debug)]
pub enum SearchMode<'a> {
    Oracle,
    Statistical { scm: &'a Scm, cfg: DetectorConfig },
}

#[derive(Clone, Debug)]
pub struct MultiParentOutcome {
    /// Parents in the order they were found.
    pub discovered: Vec<usize>,
    pub parents: ParentSpec,
    /// One trace per round, including the final empty-handed one.
    pub traces: Vec<SearchTrace>,
    pub ledger: Option<SampleLedger>,
    /// Set when statistical thresholds designed for atomic interventions
    /// were applied to joint interventions.
    pub extrapolated: bool,
}

impl MultiParentOutcome {
    /// Logical interventions summed over rounds.
    pub fn interventions(&self) -> usize {
        self.traces.iter().map(SearchTrace::interventions).sum()
    }

    /// Whether no discovered parent is an ancestor of one found later.
    pub fn is_reverse_topological(&self, dag: &Dag) -> bool {
        self.discovered
            .iter()
            .tuple_combinations()
            .all(|(&earlier, &later)| !dag.is_ancestor(earlier, later))
    }
}

/// Nodes with a directed path into `targets` that avoids `severed`.
fn reaching_avoiding(dag: &Dag, targets: &NodeSet, severed: &NodeSet) -> NodeSet {
    let mut seen = targets.difference(severed);
    let mut queue: VecDeque<usize> = seen.iter().collect();
    while let Some(v) = queue.pop_front() {
        for &u in dag.parents(v) {
            if !severed.contains(u) && !seen.contains(u) {
                seen.insert(u);
                queue.push_back(u);
            }
        }
    }
    seen
}

struct SeveredTruth<'a> {
    dag: &'a Dag,
    qualifying: NodeSet,
}

impl Prober for SeveredTruth<'_> {
    fn probe(&mut self, x: usize, _candidates: &NodeSet) -> Probe {
        Probe {
            ancestor: self.qualifying.contains(x),
            descendants: self.dag.descendants(x).clone(),
        }
    }
}

/// Empirical joint test: the discovered parents are swept over all of
/// their joint values, each paired with every value of the probed node.
struct JointEmpirical<'a, R: Rng + ?Sized> {
    scm: &'a Scm,
    cfg: DetectorConfig,
    fixed: Vec<Vec<(usize, usize)>>,
    baselines: Vec<BatchStats>,
    rng: &'a mut R,
    ledger: &'a mut SampleLedger,
    error: Option<Error>,
}

impl<R: Rng + ?Sized> Prober for JointEmpirical<'_, R> {
    fn probe(&mut self, x: usize, _candidates: &NodeSet) -> Probe {
        let n = self.scm.n();
        let mut ancestor = false;
        let mut descendants = NodeSet::singleton(n, x);
        for (setting, base) in self.fixed.iter().zip(&self.baselines) {
            for value in 0..self.cfg.k {
                let drawn = Intervention::new(setting.iter().copied().chain([(x, value)]))
                    .and_then(|iv| collect_batch(self.scm, &iv, self.cfg.batch, self.rng).map(|s| (iv, s)));
                let (iv, stats) = match drawn {
                    Ok(d) => d,
                    Err(e) => {
                        self.error.get_or_insert(e);
                        continue;
                    }
                };
                self.ledger.record(iv, self.cfg.batch, &stats, false);
                ancestor |= (base.mean - stats.mean).abs() > self.cfg.reward_gap / 2.0;
                for y in 0..n {
                    if marginal_shift(base, &stats, y) > self.cfg.effect_gap / 2.0 {
                        descendants.insert(y);
                    }
                }
            }
        }
        Probe { ancestor, descendants }
    }
}

fn joint_settings(found: &[usize], k: usize) -> Vec<Vec<(usize, usize)>> {
    if found.is_empty() {
        return vec![Vec::new()];
    }
    found
        .iter()
        .map(|&p| (0..k).map(move |v| (p, v)))
        .multi_cartesian_product()
        .collect()
}

/// Runs the repeated search under `mode`. `parents` is the ground truth
/// used by oracle answers; statistical mode reads the model instead.
pub fn multiparent_search<R: Rng + ?Sized>(
    dag: &Dag,
    parents: &ParentSpec,
    mode: SearchMode<'_>,
    rng: &mut R,
) -> Result<MultiParentOutcome> {
    if parents.width() != dag.n() {
        return Err(parameter("parent set width does not match the graph"));
    }
    if let SearchMode::Statistical { scm, cfg } = mode {
        if scm.dag() != dag || scm.parents() != parents {
            return Err(parameter("model does not match the given graph and parents"));
        }
        if cfg.k != scm.k() {
            return Err(parameter("detector and model disagree on the category count"));
        }
    }
    let n = dag.n();
    let mut start = dag.all_nodes();
    let mut discovered: Vec<usize> = Vec::new();
    let mut traces = Vec::new();
    let mut ledger = match mode {
        SearchMode::Oracle => None,
        SearchMode::Statistical { cfg, .. } => Some(SampleLedger {
            batch: cfg.batch,
            ..SampleLedger::default()
        }),
    };
    loop {
        let severed = NodeSet::from_nodes(n, discovered.iter().copied());
        let trace = match mode {
            SearchMode::Oracle => {
                let remaining = parents.set().difference(&severed);
                let mut truth = SeveredTruth {
                    dag,
                    qualifying: reaching_avoiding(dag, &remaining, &severed),
                };
                run_search(start.clone(), &mut truth, &mut Uniform(&mut *rng))
            }
            SearchMode::Statistical { scm, cfg } => {
                let ledger = ledger.as_mut().expect("statistical ledger");
                let fixed = joint_settings(&discovered, cfg.k);
                let mut baselines = Vec::with_capacity(fixed.len());
                for setting in &fixed {
                    let iv = Intervention::new(setting.iter().copied())?;
                    let stats = collect_batch(scm, &iv, cfg.batch, rng)?;
                    ledger.record(iv, cfg.batch, &stats, true);
                    baselines.push(stats);
                }
                let mut picker_rng = crate::rng::from_seed(rng.random());
                let mut prober = JointEmpirical {
                    scm,
                    cfg,
                    fixed,
                    baselines,
                    rng: &mut *rng,
                    ledger,
                    error: None,
                };
                let mut trace = run_search(start.clone(), &mut prober, &mut Uniform(&mut picker_rng));
                if let Some(e) = prober.error {
                    return Err(e);
                }
                trace.samples_used = Some(prober.ledger.total());
                trace
            }
        };
        let found = trace.result_node();
        let declared = found.and_then(|p| {
            trace
                .steps
                .iter()
                .rev()
                .find(|s| s.intervened == p)
                .map(|s| s.discovered_descendants.clone())
        });
        traces.push(trace);
        match (found, declared) {
            (Some(p), Some(d)) => {
                discovered.push(p);
                start.difference_with(&d);
                start.remove(p);
            }
            _ => break,
        }
    }
    Ok(MultiParentOutcome {
        parents: ParentSpec::from_nodes(n, discovered.iter().copied()),
        discovered,
        traces,
        ledger,
        extrapolated: matches!(mode, SearchMode::Statistical { .. }),
    })
}

pub fn multiparent_oracle<R: Rng + ?Sized>(dag: &Dag, parents: &ParentSpec, rng: &mut R) -> Result<MultiParentOutcome> {
    multiparent_search(dag, parents, SearchMode::Oracle, rng)
}

pub fn multiparent_statistical<R: Rng + ?Sized>(scm: &Scm, cfg: &DetectorConfig, rng: &mut R) -> Result<MultiParentOutcome> {
    multiparent_search(
        scm.dag(),
        scm.parents(),
        SearchMode::Statistical { scm, cfg: *cfg },
        rng,
    )
}
