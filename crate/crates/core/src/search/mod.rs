//! Randomized parent search.
//!
//! The recursion keeps a candidate set `C` that still may contain the
//! parent. Each step draws `X` uniformly from `C` and intervenes on it. If
//! the parent is a descendant of `X`, the search continues inside the strict
//! descendants of `X` (remembering `X` as the fallback answer); otherwise all
//! descendants of `X` are dropped from `C`. The recursion is tail shaped, so
//! it is run as a loop here.
//!
//! How the "is the parent downstream of `X`" question gets answered is
//! abstracted behind [`Prober`]: ground truth from the graph, empirical tests
//! on samples from an SCM, or the severed-path test of the multi-parent
//! wrapper.

mod multiparent;
mod permutation;
mod statistical;

pub use multiparent::{multiparent_oracle, multiparent_search, multiparent_statistical, MultiParentOutcome, SearchMode};
pub use permutation::raps_permutation;
pub use statistical::{event_holds, raps_statistical, BatchRecord, DetectorConfig, SampleLedger};

use rand::Rng;

use crate::dag::{Dag, ParentSpec};
use crate::error::Result;
use crate::nodeset::NodeSet;

/// One logical intervention of the search.
#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    /// Candidate set the node was drawn from.
    pub candidates: NodeSet,
    pub intervened: usize,
    /// Declared answer to "is the parent a descendant of this node".
    pub was_ancestor: bool,
    /// Declared descendants of the intervened node over the whole graph
    /// (always containing the node itself).
    pub discovered_descendants: NodeSet,
}

impl Step {
    pub fn candidate_set_size(&self) -> usize {
        self.candidates.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchTrace {
    pub steps: Vec<Step>,
    pub result: ParentSpec,
    /// Physical samples drawn, when the answers came from data.
    pub samples_used: Option<u64>,
}

impl SearchTrace {
    /// Number of logical interventions, N.
    pub fn interventions(&self) -> usize {
        self.steps.len()
    }

    pub fn intervened(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.intervened).collect()
    }

    pub fn result_node(&self) -> Option<usize> {
        self.result.set().first()
    }
}

/// Answer to a single intervention query.
#[derive(Clone, Debug)]
pub struct Probe {
    pub ancestor: bool,
    pub descendants: NodeSet,
}

pub trait Prober {
    fn probe(&mut self, x: usize, candidates: &NodeSet) -> Probe;
}

/// Chooses the next node from a non-empty candidate set.
pub trait Picker {
    fn pick(&mut self, candidates: &NodeSet) -> usize;
}

/// Uniform draws from the candidate set.
pub struct Uniform<'a, R: Rng + ?Sized>(pub &'a mut R);

impl<R: Rng + ?Sized> Picker for Uniform<'_, R> {
    fn pick(&mut self, candidates: &NodeSet) -> usize {
        let k = self.0.random_range(0..candidates.len());
        candidates.select(k).expect("rank within candidate set")
    }
}

/// Replays a fixed sequence of nodes; used to force a particular run.
pub struct Scripted<I>(pub I);

impl<I: Iterator<Item = usize>> Picker for Scripted<I> {
    fn pick(&mut self, candidates: &NodeSet) -> usize {
        let x = self.0.next().expect("scripted picker ran out of nodes");
        assert!(candidates.contains(x), "scripted node {x} is not a candidate");
        x
    }
}

/// Runs the recursion from `start` until the candidate set is exhausted.
pub fn run_search<O, P>(start: NodeSet, prober: &mut O, picker: &mut P) -> SearchTrace
where
    O: Prober + ?Sized,
    P: Picker + ?Sized,
{
    let width = start.capacity();
    let mut candidates = start;
    let mut found = None;
    let mut steps = Vec::new();
    while !candidates.is_empty() {
        let x = picker.pick(&candidates);
        let Probe {
            ancestor,
            mut descendants,
        } = prober.probe(x, &candidates);
        descendants.insert(x);
        let mut next = descendants.intersection(&candidates);
        if ancestor {
            found = Some(x);
            next.remove(x);
        } else {
            next = candidates.difference(&next);
        }
        steps.push(Step {
            candidates: std::mem::replace(&mut candidates, next),
            intervened: x,
            was_ancestor: ancestor,
            discovered_descendants: descendants,
        });
    }
    let result = match found {
        Some(p) => ParentSpec::single(width, p),
        None => ParentSpec::none(width),
    };
    SearchTrace {
        steps,
        result,
        samples_used: None,
    }
}

/// Answers queries from the true graph.
pub struct GroundTruth<'a> {
    dag: &'a Dag,
    parent: Option<usize>,
}

impl<'a> GroundTruth<'a> {
    pub fn new(dag: &'a Dag, parent: &ParentSpec) -> Result<Self> {
        Ok(GroundTruth {
            dag,
            parent: parent.sole()?,
        })
    }
}

impl Prober for GroundTruth<'_> {
    fn probe(&mut self, x: usize, candidates: &NodeSet) -> Probe {
        let descendants = self.dag.descendants(x);
        let ancestor = self
            .parent
            .is_some_and(|p| candidates.contains(p) && descendants.contains(p));
        Probe {
            ancestor,
            descendants: descendants.clone(),
        }
    }
}

/// Parent search with exact answers to every intervention query.
pub fn raps_oracle<R: Rng + ?Sized>(dag: &Dag, parent: &ParentSpec, rng: &mut R) -> Result<SearchTrace> {
    raps_oracle_with(dag, parent, &mut Uniform(rng))
}

pub fn raps_oracle_with<P: Picker + ?Sized>(dag: &Dag, parent: &ParentSpec, picker: &mut P) -> Result<SearchTrace> {
    let mut truth = GroundTruth::new(dag, parent)?;
    Ok(run_search(dag.all_nodes(), &mut truth, picker))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn fig1() -> (Dag, ParentSpec) {
        // X1 = 0, P = 1, X2 = 2, X3 = 3
        (Dag::new(4, [(0, 1), (0, 2), (1, 2), (3, 2)]).unwrap(), ParentSpec::single(4, 1))
    }

    #[test]
    fn worked_example_draw_sequence() {
        let (g, p) = fig1();
        let trace = raps_oracle_with(&g, &p, &mut Scripted([3, 0, 1].into_iter())).unwrap();
        assert_eq!(trace.intervened(), vec![3, 0, 1]);
        assert_eq!(trace.result_node(), Some(1));
        let sizes: Vec<usize> = trace.steps.iter().map(Step::candidate_set_size).collect();
        assert_eq!(sizes, vec![4, 2, 1]);
        assert_eq!(trace.steps[1].candidates.to_vec(), vec![0, 1]);
    }

    #[test]
    fn single_node_graph() {
        let g = Dag::empty(1);
        let trace = raps_oracle(&g, &ParentSpec::single(1, 0), &mut rng::from_seed(1)).unwrap();
        assert_eq!(trace.interventions(), 1);
        assert_eq!(trace.result_node(), Some(0));
    }

    #[test]
    fn null_graph_without_parent_tests_everything() {
        let g = Dag::empty(5);
        let trace = raps_oracle(&g, &ParentSpec::none(5), &mut rng::from_seed(9)).unwrap();
        assert_eq!(trace.interventions(), 5);
        assert!(trace.result.is_empty());
    }

    #[test]
    fn rejects_multiple_parents() {
        let g = Dag::empty(3);
        let ps = ParentSpec::from_nodes(3, [0, 1]);
        assert!(raps_oracle(&g, &ps, &mut rng::from_seed(0)).is_err());
    }

    #[test]
    fn candidate_sets_shrink_strictly() {
        let g = crate::gen::gen_erdos_renyi(60, 0.1, 4).unwrap();
        for seed in 0..50 {
            let p = ParentSpec::single(60, (seed * 7) as usize % 60);
            let trace = raps_oracle(&g, &p, &mut rng::from_seed(seed)).unwrap();
            assert!(trace.steps.windows(2).all(|w| w[1].candidates.is_subset(&w[0].candidates)
                && w[1].candidate_set_size() < w[0].candidate_set_size()));
            assert_eq!(trace.result, p);
        }
    }
}
