//! Exact calculators, brute-force oracles, conditions and thresholds.

mod exact;
mod family;
mod thresholds;

pub use exact::{
    enumerate_permutation_mean, expected_interventions, expected_interventions_recursive, lower_bound,
    render_rational, UnitFractionSum, ENUMERATION_MAX_NODES, RECURSION_MAX_NODES,
};
pub use family::{
    candidate_family, check_fast_condition, check_multiparent_condition, count_trekless, parent_orderings,
    trekless_ratio, FastCondParams, FastConditionReport, MultiparentConditionReport, PairCheck, Violation,
    CONDITION_MAX_PARENTS, FAMILY_MAX_NODES,
};
pub use thresholds::{
    dary_tree_bound, er_fast_threshold, er_multiparent_threshold, harmonic, required_batch_size, ThresholdVariant,
};

use crate::dag::{Dag, ParentSpec};
use crate::error::{parameter, Result};
use crate::nodeset::NodeSet;

/// Expected interventions of the repeated search when parents are found
/// in `discovery` order: each round costs the single-parent expectation on
/// the graph left after removing the descendants of earlier finds, and a
/// last round searches what remains with no parent.
///
/// Exact when the parents are totally ordered by ancestry; otherwise it is
/// the cost conditioned on the realised order, with the other parents
/// treated as absent.
pub fn multiparent_expected(dag: &Dag, parents: &ParentSpec, discovery: &[usize]) -> Result<UnitFractionSum> {
    let n = dag.n();
    if discovery.len() != parents.len() || discovery.iter().any(|&p| p >= n || !parents.set().contains(p)) {
        return Err(parameter("discovery order must list every parent once"));
    }
    let mut kept = dag.all_nodes();
    let mut total = UnitFractionSum::new();
    for &p in discovery {
        if !kept.contains(p) {
            return Err(parameter(format!("parent {p} was removed by an earlier discovery")));
        }
        total.merge(&round_cost(dag, &kept, Some(p))?);
        kept.difference_with(dag.descendants(p));
    }
    total.merge(&round_cost(dag, &kept, None)?);
    Ok(total)
}

fn round_cost(dag: &Dag, kept: &NodeSet, parent: Option<usize>) -> Result<UnitFractionSum> {
    let (sub, labels) = dag.induced(kept);
    let spec = match parent {
        Some(p) => ParentSpec::single(sub.n(), labels.binary_search(&p).expect("parent kept")),
        None => ParentSpec::none(sub.n()),
    };
    expected_interventions(&sub, &spec)
}
