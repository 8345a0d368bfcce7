//! Candidate family, the logarithmic-cost condition, and trek counting.

use std::collections::BTreeSet;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::dag::{Dag, ParentSpec};
use crate::error::{capability, parameter, Result};
use crate::nodeset::NodeSet;

/// Largest graph whose candidate family is enumerated.
pub const FAMILY_MAX_NODES: usize = 12;
/// Largest parent set for the multi-parent condition.
pub const CONDITION_MAX_PARENTS: usize = 4;

/// Descendant sets of every subset of `nodes`, inside `within`, indexed by
/// bit mask over `nodes`.
fn subset_descendants(dag: &Dag, nodes: &[usize], within: &NodeSet) -> Vec<NodeSet> {
    let mut out = Vec::with_capacity(1 << nodes.len());
    out.push(NodeSet::empty(dag.n()));
    for mask in 1usize..1 << nodes.len() {
        let low = mask.trailing_zeros() as usize;
        let mut d = out[mask & (mask - 1)].clone();
        d.union_with(&dag.descendants(nodes[low]).intersection(within));
        out.push(d);
    }
    out
}

/// Every candidate set the parent search can visit:
/// `{𝒱 ∖ 𝒟(𝒲) : 𝒲 ⊆ 𝒜ᶜ(P)}` together with
/// `{𝒟(X) ∖ 𝒟_{𝒟(X)}(𝒲) ∖ {X} : X ∈ 𝒜(P), 𝒲 ⊆ 𝒜ᶜ_{𝒟(X)}(P)}`.
pub fn candidate_family(dag: &Dag, parent: &ParentSpec) -> Result<BTreeSet<NodeSet>> {
    let n = dag.n();
    if n > FAMILY_MAX_NODES {
        return Err(capability(format!(
            "candidate family over {n} nodes (limit {FAMILY_MAX_NODES})"
        )));
    }
    parent.sole()?;
    let all = dag.all_nodes();
    let ancestors = parent.ancestors(dag);
    let mut family = BTreeSet::new();
    let outside: Vec<usize> = all.difference(&ancestors).iter().collect();
    for d in subset_descendants(dag, &outside, &all) {
        family.insert(all.difference(&d));
    }
    for x in ancestors.iter() {
        let below = dag.descendants(x);
        let others: Vec<usize> = below.difference(&ancestors).iter().collect();
        for d in subset_descendants(dag, &others, below) {
            let mut set = below.difference(&d);
            set.remove(x);
            family.insert(set);
        }
    }
    Ok(family)
}

/// Constants of the logarithmic-cost condition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FastCondParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub c: f64,
    pub k: f64,
    pub log_base: f64,
}

impl FastCondParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, c: f64, k: f64, log_base: f64) -> Result<Self> {
        let unit = |v: f64| 0.0 < v && v < 1.0;
        if !(unit(alpha) && unit(beta) && unit(gamma)) {
            return Err(parameter("alpha, beta and gamma must lie in (0, 1)"));
        }
        if !(c > 0.0 && k >= 1.0 && log_base > 1.0) {
            return Err(parameter("need c > 0, k >= 1 and a log base above 1"));
        }
        Ok(FastCondParams {
            alpha,
            beta,
            gamma,
            c,
            k,
            log_base,
        })
    }

    /// `c · log^k(n)`.
    pub fn small_set_size(&self, n: usize) -> f64 {
        if n <= 1 {
            return 0.0;
        }
        self.c * (n as f64).log(self.log_base).powf(self.k)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub set: NodeSet,
    /// Size of the heavy non-ancestor set `ℋ_C(α)`.
    pub heavy: usize,
    /// Size of `𝒜_C(P)`.
    pub ancestors: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FastConditionReport {
    pub holds: bool,
    pub sets_checked: usize,
    pub violation: Option<Violation>,
}

/// Checks, for every candidate set `C`, that `|ℋ_C(α)| ≥ β|C|` or
/// `|𝒜_C(P)| ≥ γ|C|` or `|C| ≤ c·log^k(n)`; reports the first set failing
/// all three.
pub fn check_fast_condition(dag: &Dag, parent: &ParentSpec, params: &FastCondParams) -> Result<FastConditionReport> {
    fast_condition_at_scale(dag, parent, params, dag.n())
}

fn fast_condition_at_scale(
    dag: &Dag,
    parent: &ParentSpec,
    params: &FastCondParams,
    scale: usize,
) -> Result<FastConditionReport> {
    let family = candidate_family(dag, parent)?;
    let p = parent.sole()?;
    let small = params.small_set_size(scale);
    let mut checked = 0;
    for c in &family {
        checked += 1;
        let size = c.len() as f64;
        if size <= small {
            continue;
        }
        let ancestors = match p {
            Some(p) if c.contains(p) => dag.ancestors_in(c, p)?,
            _ => NodeSet::empty(dag.n()),
        };
        if ancestors.len() as f64 >= params.gamma * size {
            continue;
        }
        let mut heavy = 0;
        for x in c.difference(&ancestors).iter() {
            if dag.descendants_induced(c, x)?.len() as f64 >= params.alpha * size {
                heavy += 1;
            }
        }
        if heavy as f64 >= params.beta * size {
            continue;
        }
        return Ok(FastConditionReport {
            holds: false,
            sets_checked: checked,
            violation: Some(Violation {
                set: c.clone(),
                heavy,
                ancestors: ancestors.len(),
            }),
        });
    }
    Ok(FastConditionReport {
        holds: true,
        sets_checked: checked,
        violation: None,
    })
}

/// Topological orderings of the members of `parents`.
pub fn parent_orderings(dag: &Dag, parents: &ParentSpec) -> Vec<Vec<usize>> {
    let nodes = parents.nodes();
    let len = nodes.len();
    nodes
        .into_iter()
        .permutations(len)
        .filter(|order| {
            order
                .iter()
                .tuple_combinations()
                .all(|(&a, &b)| !dag.is_ancestor(b, a))
        })
        .collect()
}

/// One graph-parent pair of the multi-parent condition.
#[derive(Clone, Debug, PartialEq)]
pub struct PairCheck {
    /// The ordering the pair comes from; empty for the final pair.
    pub ordering: Vec<usize>,
    /// Nodes kept, in original labels.
    pub kept: NodeSet,
    /// Parent of the pair in original labels, `None` for the final pair.
    pub parent: Option<usize>,
    pub report: FastConditionReport,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultiparentConditionReport {
    pub holds: bool,
    pub pairs: Vec<PairCheck>,
}

fn pair_check(
    dag: &Dag,
    kept: NodeSet,
    parent: Option<usize>,
    ordering: Vec<usize>,
    params: &FastCondParams,
) -> Result<PairCheck> {
    let (sub, labels) = dag.induced(&kept);
    let sub_parent = match parent {
        Some(p) => ParentSpec::single(sub.n(), labels.iter().position(|&v| v == p).expect("parent kept")),
        None => ParentSpec::none(sub.n()),
    };
    let report = fast_condition_at_scale(&sub, &sub_parent, params, dag.n())?;
    Ok(PairCheck {
        ordering,
        kept,
        parent,
        report,
    })
}

/// Checks the logarithmic-cost condition on `(𝒢_{𝒱∖𝒟(𝒫)}, ∅)` and on
/// every `(𝒢_{𝒱∖𝒮(τ,i)}, τ_i)` with `𝒮(τ,i)` the descendants of the parents
/// after position `i` of a topological ordering `τ`, skipping pairs whose
/// graph has at most `c·log^k(n)` nodes.
pub fn check_multiparent_condition(
    dag: &Dag,
    parents: &ParentSpec,
    params: &FastCondParams,
) -> Result<MultiparentConditionReport> {
    if parents.len() > CONDITION_MAX_PARENTS {
        return Err(capability(format!(
            "{} parents (limit {CONDITION_MAX_PARENTS})",
            parents.len()
        )));
    }
    if dag.n() > FAMILY_MAX_NODES {
        return Err(capability(format!(
            "condition over {} nodes (limit {FAMILY_MAX_NODES})",
            dag.n()
        )));
    }
    let small = params.small_set_size(dag.n());
    let all = dag.all_nodes();
    let mut pairs = Vec::new();
    let mut seen = BTreeSet::new();
    for ordering in parent_orderings(dag, parents) {
        for (i, &p) in ordering.iter().enumerate() {
            let removed = dag.descendants_of_set(&NodeSet::from_nodes(dag.n(), ordering[i + 1..].iter().copied()));
            let kept = all.difference(&removed);
            if kept.len() as f64 <= small || !seen.insert((kept.clone(), p)) {
                continue;
            }
            pairs.push(pair_check(dag, kept, Some(p), ordering.clone(), params)?);
        }
    }
    let kept = all.difference(&dag.descendants_of_set(parents.set()));
    pairs.push(pair_check(dag, kept, None, Vec::new(), params)?);
    Ok(MultiparentConditionReport {
        holds: pairs.iter().all(|p| p.report.holds),
        pairs,
    })
}

/// Nodes other than the parent sharing no common ancestor with it.
pub fn count_trekless(dag: &Dag, parent: &ParentSpec) -> Result<usize> {
    let Some(p) = parent.sole()? else {
        return Ok(dag.n());
    };
    let mut count = 0;
    for x in (0..dag.n()).filter(|&x| x != p) {
        if !dag.has_trek(x, parent)? {
            count += 1;
        }
    }
    Ok(count)
}

/// `count · log_d(n) / n` with `d` the skeleton's maximum degree; `None`
/// when `d < 2`.
pub fn trekless_ratio(dag: &Dag, parent: &ParentSpec) -> Result<Option<f64>> {
    let count = count_trekless(dag, parent)?;
    let d = dag.skeleton_max_degree()?;
    if d < 2 || dag.n() < 2 {
        return Ok(None);
    }
    let n = dag.n() as f64;
    Ok(Some(count as f64 * n.log(d as f64) / n))
}
