use crate::dag::{Dag, ParentSpec};
use crate::error::{parameter, Result};
use crate::nodeset::NodeSet;

use super::{SearchTrace, Step};

/// Permutation form of the parent search.
///
/// Walks `perm` and intervenes on `τ_i` unless some node of
/// `𝒜(P) △ 𝒜(τ_i) ∖ {τ_i}` already appeared earlier in the permutation. The
/// answer is the last intervened ancestor of `P`. This needs the graph to
/// decide what to skip, so it only serves as an analysis device and oracle.
///
/// Each step's `candidates` holds the nodes not yet passed in the walk.
pub fn raps_permutation(dag: &Dag, parent: &ParentSpec, perm: &[usize]) -> Result<SearchTrace> {
    let n = dag.n();
    if perm.len() != n {
        return Err(parameter(format!("permutation has {} entries for {n} nodes", perm.len())));
    }
    let mut seen = NodeSet::empty(n);
    for &v in perm {
        if v >= n || !seen.insert(v) {
            return Err(parameter("search order is not a permutation"));
        }
    }
    let p = parent.sole()?;
    let target = parent.ancestors(dag);

    let mut remaining = NodeSet::full(n);
    let mut before = NodeSet::empty(n);
    let mut found = None;
    let mut steps = Vec::new();
    for &x in perm {
        let mut blockers = target.symmetric_difference(dag.ancestors(x));
        blockers.remove(x);
        if !blockers.intersects(&before) {
            let ancestor = p.is_some_and(|p| dag.is_ancestor(x, p));
            if ancestor {
                found = Some(x);
            }
            steps.push(Step {
                candidates: remaining.clone(),
                intervened: x,
                was_ancestor: ancestor,
                discovered_descendants: dag.descendants(x).clone(),
            });
        }
        before.insert(x);
        remaining.remove(x);
    }
    Ok(SearchTrace {
        steps,
        result: match found {
            Some(x) => ParentSpec::single(n, x),
            None => ParentSpec::none(n),
        },
        samples_used: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const X1: usize = 0;
    const P: usize = 1;
    const X2: usize = 2;
    const X3: usize = 3;

    fn fig1() -> (Dag, ParentSpec) {
        (Dag::new(4, [(X1, P), (X1, X2), (P, X2), (X3, X2)]).unwrap(), ParentSpec::single(4, P))
    }

    #[test]
    fn skips_descendant_of_tested_non_ancestor() {
        let (g, p) = fig1();
        let t = raps_permutation(&g, &p, &[X3, X2, X1, P]).unwrap();
        assert_eq!(t.intervened(), vec![X3, X1, P]);
        assert_eq!(t.result_node(), Some(P));
    }

    #[test]
    fn equivalent_orders_give_equal_runs() {
        let (g, p) = fig1();
        let a = raps_permutation(&g, &p, &[X3, X1, X2, P]).unwrap();
        let b = raps_permutation(&g, &p, &[X3, X1, P, X2]).unwrap();
        assert_eq!(a.intervened(), b.intervened());
        assert_eq!(a.intervened(), vec![X3, X1, P]);
    }

    #[test]
    fn single_node() {
        let g = Dag::empty(1);
        let t = raps_permutation(&g, &ParentSpec::single(1, 0), &[0]).unwrap();
        assert_eq!(t.interventions(), 1);
    }

    #[test]
    fn rejects_non_permutations() {
        let (g, p) = fig1();
        assert!(raps_permutation(&g, &p, &[0, 1, 1, 3]).is_err());
        assert!(raps_permutation(&g, &p, &[0, 1, 2]).is_err());
    }
}
