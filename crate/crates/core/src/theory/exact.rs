//! Expected number of interventions of the single-parent search, computed
//! three independent ways.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::dag::{Dag, ParentSpec};
use crate::error::{capability, Result};
use crate::nodeset::NodeSet;

/// Largest graph for the memoised recursion.
pub const RECURSION_MAX_NODES: usize = 24;
/// Largest graph for the brute-force permutation average.
pub const ENUMERATION_MAX_NODES: usize = 8;

/// A sum of unit fractions `Σ count/denominator`, kept as a histogram of
/// denominators so that it is exact and cheap to build for large graphs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UnitFractionSum {
    terms: BTreeMap<u64, u64>,
}

impl UnitFractionSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_term(&mut self, denominator: u64) {
        *self.terms.entry(denominator).or_insert(0) += 1;
    }

    pub fn merge(&mut self, other: &UnitFractionSum) {
        for (&d, &c) in &other.terms {
            *self.terms.entry(d).or_insert(0) += c;
        }
    }

    /// `(denominator, count)` pairs in ascending denominator order.
    pub fn terms(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.terms.iter().map(|(&d, &c)| (d, c))
    }

    pub fn term_count(&self) -> u64 {
        self.terms.values().sum()
    }

    pub fn to_rational(&self) -> BigRational {
        self.terms.iter().fold(BigRational::zero(), |acc, (&d, &c)| {
            acc + BigRational::new(BigInt::from(c), BigInt::from(d))
        })
    }

    /// Floating value, summed from the smallest contributions upwards.
    pub fn to_f64(&self) -> f64 {
        self.terms.iter().rev().map(|(&d, &c)| c as f64 / d as f64).sum()
    }
}

impl fmt::Display for UnitFractionSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_rational())
    }
}

/// `Σ_X 1 / (|𝒜(P) △ 𝒜(X) ∖ {X}| + 1)`, with `𝒜(∅) = ∅`.
pub fn expected_interventions(dag: &Dag, parent: &ParentSpec) -> Result<UnitFractionSum> {
    parent.sole()?;
    let target = parent.ancestors(dag);
    let mut sum = UnitFractionSum::new();
    for x in 0..dag.n() {
        let mut diff = target.symmetric_difference(dag.ancestors(x));
        diff.remove(x);
        sum.add_term(diff.len() as u64 + 1);
    }
    Ok(sum)
}

/// The universal lower bound on any algorithm's expected interventions.
///
/// Evaluated through set sizes, `|𝒜(P)| + |𝒜(X)| − 2|𝒜(P) ∩ 𝒜(X)|`, minus
/// one when `X` itself lies in the symmetric difference.
pub fn lower_bound(dag: &Dag, parent: &ParentSpec) -> Result<UnitFractionSum> {
    parent.sole()?;
    let target = parent.ancestors(dag);
    let mut sum = UnitFractionSum::new();
    for x in 0..dag.n() {
        let own = dag.ancestors(x);
        let shared = target.intersection_len(own);
        let size = target.len() + own.len() - 2 * shared - usize::from(!target.contains(x));
        sum.add_term(size as u64 + 1);
    }
    Ok(sum)
}

/// `T(𝒱)` for the recursion `T(∅) = 0`,
/// `T(C) = 1 + (1/|C|)[Σ_{X ∈ 𝒜_C(P)} T(𝒟_C(X) ∖ {X}) + Σ_{X ∉ 𝒜_C(P)} T(C ∖ 𝒟_C(X))]`,
/// with ancestors and descendants taken inside the subgraph induced by `C`.
pub fn expected_interventions_recursive(dag: &Dag, parent: &ParentSpec) -> Result<BigRational> {
    if dag.n() > RECURSION_MAX_NODES {
        return Err(capability(format!(
            "recursion over {} nodes (limit {RECURSION_MAX_NODES})",
            dag.n()
        )));
    }
    let p = parent.sole()?;
    let mut memo = HashMap::new();
    recurse(dag, p, dag.all_nodes(), &mut memo)
}

fn recurse(
    dag: &Dag,
    p: Option<usize>,
    c: NodeSet,
    memo: &mut HashMap<NodeSet, BigRational>,
) -> Result<BigRational> {
    if c.is_empty() {
        return Ok(BigRational::zero());
    }
    if let Some(v) = memo.get(&c) {
        return Ok(v.clone());
    }
    let ancestors = match p {
        Some(p) if c.contains(p) => dag.ancestors_in(&c, p)?,
        _ => NodeSet::empty(dag.n()),
    };
    let mut total = BigRational::zero();
    for x in c.iter() {
        let d = dag.descendants_induced(&c, x)?;
        let next = if ancestors.contains(x) {
            let mut strict = d;
            strict.remove(x);
            strict
        } else {
            c.difference(&d)
        };
        total += recurse(dag, p, next, memo)?;
    }
    let size = BigRational::from_integer(BigInt::from(c.len()));
    let value = BigRational::from_integer(BigInt::from(1)) + total / size;
    memo.insert(c, value.clone());
    Ok(value)
}

/// Average number of interventions of the permutation form of the search
/// over all `n!` orders, by walking every permutation.
pub fn enumerate_permutation_mean(dag: &Dag, parent: &ParentSpec) -> Result<BigRational> {
    let n = dag.n();
    if n > ENUMERATION_MAX_NODES {
        return Err(capability(format!(
            "permutation enumeration over {n} nodes (limit {ENUMERATION_MAX_NODES})"
        )));
    }
    let (total, count) = permutation_totals(dag, parent)?;
    Ok(BigRational::new(BigInt::from(total), BigInt::from(count)))
}

/// Total interventions summed over all permutations, and the number of
/// permutations.
fn permutation_totals(dag: &Dag, parent: &ParentSpec) -> Result<(u64, u64)> {
    let n = dag.n();
    parent.sole()?;
    if n == 0 {
        return Ok((0, 1));
    }
    let target = parent.ancestors(dag);
    let blockers: Vec<u32> = (0..n)
        .map(|x| {
            let mut diff = target.symmetric_difference(dag.ancestors(x));
            diff.remove(x);
            diff.iter().fold(0u32, |m, v| m | (1 << v))
        })
        .collect();
    let walk = |perm: &[usize]| -> u64 {
        let mut before = 0u32;
        let mut count = 0;
        for &x in perm {
            if blockers[x] & before == 0 {
                count += 1;
            }
            before |= 1 << x;
        }
        count
    };
    // Heap's algorithm, iterative form.
    let mut perm: Vec<usize> = (0..n).collect();
    let mut stack = vec![0usize; n];
    let mut total = walk(&perm);
    let mut count = 1u64;
    let mut i = 1;
    while i < n {
        if stack[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(stack[i], i);
            }
            total += walk(&perm);
            count += 1;
            stack[i] += 1;
            i = 1;
        } else {
            stack[i] = 0;
            i += 1;
        }
    }
    Ok((total, count))
}

/// Renders a rational as `a/b ≈ decimal`.
pub fn render_rational(value: &BigRational) -> String {
    let decimal = value.to_f64().unwrap_or(f64::NAN);
    format!("{value} ≈ {decimal:.6}")
}
