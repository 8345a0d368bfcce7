//! Seeded generators for the graph families used as examples and
//! experiment substrates.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dag::{Dag, ParentSpec};
use crate::error::{parameter, Result};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    ErdosRenyi,
    Line,
    NBranch,
    ColliderLine,
    DaryTree,
    Null,
    MultiparentChain,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::ErdosRenyi => "erdos_renyi",
            FamilyKind::Line => "line",
            FamilyKind::NBranch => "n_branch",
            FamilyKind::ColliderLine => "collider_line",
            FamilyKind::DaryTree => "dary_tree",
            FamilyKind::Null => "null",
            FamilyKind::MultiparentChain => "multiparent_chain",
        }
    }
}

impl std::str::FromStr for FamilyKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "erdos_renyi" | "er" => FamilyKind::ErdosRenyi,
            "line" => FamilyKind::Line,
            "n_branch" => FamilyKind::NBranch,
            "collider_line" => FamilyKind::ColliderLine,
            "dary_tree" => FamilyKind::DaryTree,
            "null" => FamilyKind::Null,
            "multiparent_chain" => FamilyKind::MultiparentChain,
            other => return Err(parameter(format!("unknown graph family `{other}`"))),
        })
    }
}

/// Where the reward's parent sits in a random graph.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParentPlacement {
    #[default]
    Random,
    FirstInTopo,
    LastInTopo,
}

impl std::str::FromStr for ParentPlacement {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "random" => ParentPlacement::Random,
            "first-in-topo" | "first_in_topo" => ParentPlacement::FirstInTopo,
            "last-in-topo" | "last_in_topo" => ParentPlacement::LastInTopo,
            other => return Err(parameter(format!("unknown parent placement `{other}`"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphFamilySpec {
    pub kind: FamilyKind,
    pub n: usize,
    /// Edge probability, Erdős–Rényi only.
    #[serde(default)]
    pub p: f64,
    /// Arity, `dary_tree` only.
    #[serde(default = "default_arity")]
    pub d: usize,
    /// Parent count, `multiparent_chain` only.
    #[serde(default = "default_parents")]
    pub num_parents: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub placement: ParentPlacement,
    /// Overrides the family's designated parent node.
    #[serde(default)]
    pub parent: Option<usize>,
}

fn default_arity() -> usize {
    2
}

fn default_parents() -> usize {
    1
}

impl GraphFamilySpec {
    pub fn new(kind: FamilyKind, n: usize) -> Self {
        GraphFamilySpec {
            kind,
            n,
            p: 0.0,
            d: default_arity(),
            num_parents: default_parents(),
            seed: 0,
            placement: ParentPlacement::default(),
            parent: None,
        }
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(parameter(format!("edge probability {p} outside [0, 1]")))
    }
}

/// Erdős–Rényi DAG 𝒢_{n,p}: draw a uniform permutation π, include each
/// unordered pair independently with probability `p`, and orient `i → j`
/// iff π(i) < π(j).
pub fn gen_erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Dag> {
    if n == 0 {
        return Err(parameter("Erdős–Rényi graph needs at least one node"));
    }
    check_probability(p)?;
    let mut rng = rng::from_seed(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    // order[k] is the node with π = k
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random::<f64>() < p {
                edges.push((order[a], order[b]));
            }
        }
    }
    Ok(Dag::from_order(n, edges, &order))
}

pub fn place_parent(dag: &Dag, placement: ParentPlacement, seed: u64) -> ParentSpec {
    let n = dag.n();
    let p = match placement {
        ParentPlacement::Random => rng::from_seed(rng::derive_seed(seed, 1, 0)).random_range(0..n),
        ParentPlacement::FirstInTopo => dag.topological_order()[0],
        ParentPlacement::LastInTopo => dag.topological_order()[n - 1],
    };
    ParentSpec::single(n, p)
}

/// Erdős–Rényi ambient graph whose last `m` nodes in topological order are
/// the reward's parents.
pub fn gen_erdos_renyi_multiparent(n: usize, p: f64, m: usize, seed: u64) -> Result<(Dag, ParentSpec)> {
    if m > n {
        return Err(parameter(format!("{m} parents requested in a graph of {n} nodes")));
    }
    let dag = gen_erdos_renyi(n, p, seed)?;
    let parents = ParentSpec::from_nodes(n, dag.topological_order()[n - m..].iter().copied());
    Ok((dag, parents))
}

/// Builds the named family together with its designated parent set.
///
/// Node 0 plays `P` in the line, n-branch, collider-line and null graphs; the
/// remaining nodes are `X1, X2, ...` in index order.
pub fn gen_named(spec: &GraphFamilySpec) -> Result<(Dag, ParentSpec)> {
    let n = spec.n;
    if n == 0 {
        return Err(parameter("graph families need at least one node"));
    }
    let (dag, default_parent) = match spec.kind {
        FamilyKind::ErdosRenyi => {
            let dag = gen_erdos_renyi(n, spec.p, spec.seed)?;
            let parent = place_parent(&dag, spec.placement, spec.seed);
            (dag, parent)
        }
        FamilyKind::Line => (line(n), ParentSpec::single(n, 0)),
        FamilyKind::NBranch => (n_branch(n), ParentSpec::single(n, 0)),
        FamilyKind::ColliderLine => {
            if !n.is_multiple_of(2) {
                return Err(parameter(format!("collider line needs an even node count, got {n}")));
            }
            (collider_line(n), ParentSpec::single(n, 0))
        }
        FamilyKind::DaryTree => {
            let (dag, leaf) = dary_tree(n, spec.d)?;
            (dag, ParentSpec::single(n, leaf))
        }
        FamilyKind::Null => (Dag::empty(n), ParentSpec::single(n, 0)),
        FamilyKind::MultiparentChain => {
            let m = spec.num_parents;
            if m == 0 || m > n {
                return Err(parameter(format!("chain of {m} parents in {n} nodes")));
            }
            (line(n), ParentSpec::from_nodes(n, 0..m))
        }
    };
    let parent = match spec.parent {
        Some(p) if p >= n => return Err(parameter(format!("parent {p} out of range"))),
        Some(p) => ParentSpec::single(n, p),
        None => default_parent,
    };
    Ok((dag, parent))
}

fn line(n: usize) -> Dag {
    let order: Vec<usize> = (0..n).collect();
    Dag::from_order(n, (1..n).map(|i| (i - 1, i)).collect(), &order)
}

/// `P` points at every `X_i`; `X_1 → … → X_h` is a chain with `h = ⌊n/2⌋`,
/// and `X_h` points at the remaining nodes.
fn n_branch(n: usize) -> Dag {
    let h = n / 2;
    let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (0, i)).collect();
    edges.extend((2..=h).map(|i| (i - 1, i)));
    if h >= 1 {
        edges.extend((h + 1..n).map(|i| (h, i)));
    }
    let order: Vec<usize> = (0..n).collect();
    Dag::from_order(n, edges, &order)
}

/// `P → X1 ← X2 → X3 ← X4 → …`: every odd index is a collider.
fn collider_line(n: usize) -> Dag {
    let mut edges = Vec::new();
    for i in (1..n).step_by(2) {
        edges.push((i - 1, i));
        if i + 1 < n {
            edges.push((i + 1, i));
        }
    }
    Dag::new(n, edges).expect("collider line is acyclic")
}

/// Perfect `d`-ary tree in breadth-first numbering, edges pointing away
/// from the root. Also returns the leftmost leaf under the root's first
/// child (the root itself for a one-node tree).
fn dary_tree(n: usize, d: usize) -> Result<(Dag, usize)> {
    if d < 2 {
        return Err(parameter(format!("tree arity must be at least 2, got {d}")));
    }
    let mut size = 1usize;
    let mut level = 1usize;
    while size < n {
        level = level.saturating_mul(d);
        size = size.saturating_add(level);
    }
    if size != n {
        return Err(parameter(format!("{n} nodes do not form a perfect {d}-ary tree")));
    }
    let edges: Vec<(usize, usize)> = (1..n).map(|c| ((c - 1) / d, c)).collect();
    let order: Vec<usize> = (0..n).collect();
    let mut leaf = if n > 1 { 1 } else { 0 };
    while d * leaf + 1 < n {
        leaf = d * leaf + 1;
    }
    Ok((Dag::from_order(n, edges, &order), leaf))
}

/// Renames node `i` to `permutation[i]`.
pub fn relabel(dag: &Dag, parent: &ParentSpec, permutation: &[usize]) -> Result<(Dag, ParentSpec)> {
    let n = dag.n();
    if permutation.len() != n {
        return Err(parameter(format!(
            "permutation has {} entries for {n} nodes",
            permutation.len()
        )));
    }
    let mut seen = vec![false; n];
    for &v in permutation {
        if v >= n || std::mem::replace(&mut seen[v], true) {
            return Err(parameter("relabelling is not a bijection"));
        }
    }
    let edges = dag.edges().iter().map(|&(u, v)| (permutation[u], permutation[v]));
    let order: Vec<usize> = dag.topological_order().iter().map(|&v| permutation[v]).collect();
    let relabelled = Dag::from_order(n, edges.collect(), &order);
    let parents = ParentSpec::from_nodes(n, parent.nodes().into_iter().map(|p| permutation[p]));
    Ok((relabelled, parents))
}
