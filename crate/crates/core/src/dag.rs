//! Directed acyclic graphs with precomputed reachability.
//!
//! Every node counts as its own ancestor and descendant. Closures are stored
//! as one bitset per node, so `ancestors`/`descendants` lookups are free and
//! set algebra over them is word-parallel.

use crate::error::{domain, parameter, Result};
use crate::nodeset::NodeSet;

/// Largest graph the closures are built for.
pub const MAX_NODES: usize = 1 << 16;

#[derive(Clone, Debug)]
pub struct Dag {
    n: usize,
    edges: Vec<(usize, usize)>,
    children: Vec<Vec<usize>>,
    parents: Vec<Vec<usize>>,
    topo: Vec<usize>,
    ancestors: Vec<NodeSet>,
    descendants: Vec<NodeSet>,
}

impl PartialEq for Dag {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.edges == other.edges
    }
}

impl Eq for Dag {}

impl Dag {
    /// Builds a graph from an edge list, rejecting self loops, duplicates,
    /// out-of-range endpoints and cycles.
    pub fn new<I>(n: usize, edges: I) -> Result<Dag>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n > MAX_NODES {
            return Err(parameter(format!("{n} nodes exceeds the cap of {MAX_NODES}")));
        }
        let mut edges: Vec<(usize, usize)> = edges.into_iter().collect();
        for &(u, v) in &edges {
            if u >= n || v >= n {
                return Err(parameter(format!("edge ({u}, {v}) out of range for n = {n}")));
            }
            if u == v {
                return Err(parameter(format!("self loop at node {u}")));
            }
        }
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(parameter(format!("duplicate edge ({}, {})", w[0].0, w[0].1)));
        }
        let (children, parents) = adjacency(n, &edges);
        let topo = kahn(n, &children, &parents)
            .ok_or_else(|| parameter("edge relation contains a cycle"))?;
        Ok(Self::assemble(n, edges, children, parents, topo))
    }

    /// Builds a graph whose edges are already known to respect `order`
    /// (a permutation of the nodes) and to be free of duplicates.
    pub(crate) fn from_order(n: usize, mut edges: Vec<(usize, usize)>, order: &[usize]) -> Dag {
        debug_assert_eq!(order.len(), n);
        let mut pos = vec![0usize; n];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        debug_assert!(edges.iter().all(|&(u, v)| pos[u] < pos[v]));
        edges.sort_unstable();
        let (children, parents) = adjacency(n, &edges);
        Self::assemble(n, edges, children, parents, order.to_vec())
    }

    fn assemble(
        n: usize,
        edges: Vec<(usize, usize)>,
        children: Vec<Vec<usize>>,
        parents: Vec<Vec<usize>>,
        topo: Vec<usize>,
    ) -> Dag {
        let mut descendants: Vec<NodeSet> = (0..n).map(|v| NodeSet::singleton(n, v)).collect();
        for &u in topo.iter().rev() {
            let mut acc = std::mem::replace(&mut descendants[u], NodeSet::empty(0));
            for &c in &children[u] {
                acc.union_with(&descendants[c]);
            }
            descendants[u] = acc;
        }
        let mut ancestors: Vec<NodeSet> = (0..n).map(|v| NodeSet::singleton(n, v)).collect();
        for &v in &topo {
            let mut acc = std::mem::replace(&mut ancestors[v], NodeSet::empty(0));
            for &p in &parents[v] {
                acc.union_with(&ancestors[p]);
            }
            ancestors[v] = acc;
        }
        Dag {
            n,
            edges,
            children,
            parents,
            topo,
            ancestors,
            descendants,
        }
    }

    pub fn empty(n: usize) -> Dag {
        Dag::from_order(n, Vec::new(), &(0..n).collect::<Vec<_>>())
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges in lexicographic order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    /// Parents of `v`, ascending.
    pub fn parents(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    /// 𝒜(v), including `v`.
    #[inline]
    pub fn ancestors(&self, v: usize) -> &NodeSet {
        &self.ancestors[v]
    }

    /// 𝒟(v), including `v`.
    #[inline]
    pub fn descendants(&self, v: usize) -> &NodeSet {
        &self.descendants[v]
    }

    pub fn all_nodes(&self) -> NodeSet {
        NodeSet::full(self.n)
    }

    /// Union of the ancestor sets of every member of `set`.
    pub fn ancestors_of_set(&self, set: &NodeSet) -> NodeSet {
        let mut out = NodeSet::empty(self.n);
        for v in set {
            out.union_with(&self.ancestors[v]);
        }
        out
    }

    pub fn descendants_of_set(&self, set: &NodeSet) -> NodeSet {
        let mut out = NodeSet::empty(self.n);
        for v in set {
            out.union_with(&self.descendants[v]);
        }
        out
    }

    pub fn is_ancestor(&self, a: usize, b: usize) -> bool {
        self.ancestors[b].contains(a)
    }

    fn check_member(&self, candidates: &NodeSet, x: usize) -> Result<()> {
        if candidates.capacity() != self.n {
            return Err(domain(format!(
                "candidate set width {} does not match graph size {}",
                candidates.capacity(),
                self.n
            )));
        }
        if !candidates.contains(x) {
            return Err(domain(format!("node {x} is not in the candidate set")));
        }
        Ok(())
    }

    /// Ancestors of `x` in the subgraph induced by `candidates`.
    pub fn ancestors_in(&self, candidates: &NodeSet, x: usize) -> Result<NodeSet> {
        self.check_member(candidates, x)?;
        Ok(self.induced_search(candidates, x, &self.parents))
    }

    /// Descendants of `x` restricted to `candidates`: `𝒟(x) ∩ candidates`.
    ///
    /// This coincides with the descendants inside the induced subgraph
    /// whenever `candidates` is closed under taking descendants of removed
    /// nodes, which holds for every candidate set the parent search visits.
    pub fn descendants_in(&self, candidates: &NodeSet, x: usize) -> Result<NodeSet> {
        self.check_member(candidates, x)?;
        Ok(self.descendants[x].intersection(candidates))
    }

    /// Descendants of `x` found by walking only inside `candidates`.
    pub fn descendants_induced(&self, candidates: &NodeSet, x: usize) -> Result<NodeSet> {
        self.check_member(candidates, x)?;
        Ok(self.induced_search(candidates, x, &self.children))
    }

    fn induced_search(&self, candidates: &NodeSet, x: usize, next: &[Vec<usize>]) -> NodeSet {
        let mut seen = NodeSet::singleton(self.n, x);
        let mut stack = vec![x];
        while let Some(v) = stack.pop() {
            for &w in &next[v] {
                if candidates.contains(w) && seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        seen
    }

    /// Maximum degree of the undirected skeleton.
    pub fn skeleton_max_degree(&self) -> Result<usize> {
        if self.n == 0 {
            return Err(domain("skeleton degree of an empty graph"));
        }
        Ok((0..self.n)
            .map(|v| self.children[v].len() + self.parents[v].len())
            .max()
            .unwrap_or(0))
    }

    /// Whether a collider-free path joins `x` and the single parent in
    /// `parent`, i.e. whether they share a common ancestor.
    pub fn has_trek(&self, x: usize, parent: &ParentSpec) -> Result<bool> {
        if x >= self.n {
            return Err(domain(format!("node {x} out of range")));
        }
        match parent.sole()? {
            None => Ok(false),
            Some(p) if p == x => Err(domain("trek query against the parent itself")),
            Some(p) => Ok(self.ancestors[x].intersects(&self.ancestors[p])),
        }
    }

    /// Subgraph induced by `keep`, relabelled to `0..keep.len()` in
    /// ascending order of the original indices. Also returns the map from
    /// new index to original index.
    pub fn induced(&self, keep: &NodeSet) -> (Dag, Vec<usize>) {
        let old: Vec<usize> = keep.to_vec();
        let mut new_index = vec![usize::MAX; self.n];
        for (i, &v) in old.iter().enumerate() {
            new_index[v] = i;
        }
        let edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .filter(|&&(u, v)| keep.contains(u) && keep.contains(v))
            .map(|&(u, v)| (new_index[u], new_index[v]))
            .collect();
        let order: Vec<usize> = self
            .topo
            .iter()
            .filter(|&&v| keep.contains(v))
            .map(|&v| new_index[v])
            .collect();
        (Dag::from_order(old.len(), edges, &order), old)
    }
}

fn adjacency(n: usize, edges: &[(usize, usize)]) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let mut children = vec![Vec::new(); n];
    let mut parents = vec![Vec::new(); n];
    for &(u, v) in edges {
        children[u].push(v);
        parents[v].push(u);
    }
    for p in &mut parents {
        p.sort_unstable();
    }
    (children, parents)
}

fn kahn(n: usize, children: &[Vec<usize>], parents: &[Vec<usize>]) -> Option<Vec<usize>> {
    let mut indegree: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut ready: Vec<usize> = (0..n).rev().filter(|&v| indegree[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop() {
        order.push(v);
        for &c in children[v].iter().rev() {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push(c);
            }
        }
    }
    (order.len() == n).then_some(order)
}

/// The reward node's parents among the graph nodes; empty encodes `P = ∅`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ParentSpec {
    parents: NodeSet,
}

impl ParentSpec {
    pub fn none(n: usize) -> Self {
        ParentSpec {
            parents: NodeSet::empty(n),
        }
    }

    pub fn single(n: usize, p: usize) -> Self {
        ParentSpec {
            parents: NodeSet::singleton(n, p),
        }
    }

    pub fn from_set(parents: NodeSet) -> Self {
        ParentSpec { parents }
    }

    pub fn from_nodes<I: IntoIterator<Item = usize>>(n: usize, nodes: I) -> Self {
        ParentSpec {
            parents: NodeSet::from_nodes(n, nodes),
        }
    }

    pub fn set(&self) -> &NodeSet {
        &self.parents
    }

    pub fn nodes(&self) -> Vec<usize> {
        self.parents.to_vec()
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    /// The sole parent, `None` for `P = ∅`, or an error when there are
    /// several.
    pub fn sole(&self) -> Result<Option<usize>> {
        match self.parents.len() {
            0 => Ok(None),
            1 => Ok(self.parents.first()),
            k => Err(domain(format!("expected at most one parent, found {k}"))),
        }
    }

    pub fn width(&self) -> usize {
        self.parents.capacity()
    }

    /// 𝒜(𝒫), with 𝒜(∅) = ∅.
    pub fn ancestors(&self, dag: &Dag) -> NodeSet {
        dag.ancestors_of_set(&self.parents)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // X1 = 0, P = 1, X2 = 2, X3 = 3
    fn fig1() -> Dag {
        Dag::new(4, [(0, 1), (0, 2), (1, 2), (3, 2)]).unwrap()
    }

    #[test]
    fn ancestors_in_full_candidate_set() {
        let g = fig1();
        let a = g.ancestors_in(&g.all_nodes(), 2).unwrap();
        assert_eq!(a.to_vec(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn ancestors_in_shrunken_candidate_set() {
        let g = fig1();
        let c = NodeSet::from_nodes(4, [0, 1]);
        assert_eq!(g.ancestors_in(&c, 1).unwrap().to_vec(), vec![0, 1]);
    }

    #[test]
    fn singleton_candidates() {
        let g = fig1();
        for x in 0..4 {
            let c = NodeSet::singleton(4, x);
            assert_eq!(g.ancestors_in(&c, x).unwrap().to_vec(), vec![x]);
            assert_eq!(g.descendants_in(&c, x).unwrap().to_vec(), vec![x]);
        }
    }

    #[test]
    fn descendants_in_examples() {
        let g = fig1();
        assert_eq!(g.descendants_in(&g.all_nodes(), 3).unwrap().to_vec(), vec![2, 3]);
        let line = Dag::new(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(line.descendants_in(&line.all_nodes(), 1).unwrap().to_vec(), vec![1, 2]);
    }

    #[test]
    fn membership_is_required() {
        let g = fig1();
        let c = NodeSet::from_nodes(4, [0, 1]);
        assert!(matches!(g.ancestors_in(&c, 3), Err(crate::Error::Domain(_))));
        assert!(matches!(g.descendants_in(&c, 2), Err(crate::Error::Domain(_))));
    }

    #[test]
    fn rejects_cycles_and_bad_edges() {
        assert!(Dag::new(3, [(0, 1), (1, 2), (2, 0)]).is_err());
        assert!(Dag::new(2, [(0, 0)]).is_err());
        assert!(Dag::new(2, [(0, 2)]).is_err());
        assert!(Dag::new(2, [(0, 1), (0, 1)]).is_err());
    }

    #[test]
    fn skeleton_degree() {
        let line = Dag::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(line.skeleton_max_degree().unwrap(), 2);
        let tree = Dag::new(7, [(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)]).unwrap();
        assert_eq!(tree.skeleton_max_degree().unwrap(), 3);
        assert_eq!(Dag::empty(5).skeleton_max_degree().unwrap(), 0);
        assert!(Dag::empty(0).skeleton_max_degree().is_err());
    }

    #[test]
    fn treks_in_collider_line() {
        // P -> X1 <- X2 -> X3
        let g = Dag::new(4, [(0, 1), (2, 1), (2, 3)]).unwrap();
        let p = ParentSpec::single(4, 0);
        assert!(!g.has_trek(2, &p).unwrap());
        assert!(g.has_trek(1, &p).unwrap());
        assert!(!g.has_trek(3, &p).unwrap());
        let none = ParentSpec::none(4);
        assert!((0..4).all(|x| !g.has_trek(x, &none).unwrap()));
    }

    #[test]
    fn induced_subgraph_relabels() {
        let g = fig1();
        let (sub, map) = g.induced(&NodeSet::from_nodes(4, [0, 2, 3]));
        assert_eq!(map, vec![0, 2, 3]);
        assert_eq!(sub.edges(), &[(0, 1), (2, 1)]);
    }
}
