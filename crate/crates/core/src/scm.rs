//! Categorical structural causal models with a scalar reward.
//!
//! Each node holds a conditional probability table indexed by the joint
//! value of its parents (ascending node order, first parent most
//! significant). The reward's mean is a table over the joint value of the
//! reward's parents; truncated Gaussian noise is added on top.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dag::{Dag, ParentSpec};
use crate::error::{capability, parameter, Error, Result};
use crate::nodeset::NodeSet;
use crate::rng;

/// Exact inference is refused beyond this many nodes.
pub const MAX_EXACT_NODES: usize = 20;
/// Identifiability is certified exactly when `K^n` stays below this.
pub const EXACT_STATE_BUDGET: f64 = (1u64 << 20) as f64;
/// Largest conditional probability table (rows) a node may carry.
pub const MAX_TABLE_ROWS: usize = 1 << 20;

const ROW_TOLERANCE: f64 = 1e-12;

/// `do(targets = values)`; the empty intervention is the observational
/// regime.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Intervention {
    targets: Vec<usize>,
    values: Vec<usize>,
}

impl Intervention {
    pub fn observational() -> Self {
        Self::default()
    }

    pub fn atomic(node: usize, value: usize) -> Self {
        Intervention {
            targets: vec![node],
            values: vec![value],
        }
    }

    pub fn new<I: IntoIterator<Item = (usize, usize)>>(pairs: I) -> Result<Self> {
        let mut pairs: Vec<(usize, usize)> = pairs.into_iter().collect();
        pairs.sort_unstable();
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(parameter("a node is intervened on twice"));
        }
        Ok(Intervention {
            targets: pairs.iter().map(|p| p.0).collect(),
            values: pairs.iter().map(|p| p.1).collect(),
        })
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn target_set(&self, n: usize) -> NodeSet {
        NodeSet::from_nodes(n, self.targets.iter().copied())
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.targets.iter().copied().zip(self.values.iter().copied())
    }

    pub fn is_observational(&self) -> bool {
        self.targets.is_empty()
    }
}

impl std::fmt::Display for Intervention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("do(")?;
        for (i, (x, v)) in self.pairs().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "X{x}={v}")?;
        }
        f.write_str(")")
    }
}

/// Zero-mean Gaussian noise truncated to `[-clip, clip]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardNoise {
    pub std_dev: f64,
    pub clip: f64,
}

impl Default for RewardNoise {
    fn default() -> Self {
        RewardNoise {
            std_dev: 0.1,
            clip: 1.0,
        }
    }
}

impl RewardNoise {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.std_dev == 0.0 {
            return 0.0;
        }
        loop {
            let z: f64 = StandardNormal.sample(rng);
            let e = z * self.std_dev;
            if e.abs() <= self.clip {
                return e;
            }
        }
    }

    /// A truncated centred Gaussian is σ²-subgaussian, so unit
    /// subgaussianity holds whenever σ ≤ 1.
    pub fn is_unit_subgaussian(&self) -> bool {
        self.std_dev <= 1.0 && self.clip >= 0.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub assignment: Vec<usize>,
    pub reward: f64,
}

/// How interventional quantities are computed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Inference {
    Exact,
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Clone, Debug)]
pub struct Scm {
    dag: Dag,
    parents: ParentSpec,
    reward_nodes: Vec<usize>,
    k: usize,
    cpts: Vec<Vec<f64>>,
    reward_table: Vec<f64>,
    noise: RewardNoise,
}

fn table_rows(k: usize, parents: usize) -> Result<usize> {
    let rows = (k as f64).powi(parents as i32);
    if rows > MAX_TABLE_ROWS as f64 {
        return Err(capability(format!(
            "a table over {parents} parents with {k} categories has too many rows"
        )));
    }
    Ok(k.pow(parents as u32))
}

impl Scm {
    /// Assembles a model from explicit tables, validating their shapes and
    /// that every row is a distribution.
    pub fn from_parts(
        dag: Dag,
        parents: ParentSpec,
        k: usize,
        cpts: Vec<Vec<f64>>,
        reward_table: Vec<f64>,
        noise: RewardNoise,
    ) -> Result<Scm> {
        let n = dag.n();
        if k < 1 {
            return Err(parameter("at least one category is needed"));
        }
        if parents.width() != n {
            return Err(parameter("parent set width does not match the graph"));
        }
        if cpts.len() != n {
            return Err(parameter(format!("{} tables for {n} nodes", cpts.len())));
        }
        for (v, table) in cpts.iter().enumerate() {
            let rows = table_rows(k, dag.parents(v).len())?;
            if table.len() != rows * k {
                return Err(parameter(format!("table of node {v} has {} entries, expected {}", table.len(), rows * k)));
            }
            for row in table.chunks(k) {
                let sum: f64 = row.iter().sum();
                if row.iter().any(|&q| !(0.0..=1.0).contains(&q)) || (sum - 1.0).abs() > ROW_TOLERANCE {
                    return Err(parameter(format!("table of node {v} has a row that is not a distribution")));
                }
            }
        }
        let reward_nodes = parents.nodes();
        if reward_table.len() != table_rows(k, reward_nodes.len())? {
            return Err(parameter("reward table size does not match the parent set"));
        }
        if reward_table.iter().any(|m| !m.is_finite()) {
            return Err(parameter("reward means must be finite"));
        }
        if !(noise.std_dev >= 0.0 && noise.clip >= 0.0) {
            return Err(parameter("noise parameters must be non-negative"));
        }
        Ok(Scm {
            dag,
            parents,
            reward_nodes,
            k,
            cpts,
            reward_table,
            noise,
        })
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn parents(&self) -> &ParentSpec {
        &self.parents
    }

    pub fn n(&self) -> usize {
        self.dag.n()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn cpt(&self, v: usize) -> &[f64] {
        &self.cpts[v]
    }

    pub fn reward_table(&self) -> &[f64] {
        &self.reward_table
    }

    pub fn noise(&self) -> RewardNoise {
        self.noise
    }

    fn config_index(&self, nodes: &[usize], assignment: &[usize]) -> usize {
        nodes.iter().fold(0, |acc, &p| acc * self.k + assignment[p])
    }

    fn row(&self, v: usize, assignment: &[usize]) -> &[f64] {
        let r = self.config_index(self.dag.parents(v), assignment);
        &self.cpts[v][r * self.k..(r + 1) * self.k]
    }

    /// Mean reward given the values of the reward's parents.
    pub fn reward_mean_given(&self, assignment: &[usize]) -> f64 {
        self.reward_table[self.config_index(&self.reward_nodes, assignment)]
    }

    /// Best achievable mean reward: interventions on the parent set dominate
    /// every other intervention in a model without latent variables.
    pub fn optimal_mean(&self) -> f64 {
        self.reward_table.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Parent assignment attaining [`Scm::optimal_mean`].
    pub fn optimal_intervention(&self) -> Intervention {
        let best = (0..self.reward_table.len())
            .max_by(|&a, &b| self.reward_table[a].total_cmp(&self.reward_table[b]))
            .unwrap_or(0);
        let mut values = vec![0; self.reward_nodes.len()];
        let mut r = best;
        for slot in values.iter_mut().rev() {
            *slot = r % self.k;
            r /= self.k;
        }
        Intervention {
            targets: self.reward_nodes.clone(),
            values,
        }
    }

    fn check_intervention(&self, iv: &Intervention) -> Result<()> {
        for (x, v) in iv.pairs() {
            if x >= self.n() || v >= self.k {
                return Err(parameter(format!("intervention X{x}={v} out of range")));
            }
        }
        Ok(())
    }

    /// Dense lookup of the intervened value per node.
    pub fn fixing(&self, iv: &Intervention) -> Result<Vec<Option<usize>>> {
        self.check_intervention(iv)?;
        let mut fixed = vec![None; self.n()];
        for (x, v) in iv.pairs() {
            fixed[x] = Some(v);
        }
        Ok(fixed)
    }

    /// Ancestral sampling into `assignment`; returns the reward.
    pub fn sample_fixed<R: Rng + ?Sized>(&self, fixed: &[Option<usize>], assignment: &mut [usize], rng: &mut R) -> f64 {
        for &v in self.dag.topological_order() {
            assignment[v] = match fixed[v] {
                Some(value) => value,
                None => {
                    let u: f64 = rng.random();
                    let row = self.row(v, assignment);
                    let mut acc = 0.0;
                    let mut pick = self.k - 1;
                    for (value, &q) in row.iter().enumerate() {
                        acc += q;
                        if u < acc {
                            pick = value;
                            break;
                        }
                    }
                    pick
                }
            };
        }
        self.reward_mean_given(assignment) + self.noise.sample(rng)
    }

    pub fn sample<R: Rng + ?Sized>(&self, iv: &Intervention, rng: &mut R) -> Result<Sample> {
        let fixed = self.fixing(iv)?;
        let mut assignment = vec![0; self.n()];
        let reward = self.sample_fixed(&fixed, &mut assignment, rng);
        Ok(Sample { assignment, reward })
    }

    /// Visits every joint state of `order` with non-zero probability under
    /// the truncated factorization.
    fn enumerate<F>(&self, fixed: &[Option<usize>], order: &[usize], visit: &mut F)
    where
        F: FnMut(&[usize], f64),
    {
        let mut assignment = vec![0; self.n()];
        self.enumerate_from(fixed, order, 0, 1.0, &mut assignment, visit);
    }

    fn enumerate_from<F>(
        &self,
        fixed: &[Option<usize>],
        order: &[usize],
        depth: usize,
        prob: f64,
        assignment: &mut [usize],
        visit: &mut F,
    ) where
        F: FnMut(&[usize], f64),
    {
        let Some(&v) = order.get(depth) else {
            visit(assignment, prob);
            return;
        };
        if let Some(value) = fixed[v] {
            assignment[v] = value;
            self.enumerate_from(fixed, order, depth + 1, prob, assignment, visit);
            return;
        }
        for value in 0..self.k {
            let q = self.row(v, assignment)[value];
            if q > 0.0 {
                assignment[v] = value;
                self.enumerate_from(fixed, order, depth + 1, prob * q, assignment, visit);
            }
        }
    }

    fn exact_guard(&self) -> Result<()> {
        if self.n() > MAX_EXACT_NODES {
            return Err(capability(format!(
                "exact inference over {} nodes (limit {MAX_EXACT_NODES})",
                self.n()
            )));
        }
        Ok(())
    }

    /// E[R | do(iv)].
    pub fn interventional_mean(&self, iv: &Intervention, mode: Inference) -> Result<f64> {
        match mode {
            Inference::Exact => self.exact_mean(iv),
            Inference::MonteCarlo { samples, seed } => {
                Ok(self.monte_carlo_mean(iv, samples, &mut rng::from_seed(seed))?.mean)
            }
        }
    }

    fn exact_mean(&self, iv: &Intervention) -> Result<f64> {
        self.exact_guard()?;
        let fixed = self.fixing(iv)?;
        // only ancestors of the reward's parents influence the reward
        let relevant = self.parents.ancestors(&self.dag);
        let order: Vec<usize> = self
            .dag
            .topological_order()
            .iter()
            .copied()
            .filter(|&v| relevant.contains(v))
            .collect();
        let mut mean = 0.0;
        self.enumerate(&fixed, &order, &mut |a, prob| mean += prob * self.reward_mean_given(a));
        Ok(mean)
    }

    /// Exact per-node marginals and reward mean under `iv`.
    pub fn exact_distribution(&self, iv: &Intervention) -> Result<(Vec<Vec<f64>>, f64)> {
        self.exact_guard()?;
        let fixed = self.fixing(iv)?;
        let mut marginals = vec![vec![0.0; self.k]; self.n()];
        let mut mean = 0.0;
        self.enumerate(&fixed, self.dag.topological_order(), &mut |a, prob| {
            for (v, &value) in a.iter().enumerate() {
                marginals[v][value] += prob;
            }
            mean += prob * self.reward_mean_given(a);
        });
        Ok((marginals, mean))
    }

    pub fn monte_carlo_mean<R: Rng + ?Sized>(&self, iv: &Intervention, samples: usize, rng: &mut R) -> Result<Estimate> {
        if samples < 2 {
            return Err(parameter("Monte Carlo estimates need at least two samples"));
        }
        let fixed = self.fixing(iv)?;
        let mut assignment = vec![0; self.n()];
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..samples {
            let r = self.sample_fixed(&fixed, &mut assignment, rng);
            sum += r;
            sum_sq += r * r;
        }
        let s = samples as f64;
        let mean = sum / s;
        let var = ((sum_sq - s * mean * mean) / (s - 1.0)).max(0.0);
        Ok(Estimate {
            mean,
            std_error: (var / s).sqrt(),
        })
    }

    fn empirical_distribution<R: Rng + ?Sized>(
        &self,
        iv: &Intervention,
        samples: usize,
        rng: &mut R,
    ) -> Result<(Vec<Vec<f64>>, f64)> {
        let fixed = self.fixing(iv)?;
        let mut counts = vec![vec![0.0; self.k]; self.n()];
        let mut assignment = vec![0; self.n()];
        let mut reward = 0.0;
        for _ in 0..samples {
            reward += self.sample_fixed(&fixed, &mut assignment, rng);
            for (v, &value) in assignment.iter().enumerate() {
                counts[v][value] += 1.0;
            }
        }
        let s = samples as f64;
        counts.iter_mut().flatten().for_each(|c| *c /= s);
        Ok((counts, reward / s))
    }

    /// Margins of the two identifiability assumptions: the smallest
    /// ancestral effect `max_{x,y} |P(Y=y|do(X=x)) − P(Y=y)|` over ancestor
    /// pairs, and the smallest reward shift `max_x |E[R] − E[R|do(X=x)]|`
    /// over ancestors of the reward's parents.
    ///
    /// Exact when `K^n` fits [`EXACT_STATE_BUDGET`]; otherwise each
    /// intervention is estimated from `mc_samples` draws and the margins
    /// are reported as lower confidence bounds at three standard errors.
    pub fn verify_identifiability(&self, mc_samples: usize, seed: u64) -> Result<IdentifiabilityReport> {
        let n = self.n();
        let exact = (self.k as f64).powi(n as i32) <= EXACT_STATE_BUDGET && n <= MAX_EXACT_NODES;
        let mut rng = rng::from_seed(seed);
        let mut distribution = |iv: &Intervention| -> Result<(Vec<Vec<f64>>, f64)> {
            if exact {
                self.exact_distribution(iv)
            } else {
                self.empirical_distribution(iv, mc_samples, &mut rng)
            }
        };
        let (base, base_reward) = distribution(&Intervention::observational())?;
        let reward_ancestors = self.parents.ancestors(&self.dag);
        let mut effect = Margin::unbounded();
        let mut reward = Margin::unbounded();
        for x in 0..n {
            let descendants = self.dag.descendants(x);
            let mut best_effect = vec![0.0f64; n];
            let mut best_reward = 0.0f64;
            for value in 0..self.k {
                let (marg, mean) = distribution(&Intervention::atomic(x, value))?;
                best_reward = best_reward.max((mean - base_reward).abs());
                for y in descendants.iter().filter(|&y| y != x) {
                    let gap = marg[y]
                        .iter()
                        .zip(&base[y])
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max);
                    best_effect[y] = best_effect[y].max(gap);
                }
            }
            for y in descendants.iter().filter(|&y| y != x) {
                effect.offer(best_effect[y], (x, y));
            }
            if reward_ancestors.contains(x) {
                reward.offer(best_reward, (x, x));
            }
        }
        let slack = |scale: f64| {
            if exact {
                0.0
            } else {
                3.0 * scale * (2.0 / mc_samples as f64).sqrt()
            }
        };
        // proportions have variance at most 1/4; the reward's is bounded by
        // the spread of its table plus the noise
        let spread = self.reward_table.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            - self.reward_table.iter().copied().fold(f64::INFINITY, f64::min);
        let reward_sd = (spread * spread / 4.0 + self.noise.std_dev * self.noise.std_dev).sqrt();
        Ok(IdentifiabilityReport {
            exact,
            samples: if exact { 0 } else { mc_samples },
            effect_margin: effect.value - slack(0.5),
            effect_witness: effect.witness,
            reward_margin: reward.value - slack(reward_sd),
            reward_witness: reward.witness.map(|w| w.0),
        })
    }

    /// Smallest per-edge contrast: for every edge `X → Y`, the largest entry
    /// difference between two rows of Y's table that differ only in X.
    pub fn min_edge_contrast(&self) -> f64 {
        let mut worst = f64::INFINITY;
        for y in 0..self.n() {
            let pa = self.dag.parents(y);
            for j in 0..pa.len() {
                worst = worst.min(edge_contrast(&self.cpts[y], self.k, pa.len(), j));
            }
        }
        worst
    }

    pub fn to_document(&self) -> ScmDocument {
        ScmDocument {
            n: self.n(),
            edges: self.dag.edges().to_vec(),
            parents: self.reward_nodes.clone(),
            k: self.k,
            cpts: self.cpts.clone(),
            reward_table: self.reward_table.clone(),
            noise: NoiseSpec::TruncatedGaussian {
                std_dev: self.noise.std_dev,
                clip: self.noise.clip,
            },
        }
    }

    pub fn from_document(doc: ScmDocument) -> Result<Scm> {
        let dag = Dag::new(doc.n, doc.edges)?;
        if doc.parents.iter().any(|&p| p >= doc.n) {
            return Err(parameter("reward parent out of range"));
        }
        let parents = ParentSpec::from_nodes(doc.n, doc.parents);
        let NoiseSpec::TruncatedGaussian { std_dev, clip } = doc.noise;
        Scm::from_parts(dag, parents, doc.k, doc.cpts, doc.reward_table, RewardNoise { std_dev, clip })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn from_json(text: &str) -> Result<Scm> {
        Scm::from_document(serde_json::from_str(text)?)
    }
}

fn edge_contrast(table: &[f64], k: usize, parents: usize, j: usize) -> f64 {
    let rows = table.len() / k;
    // stride of parent j in the row index (first parent most significant)
    let stride = k.pow((parents - 1 - j) as u32);
    let mut best = 0.0f64;
    for r in 0..rows {
        if !(r / stride).is_multiple_of(k) {
            continue;
        }
        for a in 0..k {
            for b in a + 1..k {
                let ra = &table[(r + a * stride) * k..(r + a * stride + 1) * k];
                let rb = &table[(r + b * stride) * k..(r + b * stride + 1) * k];
                let gap = ra.iter().zip(rb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                best = best.max(gap);
            }
        }
    }
    best
}

struct Margin {
    value: f64,
    witness: Option<(usize, usize)>,
}

impl Margin {
    fn unbounded() -> Self {
        Margin {
            value: f64::INFINITY,
            witness: None,
        }
    }

    fn offer(&mut self, value: f64, at: (usize, usize)) {
        if value < self.value {
            self.value = value;
            self.witness = Some(at);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentifiabilityReport {
    pub exact: bool,
    /// Draws per intervention when certified by simulation.
    pub samples: usize,
    /// Certified ancestral-effect margin (ε); infinite without ancestor
    /// pairs.
    pub effect_margin: f64,
    /// The `(ancestor, descendant)` pair attaining the margin.
    pub effect_witness: Option<(usize, usize)>,
    /// Certified reward-gap margin (Δ); infinite when the reward has no
    /// parents.
    pub reward_margin: f64,
    pub reward_witness: Option<usize>,
}

impl IdentifiabilityReport {
    pub fn certifies(&self, eps: f64, delta: f64) -> bool {
        self.effect_margin > eps && self.reward_margin > delta
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec {
    TruncatedGaussian { std_dev: f64, clip: f64 },
}

/// JSON form of an [`Scm`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScmDocument {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub parents: Vec<usize>,
    pub k: usize,
    /// Per node, the rows of its table concatenated.
    pub cpts: Vec<Vec<f64>>,
    pub reward_table: Vec<f64>,
    pub noise: NoiseSpec,
}

/// Construction attempts before giving up.
pub const BUILD_ATTEMPTS: u64 = 16;
const CERTIFY_SAMPLES: usize = 40_000;
/// Mass that root marginals place on category 0.
const ROOT_BIAS: f64 = 0.8;

/// Draws a model over `dag` whose identifiability margins exceed
/// `eps_target` (ancestral effects) and `delta_target` (reward gap).
///
/// Rows are Dirichlet(1) draws mixed with a point mass on the largest
/// parent value, so raising any ancestor to the top category pushes every
/// descendant upwards; root marginals lean towards category 0. Every edge then
/// gets its rows pushed apart until the local contrast exceeds
/// `eps_target`. Each retry sharpens the mixture and redraws.
pub fn build_scm(dag: &Dag, parents: &ParentSpec, k: usize, eps_target: f64, delta_target: f64, seed: u64) -> Result<Scm> {
    if k < 2 {
        return Err(parameter("at least two categories are needed"));
    }
    if !(0.0 < eps_target && eps_target < 1.0 && 0.0 < delta_target && delta_target < 1.0) {
        return Err(parameter("identifiability targets must lie in (0, 1)"));
    }
    if dag.n() == 0 {
        return Err(parameter("the model needs at least one node"));
    }
    let mut last = None;
    for attempt in 0..BUILD_ATTEMPTS {
        let sharpness = 1.0 - 0.5 * 0.7f64.powi(attempt as i32);
        let mut rng = rng::stream(seed, attempt, 0);
        let mut cpts = Vec::with_capacity(dag.n());
        for v in 0..dag.n() {
            cpts.push(draw_table(dag.parents(v).len(), k, sharpness, eps_target, &mut rng)?);
        }
        let rows = table_rows(k, parents.len())?;
        let mut reward_table: Vec<f64> = if rows == 1 {
            vec![0.5]
        } else {
            (0..rows).map(|i| 0.1 + 0.8 * i as f64 / (rows - 1) as f64).collect()
        };
        reward_table.shuffle(&mut rng);
        let scm = Scm::from_parts(dag.clone(), parents.clone(), k, cpts, reward_table, RewardNoise::default())?;
        let report = scm.verify_identifiability(CERTIFY_SAMPLES, rng::derive_seed(seed, attempt, 1))?;
        if report.certifies(eps_target, delta_target) {
            return Ok(scm);
        }
        last = Some(report);
    }
    let report = last.expect("at least one attempt");
    let failing = if report.effect_margin <= eps_target {
        format!(
            "ancestral effect identifiability (margin {:.4} at {:?}, target {eps_target})",
            report.effect_margin, report.effect_witness
        )
    } else {
        format!(
            "reward identifiability (margin {:.4} at {:?}, target {delta_target})",
            report.reward_margin, report.reward_witness
        )
    };
    Err(Error::Construction(format!(
        "no model found in {BUILD_ATTEMPTS} attempts; failing assumption: {failing}"
    )))
}

fn dirichlet<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let draws: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|d| d / total).collect()
}

fn normalize(row: &mut [f64]) {
    let total: f64 = row.iter().sum();
    row.iter_mut().for_each(|q| *q /= total);
}

fn draw_table<R: Rng + ?Sized>(parents: usize, k: usize, sharpness: f64, eps: f64, rng: &mut R) -> Result<Vec<f64>> {
    let rows = table_rows(k, parents)?;
    let mut table = Vec::with_capacity(rows * k);
    for r in 0..rows {
        let mut row = dirichlet(k, rng);
        row.iter_mut().for_each(|q| *q *= 1.0 - sharpness);
        if parents == 0 {
            row[0] += sharpness * ROOT_BIAS;
            row[1..].iter_mut().for_each(|q| *q += sharpness * (1.0 - ROOT_BIAS) / (k - 1) as f64);
        } else {
            let mut digits = r;
            let mut top = 0;
            for _ in 0..parents {
                top = top.max(digits % k);
                digits /= k;
            }
            row[top] += sharpness;
        }
        normalize(&mut row);
        table.extend(row);
    }
    for j in 0..parents {
        push_apart(&mut table, k, parents, j, eps);
    }
    Ok(table)
}

/// Mixes the rows for parent `j` at 0 and 1 (other parents at 0) towards
/// distinct point masses until their contrast exceeds `eps`.
fn push_apart(table: &mut [f64], k: usize, parents: usize, j: usize, eps: f64) {
    if edge_contrast(table, k, parents, j) > eps {
        return;
    }
    let stride = k.pow((parents - 1 - j) as u32);
    let (a, b) = (0, stride);
    let peak = (0..k)
        .max_by(|&x, &y| table[a * k + x].total_cmp(&table[a * k + y]))
        .unwrap_or(0);
    let other = (peak + 1) % k;
    let original_a = table[a * k..(a + 1) * k].to_vec();
    let original_b = table[b * k..(b + 1) * k].to_vec();
    for step in 1..=10 {
        let lambda = step as f64 / 10.0;
        for y in 0..k {
            let ea = if y == peak { 1.0 } else { 0.0 };
            let eb = if y == other { 1.0 } else { 0.0 };
            table[a * k + y] = (1.0 - lambda) * original_a[y] + lambda * ea;
            table[b * k + y] = (1.0 - lambda) * original_b[y] + lambda * eb;
        }
        normalize(&mut table[a * k..(a + 1) * k]);
        normalize(&mut table[b * k..(b + 1) * k]);
        if edge_contrast(table, k, parents, j) > eps {
            return;
        }
    }
}
