//! Acceptance suite. Prints one `PASS`/`FAIL` line per criterion and exits
//! non-zero when any criterion fails.
//!
//! Positional arguments select criteria by substring, e.g.
//! `cargo test -p raps --test acceptance -- regret`.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use num_rational::BigRational;
use raps::gen::{gen_erdos_renyi, gen_named, FamilyKind, GraphFamilySpec};
use raps::harness::stats::{binomial_cdf, linear_fit, mean, sample_sd};
use raps::harness::{figures, sweep, ExperimentConfig, ExperimentKind, PRule, RunOutcome, Scale};
use raps::scm::build_scm;
use raps::search::{event_holds, raps_oracle, raps_statistical, DetectorConfig};
use raps::theory::{
    candidate_family, dary_tree_bound, enumerate_permutation_mean, expected_interventions,
    expected_interventions_recursive, lower_bound,
};
use raps::{exec, rng, Dag, ParentSpec};

const MASTER_SEED: u64 = 20_240_601;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

/// Every DAG on `n` nodes whose edges respect the order `0 < 1 < … < n−1`.
fn all_ordered_dags(n: usize) -> Vec<Dag> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    (0u64..1 << pairs.len())
        .map(|mask| {
            let edges = pairs.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &e)| e);
            Dag::new(n, edges).expect("ordered edges are acyclic")
        })
        .collect()
}

fn placements(n: usize) -> Vec<ParentSpec> {
    std::iter::once(ParentSpec::none(n)).chain((0..n).map(|p| ParentSpec::single(n, p))).collect()
}

/// Exhaustive graphs for `n ≤ 5` followed by `random` Erdős–Rényi graphs
/// with `p = 1/2` for each `n` in `6..=8`.
fn oracle_graphs(random: usize) -> Vec<Dag> {
    let mut graphs: Vec<Dag> = (1..=5).flat_map(all_ordered_dags).collect();
    for i in 0..random {
        let n = 6 + i % 3;
        graphs.push(gen_erdos_renyi(n, 0.5, rng::derive_seed(MASTER_SEED, 1, i as u64)).unwrap());
    }
    graphs
}

/// Edges, parent, closed-form value and recursion value of one disagreement.
type Mismatch = (Vec<(usize, usize)>, Vec<usize>, BigRational, BigRational);

fn oracle_triple_equality() -> Verdict {
    let graphs = oracle_graphs(200);
    let rows = exec::map_slice(&graphs, |g| {
        let mut cases = 0usize;
        let mut enum_mismatch = 0usize;
        let mut rec_mismatch = Vec::new();
        for p in placements(g.n()) {
            let eq1 = expected_interventions(g, &p).unwrap().to_rational();
            let rec = expected_interventions_recursive(g, &p).unwrap();
            let perm = enumerate_permutation_mean(g, &p).unwrap();
            cases += 1;
            if perm != eq1 {
                enum_mismatch += 1;
            }
            if rec != eq1 {
                rec_mismatch.push((g.edges().to_vec(), p.nodes(), eq1, rec));
            }
        }
        (cases, enum_mismatch, rec_mismatch)
    });
    let cases: usize = rows.iter().map(|r| r.0).sum();
    let enum_mismatch: usize = rows.iter().map(|r| r.1).sum();
    let rec: Vec<&Mismatch> = rows.iter().flat_map(|r| &r.2).collect();
    let mut detail = format!(
        "{cases} (graph, parent) cases; enumeration ≠ closed form in {enum_mismatch}; recursion ≠ closed form in {}",
        rec.len()
    );
    if let Some((edges, p, eq1, r)) = rec.iter().min_by_key(|c| c.0.len()) {
        detail += &format!("; smallest: edges {edges:?}, parent {p:?}: closed form {eq1}, recursion {r}");
    }
    verdict(enum_mismatch == 0 && rec.is_empty(), detail)
}

fn lower_bound_identity() -> Verdict {
    let mut graphs: Vec<(Dag, ParentSpec)> = oracle_graphs(200)
        .into_iter()
        .flat_map(|g| placements(g.n()).into_iter().map(move |p| (g.clone(), p)))
        .collect();
    for n in [7, 15, 31, 63, 127, 255, 511, 1023] {
        graphs.push(gen_named(&GraphFamilySpec::new(FamilyKind::DaryTree, n)).unwrap());
    }
    for kind in [FamilyKind::Line, FamilyKind::NBranch, FamilyKind::ColliderLine, FamilyKind::Null] {
        for n in [4, 16, 64, 256] {
            graphs.push(gen_named(&GraphFamilySpec::new(kind, n)).unwrap());
        }
    }
    for (i, n) in [300, 1024, 4096].into_iter().enumerate() {
        for p in [1e-3, 1e-2, (n as f64).ln() / n as f64, 0.1] {
            let seed = rng::derive_seed(MASTER_SEED, 2, i as u64);
            let dag = gen_erdos_renyi(n, p, seed).unwrap();
            let parent = raps::gen::place_parent(&dag, Default::default(), seed);
            graphs.push((dag, parent));
        }
    }
    let bad = exec::map_slice(&graphs, |(g, p)| lower_bound(g, p).unwrap() != expected_interventions(g, p).unwrap())
        .into_iter()
        .filter(|&b| b)
        .count();
    verdict(bad == 0, format!("{} graphs, {bad} term-histogram mismatches", graphs.len()))
}

/// `(mean, sd)` of the intervention counts of each sweep point.
fn per_point(outcomes: &[RunOutcome]) -> BTreeMap<usize, (f64, f64, Vec<&RunOutcome>)> {
    let mut groups: BTreeMap<usize, Vec<&RunOutcome>> = BTreeMap::new();
    for o in outcomes {
        groups.entry(o.point).or_default().push(o);
    }
    groups
        .into_iter()
        .map(|(k, runs)| {
            let xs: Vec<f64> = runs.iter().map(|o| o.record.interventions as f64).collect();
            (k, (mean(&xs), sample_sd(&xs), runs))
        })
        .collect()
}

fn errors(outcomes: &[RunOutcome]) -> usize {
    outcomes.iter().filter(|o| o.error.is_some()).count()
}

fn panel_a() -> Verdict {
    let outcomes = sweep(&figures::panel_a(Scale::Reduced, MASTER_SEED)).unwrap();
    let mut hits = 0;
    let mut cells = Vec::new();
    let points = per_point(&outcomes);
    for (mean_n, sd, runs) in points.values() {
        let expected = runs[0].record.expected;
        let tol = 3.0 * sd / (runs.len() as f64).sqrt();
        let ok = (mean_n - expected).abs() <= tol;
        hits += usize::from(ok);
        cells.push(format!(
            "p={:.4}: {mean_n:.2} vs {expected:.2}{}",
            runs[0].record.p,
            if ok { "" } else { " ✗" }
        ));
    }
    let errs = errors(&outcomes);
    verdict(
        hits >= 9 && errs == 0,
        format!("{hits}/{} points within 3σ̂/√20, {errs} run errors [{}]", points.len(), cells.join(", ")),
    )
}

fn mean_by_n(outcomes: &[RunOutcome]) -> Vec<(usize, f64)> {
    per_point(outcomes).values().map(|(m, _, runs)| (runs[0].record.n, *m)).collect()
}

fn panel_b() -> Verdict {
    let outcomes = sweep(&figures::panel_b(MASTER_SEED)).unwrap();
    let curve = mean_by_n(&outcomes);
    let xs: Vec<f64> = curve.iter().map(|c| (c.0 as f64).log2()).collect();
    let ys: Vec<f64> = curve.iter().map(|c| c.1).collect();
    let fit = linear_fit(&xs, &ys);
    let steepest = xs
        .windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
        .fold(f64::NEG_INFINITY, f64::max);
    let errs = errors(&outcomes);
    let pass = fit.r_squared >= 0.95 && fit.slope > 0.0 && steepest <= 3.0 * fit.slope && errs == 0;
    let points: Vec<String> = curve.iter().map(|(n, m)| format!("{n}:{m:.2}")).collect();
    verdict(
        pass,
        format!(
            "R² = {:.4}, slope = {:.3}, steepest segment = {steepest:.3} (limit 3×slope), {errs} run errors [{}]",
            fit.r_squared,
            fit.slope,
            points.join(", ")
        ),
    )
}

fn panel_c() -> Verdict {
    let outcomes = sweep(&figures::panel_c(MASTER_SEED)).unwrap();
    let ratios: Vec<(usize, f64)> = mean_by_n(&outcomes)
        .into_iter()
        .map(|(n, m)| (n, m / (n as f64 / (n as f64).log2())))
        .collect();
    let in_band = ratios.iter().all(|r| (0.1..=10.0).contains(&r.1));
    let errs = errors(&outcomes);
    let cells: Vec<String> = ratios.iter().map(|(n, r)| format!("{n}:{r:.3}")).collect();
    verdict(in_band && errs == 0, format!("N/(n/log₂n) in [0.1, 10]: [{}], {errs} run errors", cells.join(", ")))
}

fn panel_d() -> Verdict {
    let mut cfg = figures::panel_d(MASTER_SEED);
    cfg.runs_per_point = 100;
    let outcomes = sweep(&cfg).unwrap();
    let reverse = outcomes.iter().filter(|o| o.reverse_topological == Some(true)).count();
    let correct = outcomes.iter().filter(|o| o.record.parent_correct).count();
    let mut cells = Vec::new();
    let mut in_band = true;
    for (mean_n, _, runs) in per_point(&outcomes).values() {
        let (n, m) = (runs[0].record.n, runs[0].record.m);
        let ratio = mean_n / ((m + 1) as f64 * (n as f64).log2());
        in_band &= (0.1..=10.0).contains(&ratio);
        cells.push(format!("m={m},n={n}:{ratio:.3}"));
    }
    let errs = errors(&outcomes);
    verdict(
        in_band && reverse == outcomes.len() && correct == outcomes.len() && errs == 0,
        format!(
            "reverse-topological {reverse}/{}, parents correct {correct}/{}, N/((m+1)log₂n) in [0.1, 10]: [{}], {errs} run errors",
            outcomes.len(),
            outcomes.len(),
            cells.join(", ")
        ),
    )
}

fn batch_size() -> Verdict {
    let dag = Dag::new(4, [(0, 1), (0, 2), (1, 2), (3, 2)]).unwrap();
    let parent = ParentSpec::single(4, 1);
    let scm = build_scm(&dag, &parent, 2, 0.3, 0.3, MASTER_SEED).unwrap();
    let cfg = DetectorConfig::from_bound(4, 2, 0.3, 0.3, 0.1).unwrap();
    let trials = 200;
    let held = exec::map_indexed(trials, |i| {
        let mut r = rng::stream(MASTER_SEED, 3, i as u64);
        let (trace, _) = raps_statistical(&scm, &cfg, &mut r).unwrap();
        event_holds(&scm, &trace)
    })
    .into_iter()
    .filter(|&h| h)
    .count();
    let p_value = binomial_cdf(held as u64, trials as u64, 0.9);
    verdict(
        p_value >= 0.05,
        format!(
            "B = {}, event held in {held}/{trials}, one-sided p-value against 0.9 = {p_value:.4}",
            cfg.batch
        ),
    )
}

fn candidate_family_containment() -> Verdict {
    let mut graphs: Vec<Dag> = (1..=5).flat_map(all_ordered_dags).collect();
    for i in 0..300 {
        let n = 6 + i % 3;
        graphs.push(gen_erdos_renyi(n, 0.4, rng::derive_seed(MASTER_SEED, 4, i as u64)).unwrap());
    }
    let runs = 500;
    let tallies = exec::map_indexed(graphs.len(), |gi| {
        let g = &graphs[gi];
        let (mut visited, mut violations) = (0u64, 0u64);
        for (pi, p) in placements(g.n()).iter().enumerate() {
            let family = candidate_family(g, p).unwrap();
            let mut r = rng::stream(MASTER_SEED, 5, (gi * 16 + pi) as u64);
            for _ in 0..runs {
                let trace = raps_oracle(g, p, &mut r).unwrap();
                for step in &trace.steps {
                    visited += 1;
                    violations += u64::from(!family.contains(&step.candidates));
                }
            }
        }
        (visited, violations)
    });
    let visited: u64 = tallies.iter().map(|t| t.0).sum();
    let violations: u64 = tallies.iter().map(|t| t.1).sum();
    verdict(
        violations == 0,
        format!(
            "{} graphs (all ordered DAGs n ≤ 5, 300 random n ∈ 6..=8) × every parent placement × {runs} runs: {visited} visited sets, {violations} outside the family",
            graphs.len()
        ),
    )
}

fn dary_tightness() -> Verdict {
    let mut ok = true;
    let mut cells = Vec::new();
    for n in [7usize, 15, 31, 63, 127, 255, 511, 1023] {
        let (g, p) = gen_named(&GraphFamilySpec::new(FamilyKind::DaryTree, n)).unwrap();
        let value = expected_interventions(&g, &p).unwrap().to_f64();
        let lower = dary_tree_bound(n, 2).unwrap();
        let log = ((n + 1) as f64).log2();
        let upper = 4.0 * (n + 1) as f64 / (2.0 * (log + 1.0)) + log;
        let inside = lower <= value && value <= upper;
        ok &= inside;
        cells.push(format!("{n}: {lower:.2} ≤ {value:.2} ≤ {upper:.2}{}", if inside { "" } else { " ✗" }));
    }
    verdict(ok, format!("slack log₂(n+1): [{}]", cells.join(", ")))
}

fn regret_head_to_head() -> Verdict {
    let mut cfg = ExperimentConfig::new(ExperimentKind::RegretHead2head, vec![16], PRule::Explicit { p: 0.0 });
    cfg.master_seed = MASTER_SEED;
    cfg.runs_per_point = 20;
    cfg.family = FamilyKind::Line;
    cfg.regret.horizon = 100_000;
    cfg.regret.k = 2;
    let outcomes = sweep(&cfg).unwrap();
    let errs = errors(&outcomes);
    let h2h: Vec<_> = outcomes.iter().filter_map(|o| o.head_to_head.as_ref()).collect();
    if h2h.is_empty() {
        let first = outcomes.iter().find_map(|o| o.error.clone()).unwrap_or_default();
        return verdict(false, format!("no completed runs ({errs} errors, first: {first})"));
    }
    let e2e: Vec<f64> = h2h.iter().map(|h| h.end_to_end.final_regret).collect();
    let flat: Vec<f64> = h2h.iter().map(|h| h.flat_ucb.final_regret).collect();
    let discovery: Vec<f64> = h2h.iter().map(|h| h.end_to_end.discovery_samples as f64).collect();
    let conditioned: Vec<_> = h2h.iter().filter(|h| h.end_to_end.event_e_held == Some(true)).collect();
    let at = |round: u64| mean(&conditioned.iter().filter_map(|h| h.end_to_end.at(round)).collect::<Vec<_>>());
    let ratio = at(100_000) / at(10_000);
    let beats = mean(&e2e) < mean(&flat);
    let sublinear = !conditioned.is_empty() && ratio < 10.0 * 10f64.sqrt();
    verdict(
        beats && sublinear && errs == 0,
        format!(
            "end-to-end mean regret {:.1} (discovery samples {:.0}) vs flat UCB {:.1}; event held in {}/{} runs, regret(1e5)/regret(1e4) = {ratio:.3} (limit {:.3}); {errs} run errors",
            mean(&e2e),
            mean(&discovery),
            mean(&flat),
            conditioned.len(),
            h2h.len(),
            10.0 * 10f64.sqrt()
        ),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

const CRITERIA: [Criterion; 10] = [
    ("oracle_triple_equality", oracle_triple_equality),
    ("exact_vs_empirical_panel_a", panel_a),
    ("fast_regime_panel_b", panel_b),
    ("slow_regime_panel_c", panel_c),
    ("multiparent_panel_d", panel_d),
    ("batch_size_event", batch_size),
    ("candidate_family_containment", candidate_family_containment),
    ("dary_tree_tightness", dary_tightness),
    ("regret_head_to_head", regret_head_to_head),
    ("lower_bound_identity", lower_bound_identity),
];

fn main() -> ExitCode {
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if std::env::args().any(|a| a == "--list") {
        for (name, _) in CRITERIA {
            println!("{name}: test");
        }
        return ExitCode::SUCCESS;
    }
    let mut failed = 0;
    let mut ran = 0;
    for (name, check) in CRITERIA {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let v = check();
        let secs = start.elapsed().as_secs_f64();
        println!("{} {name} ({secs:.1}s): {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += usize::from(!v.pass);
    }
    println!("acceptance: {} passed, {failed} failed", ran - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
