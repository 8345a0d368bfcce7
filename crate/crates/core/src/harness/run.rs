use std::path::{Path, PathBuf};
use std::time::Instant;

use super::config::{ExperimentConfig, ExperimentKind};
use super::record::{write_errors_to, write_records_to, RunError, RunRecord};
use crate::bandit::{default_failure_prob, end_to_end, flat_ucb_run, RegretRecord};
use crate::dag::{Dag, ParentSpec};
use crate::error::{parameter, Result};
use crate::exec;
use crate::gen::{gen_erdos_renyi, gen_erdos_renyi_multiparent, gen_named, place_parent, GraphFamilySpec, ParentPlacement};
use crate::rng::{self, derive_seed};
use crate::scm::{build_scm, Scm};
use crate::search::{multiparent_oracle, raps_oracle, DetectorConfig};
use crate::theory::{expected_interventions, multiparent_expected};

/// Run index reserved for the graph shared by all runs of a point.
const SHARED_GRAPH: u64 = u64::MAX;

/// One `(n, p, m)` combination of a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub n: usize,
    pub p: f64,
    pub m: usize,
}

pub fn sweep_points(cfg: &ExperimentConfig) -> Result<Vec<SweepPoint>> {
    let mut points = Vec::new();
    for &n in &cfg.n_list {
        match cfg.experiment {
            ExperimentKind::RegretHead2head => points.push(SweepPoint { n, p: 0.0, m: 1 }),
            ExperimentKind::Multiparent => {
                for &m in &cfg.m_list {
                    for p in cfg.p_rule.values(n)? {
                        points.push(SweepPoint { n, p, m });
                    }
                }
            }
            _ => {
                for p in cfg.p_rule.values(n)? {
                    points.push(SweepPoint { n, p, m: 1 });
                }
            }
        }
    }
    Ok(points)
}

/// Regret figures of one learner in one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RegretSummary {
    pub final_regret: f64,
    /// `(round, cumulative regret)` at each configured checkpoint within
    /// the horizon.
    pub checkpoints: Vec<(u64, f64)>,
    pub discovery_samples: u64,
    pub event_e_held: Option<bool>,
    pub parent_correct: bool,
    pub simple_regret: Option<f64>,
}

impl RegretSummary {
    fn from_record(rec: &RegretRecord, checkpoints: &[u64]) -> Self {
        RegretSummary {
            final_regret: rec.final_regret(),
            checkpoints: checkpoints
                .iter()
                .filter_map(|&t| rec.regret_at(t as usize).map(|r| (t, r)))
                .collect(),
            discovery_samples: rec.discovery_samples,
            event_e_held: rec.event_e_held,
            parent_correct: rec.parent_correct,
            simple_regret: rec.simple_regret,
        }
    }

    pub fn at(&self, round: u64) -> Option<f64> {
        self.checkpoints.iter().find(|c| c.0 == round).map(|c| c.1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeadToHead {
    pub end_to_end: RegretSummary,
    pub flat_ucb: RegretSummary,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub point: usize,
    pub run: usize,
    pub record: RunRecord,
    pub error: Option<String>,
    /// Whether parents were found in reverse topological order
    /// (multi-parent runs only).
    pub reverse_topological: Option<bool>,
    pub head_to_head: Option<HeadToHead>,
}

struct Measured {
    interventions: u64,
    expected: f64,
    parent_correct: bool,
    reverse_topological: Option<bool>,
    head_to_head: Option<HeadToHead>,
}

enum Prepared {
    Graph(Dag, ParentSpec),
    Model(Box<Scm>, DetectorConfig),
    Fresh,
}

fn er_graph(point: &SweepPoint, seed: u64) -> Result<(Dag, ParentSpec)> {
    let dag = gen_erdos_renyi(point.n, point.p, seed)?;
    let parent = place_parent(&dag, ParentPlacement::Random, seed);
    Ok((dag, parent))
}

fn prepare(cfg: &ExperimentConfig, index: usize, point: &SweepPoint) -> Result<Prepared> {
    let seed = derive_seed(cfg.master_seed, index as u64, SHARED_GRAPH);
    match cfg.experiment {
        ExperimentKind::RegretHead2head => {
            let (dag, parent) = gen_named(&GraphFamilySpec {
                seed,
                ..GraphFamilySpec::new(cfg.family, point.n)
            })?;
            let r = &cfg.regret;
            let scm = build_scm(&dag, &parent, r.k, r.effect_gap, r.reward_gap, seed)?;
            let failure = r.failure_prob.unwrap_or_else(|| default_failure_prob(r.k, r.horizon));
            let detector = DetectorConfig::from_bound(point.n, r.k, r.reward_gap, r.effect_gap, failure)?;
            Ok(Prepared::Model(Box::new(scm), detector))
        }
        _ if cfg.fresh_graphs() => Ok(Prepared::Fresh),
        ExperimentKind::Multiparent => {
            let (dag, parents) = gen_erdos_renyi_multiparent(point.n, point.p, point.m, seed)?;
            Ok(Prepared::Graph(dag, parents))
        }
        _ => {
            let (dag, parent) = er_graph(point, seed)?;
            Ok(Prepared::Graph(dag, parent))
        }
    }
}

fn measure(cfg: &ExperimentConfig, point: &SweepPoint, prepared: &Prepared, run_seed: u64) -> Result<Measured> {
    let mut rng = rng::stream(run_seed, 1, 0);
    if let Prepared::Model(scm, detector) = prepared {
        let r = &cfg.regret;
        let e2e = end_to_end(scm, detector, r.horizon, r.budget, &mut rng)?;
        let flat = flat_ucb_run(scm, r.horizon, &mut rng::stream(run_seed, 2, 0))?;
        return Ok(Measured {
            interventions: e2e.search_interventions as u64,
            expected: expected_interventions(scm.dag(), scm.parents())?.to_f64(),
            parent_correct: e2e.parent_correct,
            reverse_topological: None,
            head_to_head: Some(HeadToHead {
                end_to_end: RegretSummary::from_record(&e2e, &r.checkpoints),
                flat_ucb: RegretSummary::from_record(&flat, &r.checkpoints),
            }),
        });
    }
    let fresh;
    let (dag, parents) = match prepared {
        Prepared::Graph(d, p) => (d, p),
        _ => {
            fresh = if cfg.experiment == ExperimentKind::Multiparent {
                gen_erdos_renyi_multiparent(point.n, point.p, point.m, run_seed)?
            } else {
                er_graph(point, run_seed)?
            };
            (&fresh.0, &fresh.1)
        }
    };
    if cfg.experiment == ExperimentKind::Multiparent {
        let out = multiparent_oracle(dag, parents, &mut rng)?;
        let parent_correct = out.parents == *parents;
        let expected = if parent_correct {
            multiparent_expected(dag, parents, &out.discovered)?.to_f64()
        } else {
            f64::NAN
        };
        Ok(Measured {
            interventions: out.interventions() as u64,
            expected,
            parent_correct,
            reverse_topological: Some(out.is_reverse_topological(dag)),
            head_to_head: None,
        })
    } else {
        let trace = raps_oracle(dag, parents, &mut rng)?;
        Ok(Measured {
            interventions: trace.interventions() as u64,
            expected: expected_interventions(dag, parents)?.to_f64(),
            parent_correct: trace.result == *parents,
            reverse_topological: None,
            head_to_head: None,
        })
    }
}

fn family_name(cfg: &ExperimentConfig) -> &'static str {
    match cfg.experiment {
        ExperimentKind::RegretHead2head => cfg.family.name(),
        _ => "erdos_renyi",
    }
}

/// Runs every `(point, run)` pair and returns the outcomes sorted by
/// point, then run. Errors inside a run are kept on its outcome.
pub fn sweep(cfg: &ExperimentConfig) -> Result<Vec<RunOutcome>> {
    cfg.validate()?;
    let points = sweep_points(cfg)?;
    let prepared: Vec<std::result::Result<Prepared, String>> =
        exec::map_indexed(points.len(), |i| prepare(cfg, i, &points[i]).map_err(|e| e.to_string()));
    let runs = cfg.runs_per_point;
    let outcomes = exec::map_indexed(points.len() * runs, |job| {
        let (index, run) = (job / runs, job % runs);
        let point = &points[index];
        let seed = derive_seed(cfg.master_seed, index as u64, run as u64);
        let start = Instant::now();
        let result = match &prepared[index] {
            Ok(p) => measure(cfg, point, p, seed).map_err(|e| e.to_string()),
            Err(e) => Err(e.clone()),
        };
        let wall = if cfg.record_wall_time {
            start.elapsed().as_millis() as u64
        } else {
            0
        };
        let mut record = RunRecord {
            experiment: cfg.experiment.name().to_string(),
            family: family_name(cfg).to_string(),
            n: point.n,
            p: point.p,
            m: point.m,
            seed,
            interventions: 0,
            expected: f64::NAN,
            parent_correct: false,
            wall_time_ms: wall,
        };
        match result {
            Ok(m) => {
                record.interventions = m.interventions;
                record.expected = m.expected;
                record.parent_correct = m.parent_correct;
                RunOutcome {
                    point: index,
                    run,
                    record,
                    error: None,
                    reverse_topological: m.reverse_topological,
                    head_to_head: m.head_to_head,
                }
            }
            Err(e) => RunOutcome {
                point: index,
                run,
                record,
                error: Some(e),
                reverse_topological: None,
                head_to_head: None,
            },
        }
    });
    Ok(outcomes)
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("runs");
    path.with_file_name(format!("{stem}{suffix}"))
}

/// Writes the records of `outcomes` to `path`, plus `<stem>_errors.csv` when
/// some runs failed and `<stem>_regret.csv` for regret comparisons.
pub fn persist(path: &Path, outcomes: &[RunOutcome]) -> Result<()> {
    let records: Vec<RunRecord> = outcomes.iter().map(|o| o.record.clone()).collect();
    write_records_to(path, &records)?;
    let errors: Vec<RunError> = outcomes
        .iter()
        .filter_map(|o| {
            o.error.as_ref().map(|message| RunError {
                point: o.point,
                run: o.run,
                seed: o.record.seed,
                message: message.clone(),
            })
        })
        .collect();
    if !errors.is_empty() {
        write_errors_to(&sibling(path, "_errors.csv"), &errors)?;
    }
    if outcomes.iter().any(|o| o.head_to_head.is_some()) {
        write_regret_summary(&sibling(path, "_regret.csv"), outcomes)?;
    }
    Ok(())
}

/// Long-format regret table: one row per learner, run and checkpoint.
pub fn write_regret_summary(path: &Path, outcomes: &[RunOutcome]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "method",
        "n",
        "seed",
        "discovery_samples",
        "event_e_held",
        "parent_correct",
        "round",
        "cumulative_regret",
    ])?;
    for o in outcomes {
        let Some(h) = &o.head_to_head else { continue };
        for (method, s) in [("end_to_end", &h.end_to_end), ("flat_ucb", &h.flat_ucb)] {
            let event = s.event_e_held.map(|e| e.to_string()).unwrap_or_default();
            for &(round, regret) in &s.checkpoints {
                w.write_record([
                    method.to_string(),
                    o.record.n.to_string(),
                    o.record.seed.to_string(),
                    s.discovery_samples.to_string(),
                    event.clone(),
                    s.parent_correct.to_string(),
                    round.to_string(),
                    regret.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Runs the sweep and, when the config names an output path, persists it.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    let outcomes = sweep(cfg)?;
    if let Some(path) = &cfg.output_path {
        persist(path, &outcomes)?;
    }
    Ok(outcomes.into_iter().map(|o| o.record).collect())
}

/// Reads a config file and runs it; a missing file is reported as a
/// parameter error.
pub fn run_config_file(path: &Path) -> Result<Vec<RunRecord>> {
    if !path.exists() {
        return Err(parameter(format!("config file {} not found", path.display())));
    }
    run_experiment(&ExperimentConfig::load(path)?)
}
