use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use raps::bandit::{default_failure_prob, end_to_end, flat_ucb_run, Budget, RegretRecord};
use raps::gen::{gen_named, FamilyKind, GraphFamilySpec, ParentPlacement};
use raps::harness::{figures_data, persist, sweep, write_records, ExperimentConfig, RunRecord, Scale};
use raps::scm::{build_scm, Scm};
use raps::search::{raps_oracle, raps_statistical, DetectorConfig};
use raps::theory::{
    enumerate_permutation_mean, expected_interventions, expected_interventions_recursive, render_rational,
};
use raps::{edgelist, rng, Dag, ParentSpec};

#[derive(Parser)]
#[command(name = "raps", version, about = "Randomized parent search for causal bandits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph and print it as an edge list (or a model as JSON).
    Gen(GenArgs),
    /// Exact expected number of interventions of the parent search.
    Exact(ExactArgs),
    /// Run the parent search and print one CSV row per run.
    Raps(RapsArgs),
    /// Per-round cumulative regret of one learner, as CSV.
    Regret(RegretArgs),
    /// Run an experiment described by a JSON configuration.
    Sweep(SweepArgs),
    /// Write one CSV per figure panel.
    FiguresData(FiguresArgs),
}

#[derive(Args, Clone)]
struct FamilyArgs {
    /// Named graph family.
    #[arg(long, value_parser = parse_family)]
    family: Option<FamilyKind>,
    /// Number of nodes.
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Edge probability (erdos_renyi).
    #[arg(long, default_value_t = 0.0)]
    p: f64,
    /// Arity (dary_tree).
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Number of reward parents (multiparent_chain).
    #[arg(long, default_value_t = 1)]
    m: usize,
    /// Parent placement in random graphs: random, first-in-topo, last-in-topo.
    #[arg(long, default_value = "random", value_parser = parse_placement)]
    placement: ParentPlacement,
    /// Seed of the graph generator.
    #[arg(long = "graph-seed", default_value_t = 0)]
    graph_seed: u64,
}

impl FamilyArgs {
    fn spec(&self, kind: FamilyKind) -> GraphFamilySpec {
        GraphFamilySpec {
            p: self.p,
            d: self.d,
            num_parents: self.m,
            seed: self.graph_seed,
            placement: self.placement,
            ..GraphFamilySpec::new(kind, self.n)
        }
    }
}

#[derive(Args, Clone)]
struct GraphSource {
    /// Edge-list file with an optional `parents` line.
    #[arg(long, conflicts_with = "family")]
    graph: Option<PathBuf>,
    #[command(flatten)]
    family: FamilyArgs,
}

impl GraphSource {
    fn family_name(&self) -> String {
        match self.family.family {
            Some(kind) => kind.name().to_string(),
            None => "file".to_string(),
        }
    }

    fn load(&self) -> Result<(Dag, ParentSpec), Failure> {
        match (&self.graph, self.family.family) {
            (Some(path), _) => {
                let text = read_input(path)?;
                Ok(edgelist::parse(&text)?)
            }
            (None, Some(kind)) => Ok(gen_named(&self.family.spec(kind))?),
            (None, None) => Err(Failure::Usage("give either --graph <file> or --family <name>".into())),
        }
    }
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Categories per variable.
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Reward gap Δ.
    #[arg(long, default_value_t = 0.3)]
    gap: f64,
    /// Ancestral effect gap ε.
    #[arg(long, default_value_t = 0.3)]
    eps: f64,
    /// Seed of the model construction.
    #[arg(long = "model-seed", default_value_t = 0)]
    model_seed: u64,
}

impl ModelArgs {
    fn build(&self, dag: &Dag, parents: &ParentSpec) -> Result<Scm, Failure> {
        Ok(build_scm(dag, parents, self.k, self.eps, self.gap, self.model_seed)?)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum GenFormat {
    Edges,
    Scm,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// `edges` prints the edge list, `scm` a model over the graph as JSON.
    #[arg(long, value_enum, default_value = "edges")]
    format: GenFormat,
    #[command(flatten)]
    model: ModelArgs,
    /// Seed of both the graph and the model; overrides --graph-seed and
    /// --model-seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Oracle {
    Eq1,
    Recursion,
    Enumerate,
}

#[derive(Args)]
struct ExactArgs {
    #[command(flatten)]
    source: GraphSource,
    #[arg(long, value_enum, default_value = "eq1")]
    oracle: Oracle,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Oracle,
    Statistical,
}

#[derive(Args)]
struct RapsArgs {
    #[command(flatten)]
    source: GraphSource,
    #[arg(long, value_enum, default_value = "oracle")]
    mode: Mode,
    /// Number of independent runs.
    #[arg(long, default_value_t = 1)]
    runs: usize,
    /// Master seed; run `i` uses its own derived stream.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    model: ModelArgs,
    /// Failure probability δ of the statistical detector.
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Batch size override for the statistical detector.
    #[arg(long)]
    batch: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Baseline {
    FlatUcb,
}

#[derive(Args)]
struct RegretArgs {
    /// Model JSON file.
    #[arg(long, conflicts_with_all = ["graph", "family"])]
    scm: Option<PathBuf>,
    #[command(flatten)]
    source: GraphSource,
    #[command(flatten)]
    model: ModelArgs,
    /// Horizon.
    #[arg(long = "T", default_value_t = 100_000)]
    horizon: u64,
    /// Failure probability of the search: `auto` or a value in (0, 1).
    #[arg(long, default_value = "auto")]
    delta: String,
    /// Run the baseline instead of search followed by UCB.
    #[arg(long, value_enum)]
    baseline: Option<Baseline>,
    /// Let the bandit phase use the whole horizon on top of discovery.
    #[arg(long)]
    unbudgeted: bool,
    /// Print every `stride`-th round (the last round is always printed).
    #[arg(long, default_value_t = 1)]
    stride: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SweepArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configuration's output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FiguresArgs {
    /// Output directory.
    #[arg(long, default_value = "figures")]
    out: PathBuf,
    /// `reduced` or `full`.
    #[arg(long, default_value = "reduced")]
    scale: Scale,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<raps::Error> for Failure {
    fn from(e: raps::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn parse_family(s: &str) -> Result<FamilyKind, String> {
    s.parse().map_err(|e: raps::Error| e.to_string())
}

fn parse_placement(s: &str) -> Result<ParentPlacement, String> {
    s.parse().map_err(|e: raps::Error| e.to_string())
}

fn read_input(path: &Path) -> Result<String, Failure> {
    if !path.is_file() {
        return Err(Failure::Usage(format!("no such file: {}", path.display())));
    }
    Ok(std::fs::read_to_string(path)?)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn gen(mut args: GenArgs) -> Result<(), Failure> {
    if let Some(seed) = args.seed {
        args.family.graph_seed = seed;
        args.model.model_seed = seed;
    }
    let kind = args
        .family
        .family
        .ok_or_else(|| Failure::Usage("--family is required".into()))?;
    let (dag, parents) = gen_named(&args.family.spec(kind))?;
    let text = match args.format {
        GenFormat::Edges => edgelist::write(&dag, &parents),
        GenFormat::Scm => args.model.build(&dag, &parents)?.to_json()? + "\n",
    };
    emit(args.out.as_deref(), &text)
}

fn exact(args: ExactArgs) -> Result<(), Failure> {
    let (dag, parent) = args.source.load()?;
    let value = match args.oracle {
        Oracle::Eq1 => expected_interventions(&dag, &parent)?.to_rational(),
        Oracle::Recursion => expected_interventions_recursive(&dag, &parent)?,
        Oracle::Enumerate => enumerate_permutation_mean(&dag, &parent)?,
    };
    println!("{}", render_rational(&value));
    Ok(())
}

fn run_raps(args: RapsArgs) -> Result<(), Failure> {
    if args.runs == 0 {
        return Err(Failure::Usage("--runs must be at least 1".into()));
    }
    let (dag, parent) = args.source.load()?;
    let expected = expected_interventions(&dag, &parent)?.to_f64();
    let model = match args.mode {
        Mode::Oracle => None,
        Mode::Statistical => {
            let scm = args.model.build(&dag, &parent)?;
            let cfg = match args.batch {
                Some(b) => DetectorConfig::new(args.model.gap, args.model.eps, args.delta, b, args.model.k)?,
                None => DetectorConfig::from_bound(dag.n(), args.model.k, args.model.gap, args.model.eps, args.delta)?,
            };
            Some((scm, cfg))
        }
    };
    let mut records = Vec::with_capacity(args.runs);
    for run in 0..args.runs {
        let seed = rng::derive_seed(args.seed, 0, run as u64);
        let mut r = rng::from_seed(seed);
        let trace = match &model {
            None => raps_oracle(&dag, &parent, &mut r)?,
            Some((scm, cfg)) => raps_statistical(scm, cfg, &mut r)?.0,
        };
        records.push(RunRecord {
            experiment: match args.mode {
                Mode::Oracle => "raps_oracle",
                Mode::Statistical => "raps_statistical",
            }
            .to_string(),
            family: args.source.family_name(),
            n: dag.n(),
            p: args.source.family.p,
            m: parent.len(),
            seed,
            interventions: trace.interventions() as u64,
            expected,
            parent_correct: trace.result == parent,
            wall_time_ms: 0,
        });
    }
    write_records(io::stdout().lock(), &records)?;
    Ok(())
}

fn regret(args: RegretArgs) -> Result<(), Failure> {
    if args.stride == 0 {
        return Err(Failure::Usage("--stride must be at least 1".into()));
    }
    let scm = match &args.scm {
        Some(path) => Scm::from_json(&read_input(path)?)?,
        None => {
            let (dag, parents) = args.source.load()?;
            args.model.build(&dag, &parents)?
        }
    };
    let failure = match args.delta.as_str() {
        "auto" => default_failure_prob(scm.k(), args.horizon),
        v => v
            .parse::<f64>()
            .map_err(|_| Failure::Usage(format!("--delta expects `auto` or a number, got `{v}`")))?,
    };
    let mut r = rng::from_seed(args.seed);
    let record = match args.baseline {
        Some(Baseline::FlatUcb) => flat_ucb_run(&scm, args.horizon, &mut r)?,
        None => {
            let cfg = DetectorConfig::from_bound(scm.n(), scm.k(), args.model.gap, args.model.eps, failure)?;
            let budget = if args.unbudgeted {
                Budget::Unbudgeted
            } else {
                Budget::Budgeted
            };
            end_to_end(&scm, &cfg, args.horizon, budget, &mut r)?
        }
    };
    write_series(&record, args.stride)
}

fn write_series(record: &RegretRecord, stride: u64) -> Result<(), Failure> {
    let mut out = io::BufWriter::new(io::stdout().lock());
    writeln!(out, "round,regret,phase")?;
    let last = record.rounds();
    for (i, (regret, phase)) in record.cumulative_regret.iter().zip(record.phases()).enumerate() {
        let round = i as u64 + 1;
        if round.is_multiple_of(stride) || round == last {
            writeln!(out, "{round},{regret},{}", phase.name())?;
        }
    }
    out.flush()?;
    Ok(())
}

fn run_sweep(args: SweepArgs) -> Result<(), Failure> {
    let mut cfg = ExperimentConfig::from_json(&read_input(&args.config)?).map_err(|e| Failure::Usage(e.to_string()))?;
    if args.out.is_some() {
        cfg.output_path = args.out;
    }
    let outcomes = sweep(&cfg)?;
    let failed = outcomes.iter().filter(|o| o.error.is_some()).count();
    match &cfg.output_path {
        Some(path) => {
            persist(path, &outcomes)?;
            eprintln!("{} runs written to {} ({failed} failed)", outcomes.len(), path.display());
        }
        None => {
            let records: Vec<RunRecord> = outcomes.into_iter().map(|o| o.record).collect();
            write_records(io::stdout().lock(), &records)?;
        }
    }
    Ok(())
}

fn figures(args: FiguresArgs) -> Result<(), Failure> {
    for (path, outcomes) in figures_data(&args.out, args.scale, args.seed)? {
        eprintln!("{}: {} runs", path.display(), outcomes.len());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Exact(a) => exact(a),
        Command::Raps(a) => run_raps(a),
        Command::Regret(a) => regret(a),
        Command::Sweep(a) => run_sweep(a),
        Command::FiguresData(a) => figures(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
