use std::fs;
use std::process::{Command, Output};

fn raps(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_raps")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn exact_line_of_four() {
    let out = raps(&["exact", "--family", "line", "--n", "4"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "17/6 ≈ 2.833333");
}

#[test]
fn exact_oracles_agree_on_a_line() {
    for oracle in ["eq1", "recursion", "enumerate"] {
        let out = raps(&["exact", "--family", "line", "--n", "5", "--oracle", oracle]);
        assert_eq!(stdout(&out).trim(), "37/12 ≈ 3.083333", "{oracle}");
    }
}

#[test]
fn missing_config_is_a_usage_error() {
    let out = raps(&["sweep", "--config", "missing.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_flags_are_usage_errors() {
    assert_eq!(raps(&["bogus"]).status.code(), Some(1));
    assert_eq!(raps(&["exact", "--oracle", "nope", "--family", "line"]).status.code(), Some(1));
    assert_eq!(raps(&["exact"]).status.code(), Some(1));
    assert_eq!(raps(&["--help"]).status.code(), Some(0));
}

#[test]
fn runtime_failures_exit_with_two() {
    let out = raps(&["exact", "--family", "multiparent_chain", "--n", "4", "--m", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = raps(&["exact", "--family", "line", "--n", "9", "--oracle", "enumerate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn raps_output_is_deterministic() {
    let args = ["raps", "--family", "line", "--n", "8", "--mode", "oracle", "--runs", "5", "--seed", "7"];
    let a = raps(&args);
    let b = raps(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    assert_eq!(lines[0], "experiment,family,n,p,m,seed,interventions,expected,parent_correct,wall_time_ms");
    assert!(lines[1..].iter().all(|l| l.starts_with("raps_oracle,line,8,") && l.contains(",true,")));
}

#[test]
fn generated_graph_feeds_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.txt");
    let out = raps(&["gen", "--family", "erdos_renyi", "--n", "6", "--p", "0.4", "--seed", "3", "--out"]
        .into_iter()
        .chain([path.to_str().unwrap()])
        .collect::<Vec<_>>());
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("n 6\n"));
    let g = path.to_str().unwrap();
    let eq1 = raps(&["exact", "--graph", g]);
    let perm = raps(&["exact", "--graph", g, "--oracle", "enumerate"]);
    assert_eq!(eq1.status.code(), Some(0));
    assert_eq!(eq1.stdout, perm.stdout);
}

#[test]
fn regret_series_has_phases() {
    let out = raps(&["regret", "--family", "line", "--n", "4", "--T", "20000", "--stride", "1000"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("round,regret,phase"));
    let rows: Vec<(u64, f64, String)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].to_string())
        })
        .collect();
    assert_eq!(rows.last().unwrap().0, 20_000);
    assert_eq!(rows[0].2, "discovery");
    assert!(rows.iter().any(|r| r.2 == "ucb"));
    assert!(rows.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-9));
}

#[test]
fn regret_baseline_and_model_file() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.json");
    let m = model.to_str().unwrap();
    let out = raps(&["gen", "--family", "line", "--n", "3", "--format", "scm", "--out", m]);
    assert_eq!(out.status.code(), Some(0));
    let out = raps(&["regret", "--scm", m, "--T", "5000", "--baseline", "flat-ucb", "--stride", "5000"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).ends_with(",ucb\n"));
    let out = raps(&["regret", "--scm", m, "--T", "5000", "--delta", "zero"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_writes_records() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("runs.csv");
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        format!(
            r#"{{"experiment": "er_slow", "n_list": [16, 32], "p_rule": {{"rule": "ln_n_over_n"}},
                "runs_per_point": 3, "master_seed": 5, "output_path": {:?}}}"#,
            csv.to_str().unwrap()
        ),
    )
    .unwrap();
    let out = raps(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 7);
    assert!(text.lines().skip(1).all(|l| l.starts_with("er_slow,erdos_renyi,")));
}

#[test]
fn malformed_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"experiment": "er_slow", "n_list": []}"#).unwrap();
    assert_eq!(raps(&["sweep", "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
}
