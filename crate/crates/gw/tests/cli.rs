//! End-to-end checks of the `gw` binary: exit codes, run manifests, and
//! byte-level determinism of every subcommand.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};
use tempfile::TempDir;

const BOX1D: &str = r#"
matrix = [[1.0]]
offset = [-1.0]

[[factors]]
kind = "box"
lower = [0.0]
upper = [2.0]
"#;

const STOCH: &str = r#"
matrix = [[1.0]]
offset = [-1.0]
noise = 0.5
iters = 200000

[[factors]]
kind = "box"
lower = [0.0]
upper = [2.0]

[schedule]
  [schedule.alpha]
  kind = "harmonic"
  c = 1.0
  k0 = 2.0
  [schedule.beta]
  kind = "constant"
  value = 1.0
"#;

const FIX: &str = r#"
matrix = [[0.5, 0.1], [0.0, 0.5]]
offset = [1.0, 1.0]
x0 = [0.0, 0.0]

[schedule]
kind = "round-robin"
horizon = 10000
b1 = 2
b2 = 3
seed = 7
"#;

const LTS: &str = r#"{"states": ["p", "q", "r"], "labels": ["a"],
 "transitions": [["p", "a", "p"], ["q", "a", "q"], ["r", "a", "q"]]}"#;

const HOM_GOOD: &str = r#"{
  "source": {"states": ["p"], "labels": ["a"], "transitions": [["p", "a", "p"]]},
  "target": {"states": ["u", "v"], "labels": ["a"],
             "transitions": [["u", "a", "u"], ["v", "a", "u"]]},
  "map": {"p": "u"}
}"#;

const HOM_BAD: &str = r#"{
  "source": {"states": ["p"], "labels": ["a"], "transitions": [["p", "a", "p"]]},
  "target": {"states": ["u", "v"], "labels": ["a"],
             "transitions": [["u", "a", "u"], ["v", "a", "u"]]},
  "map": {"p": "v"}
}"#;

const MDP: &str = r#"{"states": ["s0", "s1"], "actions": ["stay", "move"], "gamma": 0.5,
 "transitions": {"s0,stay": [["s0", 1.0]], "s0,move": [["s1", 1.0]],
                 "s1,stay": [["s1", 1.0]], "s1,move": [["s0", 1.0]]},
 "rewards": {"s0,move": 1.0, "s1,move": 1.0}}"#;

const ECON: &str = "m = 2\nn = 1\no = 1\n";

const TERMINAL_CAT: &str = r#"{
  "objects": ["C"],
  "arrows": [{"name": "id", "source": "C", "target": "C"}],
  "identities": {"C": "id"},
  "composition": []
}"#;

const TWO_PRODUCERS: &str = r#"
capacity = 1
emits_per_auction = 4
total_emits = 40
seed = 0

[[agents]]
name = "hare"
states = ["s"]
actions = ["go"]
gamma = 0.9
initial_state = "s"
transitions = { "s,go" = [["s", 1.0]] }
chunks = { s = ["alpha", 2.0] }

[[agents]]
name = "tortoise"
states = ["s"]
actions = ["go"]
gamma = 0.9
initial_state = "s"
transitions = { "s,go" = [["s", 1.0]] }
chunks = { s = ["beta", 1.0] }
"#;

fn gw() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gw"))
}

fn run(args: &[&str]) -> Output {
    gw().args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout is utf-8")
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("stderr is utf-8")
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("process exits")
}

fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, contents).expect("fixture writes");
    path
}

fn path_str(path: &Path) -> String {
    path.display().to_string()
}

#[test]
fn vi_solve_reports_the_boxed_root() {
    let dir = TempDir::new().unwrap();
    let config = write(dir.path(), "box1d.toml", BOX1D);
    let out = run(&["vi", "solve", "--config", &path_str(&config)]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(
        text.contains("solution: 1.0000000000000000e0"),
        "stdout: {text}"
    );
    let gap_line = text
        .lines()
        .find(|l| l.starts_with("gap: "))
        .expect("gap line present");
    let gap: f64 = gap_line["gap: ".len()..].parse().expect("gap parses");
    assert!(gap.abs() <= 1e-8, "gap line: {gap_line}");

    let noisy = gw()
        .args(["vi", "solve", "--config", &path_str(&config)])
        .env("GW_LOG", "debug")
        .output()
        .expect("binary runs");
    assert_eq!(code(&noisy), 0);
    assert_eq!(stdout(&noisy), text, "logging must not touch stdout");
}

#[test]
fn mumble_force_answers_at_the_stage() {
    let dir = TempDir::new().unwrap();
    let cat = write(dir.path(), "terminal.json", TERMINAL_CAT);
    let out = run(&[
        "mumble",
        "force",
        "--cat",
        &path_str(&cat),
        "--formula",
        "x = x",
        "--stage",
        "C",
        "--element",
        "a",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("forced: true"), "stdout: {}", stdout(&out));

    let absurd = run(&[
        "mumble",
        "force",
        "--cat",
        &path_str(&cat),
        "--formula",
        "false",
        "--stage",
        "C",
    ]);
    assert_eq!(code(&absurd), 0);
    assert!(stdout(&absurd).contains("forced: false"));
}

#[test]
fn workspace_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let config = write(dir.path(), "two_producers.toml", TWO_PRODUCERS);
    let out_a = dir.path().join("run-a");
    let out_b = dir.path().join("run-b");
    let run_a = run(&[
        "workspace",
        "run",
        "--config",
        &path_str(&config),
        "--seed",
        "1",
        "--out",
        &path_str(&out_a),
    ]);
    let run_b = run(&[
        "workspace",
        "run",
        "--config",
        &path_str(&config),
        "--seed",
        "1",
        "--out",
        &path_str(&out_b),
    ]);
    assert_eq!(code(&run_a), 0, "stderr: {}", stderr(&run_a));
    assert_eq!(code(&run_b), 0, "stderr: {}", stderr(&run_b));
    let text_a = stdout(&run_a);
    assert!(text_a.lines().any(|l| l.starts_with("log sha256: ")), "stdout: {text_a}");
    assert_eq!(text_a, stdout(&run_b));
    let log_a = fs::read(out_a.join("events.jsonl")).expect("log written");
    let log_b = fs::read(out_b.join("events.jsonl")).expect("log written");
    assert_eq!(log_a, log_b);
    assert!(!log_a.is_empty());
}

#[test]
fn manifests_pin_the_config_digest() {
    let dir = TempDir::new().unwrap();
    let config = write(dir.path(), "two_producers.toml", TWO_PRODUCERS);
    let out_dir = dir.path().join("run");
    let out = run(&[
        "workspace",
        "run",
        "--config",
        &path_str(&config),
        "--seed",
        "9",
        "--out",
        &path_str(&out_dir),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap())
            .expect("manifest parses");
    assert_eq!(manifest["subcommand"], "workspace run");
    assert_eq!(manifest["config"], path_str(&config));
    assert_eq!(manifest["seed"], 9);
    assert_eq!(manifest["out"], path_str(&out_dir));
    assert_eq!(manifest["version"], env!("CARGO_PKG_VERSION"));
    let mut hasher = Sha256::new();
    hasher.update(TWO_PRODUCERS.as_bytes());
    let digest = format!("{:x}", hasher.finalize());
    assert_eq!(manifest["config_sha256"], digest);
}

#[test]
fn repeated_runs_share_primary_output_bytes() {
    let dir = TempDir::new().unwrap();
    let fix = write(dir.path(), "fix.toml", FIX);
    let mdp = write(dir.path(), "mdp.json", MDP);
    let stoch = write(dir.path(), "stoch.toml", STOCH);
    let cases: Vec<Vec<String>> = vec![
        vec!["fix".into(), "run".into(), "--config".into(), path_str(&fix)],
        vec![
            "qlearn".into(),
            "run".into(),
            "--config".into(),
            path_str(&mdp),
            "--seed".into(),
            "3".into(),
            "--max-iter".into(),
            "2000".into(),
        ],
        vec![
            "vi".into(),
            "solve-stochastic".into(),
            "--config".into(),
            path_str(&stoch),
            "--seed".into(),
            "5".into(),
            "--max-iter".into(),
            "2000".into(),
        ],
    ];
    for args in cases {
        let argv: Vec<&str> = args.iter().map(String::as_str).collect();
        let first = run(&argv);
        let second = run(&argv);
        assert_eq!(code(&first), 0, "{argv:?} stderr: {}", stderr(&first));
        assert_eq!(code(&second), 0);
        assert_eq!(stdout(&first), stdout(&second), "{argv:?} must be deterministic");
        assert!(!stdout(&first).is_empty());
    }
}

#[test]
fn usage_failures_exit_one() {
    let dir = TempDir::new().unwrap();
    let bad_toml = write(dir.path(), "bad.toml", "matrix = [[\n");

    let unknown = run(&["frobnicate"]);
    assert_eq!(code(&unknown), 1);

    let missing = run(&["vi", "solve", "--config", "/nonexistent/box.toml"]);
    assert_eq!(code(&missing), 1);
    assert!(stderr(&missing).contains("cannot read"), "stderr: {}", stderr(&missing));

    let malformed = run(&["vi", "solve", "--config", &path_str(&bad_toml)]);
    assert_eq!(code(&malformed), 1);

    let missing_flag = run(&["coalg", "bisim"]);
    assert_eq!(code(&missing_flag), 1);

    let bad_flag = run(&["fix", "run", "--definitely-not-a-flag"]);
    assert_eq!(code(&bad_flag), 1);

    let help = run(&["--help"]);
    assert_eq!(code(&help), 0);
    assert!(stdout(&help).contains("workspace"));
}

#[test]
fn numerical_failures_exit_two() {
    let dir = TempDir::new().unwrap();
    let fix = write(dir.path(), "fix.toml", FIX);
    let stoch = write(dir.path(), "stoch.toml", STOCH);
    let econ = write(dir.path(), "econ.toml", ECON);

    let exhausted = run(&[
        "fix",
        "run",
        "--config",
        &path_str(&fix),
        "--max-iter",
        "3",
        "--tol",
        "1e-12",
    ]);
    assert_eq!(code(&exhausted), 2, "stderr: {}", stderr(&exhausted));
    assert!(stderr(&exhausted).contains("exhausted"), "stderr: {}", stderr(&exhausted));

    let missed = run(&[
        "vi",
        "solve-stochastic",
        "--config",
        &path_str(&stoch),
        "--max-iter",
        "500",
        "--tol",
        "1e-30",
    ]);
    assert_eq!(code(&missed), 2, "stderr: {}", stderr(&missed));
    assert!(stderr(&missed).contains("tolerance"), "stderr: {}", stderr(&missed));

    let starved = run(&[
        "economy",
        "equilibrium",
        "--config",
        &path_str(&econ),
        "--max-iter",
        "3",
    ]);
    assert_eq!(code(&starved), 2, "stderr: {}", stderr(&starved));
    assert!(stderr(&starved).contains("exhausted"), "stderr: {}", stderr(&starved));
}

#[test]
fn replay_reconstructs_the_run() {
    let dir = TempDir::new().unwrap();
    let config = write(dir.path(), "two_producers.toml", TWO_PRODUCERS);
    let out_run = dir.path().join("run");
    let out_replay = dir.path().join("replay");

    let first = run(&[
        "workspace",
        "run",
        "--config",
        &path_str(&config),
        "--out",
        &path_str(&out_run),
    ]);
    assert_eq!(code(&first), 0, "stderr: {}", stderr(&first));

    let log = out_run.join("events.jsonl");
    let second = run(&[
        "workspace",
        "replay",
        "--config",
        &path_str(&config),
        "--log",
        &path_str(&log),
        "--out",
        &path_str(&out_replay),
    ]);
    assert_eq!(code(&second), 0, "stderr: {}", stderr(&second));
    assert!(stdout(&second).contains("replayed"), "stdout: {}", stdout(&second));
    let summary_run = fs::read(out_run.join("summary.json")).unwrap();
    let summary_replay = fs::read(out_replay.join("summary.json")).unwrap();
    assert_eq!(summary_run, summary_replay);

    let mut corrupted = fs::read_to_string(&log).unwrap();
    corrupted.replace_range(0..1, "[");
    let tampered = write(dir.path(), "tampered.jsonl", &corrupted);
    let third = run(&[
        "workspace",
        "replay",
        "--config",
        &path_str(&config),
        "--log",
        &path_str(&tampered),
    ]);
    assert_eq!(code(&third), 2, "stderr: {}", stderr(&third));
}

#[test]
fn coalg_verdicts_cover_both_outcomes() {
    let dir = TempDir::new().unwrap();
    let lts = write(dir.path(), "lts.json", LTS);
    let good = write(dir.path(), "hom_good.json", HOM_GOOD);
    let bad = write(dir.path(), "hom_bad.json", HOM_BAD);

    let bisim = run(&["coalg", "bisim", "--config", &path_str(&lts)]);
    assert_eq!(code(&bisim), 0, "stderr: {}", stderr(&bisim));
    let blocks: Vec<Vec<String>> = serde_json::from_str(&stdout(&bisim)).expect("json partition");
    assert_eq!(blocks, vec![vec!["p".to_string(), "q".into(), "r".into()]]);

    let csv = run(&["coalg", "bisim", "--config", &path_str(&lts), "--format", "csv"]);
    assert_eq!(code(&csv), 0);
    let text = stdout(&csv);
    assert!(text.starts_with("state,class\n"), "stdout: {text}");
    assert!(text.contains("r,0"), "stdout: {text}");

    let holds = run(&["coalg", "check-hom", "--config", &path_str(&good)]);
    assert_eq!(code(&holds), 0, "stderr: {}", stderr(&holds));
    assert!(stdout(&holds).contains("\"holds\": true"));

    let fails = run(&["coalg", "check-hom", "--config", &path_str(&bad)]);
    assert_eq!(code(&fails), 0, "a disproved square is still a verdict");
    assert!(stdout(&fails).contains("\"holds\": false"));
}

#[test]
fn every_subcommand_writes_its_outputs() {
    let dir = TempDir::new().unwrap();
    let lts = write(dir.path(), "lts.json", LTS);
    let hom = write(dir.path(), "hom.json", HOM_GOOD);
    let fix = write(dir.path(), "fix.toml", FIX);
    let mdp = write(dir.path(), "mdp.json", MDP);
    let box1d = write(dir.path(), "box1d.toml", BOX1D);
    let stoch = write(dir.path(), "stoch.toml", STOCH);
    let econ = write(dir.path(), "econ.toml", ECON);
    let cat = write(dir.path(), "terminal.json", TERMINAL_CAT);
    let ws = write(dir.path(), "two_producers.toml", TWO_PRODUCERS);

    let cases: Vec<(Vec<String>, Vec<&str>)> = vec![
        (
            vec!["coalg".into(), "bisim".into(), "--config".into(), path_str(&lts)],
            vec!["partition.json"],
        ),
        (
            vec!["coalg".into(), "check-hom".into(), "--config".into(), path_str(&hom)],
            vec!["verdict.json"],
        ),
        (
            vec!["fix".into(), "run".into(), "--config".into(), path_str(&fix)],
            vec!["trace.csv", "result.json"],
        ),
        (
            vec![
                "qlearn".into(),
                "run".into(),
                "--config".into(),
                path_str(&mdp),
                "--max-iter".into(),
                "500".into(),
            ],
            vec!["trace.csv", "q.json"],
        ),
        (
            vec!["vi".into(), "solve".into(), "--config".into(), path_str(&box1d)],
            vec!["trace.csv", "solution.json"],
        ),
        (
            vec![
                "vi".into(),
                "solve-stochastic".into(),
                "--config".into(),
                path_str(&stoch),
                "--max-iter".into(),
                "500".into(),
            ],
            vec!["trace.csv", "solution.json"],
        ),
        (
            vec!["economy".into(), "equilibrium".into(), "--config".into(), path_str(&econ)],
            vec!["trace.csv", "report.json"],
        ),
        (
            vec![
                "mumble".into(),
                "force".into(),
                "--cat".into(),
                path_str(&cat),
                "--formula".into(),
                "x = x".into(),
                "--stage".into(),
                "C".into(),
                "--element".into(),
                "a".into(),
            ],
            vec!["forcing.json"],
        ),
        (
            vec!["workspace".into(), "run".into(), "--config".into(), path_str(&ws)],
            vec!["events.jsonl", "summary.json"],
        ),
    ];

    for (i, (args, expected)) in cases.iter().enumerate() {
        let out_dir = dir.path().join(format!("out-{i}"));
        let mut argv: Vec<&str> = args.iter().map(String::as_str).collect();
        let out_str = path_str(&out_dir);
        argv.push("--out");
        argv.push(&out_str);
        let out = run(&argv);
        assert_eq!(code(&out), 0, "{argv:?} stderr: {}", stderr(&out));
        let mut files = vec!["manifest.json"];
        files.extend(expected);
        for file in files {
            assert!(out_dir.join(file).is_file(), "{argv:?} should write {file}");
        }
    }
}
