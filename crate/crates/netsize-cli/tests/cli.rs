//! End-to-end checks of the binary: pipelines, exit codes, and messages.

use std::path::Path;
use std::process::{Command, Output};

fn netsize(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netsize"))
        .args(args)
        .output()
        .expect("spawn netsize")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_study_estimate_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.txt");

    let out = netsize(&[
        "gen", "--kind", "er", "--n", "300", "--avg-degree", "5", "--seed", "1", "--out",
        path_str(&graph),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("wrote"));
    assert!(graph.exists());

    let dump = dir.path().join("traces.txt");
    let out = netsize(&[
        "study", "--graph", path_str(&graph), "--sources", "2", "--targets", "10", "--seed",
        "7", "--out", path_str(&dump),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("observed vertices"));
    let dump_text = std::fs::read_to_string(&dump).unwrap();
    assert!(dump_text.starts_with("S "), "unexpected dump: {dump_text:.40}");

    let out = netsize(&[
        "estimate", "--graph", path_str(&graph), "--sources", "2", "--targets", "30", "--seed",
        "7",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("leave-one-out estimate:"), "{text}");
    assert!(text.contains("resampling estimate:"), "{text}");

    // And without the slow estimator.
    let out = netsize(&[
        "estimate", "--graph", path_str(&graph), "--sources", "2", "--targets", "30",
        "--skip-resampling",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(!stdout(&out).contains("resampling estimate:"));
}

#[test]
fn centrality_reports_the_identity_on_a_path() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("p3.txt");
    std::fs::write(&graph, "0 1\n1 2\n").unwrap();

    let csv = dir.path().join("profile.csv");
    let out = netsize(&[
        "centrality", "--graph", path_str(&graph), "--dump", path_str(&csv),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("lhs=2 rhs=2"), "{text}");
    assert!(text.contains("size from identity: 3"), "{text}");

    let csv_text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = csv_text.lines();
    assert_eq!(lines.next(), Some("vertex,degree,betweenness"));
    assert_eq!(lines.next(), Some("0,1,0"));
    assert_eq!(lines.next(), Some("1,2,2"));
}

#[test]
fn sweep_writes_deterministic_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sweep.toml");
    let csv = dir.path().join("rows.csv");
    std::fs::write(
        &config,
        r#"
trials = 2
master-seed = 9

[graph]
kind = "er"
n = 120
avg-degree = 4.0

[probes]
sources = 2
target-counts = [8, 12]

[resampling]
initial-batch = 5
max-batch = 10
"#,
    )
    .unwrap();

    let args = [
        "sweep", "--config", path_str(&config), "--out", path_str(&csv), "--summary",
    ];
    let out = netsize(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("wrote 4 rows"));
    assert!(stdout(&out).contains("# topology"));

    let first = std::fs::read_to_string(&csv).unwrap();
    assert!(first.starts_with("topology,N,nS,nT,qT,trial,seed,"));
    assert_eq!(first.lines().count(), 5);

    // Identical bytes on rerun.
    let out = netsize(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(std::fs::read_to_string(&csv).unwrap(), first);
}

#[test]
fn scaling_table_prints_matched_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("scaling.toml");
    std::fs::write(
        &config,
        r#"
trials = 2
master-seed = 5

[graph]
kind = "er"
n = 12
avg-degree = 11.0

[probes]
sources = 2
target-counts = [10]

[resampling]
max-batch = 10
"#,
    )
    .unwrap();

    let out = netsize(&["validate-scaling", "--config", path_str(&config)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("# qT"), "{text}");
    // Saturated complete graph: both ratios exactly 1, difference 0.
    assert!(text.lines().nth(1).unwrap().ends_with("1 1 0"), "{text}");
}

#[test]
fn failures_exit_nonzero_with_distinct_messages() {
    let out = netsize(&["sweep", "--config", "definitely-missing.toml"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("config not found"), "{}", stderr(&out));

    let out = netsize(&["estimate", "--graph", "no-such-graph.txt", "--targets", "5"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("graph file not found"), "{}", stderr(&out));

    let out = netsize(&["gen", "--kind", "er", "--n", "10", "--out", "x.txt"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("--avg-degree"), "{}", stderr(&out));

    let out = netsize(&["estimate", "--graph", "g.txt", "--targets", "5", "--bogus-flag"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("--bogus-flag"), "{}", stderr(&out));

    let out = netsize(&["no-such-command"]);
    assert!(!out.status.success());
}
