//! End-to-end tests of the `plckit` binary: exit-code contract, report
//! shapes, determinism, and input diagnostics.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_plckit"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&output.stdout);
    serde_json::from_str(&text).unwrap_or_else(|e| panic!("bad JSON ({e}): {text}"))
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

/// Writes a fixture file under the per-crate temp dir and returns its path.
fn fixture(name: &str, contents: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli-fixtures");
    std::fs::create_dir_all(&dir).expect("temp dir");
    let path = dir.join(name);
    std::fs::write(&path, contents).expect("fixture write");
    path
}

fn ghz3_graph() -> PathBuf {
    fixture("ghz3.txt", "n=3\n1 2\n1 3\n")
}

#[test]
fn info_reports_ghz_diagnostics() {
    let graph = ghz3_graph();
    let out = run(&[
        "info",
        "--graph",
        graph.to_str().unwrap(),
        "--partition",
        "1|2|3",
    ]);
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["n"], 3);
    assert_eq!(v["ghz_extraction_delta"], 1);
    assert_eq!(v["local_ranks"], serde_json::json!([2, 2, 2]));
    assert_eq!(v["rank_condition"], true);
    assert_eq!(v["zero_sum"], true);
}

#[test]
fn equiv_exit_codes_cover_the_contract() {
    // Same state written with two generator bases: equivalent, exit 0.
    let a = fixture(
        "ghz3.json",
        r#"{"n":3,"d":2,"generators":[[1,0,0,1,0,1],[0,1,1,0,0,0],[0,1,0,0,1,0]],"phases":[0,0,0]}"#,
    );
    let b = fixture(
        "ghz3-tilde.json",
        r#"{"n":3,"d":2,"generators":[[1,0,0,1,0,1],[0,1,1,0,0,0],[0,0,1,0,1,0]],"phases":[0,0,0]}"#,
    );
    let out = run(&[
        "equiv",
        "--state-a",
        a.to_str().unwrap(),
        "--state-b",
        b.to_str().unwrap(),
        "--partition",
        "1|2|3",
    ]);
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["verdict"], "equivalent");
    assert!(v["witness"].is_array());
    assert_eq!(v["invariants"]["ring_dimension_a"], 3);

    // A three-party GHZ against a padded Bell pair: inequivalent, exit 1.
    let ghz = ghz3_graph();
    let padded = fixture("bell-pad.txt", "n=3\n1 2\n");
    let out = run(&[
        "equiv",
        "--graph-a",
        ghz.to_str().unwrap(),
        "--graph-b",
        padded.to_str().unwrap(),
        "--partition",
        "1|2|3",
    ]);
    assert_eq!(exit_code(&out), 1);
    assert_eq!(stdout_json(&out)["verdict"], "inequivalent");

    // Zero search budget: inconclusive, exit 2.
    let out = run(&[
        "equiv",
        "--state-a",
        a.to_str().unwrap(),
        "--state-b",
        b.to_str().unwrap(),
        "--partition",
        "1|2|3",
        "--budget-congruence",
        "1",
        "--samples",
        "0",
    ]);
    assert_eq!(exit_code(&out), 2);
    assert_eq!(stdout_json(&out)["verdict"], "inconclusive");

    // Site-count mismatch: input error, exit 3.
    let four = fixture("bell4.txt", "n=4\n1 2\n");
    let out = run(&[
        "equiv",
        "--graph-a",
        ghz.to_str().unwrap(),
        "--graph-b",
        four.to_str().unwrap(),
        "--partition",
        "1|2|3",
    ]);
    assert_eq!(exit_code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn malformed_inputs_exit_three_with_diagnostics() {
    let bad = fixture("bad.json", "{ not json");
    let out = run(&["info", "--state", bad.to_str().unwrap(), "--partition", "1"]);
    assert_eq!(exit_code(&out), 3);
    assert!(!out.stderr.is_empty());

    let graph = ghz3_graph();
    let out = run(&[
        "info",
        "--graph",
        graph.to_str().unwrap(),
        "--partition",
        "1|2",
    ]);
    assert_eq!(exit_code(&out), 3);

    let headerless = fixture("no-header.txt", "1 2\n");
    let out = run(&[
        "info",
        "--graph",
        headerless.to_str().unwrap(),
        "--partition",
        "1|2",
    ]);
    assert_eq!(exit_code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("n=<count>"));

    let out = run(&[
        "info",
        "--graph",
        graph.to_str().unwrap(),
        "--partition",
        "1|2|3",
        "--d",
        "4",
    ]);
    assert_eq!(exit_code(&out), 3);
}

#[test]
fn synth_round_trips_a_tuple_back_to_an_equivalent_state() {
    let graph = ghz3_graph();
    let info = run(&[
        "info",
        "--graph",
        graph.to_str().unwrap(),
        "--partition",
        "1|2|3",
    ]);
    let tuple = stdout_json(&info)["tuple"].clone();
    let tuple_path = fixture("ghz3-tuple.json", &tuple.to_string());

    let synth = run(&["synth", "--tuple", tuple_path.to_str().unwrap()]);
    assert_eq!(exit_code(&synth), 0);
    let v = stdout_json(&synth);
    assert_eq!(v["round_trip_exact"], true);
    assert_eq!(v["partition"], "1|2|3");

    // The synthesized output doubles as a loadable tableau file.
    let state_path = fixture("ghz3-synth.json", &v.to_string());
    let equiv = run(&[
        "equiv",
        "--state-a",
        state_path.to_str().unwrap(),
        "--graph-b",
        graph.to_str().unwrap(),
        "--partition",
        "1|2|3",
    ]);
    assert_eq!(exit_code(&equiv), 0);
    assert_eq!(stdout_json(&equiv)["verdict"], "equivalent");
}

#[test]
fn synth_rejects_a_tuple_that_is_not_a_state() {
    let bad = fixture(
        "not-zero-sum.json",
        r#"{"n":2,"d":3,"parties":2,"matrices":[[[0,1],[2,0]],[[0,1],[2,0]]]}"#,
    );
    let out = run(&["synth", "--tuple", bad.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 3);
    assert!(!out.stderr.is_empty());
}

#[test]
fn decompose_reports_blocks_and_tripartite_counts() {
    let graph = fixture("bell-before-zero.txt", "n=4\n1 2\n");
    let out = run(&[
        "decompose",
        "--graph",
        graph.to_str().unwrap(),
        "--partition",
        "1,3|2|4",
    ]);
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["conclusive"], true);
    assert_eq!(v["block_sizes"], serde_json::json!([2, 1, 1]));
    assert_eq!(v["tripartite"]["bell_per_pair"], serde_json::json!([1, 0, 0]));
    assert_eq!(
        v["tripartite"]["zeros_per_party"],
        serde_json::json!([1, 0, 1])
    );
    assert_eq!(v["tripartite"]["ghz"], 0);
}

#[test]
fn egs_search_is_complete_and_deterministic() {
    let args = ["egs", "--sizes", "1,1,1,1", "--d", "2"];
    let first = run(&args);
    assert_eq!(exit_code(&first), 0);
    let v = stdout_json(&first);
    assert_eq!(v["graphs_total"], 64);
    assert_eq!(v["complete"], true);
    assert_eq!(v["class_count_up_to_party_relabeling"], 2);

    let second = run(&args);
    assert_eq!(first.stdout, second.stdout, "same invocation, same bytes");
}

#[test]
fn verify_suites_pass() {
    let out = run(&["verify", "cosets"]);
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["group_order"], 720);
    assert_eq!(v["subgroup_order"], 36);
    assert_eq!(v["coset_count"], 20);
    assert_eq!(v["local_sequences"], serde_json::json!([0]));

    let out = run(&["verify", "spiral", "--min", "4", "--max", "5"]);
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["all_indecomposable"], true);

    let out = run(&["verify", "properties", "--trials", "8"]);
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["passed"], true);
    assert_eq!(v["failures"], 0);
}

#[test]
fn table_format_and_output_file_work() {
    let graph = ghz3_graph();
    let out_path = fixture("info-out.txt", "");
    let out = run(&[
        "info",
        "--graph",
        graph.to_str().unwrap(),
        "--partition",
        "1|2|3",
        "--format",
        "table",
        "--output",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.contains("ghz_extraction_delta: 1"));
    assert!(text.contains("rank_condition: true"));
}
