//! End-to-end CLI workflows: every subcommand, exit-code contracts, and
//! file-format round trips.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn mergefront() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mergefront"))
}

fn testdata(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("testdata").join(name)
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("command runs")
}

fn assert_ok(output: &Output) {
    assert!(
        output.status.success(),
        "command failed: {}\nstderr: {}",
        output.status,
        String::from_utf8_lossy(&output.stderr)
    );
}

fn gen_oracle(dir: &Path, spec: &str) -> PathBuf {
    let oracle = dir.join("oracle.json");
    let output = run(mergefront()
        .args(["gen-oracle", "--spec"])
        .arg(testdata(spec))
        .arg("--out")
        .arg(&oracle)
        .args(["--seed", "3"]));
    assert_ok(&output);
    oracle
}

#[test]
fn map_writes_full_artifact_set() {
    let dir = tempfile::tempdir().unwrap();
    let oracle = gen_oracle(dir.path(), "two_task_random.json");
    let out = dir.path().join("run");
    let output = run(mergefront()
        .args(["map", "--oracle"])
        .arg(&oracle)
        .args(["--k-samples", "20", "--seed", "9"])
        .args(["--population", "24", "--generations", "30", "--partitions", "6"])
        .arg("--out")
        .arg(&out));
    assert_ok(&output);
    for name in [
        "records.csv",
        "surrogate_task_1.json",
        "surrogate_task_2.json",
        "front_predicted.json",
        "front_real.json",
        "report.json",
        "run_manifest.json",
    ] {
        assert!(out.join(name).exists(), "missing artifact {name}");
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let per_task = report["per_task"].as_array().unwrap();
    assert_eq!(per_task.len(), 2);
    for task in per_task {
        assert!(task["r_squared"].as_f64().unwrap() > 0.8);
    }
    // 20 fitting evaluations plus one per re-evaluated front point.
    let eval_count = report["eval_count"].as_u64().unwrap();
    let front_size = report["front_predicted_size"].as_u64().unwrap();
    assert_eq!(eval_count, 20 + front_size);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("run_manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["eval_count"].as_u64().unwrap(), eval_count);
    assert_eq!(manifest["command"], "map");

    // The report command summarizes the run.
    let output = run(mergefront().args(["report", "--run"]).arg(&out));
    assert_ok(&output);
    let text = String::from_utf8_lossy(&output.stdout);
    assert!(text.contains("r_squared"));
}

#[test]
fn budget_cap_returns_exit_code_3() {
    let dir = tempfile::tempdir().unwrap();
    let oracle = gen_oracle(dir.path(), "two_task_random.json");
    let out = dir.path().join("run");
    let output = run(mergefront()
        .args(["map", "--oracle"])
        .arg(&oracle)
        .args(["--k-samples", "30", "--seed", "9", "--budget", "10"])
        .arg("--out")
        .arg(&out));
    assert_eq!(output.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&output.stderr);
    let payload: serde_json::Value = serde_json::from_str(stderr.trim()).unwrap();
    assert_eq!(payload["error"]["kind"], "budget");
}

#[test]
fn invalid_spec_returns_exit_code_2() {
    let dir = tempfile::tempdir().unwrap();
    // Non-symmetric quadratic matrix must be rejected.
    let spec = dir.path().join("bad_spec.json");
    std::fs::write(
        &spec,
        r#"{
            "n_tasks": 1,
            "tasks": [
                { "a": [[1.0]], "b": [0.0], "e": 0.0, "link": { "kind": "unbounded" } }
            ]
        }"#,
    )
    .unwrap();
    // Make it 2x2 and asymmetric.
    std::fs::write(
        &spec,
        r#"{
            "n_tasks": 2,
            "tasks": [
                { "a": [[1.0, 0.5], [0.4, 1.0]], "b": [0.0, 0.0], "e": 0.0,
                  "link": { "kind": "unbounded" } },
                { "a": [[1.0, 0.0], [0.0, 1.0]], "b": [0.0, 0.0], "e": 0.0,
                  "link": { "kind": "unbounded" } }
            ]
        }"#,
    )
    .unwrap();
    let output = run(mergefront()
        .args(["gen-oracle", "--spec"])
        .arg(&spec)
        .arg("--out")
        .arg(dir.path().join("oracle.json")));
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    let payload: serde_json::Value = serde_json::from_str(stderr.trim()).unwrap();
    assert_eq!(payload["error"]["kind"], "validation");
    assert!(payload["error"]["message"]
        .as_str()
        .unwrap()
        .contains("symmetric"));
}

#[test]
fn gamma_defaults_to_zero_in_generated_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let oracle = gen_oracle(dir.path(), "two_task_explicit.json");
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&oracle).unwrap()).unwrap();
    assert_eq!(doc["landscape"]["cubic_gamma"].as_f64().unwrap(), 0.0);
}

#[test]
fn sample_evaluate_fit_pipeline_composes() {
    let dir = tempfile::tempdir().unwrap();
    let oracle = gen_oracle(dir.path(), "two_task_explicit.json");

    let samples = dir.path().join("samples.csv");
    let output = run(mergefront()
        .args(["sample", "--n", "12", "--oracle"])
        .arg(&oracle)
        .args(["--seed", "4"])
        .arg("--out")
        .arg(&samples));
    assert_ok(&output);
    let text = std::fs::read_to_string(&samples).unwrap();
    assert_eq!(text.lines().next().unwrap(), "c_1,c_2");
    assert_eq!(text.lines().count(), 13);

    let records = dir.path().join("records.csv");
    let output = run(mergefront()
        .args(["evaluate", "--oracle"])
        .arg(&oracle)
        .arg("--samples")
        .arg(&samples)
        .arg("--out")
        .arg(&records));
    assert_ok(&output);
    let text = std::fs::read_to_string(&records).unwrap();
    assert_eq!(text.lines().next().unwrap(), "c_1,c_2,m_1,m_2");

    let fits = dir.path().join("fits");
    let output = run(mergefront()
        .args(["fit", "--records"])
        .arg(&records)
        .arg("--oracle")
        .arg(&oracle)
        .arg("--out")
        .arg(&fits));
    assert_ok(&output);
    assert!(fits.join("surrogate_task_1.json").exists());
    assert!(fits.join("surrogate_task_2.json").exists());
    assert!(fits.join("fit_report.json").exists());

    // Offline map run from the records, no oracle calls.
    let out = dir.path().join("offline");
    let output = run(mergefront()
        .args(["map", "--records"])
        .arg(&records)
        .args(["--links", "bounded:0:1", "--seed", "4"])
        .args(["--population", "24", "--generations", "20", "--partitions", "6"])
        .arg("--out")
        .arg(&out));
    assert_ok(&output);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["eval_count"].as_u64().unwrap(), 0);
    assert!(!out.join("front_real.json").exists());
}

#[test]
fn nested_run_writes_merge_tree() {
    let dir = tempfile::tempdir().unwrap();
    // Four-task oracle so the tree has two rounds.
    let spec = dir.path().join("spec4.json");
    std::fs::write(
        &spec,
        r#"{
            "n_tasks": 4,
            "random": { "seed": 2, "link": { "kind": "bounded", "l": 0.0, "u": 1.0 } }
        }"#,
    )
    .unwrap();
    let oracle = dir.path().join("oracle4.json");
    assert_ok(&run(mergefront()
        .args(["gen-oracle", "--spec"])
        .arg(&spec)
        .arg("--out")
        .arg(&oracle)));

    let out = dir.path().join("nested");
    let output = run(mergefront()
        .args(["nested", "--oracle"])
        .arg(&oracle)
        .args(["--pref", "0.4,0.3,0.2,0.1", "--per-pair-budget", "20", "--seed", "7"])
        .args(["--population", "24", "--generations", "30", "--partitions", "6"])
        .arg("--out")
        .arg(&out));
    assert_ok(&output);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["map_evals"].as_u64().unwrap(), 160);
    let tree: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("merge_tree.json")).unwrap())
            .unwrap();
    assert_eq!(tree.as_array().unwrap().len(), 2);
    let final_doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("final.json")).unwrap()).unwrap();
    assert_eq!(final_doc["final_coeffs"].as_array().unwrap().len(), 4);
}

#[test]
fn bayes_run_writes_round_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let oracle = gen_oracle(dir.path(), "two_task_random.json");
    let out = dir.path().join("bayes");
    let output = run(mergefront()
        .args(["bayes", "--oracle"])
        .arg(&oracle)
        .args(["--n0", "8", "--rounds", "1", "--per-round", "3", "--seed", "5"])
        .args(["--population", "24", "--generations", "20", "--partitions", "6"])
        .arg("--out")
        .arg(&out));
    assert_ok(&output);
    let rounds: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("rounds.json")).unwrap()).unwrap();
    let rounds = rounds.as_array().unwrap();
    assert_eq!(rounds.len(), 2);
    for round in rounds {
        assert!(round["bin_scores"].as_array().unwrap().len() == 6);
        let p: f64 = round["bin_probabilities"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_f64().unwrap())
            .sum();
        assert!((p - 1.0).abs() < 1e-9);
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["eval_count"].as_u64().unwrap(), 11);
}

#[test]
fn compare_front_against_itself_is_zero_distance() {
    let dir = tempfile::tempdir().unwrap();
    let oracle = gen_oracle(dir.path(), "two_task_explicit.json");
    let out = dir.path().join("run");
    assert_ok(&run(mergefront()
        .args(["map", "--oracle"])
        .arg(&oracle)
        .args(["--k-samples", "15", "--seed", "2"])
        .args(["--population", "24", "--generations", "20", "--partitions", "6"])
        .arg("--out")
        .arg(&out)));
    let front = out.join("front_predicted.json");
    let report_path = dir.path().join("compare.json");
    assert_ok(&run(mergefront()
        .args(["compare", "--front-a"])
        .arg(&front)
        .arg("--front-b")
        .arg(&front)
        .arg("--oracle")
        .arg(&oracle)
        .args(["--k", "20", "--seed", "6"])
        .arg("--out")
        .arg(&report_path)));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["gd"].as_f64().unwrap(), 0.0);
    assert_eq!(report["igd"].as_f64().unwrap(), 0.0);
    // The two sample draws pick different points off the same trade-off
    // curve, so the win rate sits near one half rather than zero.
    let win = report["win_rate"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&win));
    assert!(report["k"].as_u64().is_some());
    assert!(report["p"].as_f64().is_some());
    assert!(report["seed"].as_u64().is_some());
}

#[test]
fn dominating_singleton_wins_every_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let oracle = gen_oracle(dir.path(), "two_task_explicit.json");
    // Hand-written single-point fronts: the oracle metrics at (0.75, 0.2)
    // strictly exceed those at (0.02, 0.01) on both tasks.
    let front_a = dir.path().join("a.json");
    let front_b = dir.path().join("b.json");
    std::fs::write(
        &front_a,
        r#"{ "points": [ { "c": [0.75, 0.2], "f": [0.0, 0.0] } ],
             "provenance": "ingested", "spec_digest": "manual" }"#,
    )
    .unwrap();
    std::fs::write(
        &front_b,
        r#"{ "points": [ { "c": [0.02, 0.01], "f": [0.0, 0.0] } ],
             "provenance": "ingested", "spec_digest": "manual" }"#,
    )
    .unwrap();
    let report_path = dir.path().join("compare.json");
    assert_ok(&run(mergefront()
        .args(["compare", "--front-a"])
        .arg(&front_a)
        .arg("--front-b")
        .arg(&front_b)
        .arg("--oracle")
        .arg(&oracle)
        .args(["--k", "10", "--seed", "1"])
        .arg("--out")
        .arg(&report_path)));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["win_rate"].as_f64().unwrap(), 1.0);
}

#[test]
fn threads_flag_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let oracle = gen_oracle(dir.path(), "two_task_random.json");
    let out1 = dir.path().join("t1");
    let out2 = dir.path().join("t4");
    for (out, threads) in [(&out1, "1"), (&out2, "4")] {
        assert_ok(&run(mergefront()
            .args(["--threads", threads])
            .args(["map", "--oracle"])
            .arg(&oracle)
            .args(["--k-samples", "15", "--seed", "8"])
            .args(["--population", "24", "--generations", "20", "--partitions", "6"])
            .arg("--out")
            .arg(out)));
    }
    for name in ["records.csv", "front_predicted.json", "report.json"] {
        assert_eq!(
            std::fs::read(out1.join(name)).unwrap(),
            std::fs::read(out2.join(name)).unwrap(),
            "{name} differs across thread counts"
        );
    }
}
