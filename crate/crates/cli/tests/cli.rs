//! End-to-end tests that drive the compiled `plan` binary.

use std::path::Path;
use std::process::{Command, Output};

use aorrt::scenario::Scenario;

fn plan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plan"))
        .args(args)
        .output()
        .expect("spawning the plan binary")
}

fn stdout(output: &Output) -> String {
    assert!(
        output.status.success(),
        "exit {:?}\nstderr: {}",
        output.status.code(),
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout.clone()).expect("utf-8 stdout")
}

#[test]
fn scenario_list_names_every_builtin() {
    let out = stdout(&plan(&["scenario", "list"]));
    let names: Vec<&str> = out.lines().collect();
    assert_eq!(names, Scenario::builtin_names());
}

#[test]
fn exported_scenarios_reload_equal_to_the_builtins() {
    let dir = tempfile::tempdir().unwrap();
    for name in Scenario::builtin_names() {
        let path = dir.path().join(format!("{name}.json"));
        stdout(&plan(&[
            "scenario",
            "export",
            name,
            "--out",
            path.to_str().unwrap(),
        ]));
        let reloaded = Scenario::load(&path).unwrap();
        assert_eq!(reloaded, Scenario::builtin(name).unwrap(), "{name}");
    }
}

#[test]
fn run_reports_a_solution_and_repeats_it_for_the_same_seed() {
    let args = [
        "run",
        "--scenario",
        "geo2d_one_box",
        "--planner",
        "ao-rrt",
        "--seed",
        "3",
        "--iterations",
        "4000",
        "--checkpoints",
        "1000,4000",
    ];
    let report: serde_json::Value = serde_json::from_str(&stdout(&plan(&args))).unwrap();
    assert_eq!(report["success"], true);
    assert_eq!(report["planner"], "ao-rrt");
    assert_eq!(report["iterations"], 4000);
    let cost = report["best"]["cost"].as_f64().unwrap();
    assert!(cost > 10.0 && cost < 25.0, "implausible cost {cost}");
    assert_eq!(report["checkpoints"].as_array().unwrap().len(), 2);
    // The final checkpoint agrees with the final best.
    assert_eq!(report["checkpoints"][1]["best_cost"].as_f64().unwrap(), cost);
    // The effective parameters are echoed for reproducibility.
    assert_eq!(report["params"]["goal_bias"].as_f64().unwrap(), 0.05);

    let again: serde_json::Value = serde_json::from_str(&stdout(&plan(&args))).unwrap();
    assert_eq!(again["best"]["cost"], report["best"]["cost"]);
    assert_eq!(again["nodes_total"], report["nodes_total"]);
    assert_eq!(again["improvements"], report["improvements"]);

    let mut other_seed = args;
    other_seed[6] = "4";
    let other: serde_json::Value =
        serde_json::from_str(&stdout(&plan(&other_seed))).unwrap();
    assert_ne!(other["best"]["cost"], report["best"]["cost"]);
}

#[test]
fn run_accepts_metric_weight_overrides() {
    let report: serde_json::Value = serde_json::from_str(&stdout(&plan(&[
        "run",
        "--scenario",
        "geo2d_one_box",
        "--planner",
        "ao-rrt",
        "--seed",
        "1",
        "--iterations",
        "500",
        "--w-c",
        "1.0",
    ])))
    .unwrap();
    assert_eq!(report["params"]["weights"]["w_c"].as_f64().unwrap(), 1.0);
    assert_eq!(report["params"]["weights"]["w_x"].as_f64().unwrap(), 1.0);
}

fn write_bench_config(path: &Path, threads: usize) {
    let config = serde_json::json!({
        "scenario": "geo2d_one_box",
        "planners": [
            { "variant": "rrt" },
            { "variant": "ao-rrt" }
        ],
        "trials": 3,
        "stop": { "iterations": 800 },
        "checkpoints": [200, 800],
        "seed": 11,
        "threads": threads
    });
    std::fs::write(path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
}

#[test]
fn bench_output_is_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bench.json");
    write_bench_config(&config, 1);

    let mut outputs = Vec::new();
    for (sub, threads) in [("a", None), ("b", None), ("c", Some("4"))] {
        let out_dir = dir.path().join(sub);
        let mut args = vec![
            "bench".to_string(),
            "--config".into(),
            config.to_str().unwrap().into(),
            "--out".into(),
            out_dir.to_str().unwrap().into(),
        ];
        if let Some(t) = threads {
            args.push("--threads".into());
            args.push(t.into());
        }
        let arg_refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let output = plan(&arg_refs);
        assert!(
            output.status.success(),
            "stderr: {}",
            String::from_utf8_lossy(&output.stderr)
        );
        outputs.push((
            std::fs::read(out_dir.join("raw.csv")).unwrap(),
            std::fs::read(out_dir.join("summary.csv")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1], "same config, same bytes");
    assert_eq!(outputs[0], outputs[2], "thread count must not matter");

    let raw = String::from_utf8(outputs[0].0.clone()).unwrap();
    assert!(raw.starts_with("planner,trial,checkpoint,success,best_cost,nodes,pruned\n"));
    assert_eq!(raw.lines().count(), 1 + 2 * 3 * 2);
    let summary = String::from_utf8(outputs[0].1.clone()).unwrap();
    assert!(
        summary.starts_with("planner,checkpoint,success_rate,mean_cost,std_cost,n_success\n")
    );
    assert_eq!(summary.lines().count(), 1 + 2 * 2);
}

#[test]
fn converge_writes_the_scored_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("conv.csv");
    let output = plan(&[
        "converge",
        "--scenario",
        "geo2d_one_box",
        "--planner",
        "ao-rrt",
        "--eps",
        "0.5,2.0",
        "--k-grid",
        "300,1200",
        "--trials",
        "4",
        "--seed",
        "2",
        "--threads",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let table = std::fs::read_to_string(&out).unwrap();
    assert!(table.starts_with("planner,eps,budget,trials,failures,failure_rate\n"));
    assert_eq!(table.lines().count(), 1 + 1 * 2 * 2);
    for line in table.lines().skip(1) {
        assert_eq!(line.split(',').count(), 6);
        assert!(line.starts_with("ao-rrt,"));
    }
}

#[test]
fn helpful_failures_for_bad_inputs() {
    // Unknown scenario: named alternatives.
    let output = plan(&[
        "run", "--scenario", "nope", "--planner", "rrt", "--iterations", "10",
    ]);
    assert!(!output.status.success());
    let err = String::from_utf8_lossy(&output.stderr).to_string();
    assert!(err.contains("geo2d_one_box"), "unhelpful error: {err}");

    // Unknown planner: clap rejects with the parser's message.
    let output = plan(&[
        "run",
        "--scenario",
        "geo2d_one_box",
        "--planner",
        "rrt-star",
        "--iterations",
        "10",
    ]);
    assert!(!output.status.success());
    let err = String::from_utf8_lossy(&output.stderr).to_string();
    assert!(err.contains("unknown planner"), "unhelpful error: {err}");

    // No budget at all.
    let output = plan(&["run", "--scenario", "geo2d_one_box", "--planner", "rrt"]);
    assert!(!output.status.success());
    let err = String::from_utf8_lossy(&output.stderr).to_string();
    assert!(err.contains("--iterations") && err.contains("--time-budget"));

    // Both budgets: clap conflict.
    let output = plan(&[
        "run",
        "--scenario",
        "geo2d_one_box",
        "--planner",
        "rrt",
        "--iterations",
        "10",
        "--time-budget",
        "1.0",
    ]);
    assert!(!output.status.success());

    // Duplicate planner labels in a bench config.
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("dup.json");
    std::fs::write(
        &config,
        serde_json::json!({
            "scenario": "geo2d_one_box",
            "planners": [ { "variant": "rrt" }, { "variant": "rrt" } ],
            "stop": { "iterations": 10 },
            "checkpoints": [10],
            "out": dir.path().join("out")
        })
        .to_string(),
    )
    .unwrap();
    let output = plan(&["bench", "--config", config.to_str().unwrap()]);
    assert!(!output.status.success());
    let err = String::from_utf8_lossy(&output.stderr).to_string();
    assert!(err.contains("duplicate planner label"), "unhelpful error: {err}");
}
