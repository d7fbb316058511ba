use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mbqc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mbqc")).args(args).output().expect("binary runs")
}

fn record(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON record")
}

/// The record minus the one field allowed to differ between identical runs.
fn without_clock(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("wall_clock_seconds");
    v
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn same_seed_same_record() {
    let args = ["entangle", "--eta", "0.3", "--scheme", "two-photon", "--trials", "300", "--seed", "11"];
    let a = without_clock(record(&mbqc(&args)));
    let b = without_clock(record(&mbqc(&args)));
    assert_eq!(a, b);
    let mut other = args.to_vec();
    other[8] = "12";
    assert_ne!(a["results"], without_clock(record(&mbqc(&other)))["results"]);
}

#[test]
fn scenario_file_matches_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "grow.toml",
        "experiment = \"grow\"\nseed = 5\ntrials = 3\n[hardware.link]\np_success = 0.5\nattempt_time = 1e-9\n\
         [strategy]\nkind = \"branch\"\nsteps = 100\n",
    );
    let from_file = without_clock(record(&mbqc(&["run", "--scenario", &path])));
    let from_flags = without_clock(record(&mbqc(&["grow", "--steps", "100", "--trials", "3", "--seed", "5"])));
    assert_eq!(from_file["results"], from_flags["results"]);
    assert_eq!(from_file["model_time"], from_flags["model_time"]);
}

#[test]
fn nv_budget_gives_four_milliseconds() {
    let r = record(&mbqc(&["budget", "--preset", "nv"]));
    let edge_time = r["results"][0]["edge_time"].as_f64().unwrap();
    assert!((edge_time - 4e-3).abs() <= 4e-3 * 1e-15, "{edge_time}");
    let p = r["results"][0]["p_success"].as_f64().unwrap();
    assert!((p - 5e-5).abs() <= 5e-5 * 1e-15, "{p}");
}

#[test]
fn compiled_circuit_runs_with_unit_fidelity() {
    let dir = tempfile::tempdir().unwrap();
    let circuit = write(
        dir.path(),
        "c.json",
        r#"[{"gate":"h","wire":0},{"gate":"cz","a":0,"b":1},{"gate":"rz","wire":1,"angle":0.7}]"#,
    );
    for mode in ["lazy", "eager"] {
        let r = record(&mbqc(&["run-pattern", "--circuit", &circuit, "--mode", mode, "--trials", "8"]));
        assert_eq!(r["passed"], true);
        assert!(r["aggregates"]["min_fidelity"].as_f64().unwrap() > 1.0 - 1e-12);
    }
}

#[test]
fn out_dir_holds_record_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let status = mbqc(&["grow", "--steps", "50", "--trace-every", "10", "--trials", "2", "--out", out.to_str().unwrap()]);
    assert!(status.status.success());
    let rec: Value = serde_json::from_str(&std::fs::read_to_string(out.join("record.json")).unwrap()).unwrap();
    assert_eq!(rec["experiment"], "grow");
    let csv = std::fs::read_to_string(out.join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3, "{csv}");
}

#[test]
fn verification_failure_exits_two() {
    let ok = mbqc(&["verify", "--trials", "2", "--suite", "graph,erasure"]);
    assert_eq!(ok.status.code(), Some(0));
    let bad = mbqc(&["verify", "--trials", "2", "--suite", "graph", "--inject-failure"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let typo = write(dir.path(), "typo.toml", "experiment = \"grow\"\nsede = 3\n");
    let out = mbqc(&["run", "--scenario", &typo]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sede"));
    assert_eq!(mbqc(&["run", "--scenario", "/nonexistent.toml"]).status.code(), Some(1));
    assert_eq!(mbqc(&["budget"]).status.code(), Some(1));
    assert_eq!(mbqc(&["run-pattern"]).status.code(), Some(1));
    assert_eq!(mbqc(&["entangle", "--eta", "1.5"]).status.code(), Some(1));
    assert_eq!(mbqc(&["--help"]).status.code(), Some(0));
}

#[test]
fn shipped_scenarios_run() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut n = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let r = record(&mbqc(&["run", "--scenario", path.to_str().unwrap(), "--trials", "2"]));
            assert_eq!(r["passed"], true, "{}", path.display());
            n += 1;
        }
    }
    assert!(n >= 6);
}

#[test]
fn ideal_click_frequencies_sit_in_four_sigma_band() {
    let trials = 40_000.0;
    let r = record(&mbqc(&["entangle", "--trials", "40000", "--seed", "9"]));
    let agg = &r["aggregates"];
    for (label, p) in agg["enumerated_probabilities"].as_object().unwrap() {
        let p = p.as_f64().unwrap();
        let f = agg["frequencies"][label].as_f64().unwrap_or(0.0);
        let sigma = (p * (1.0 - p) / trials).sqrt();
        assert!((f - p).abs() <= 4.0 * sigma, "{label}: {f} vs {p}");
    }
    // None, left and right each carry a quarter; the bunched double click the rest.
    for label in ["0-0", "0-1", "1-0"] {
        assert!((agg["enumerated_probabilities"][label].as_f64().unwrap() - 0.25).abs() < 1e-12);
    }
}

#[test]
fn brokers_build_the_target_graph() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "b.toml",
        "experiment = \"grow\"\ntrials = 4\n[hardware.link]\np_success = 0.2\nattempt_time = 1e-6\n\
         [strategy]\nkind = \"broker\"\nnodes = 4\n[target]\nedges = [[0, 1], [1, 2], [2, 3], [3, 0], [0, 2]]\n",
    );
    let r = record(&mbqc(&["run", "--scenario", &path]));
    assert_eq!(r["passed"], true);
    assert!(r["results"].as_array().unwrap().iter().all(|t| t["client_edges"] == 5 && t["matches_target"] == true));
    let bad = write(dir.path(), "bad.toml", &std::fs::read_to_string(&path).unwrap().replace("[0, 2]]", "[0, 7]]"));
    assert_eq!(mbqc(&["run", "--scenario", &bad]).status.code(), Some(1));
}
