use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use subgroup_fusion::cli::{EXIT_DATA, EXIT_USAGE, SCHEMA_VERSION};
use subgroup_fusion::sim::{run_rep, ErrorKind, SimScenario};
use subgroup_fusion::structure::MetricsReport;
use subgroup_fusion::tuning::TuneConfig;
use subgroup_fusion::{LossSpec, PenaltyKind, SubgroupStructure};

fn subfuse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subfuse"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn lines(path: &Path) -> Vec<Value> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|e| e.as_f64().unwrap()).collect()
}

fn ints(v: &Value) -> Vec<usize> {
    v.as_array().unwrap().iter().map(|e| e.as_u64().unwrap() as usize).collect()
}

const TOY: &str = "y,x1\n0.3,1.0\n2.9,-0.5\n1.1,2.0\n-0.7,0.4\n3.4,1.5\n";

#[test]
fn fit_writes_versioned_record() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("toy.csv");
    let out = dir.path().join("fit.jsonl");
    fs::write(&input, TOY).unwrap();
    let res = subfuse(&["fit", input.to_str().unwrap(), "-o", out.to_str().unwrap(), "--loss", "l2"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let recs = lines(&out);
    assert_eq!(recs.len(), 1);
    let r = &recs[0];
    assert_eq!(r["schema_version"], SCHEMA_VERSION);
    assert_eq!(r["record"], "fit");
    assert_eq!(r["n"], 5);
    // at the default (upper-bound) λ the fit is homogeneous
    assert_eq!(r["k_hat"], 1);
    assert!(!r["residual_history"].as_array().unwrap().is_empty());
}

#[test]
fn malformed_input_reports_line_and_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.csv");
    fs::write(&input, "y,x1\n1,2\n3,oops\n").unwrap();
    let res = subfuse(&["fit", input.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(EXIT_DATA));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("line 3"), "{err}");

    fs::write(&input, "y,x1\n1,2\n3\n").unwrap();
    let res = subfuse(&["fit", input.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(EXIT_DATA));
    assert!(String::from_utf8_lossy(&res.stderr).contains("line 3"));

    fs::write(&input, "y,x1\n1,2\n3,NaN\n").unwrap();
    assert_eq!(subfuse(&["fit", input.to_str().unwrap()]).status.code(), Some(EXIT_DATA));

    let missing = dir.path().join("missing.csv");
    assert_eq!(subfuse(&["fit", missing.to_str().unwrap()]).status.code(), Some(EXIT_DATA));
}

#[test]
fn bad_options_are_usage_errors() {
    assert_eq!(subfuse(&["fit"]).status.code(), Some(EXIT_USAGE));
    assert_eq!(subfuse(&["bench", "--reps", "0"]).status.code(), Some(EXIT_USAGE));
    assert_eq!(
        subfuse(&["tune", "x.csv", "--penalty", "scad", "--gamma", "1.5"]).status.code(),
        Some(EXIT_USAGE)
    );
    assert_eq!(subfuse(&["--workers", "0", "bench"]).status.code(), Some(EXIT_USAGE));
}

#[test]
fn standardizing_prescaled_data_changes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    // column already centered with unit population variance
    let x = [-1.0, 1.0, -1.0, 1.0, -1.0, 1.0];
    let y = [0.2, 1.9, 1.0, 3.8, 2.2, -0.4];
    let mut csv = String::from("y,x1\n");
    for (a, b) in y.iter().zip(&x) {
        csv.push_str(&format!("{a},{b}\n"));
    }
    let input = dir.path().join("scaled.csv");
    fs::write(&input, csv).unwrap();
    let run = |flag: &str| {
        let out = dir.path().join(format!("{flag}.jsonl"));
        let res = subfuse(&[
            "tune", input.to_str().unwrap(), "-o", out.to_str().unwrap(), flag,
            "--grid-n1", "4", "--grid-n2", "4",
        ]);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
        lines(&out).pop().unwrap()
    };
    let a = run("--standardize");
    let b = run("--no-standardize");
    for key in ["mu_hat", "beta_hat", "centers"] {
        for (u, v) in floats(&a[key]).iter().zip(floats(&b[key])) {
            assert!((u - v).abs() < 1e-9, "{key}: {u} vs {v}");
        }
    }
    assert_eq!(a["assignment"], b["assignment"]);
}

#[test]
fn simulate_then_tune_reproduces_in_process_replicate() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("sim.csv");
    let out = dir.path().join("tune.jsonl");
    let rep = "3";
    let res = subfuse(&[
        "simulate", "-o", data.to_str().unwrap(), "--n", "60", "--p", "4", "--q", "2",
        "--error", "t5", "--seed", "17", "--rep", rep,
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let res = subfuse(&[
        "tune", data.to_str().unwrap(), "-o", out.to_str().unwrap(), "--no-standardize",
        "--grid-n1", "6", "--grid-n2", "6",
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));

    let truth = &lines(&dir.path().join("sim.truth.json"))[0]["truth"];
    let sel = lines(&out).pop().unwrap();
    assert_eq!(sel["record"], "selected");
    let structure = SubgroupStructure {
        assignment: ints(&sel["assignment"]),
        centers: floats(&sel["centers"]),
        active_set: ints(&sel["active_set"]),
    };
    let from_cli = MetricsReport::evaluate(
        &structure,
        &floats(&sel["mu_hat"]),
        &floats(&sel["beta_hat"]),
        &floats(&truth["mu"]),
        &floats(&truth["beta"]),
        &ints(&truth["assignment"]),
    )
    .unwrap();

    let s = SimScenario::new(60, 4, 2, vec![-1.0, 1.0], ErrorKind::T5, 17);
    let mut method = TuneConfig::new(LossSpec::l1(), PenaltyKind::Scad);
    method.grid_n1 = 6;
    method.grid_n2 = 6;
    let in_process = run_rep(&s, 3, &method).unwrap();
    assert_eq!(from_cli, in_process);
}

#[test]
fn bench_output_is_worker_independent() {
    let dir = tempfile::tempdir().unwrap();
    let run = |workers: &str| {
        let out = dir.path().join(format!("bench{workers}.jsonl"));
        let res = subfuse(&[
            "--workers", workers, "bench", "--reps", "3", "--n", "40", "--p", "3", "--q", "2",
            "--error", "mixture", "--grid-n1", "4", "--grid-n2", "4", "-o", out.to_str().unwrap(),
        ]);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
        (fs::read(&out).unwrap(), res.stdout)
    };
    assert_eq!(run("1"), run("4"));
}
