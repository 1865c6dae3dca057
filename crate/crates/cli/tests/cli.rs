use std::io::Write;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use shapemix::density::models;
use shapemix::sample_mixture;

fn shapemix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shapemix"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

fn write_csv(dir: &Path, name: &str, header: &str, values: &[f64]) -> String {
    let path = dir.join(name);
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "{header}").unwrap();
    for v in values {
        writeln!(f, "{v}").unwrap();
    }
    path.to_str().unwrap().to_string()
}

fn normal_sample(n: usize, seed: u64) -> Vec<f64> {
    sample_mixture(&models::by_name("normal").unwrap(), n, seed)
        .unwrap()
        .values()
        .to_vec()
}

#[test]
fn fit_symmetric_on_symmetric_data() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_csv(dir.path(), "n.csv", "x", &normal_sample(1000, 3));
    let doc = json(&shapemix(&["fit", "--shape", "symmetric", "--center", "0", &data]));
    let pi0 = doc["pi0"].as_f64().unwrap();
    assert!(pi0 >= 0.95, "pi0 {pi0}");
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["shape"], "symmetric");
    assert_eq!(doc["center"], 0.0);
    let (l, u) = (doc["pi_l"].as_f64().unwrap(), doc["pi_u"].as_f64().unwrap());
    assert!(l <= pi0 && pi0 <= u);
}

#[test]
fn monotone_rejects_negative_data() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_csv(dir.path(), "neg.csv", "x", &[0.5, 1.25, -0.75, 2.0]);
    let out = shapemix(&["fit", "--shape", "monotone", &data]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("-0.75"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn logconcave_schema() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_csv(dir.path(), "n.csv", "x", &normal_sample(400, 11));
    let dump = dir.path().join("problem.csv");
    let doc = json(&shapemix(&[
        "fit",
        "--shape",
        "logconcave",
        "--bandwidth",
        "0.25",
        "--bootstrap",
        "100",
        "--dump-problem",
        dump.to_str().unwrap(),
        &data,
    ]));
    let pi0 = doc["pi0"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&pi0), "{pi0}");
    assert_eq!(doc["bandwidth"], 0.25);
    let m = doc["grid"].as_array().unwrap().len();
    for key in ["f_hat", "h0", "g0", "h_l", "h_u"] {
        assert_eq!(doc[key].as_array().unwrap().len(), m, "{key}");
    }
    assert_eq!(doc["solver"]["converged"], true);
    let text = std::fs::read_to_string(&dump).unwrap();
    assert!(text.starts_with("t,u,v_star\n"));
    assert!(text.lines().count() > 10);
}

#[test]
fn curves_as_csv() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_csv(dir.path(), "n.csv", "x", &normal_sample(300, 5));
    let out = shapemix(&[
        "fit", "--shape", "symmetric", "--center", "0", "--no-band", "--grid-points", "101",
        "--output", "csv", &data,
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,f_hat,h0,g0,h_l,h_u"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 101);
    // no band: the band columns are empty
    assert!(rows.iter().all(|r| r.ends_with(",,")));
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "x\n1\n2\nthree\n").unwrap();
    let out = shapemix(&["fit", "--shape", "logconcave", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":4"));

    let missing = dir.path().join("missing.csv");
    let out = shapemix(&["fit", "--shape", "logconcave", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let out = shapemix(&["true-pi0", "--model", "no-such-model", "--shape", "logconcave"]);
    assert_eq!(out.status.code(), Some(2));

    let spec = dir.path().join("bad.json");
    std::fs::write(&spec, r#"{"components":[{"family":"normal","mu":0,"sigma":1,"weight":0.4}]}"#).unwrap();
    let out = shapemix(&["true-pi0", "--model", spec.to_str().unwrap(), "--shape", "logconcave"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn true_pi0_reference_values() {
    let doc = json(&shapemix(&["true-pi0", "--model", "s1", "--shape", "symmetric", "--center", "0"]));
    assert!((doc["pi0"].as_f64().unwrap() - 0.850).abs() <= 0.002, "{doc}");
    assert_eq!(doc["shape"], "symmetric");
    assert!(doc["resolution"].as_u64().unwrap() > 0);

    let doc = json(&shapemix(&["true-pi0", "--model", "m2", "--shape", "monotone"]));
    assert!((doc["pi0"].as_f64().unwrap() - 0.993).abs() <= 0.002, "{doc}");

    let dir = tempfile::tempdir().unwrap();
    let gauss = dir.path().join("gauss.json");
    std::fs::write(&gauss, r#"{"components":[{"family":"normal","mu":1,"sigma":2,"weight":1}]}"#).unwrap();
    let doc = json(&shapemix(&["true-pi0", "--model", gauss.to_str().unwrap(), "--shape", "logconcave"]));
    assert!((doc["pi0"].as_f64().unwrap() - 1.0).abs() <= 0.005, "{doc}");
}

#[test]
fn simulate_single_replicate_has_zero_sd() {
    let doc = json(&shapemix(&[
        "simulate", "--model", "s1", "--shape", "symmetric", "--center", "0", "--n", "300",
        "--reps", "1", "--no-intervals",
    ]));
    assert_eq!(doc["reps"], 1);
    assert_eq!(doc["sd"], 0.0);
}

#[test]
fn simulate_is_deterministic() {
    let args = [
        "simulate", "--model", "l1", "--shape", "logconcave", "--n", "300", "--reps", "2",
        "--bootstrap", "100", "--seed", "9",
    ];
    let a = shapemix(&args);
    let b = shapemix(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    // the text table goes to stderr, never into the JSON
    assert!(String::from_utf8_lossy(&a.stderr).contains("coverage"));
}

#[test]
fn simulate_s1_mean() {
    let doc = json(&shapemix(&[
        "simulate", "--model", "s1", "--shape", "symmetric", "--center", "0", "--n", "1000",
        "--reps", "100", "--seed", "7", "--no-intervals",
    ]));
    let mean = doc["mean"].as_f64().unwrap();
    assert!((mean - 0.835).abs() <= 0.01, "mean {mean}");
}
