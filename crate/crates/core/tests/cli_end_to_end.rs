use std::process::{Command, Output};

use serde_json::Value;

fn pqdeform(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pqdeform"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

fn schema() -> Value {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/schema/report.schema.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Checks required keys and the closed key sets the schema declares.
fn conforms(report: &Value) {
    let schema = schema();
    let required = |v: &Value| -> Vec<String> {
        v["required"]
            .as_array()
            .unwrap()
            .iter()
            .map(|s| s.as_str().unwrap().to_string())
            .collect()
    };
    for key in required(&schema) {
        assert!(report.get(&key).is_some(), "missing {key}");
    }
    let top: Vec<&String> = schema["properties"].as_object().unwrap().keys().collect();
    for key in report.as_object().unwrap().keys() {
        assert!(top.contains(&key), "unexpected key {key}");
    }
    for key in required(&schema["properties"]["config"]) {
        assert!(report["config"].get(&key).is_some(), "config missing {key}");
    }
    let item = &schema["properties"]["results"]["items"];
    let allowed: Vec<&String> = item["properties"].as_object().unwrap().keys().collect();
    for r in report["results"].as_array().unwrap() {
        for key in required(item) {
            assert!(r.get(&key).is_some(), "result missing {key}");
        }
        for key in r.as_object().unwrap().keys() {
            assert!(allowed.contains(&key), "unexpected result key {key}");
        }
        assert!(r.get("maxResidual").is_some() || r.get("value").is_some());
    }
}

fn without_timestamp(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timestamp");
    v
}

#[test]
fn verify_passes_and_matches_schema() {
    let out = pqdeform(&[
        "verify",
        "--suite",
        "oscillator",
        "--modes",
        "3",
        "--p",
        "0.7",
        "--theta",
        "0.4488",
        "--cutoff",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    conforms(&r);
    assert_eq!(r["overallPass"], Value::Bool(true));
    assert!(r["results"].as_array().unwrap().len() > 10);
}

#[test]
fn reports_are_deterministic_apart_from_timestamp() {
    let args = [
        "verify", "--suite", "gl", "--modes", "3", "--cutoff", "4", "--p", "1.5", "--theta", "0.4",
    ];
    let a = without_timestamp(report(&pqdeform(&args)));
    let b = without_timestamp(report(&pqdeform(&args)));
    assert_eq!(a, b);
}

#[test]
fn exact_verify_reports_zero_residuals() {
    let out = pqdeform(&[
        "verify",
        "--suite",
        "subhamiltonian",
        "--modes",
        "2",
        "--cutoff",
        "4",
        "--p",
        "0.3",
        "--exact",
    ]);
    assert_eq!(out.status.code(), Some(0));
    for r in report(&out)["results"].as_array().unwrap() {
        assert_eq!(r["maxResidual"].as_f64(), Some(0.0), "{r}");
    }
}

#[test]
fn divergent_bilateral_sum_exits_three() {
    let out = pqdeform(&[
        "eval", "--fn", "psi01", "--a", "-2", "--p", "0.5", "--x", "-0.1",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let r = report(&out);
    conforms(&r);
    assert!(r["error"].as_str().unwrap().contains("diverges"));
    assert_eq!(r["overallPass"], Value::Bool(false));
}

#[test]
fn positive_energy_below_nu_exits_three() {
    let out = pqdeform(&["positive", "--p", "0.5", "--lambda", "1", "--r", "1.5"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn narrow_window_fails_verification() {
    let out = pqdeform(&[
        "positive", "--p", "0.5", "--lambda", "1", "--r", "20", "--window", "3",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    let norm = r["results"]
        .as_array()
        .unwrap()
        .iter()
        .find(|x| x["label"] == "positive.normalization")
        .unwrap();
    assert_eq!(norm["pass"], Value::Bool(false));
}

#[test]
fn bad_arguments_exit_two() {
    assert_eq!(
        pqdeform(&["verify", "--modes", "three"]).status.code(),
        Some(2)
    );
    assert_eq!(
        pqdeform(&["verify", "--suite", "lie"]).status.code(),
        Some(2)
    );
    assert_eq!(pqdeform(&["qsym"]).status.code(), Some(2));
    assert_eq!(pqdeform(&[]).status.code(), Some(2));
}

#[test]
fn qsym_state_and_resolution() {
    let out = pqdeform(&["qsym", "--word", "1,2,1,3", "--p", "0.7", "--theta", "0.3"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    conforms(&r);
    let state = &r["results"][0];
    assert_eq!(state["label"], "qsym.state");
    assert_eq!(state["value"].as_array().unwrap().len(), 12);

    let out = pqdeform(&["qsym", "--resolve", "--nmax", "4", "--alphabet", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let sat = r["results"]
        .as_array()
        .unwrap()
        .iter()
        .find(|x| x["label"] == "resolve.satisfying")
        .unwrap();
    assert_eq!(sat["value"].as_array().unwrap().len(), 1);
}

#[test]
fn coherent_text_output_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("coherent.txt");
    let out = pqdeform(&[
        "coherent",
        "--modes",
        "2",
        "--cutoff",
        "10",
        "--r",
        "0.2,0.3",
        "--p",
        "0.7",
        "--theta",
        "0.5",
        "--format",
        "text",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("PASS coherent.eigen[2]"));
    assert!(text.ends_with("overall: PASS\n"));
}

#[test]
fn config_file_drives_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.conf");
    std::fs::write(
        &path,
        "# classical check\nsuite = classical\nmodes = 2\ncutoff = 3\nexact = true\n",
    )
    .unwrap();
    let out = pqdeform(&["verify", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["config"]["suite"], "classical");
    assert_eq!(r["config"]["exact"], Value::Bool(true));
}
