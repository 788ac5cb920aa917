use serde_json::Value;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exactflow")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("terminated by a signal")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stdout));
    })
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn list_shows_every_preset() {
    let out = run(&["list"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 10);
    for id in ["ex_2_5", "ex_2_6", "ex_3_2", "ex_3_10", "ex_3_4_smooth", "ex_3_4_singular", "ex_6_1"] {
        assert!(text.contains(id), "{id}");
    }
    let out = run(&["list", "--format", "json"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out).as_array().unwrap().len(), 9);
}

#[test]
fn bad_input_is_a_usage_error() {
    assert_eq!(code(&run(&["list", "--format", "xml"])), 2);
    assert_eq!(code(&run(&["certify", "missing.json"])), 2);
    assert_eq!(code(&run(&["norm", "ex_2_5", "--q", "2", "--delta", "0"])), 2);
    assert_eq!(code(&run(&["certify", "ex_3_2", "--pressure-sign", "-1"])), 2);
    assert_eq!(code(&run(&["certify", "ex_6_1", "--pressure-sign", "0.5"])), 2);
    assert_eq!(code(&run(&["certify", "ex_3_2", "--tol-fd", "-1"])), 2);
    assert_eq!(code(&run(&["probe", "--mode", "affine", "--v1", "x+", "--v2", "x"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
}

#[test]
fn malformed_spec_files_do_not_panic() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("garbage.json", "{not json"),
        ("unknown.json", r#"{"format_version": 1, "family": "ij_vortex", "params": {}, "colour": 1}"#),
        ("family.json", r#"{"format_version": 1, "family": "nope", "params": {}}"#),
        ("version.json", r#"{"format_version": 7, "family": "ij_vortex", "params": {"c": "1", "h": "0"}}"#),
        ("parse.json", r#"{"format_version": 1, "family": "ij_vortex", "params": {"c": "1", "h": "1/(1+r^"}}"#),
        (
            "deep.json",
            &format!(
                r#"{{"format_version": 1, "family": "ij_vortex", "params": {{"c": "{}1{}", "h": "0"}}}}"#,
                "(".repeat(400),
                ")".repeat(400)
            ),
        ),
    ];
    for (name, text) in cases {
        let path = dir.path().join(name);
        std::fs::write(&path, text).unwrap();
        let out = run(&["certify", path.to_str().unwrap(), "--samples", "10"]);
        assert_eq!(code(&out), 2, "{name}: {}", stderr(&out));
        assert!(stderr(&out).starts_with("error: "), "{name}");
    }
    let path = dir.path().join("parse.json");
    let out = run(&["certify", path.to_str().unwrap()]);
    assert!(stderr(&out).contains("position"), "{}", stderr(&out));
}

#[test]
fn certify_reports_pass_and_fail() {
    let out = run(&["certify", "ex_3_2", "--samples", "10000", "--seed", "7"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rep = json(&out);
    assert_eq!(rep["verdict"], "pass");
    assert_eq!(rep["region"]["samples"], 10000);
    assert_eq!(rep["region"]["seed"], 7);

    let out = run(&["certify", "ex_6_1", "--pressure-sign", "-1", "--samples", "2000"]);
    assert_eq!(code(&out), 1);
    let rep = json(&out);
    assert_eq!(rep["verdict"], "fail");
    assert!(rep["momentum"]["max_scaled"]["max"].as_f64().unwrap() >= 0.1);
    let params = rep["parameters"].as_array().unwrap();
    assert!(params.iter().any(|p| p[0] == "pressure_sign" && p[1] == "-1"), "{params:?}");
}

#[test]
fn norm_closed_forms() {
    let out = run(&["norm", "ex_2_5", "--q", "2", "--delta", "1", "--R", "2.718281828459045", "--t", "0"]);
    assert_eq!(code(&out), 0);
    let v = json(&out)["value"]["integral"].as_f64().unwrap();
    assert!((v - 2.0 * std::f64::consts::PI).abs() <= 1e-6, "{v}");

    let out = run(&["norm", "ex_3_2", "--q", "2", "--subtract-boost"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert_eq!(doc["energy"]["outcome"], "finite");
    let v = doc["energy"]["value"].as_f64().unwrap();
    assert!((v - std::f64::consts::PI / 6.0).abs() <= 1e-6, "{v}");
}

#[test]
fn blowup_fits_and_refusals() {
    for (id, alpha) in [("ex_2_6", -1.0), ("ex_6_1", -0.5)] {
        let out = run(&["blowup", id, "--norm", "sup", "--K", "10"]);
        assert_eq!(code(&out), 0, "{id}: {}", stderr(&out));
        let e = json(&out)["fit"]["exponent"].as_f64().unwrap();
        assert!((e - alpha).abs() <= 0.01, "{id}: {e}");
    }
    let out = run(&["blowup", "ex_3_2"]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["error"], "no blow-up time in singular set");
    assert!(stderr(&out).contains("no blow-up time in singular set"));
}

#[test]
fn probe_verdicts() {
    let out = run(&["probe", "--mode", "affine", "--v1", "x", "--v2", "x", "--c1", "0", "--c2", "1"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert!(doc["result"]["sup"].as_f64().unwrap() >= 0.05);
    assert_eq!(doc["verdict"], "nonsolution");

    let out = run(&["probe", "--mode", "affine", "--v1", "3", "--v2", "5", "--c2", "1"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert!(doc["result"]["sup"].as_f64().unwrap() <= 1e-10);
    assert_eq!(doc["verdict"], "constant solution");

    let out = run(&["probe", "--mode", "twinwave", "--u1", "1/(1+x^2)", "--u2", "1/(1+x^2)", "--c3", "1"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert!(doc["result"]["sup"].as_f64().unwrap() <= 1e-8);
    assert_eq!(doc["verdict"], "conforming");

    let out = run(&["probe", "--mode", "twinwave", "--u1", "1/(1+x^2)", "--u2", "1/(1+x^4)", "--c3", "1"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["verdict"], "non-conforming");
}

#[test]
fn grid_dump_layout() {
    let args = ["grid-dump", "ex_3_2", "--box", "-3", "3", "-3", "3", "--nx", "64", "--nt", "3"];
    let first = run(&args);
    assert_eq!(code(&first), 0, "{}", stderr(&first));
    let text = String::from_utf8(first.stdout.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("#format_version=1"));
    assert_eq!(lines.next(), Some("x1,x2,t,u1,u2,residual,divergence"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 64 * 64 * 3);
    assert!(rows.iter().all(|r| r.split(',').count() == 7));
    assert!(!text.contains("NA"));
    assert_eq!(run(&args).stdout, first.stdout);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dump.csv");
    let mut with_out = args.to_vec();
    with_out.extend(["--out", path.to_str().unwrap()]);
    assert_eq!(code(&run(&with_out)), 0);
    assert_eq!(std::fs::read(&path).unwrap(), first.stdout);
}

#[test]
fn grid_dump_marks_excluded_rows() {
    // the singular line x1 - x2 = t passes through the diagonal nodes at t = 0
    let out = run(&["grid-dump", "ex_3_4_singular", "--box", "-3", "3", "-3", "3", "--nx", "64", "--nt", "3"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let excluded: Vec<&str> = text.lines().filter(|r| r.ends_with(",NA,NA")).collect();
    assert!(excluded.len() >= 64, "{}", excluded.len());
    assert!(excluded.iter().all(|r| r.split(',').nth(2) == Some("0.0000000000000000e0")));
}

#[test]
fn exported_presets_certify_identically() {
    let dir = tempfile::tempdir().unwrap();
    let list = json(&run(&["list", "--format", "json"]));
    for entry in list.as_array().unwrap() {
        let id = entry["id"].as_str().unwrap();
        let path = dir.path().join(format!("{id}.json"));
        assert_eq!(code(&run(&["export", id, "--out", path.to_str().unwrap()])), 0);
        let from_preset = run(&["certify", id, "--samples", "300", "--seed", "5"]);
        let from_file = run(&["certify", path.to_str().unwrap(), "--samples", "300", "--seed", "5"]);
        assert_eq!(code(&from_preset), 0, "{id}");
        assert_eq!(from_file.stdout, from_preset.stdout, "{id}");
    }
}

#[test]
fn spec_overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = json(&run(&["export", "ex_3_2"]));
    spec["overrides"] = serde_json::json!({"region": {"samples": 50, "seed": 11}, "tolerances": {"fd": 1e-30}});
    let path = dir.path().join("strict.json");
    std::fs::write(&path, spec.to_string()).unwrap();
    let out = run(&["certify", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let rep = json(&out);
    assert_eq!(rep["region"]["samples"], 50);
    assert_eq!(rep["region"]["seed"], 11);
    assert_eq!(rep["checks"]["fd"], false);
    // flags win over the file
    let out = run(&["certify", path.to_str().unwrap(), "--tol-fd", "1e-5", "--samples", "40"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["region"]["samples"], 40);
}

#[test]
fn certify_until_limits_time() {
    let rep = json(&run(&["certify", "ex_2_6", "--samples", "100", "--until", "0.5"]));
    assert_eq!(rep["region"]["t_end"].as_f64().unwrap(), 0.5);
}

#[test]
fn thread_count_does_not_change_output() {
    let one = run(&["certify", "ex_3_10", "--samples", "3000", "--seed", "4", "--threads", "1"]);
    let four = run(&["certify", "ex_3_10", "--samples", "3000", "--seed", "4", "--threads", "4"]);
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, four.stdout);
}

fn keys(v: &Value) -> Vec<String> {
    let mut k: Vec<String> = v.as_object().unwrap().keys().cloned().collect();
    k.sort();
    k
}

#[test]
fn published_schema_matches_the_parser() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/spec-schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let props = &schema["properties"];
    let families: Vec<&str> = props["family"]["enum"].as_array().unwrap().iter().map(|f| f.as_str().unwrap()).collect();
    assert_eq!(families, exactflow::catalog::FAMILIES);

    // a spec that uses every key the schema allows
    let mut spec = json(&run(&["export", "ex_3_2"]));
    spec["overrides"] = serde_json::json!({
        "region": {"lower": [-2.0, -2.0], "upper": [2.0, 2.0], "t_start": 0.0, "t_end": 0.5,
                   "exclusion": 0.01, "samples": 20, "seed": 1},
        "tolerances": {"residual": 1e-8, "divergence": 1e-10, "fd": 1e-5, "vorticity": 1e-8}
    });
    assert_eq!(keys(&spec), keys(props));
    let over = &props["overrides"]["properties"];
    assert_eq!(keys(&spec["overrides"]), keys(over));
    assert_eq!(keys(&spec["overrides"]["region"]), keys(&over["region"]["properties"]));
    assert_eq!(keys(&spec["overrides"]["tolerances"]), keys(&over["tolerances"]["properties"]));
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("full.json");
    std::fs::write(&file, spec.to_string()).unwrap();
    assert_eq!(code(&run(&["certify", file.to_str().unwrap()])), 0);

    let kinds: Vec<Vec<String>> =
        props["transforms"]["items"]["oneOf"].as_array().unwrap().iter().map(|t| keys(&t["properties"])).collect();
    let chain = serde_json::json!([
        {"kind": "boost", "velocity": [0.5, 0.0]},
        {"kind": "rotation", "angle": 0.3},
        {"kind": "rescale", "lambda": 1.5, "tau": 2.0}
    ]);
    for (t, k) in chain.as_array().unwrap().iter().zip(&kinds) {
        assert_eq!(&keys(t), k);
    }
    spec["transforms"] = chain;
    std::fs::write(&file, spec.to_string()).unwrap();
    assert_eq!(code(&run(&["certify", file.to_str().unwrap()])), 0);
}
