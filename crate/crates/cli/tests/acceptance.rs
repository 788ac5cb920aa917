//! Acceptance run: one pass/fail line per criterion, nonzero exit on any
//! failure. Everything except the mutants goes through the binary.

use exactflow::catalog::Mutation;
use exactflow::verify::{certify, SampleRegion, Tolerances};
use serde_json::{json, Value};
use std::f64::consts::{E, PI};
use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

const PRESETS: [&str; 9] = [
    "ex_2_5",
    "ex_2_6",
    "ex_3_2",
    "ex_3_10",
    "ex_3_4_smooth",
    "ex_3_4_singular",
    "ex_5_1_const",
    "ex_5_1_blowup",
    "ex_6_1",
];

/// Grid sup of the non-conforming pair from an independent symbolic
/// computation on the default probe lattice.
const TWIN_ORACLE: f64 = 1.784972473720055;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn exactflow(args: &[&str]) -> Output {
    exactflow_env(args, None)
}

fn exactflow_env(args: &[&str], threads: Option<usize>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_exactflow"));
    cmd.args(args);
    if let Some(n) = threads {
        cmd.env("RAYON_NUM_THREADS", n.to_string());
    }
    cmd.output().expect("binary runs")
}

fn document(args: &[&str], want_code: i32) -> Result<Value, String> {
    let out = exactflow(args);
    let code = out.status.code().unwrap_or(-1);
    if code != want_code {
        return Err(format!(
            "`{}` exited {code}, expected {want_code}: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr).trim()
        ));
    }
    serde_json::from_slice(&out.stdout).map_err(|e| format!("`{}`: {e}", args.join(" ")))
}

fn number(doc: &Value, path: &[&str]) -> Result<f64, String> {
    let mut v = doc;
    for key in path {
        v = &v[*key];
    }
    v.as_f64().ok_or_else(|| format!("missing {}", path.join(".")))
}

/// Certifies `source` at 10^4 samples with the default tolerances and
/// returns the worst of the four metrics.
fn certify_passes(source: &str) -> Result<f64, String> {
    let rep = document(&["certify", source, "--samples", "10000"], 0)?;
    let tol = &rep["tolerances"];
    let defaults = [("residual", 1e-8), ("divergence", 1e-10), ("fd", 1e-5), ("vorticity", 1e-8)];
    for (k, v) in defaults {
        if tol[k].as_f64() != Some(v) {
            return Err(format!("{source}: tolerance {k} is {}", tol[k]));
        }
    }
    if rep["verdict"] != "pass" {
        return Err(format!("{source}: verdict {}", rep["verdict"]));
    }
    let momentum = number(&rep, &["momentum", "max_scaled", "max"])?;
    let divergence = number(&rep, &["divergence", "max_scaled", "max"])?;
    let fd = number(&rep, &["fd_discrepancy", "max", "max"])?;
    let vort = rep["vorticity_transport"]["max_scaled"]["max"].as_f64().unwrap_or(0.0);
    Ok((momentum / 1e-8).max(divergence / 1e-10).max(fd / 1e-5).max(vort / 1e-8))
}

fn criterion_1() -> Outcome {
    let mut worst = (0.0, "");
    for id in PRESETS {
        let ratio = certify_passes(id)?;
        if ratio > worst.0 {
            worst = (ratio, id);
        }
    }
    Ok(format!("9 presets at 1e4 samples; worst metric/tolerance {:.2e} ({})", worst.0, worst.1))
}

fn write_spec(dir: &Path, id: &str, name: &str, transforms: Value) -> Result<String, String> {
    let mut spec = document(&["export", id], 0)?;
    let chain = spec["transforms"].as_array_mut().ok_or("spec without transforms")?;
    chain.extend(transforms.as_array().unwrap().iter().cloned());
    let path = dir.join(format!("{id}_{name}.json"));
    std::fs::write(&path, spec.to_string()).map_err(|e| e.to_string())?;
    Ok(path.to_string_lossy().into_owned())
}

fn criterion_2() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let boost = json!({"kind": "boost", "velocity": [1.0, 2.0]});
    let rotation = json!({"kind": "rotation", "angle": 0.7});
    let rescale = json!({"kind": "rescale", "lambda": 2.0, "tau": 3.0});
    let cases = [
        ("boost", json!([boost])),
        ("rotation", json!([rotation])),
        ("rescale", json!([rescale])),
        ("chain", json!([boost, rotation, rescale])),
    ];
    let mut worst: f64 = 0.0;
    for id in ["ex_3_2", "ex_2_5"] {
        for (name, chain) in &cases {
            let path = write_spec(dir.path(), id, name, chain.clone())?;
            worst = worst.max(certify_passes(&path).map_err(|e| format!("{id} {name}: {e}"))?);
        }
    }
    Ok(format!("boost, rotation, rescale and their chain on ex_3_2, ex_2_5; worst metric/tolerance {worst:.2e}"))
}

fn criterion_3() -> Outcome {
    let doc = document(&["norm", "ex_3_2", "--q", "2", "--subtract-boost"], 0)?;
    let energy = number(&doc, &["energy", "value"])?;
    let err = (energy - PI / 6.0).abs();
    if err > 1e-6 {
        return Err(format!("ex_3_2 energy {energy} differs from pi/6 by {err:.2e}"));
    }
    let mut worst: f64 = 0.0;
    for (delta, outer) in [(1.0, E), (0.5, 10.0), (2.0, 100.0)] {
        for t in [0.0f64, 2.0] {
            let (d, r, ts) = (delta.to_string(), outer.to_string(), t.to_string());
            let doc = document(&["norm", "ex_2_5", "--q", "2", "--delta", &d, "--R", &r, "--t", &ts], 0)?;
            let value = number(&doc, &["value", "integral"])?;
            let ratio = value / (2.0 * PI * (t - 1.0).powi(2) * (outer / delta).ln());
            worst = worst.max((ratio - 1.0).abs());
        }
    }
    if worst > 1e-8 {
        return Err(format!("ex_2_5 annulus ratio off by {worst:.2e}"));
    }
    Ok(format!("|E - pi/6| = {err:.2e}; annulus law max |ratio - 1| = {worst:.2e}"))
}

fn criterion_4() -> Outcome {
    let mut parts = Vec::new();
    for (id, alpha) in [("ex_2_6", -1.0), ("ex_6_1", -0.5), ("ex_5_1_blowup", -1.0)] {
        let doc = document(&["blowup", id, "--norm", "sup", "--K", "10"], 0)?;
        let exponent = number(&doc, &["fit", "exponent"])?;
        let rms = number(&doc, &["fit", "rms_residual"])?;
        if (exponent - alpha).abs() > 0.01 || rms > 1e-3 {
            return Err(format!("{id}: exponent {exponent}, rms {rms:.2e}"));
        }
        parts.push(format!("{id} {exponent:.4} (rms {rms:.1e})"));
    }
    Ok(parts.join(", "))
}

fn criterion_5() -> Outcome {
    let plus = certify_passes("ex_6_1")?;
    let rep = document(&["certify", "ex_6_1", "--pressure-sign", "-1", "--samples", "10000"], 1)?;
    let params = rep["parameters"].as_array().ok_or("report without parameters")?;
    if !params.iter().any(|p| p[0] == "pressure_sign" && p[1] == "-1") {
        return Err("report does not name pressure_sign -1".into());
    }
    let minus = number(&rep, &["momentum", "max_scaled", "max"])?;
    if minus < 0.1 {
        return Err(format!("sign -1 residual only {minus:.2e}"));
    }
    Ok(format!("sign +1 passes (worst metric/tolerance {plus:.2e}); sign -1 residual {minus:.3}"))
}

fn probe(args: &[&str]) -> Result<(f64, String), String> {
    let mut full = vec!["probe"];
    full.extend_from_slice(args);
    let doc = document(&full, 0)?;
    Ok((number(&doc, &["result", "sup"])?, doc["verdict"].as_str().unwrap_or("").to_string()))
}

fn criterion_6() -> Outcome {
    let mut zero: f64 = 0.0;
    for (v1, v2) in [("0", "0"), ("1", "-2.5"), ("3", "5")] {
        let (sup, verdict) = probe(&["--mode", "affine", "--v1", v1, "--v2", v2, "--c2", "1"])?;
        if sup > 1e-10 || verdict != "constant solution" {
            return Err(format!("affine ({v1}, {v2}): {sup:.2e}, {verdict}"));
        }
        zero = zero.max(sup);
    }
    let mut witness = f64::INFINITY;
    for (v1, v2) in [("x", "x"), ("1/(1+x^2)", "x/(1+x^2)"), ("sin(x)", "cos(x)")] {
        let (sup, verdict) = probe(&["--mode", "affine", "--v1", v1, "--v2", v2, "--c1", "0", "--c2", "1"])?;
        if sup < 0.05 || verdict != "nonsolution" {
            return Err(format!("affine ({v1}, {v2}): {sup:.2e}, {verdict}"));
        }
        witness = witness.min(sup);
    }
    let conforming = [("1/(1+x^2)", "1/(1+x^2)", "0", "0", "1"), ("exp(-x^2) + 1", "2*exp(-x^2)", "1", "0", "2")];
    let mut twin_zero: f64 = 0.0;
    for (u1, u2, c1, c2, c3) in conforming {
        let (sup, verdict) =
            probe(&["--mode", "twinwave", "--u1", u1, "--u2", u2, "--c1", c1, "--c2", c2, "--c3", c3])?;
        if sup > 1e-8 || verdict != "conforming" {
            return Err(format!("twin ({u1}, {u2}): {sup:.2e}, {verdict}"));
        }
        twin_zero = twin_zero.max(sup);
    }
    let (twin_witness, verdict) =
        probe(&["--mode", "twinwave", "--u1", "1/(1+x^2)", "--u2", "1/(1+x^4)", "--c1", "1", "--c3", "1"])?;
    if twin_witness < 0.01 || verdict != "non-conforming" || (twin_witness / TWIN_ORACLE - 1.0).abs() > 1e-9 {
        return Err(format!("twin witness: {twin_witness:.2e}, {verdict}"));
    }
    Ok(format!(
        "affine constants <= {zero:.1e}, witnesses >= {witness:.3}; twin conforming <= {twin_zero:.1e}, witness {twin_witness:.3}"
    ))
}

fn criterion_7() -> Outcome {
    let mut parts = Vec::new();
    for m in Mutation::ALL {
        let sol = m.build().map_err(|e| format!("{}: {e}", m.name()))?;
        let region = SampleRegion::default_for(sol.dim(), sol.singular_set(), 0.9);
        let rep = certify(&sol, &region, &Tolerances::default()).map_err(|e| format!("{}: {e}", m.name()))?;
        let metric = rep.worst_metric();
        if rep.passed() || metric < 1e-3 {
            return Err(format!("{} not caught (worst metric {metric:.2e})", m.name()));
        }
        parts.push(format!("{} {metric:.2e}", m.name()));
    }
    Ok(format!("all caught: {}", parts.join(", ")))
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dump = dir.path().join("dump.csv");
    let dump = dump.to_str().unwrap();
    let commands: Vec<Vec<&str>> = vec![
        vec!["list"],
        vec!["list", "--format", "json"],
        vec!["certify", "ex_3_2", "--samples", "5000", "--seed", "7"],
        vec!["certify", "ex_6_1", "--samples", "5000", "--seed", "3", "--pressure-sign", "-1"],
        vec!["certify", "ex_3_4_singular", "--samples", "5000", "--seed", "1", "--until", "0.5"],
        vec!["norm", "ex_2_5", "--q", "2", "--delta", "0.5", "--R", "10", "--t", "2"],
        vec!["norm", "ex_3_2", "--q", "2", "--subtract-boost"],
        vec!["blowup", "ex_6_1", "--norm", "sup", "--K", "10"],
        vec!["blowup", "ex_2_6", "--norm", "lq", "--q", "2"],
        vec!["blowup", "ex_3_2"],
        vec!["probe", "--mode", "affine", "--v1", "sin(x)", "--v2", "cos(x)", "--c2", "1"],
        vec!["probe", "--mode", "twinwave", "--u1", "1/(1+x^2)", "--u2", "1/(1+x^4)", "--c3", "1"],
        vec!["grid-dump", "ex_3_2", "--box", "-3", "3", "-3", "3", "--nx", "40", "--nt", "3"],
        vec!["grid-dump", "ex_5_1_blowup", "--box", "-1", "1", "-1", "1", "-1", "1", "--nx", "8", "--out", dump],
        vec!["export", "ex_6_1"],
    ];
    for args in &commands {
        let mut outputs = Vec::new();
        for threads in [None, Some(1), Some(4)] {
            let out = exactflow_env(args, threads);
            let file =
                if args.contains(&"--out") { std::fs::read(dump).map_err(|e| e.to_string())? } else { Vec::new() };
            outputs.push((out.status.code(), out.stdout, file));
        }
        let mut explicit = args.clone();
        if args[0] == "certify" {
            for n in ["1", "4"] {
                explicit.extend(["--threads", n]);
                let out = exactflow(&explicit);
                outputs.push((out.status.code(), out.stdout, Vec::new()));
                explicit.truncate(args.len());
            }
        }
        if outputs
            .iter()
            .any(|o| o.1 != outputs[0].1 || o.0 != outputs[0].0 || (!o.2.is_empty() && o.2 != outputs[0].2))
        {
            return Err(format!("`{}` output differs between runs", args.join(" ")));
        }
    }
    Ok(format!("{} commands byte-identical across repeated runs with 1, 4 and default threads", commands.len()))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("certification suite", criterion_1),
        ("transform soundness", criterion_2),
        ("energy values", criterion_3),
        ("blow-up exponents", criterion_4),
        ("pressure-sign discrimination", criterion_5),
        ("affine and twin-wave probes", criterion_6),
        ("mutation sensitivity", criterion_7),
        ("determinism", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS [{secs:.1}s] {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL [{secs:.1}s] {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
