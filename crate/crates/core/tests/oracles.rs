use exactflow::analysis::{
    affine_probe, annulus_lq_norm, blowup_exponent_fit, l2_energy_difference, twin_wave_form_check, EnergyOutcome,
    NormSpec, ProbeGrid, RateFit,
};
use exactflow::catalog::{preset, Mutation, PresetId};
use exactflow::verify::{certify, sample_points, SampleRegion, Tolerances};
use serde_json::Value;
use std::f64::consts::{E, PI};

fn fixture(name: &str) -> Value {
    let path = format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn sampling_matches_reference_generator() {
    let golden = fixture("sample_golden.json");
    let region = &golden["region"];
    let lower = floats(&region["lower"]);
    let upper = floats(&region["upper"]);
    let want: Vec<Vec<f64>> = golden["points"].as_array().unwrap().iter().map(floats).collect();
    let region = SampleRegion {
        lower,
        upper,
        t_start: region["t_start"].as_f64().unwrap(),
        t_end: region["t_end"].as_f64().unwrap(),
        exclusion: 0.0,
        samples: want.len(),
        seed: golden["seed"].as_u64().unwrap(),
    };
    let sol = preset(PresetId::Ex3_4Smooth).unwrap();
    let got = sample_points(&region, sol.singular_set()).unwrap();
    for (p, w) in got.iter().zip(&want) {
        assert_eq!(&p.to_vec(), w);
    }
}

fn grid_from(v: &Value) -> ProbeGrid {
    let l = floats(&v["lower"]);
    let u = floats(&v["upper"]);
    ProbeGrid {
        lower: [l[0], l[1]],
        upper: [u[0], u[1]],
        t_start: v["t_start"].as_f64().unwrap(),
        t_end: v["t_end"].as_f64().unwrap(),
        n: v["n"].as_u64().unwrap() as usize,
        nt: v["nt"].as_u64().unwrap() as usize,
    }
}

#[test]
fn affine_witnesses_match_symbolic_residuals() {
    let fx = fixture("probe_witnesses.json");
    let grid = grid_from(&fx["grid"]);
    let threshold = fx["affine_threshold"].as_f64().unwrap();
    for w in fx["affine"].as_array().unwrap() {
        let (v1, v2) = (w["v1"].as_str().unwrap(), w["v2"].as_str().unwrap());
        let r = affine_probe(v1, v2, w["c1"].as_f64().unwrap(), w["c2"].as_f64().unwrap(), &grid).unwrap();
        let oracle = w["oracle_sup"].as_f64().unwrap();
        assert!((r.sup / oracle - 1.0).abs() <= 1e-9, "{v1}, {v2}: {} vs {oracle}", r.sup);
        assert!(r.sup >= threshold);
    }
}

#[test]
fn twin_witness_matches_symbolic_residual() {
    let fx = fixture("probe_witnesses.json");
    let grid = grid_from(&fx["grid"]);
    let threshold = fx["twin_threshold"].as_f64().unwrap();
    for w in fx["twin_nonconforming"].as_array().unwrap() {
        let c = |k: &str| w[k].as_f64().unwrap();
        let (u1, u2) = (w["u1"].as_str().unwrap(), w["u2"].as_str().unwrap());
        let r = twin_wave_form_check(u1, u2, c("c1"), c("c2"), c("c3"), &grid).unwrap();
        let oracle = c("oracle_sup");
        assert!((r.sup / oracle - 1.0).abs() <= 1e-9, "{u1}, {u2}: {} vs {oracle}", r.sup);
        assert!(r.sup >= threshold);
    }
}

#[test]
fn conforming_profiles_vanish() {
    let grid = ProbeGrid::default();
    for (v1, v2) in [("0", "0"), ("1", "-2.5"), ("3", "5")] {
        assert!(affine_probe(v1, v2, 0.0, 1.0, &grid).unwrap().sup <= 1e-10);
    }
    for (u1, u2, c1, c2, c3) in
        [("1/(1+x^2)", "1/(1+x^2)", 0.0, 0.0, 1.0), ("exp(-x^2) + 1", "2*exp(-x^2)", 1.0, 0.0, 2.0)]
    {
        assert!(twin_wave_form_check(u1, u2, c1, c2, c3, &grid).unwrap().sup <= 1e-8);
    }
}

#[test]
fn bump_vortex_energy_closed_form() {
    // u - C = (x2, -x1)/(1 + r^2)^2 about the moving core; 2 pi int r^3/(1+r^2)^4 dr
    let sol = preset(PresetId::Ex3_2).unwrap();
    for t in [0.0, 0.3, 1.7] {
        match l2_energy_difference(&sol, &[1.0, 1.0], t).unwrap() {
            EnergyOutcome::Finite(r) => assert!((r.value - PI / 6.0).abs() <= 1e-6, "{r:?}"),
            other => panic!("{other:?}"),
        }
    }
}

#[test]
fn logarithmic_annulus_law() {
    let sol = preset(PresetId::Ex2_5).unwrap();
    for (delta, outer) in [(1.0, E), (0.5, 10.0), (2.0, 100.0)] {
        for t in [0.0, 2.0] {
            let v = annulus_lq_norm(&sol, &NormSpec::annulus(2.0, delta, outer, t)).unwrap().integral;
            let law = 2.0 * PI * (t - 1.0f64).powi(2) * (outer / delta).ln();
            assert!((v / law - 1.0).abs() <= 1e-8, "({delta}, {outer}) at {t}: {v} vs {law}");
        }
    }
}

#[test]
fn blowup_exponents() {
    for (id, alpha) in [(PresetId::Ex2_6, -1.0), (PresetId::Ex6_1, -0.5), (PresetId::Ex5_1Blowup, -1.0)] {
        let fit = blowup_exponent_fit(&preset(id).unwrap(), &RateFit::default()).unwrap();
        assert!((fit.exponent - alpha).abs() <= 0.01, "{id}: {fit:?}");
        assert!(fit.rms_residual <= 1e-3, "{id}: {fit:?}");
    }
}

#[test]
fn mutations_are_caught() {
    for m in Mutation::ALL {
        let sol = m.build().unwrap();
        let region = SampleRegion::default_for(sol.dim(), sol.singular_set(), 0.9).with_samples(2000).with_seed(3);
        let rep = certify(&sol, &region, &Tolerances::default()).unwrap();
        assert!(!rep.passed(), "{}", m.name());
        assert!(rep.worst_metric() >= 1e-3, "{}: {}", m.name(), rep.worst_metric());
    }
}

#[test]
fn pressure_sign_is_decided_by_the_residual() {
    let good = preset(PresetId::Ex6_1).unwrap();
    let bad = PresetId::Ex6_1.recipe().num("pressure_sign", -1.0).build().unwrap();
    let region = SampleRegion::default_for(3, good.singular_set(), 0.9).with_samples(2000).with_seed(9);
    assert!(certify(&good, &region, &Tolerances::default()).unwrap().passed());
    let rep = certify(&bad, &region, &Tolerances::default()).unwrap();
    assert!(rep.momentum.max_scaled.max >= 0.1, "{}", rep.momentum.max_scaled.max);
}
