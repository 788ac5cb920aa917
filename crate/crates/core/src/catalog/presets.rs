//! Named presets, each stored as a [`Recipe`] so it can be exported and
//! rebuilt from a plain description.

use super::linear::{linear_metadata, validate_matrix, Linear3d};
use super::{
    affine_ansatz, apply_transforms, ij_vortex, linear3d, ns_halfspace_blowup, twin_profiles, twin_wave, CatalogError,
    Profile, TransformSpec,
};
use crate::expr::{Expr, ParamEnv};
use crate::field::{DecayEnvelope, Mat3, MeasureRegion, SingularPrimitive, SolutionPair};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Number(f64),
    Text(String),
    List(Vec<f64>),
    Matrix(Vec<Vec<f64>>),
}

impl ParamValue {
    fn kind(&self) -> &'static str {
        match self {
            ParamValue::Number(_) => "number",
            ParamValue::Text(_) => "expression string",
            ParamValue::List(_) => "list",
            ParamValue::Matrix(_) => "matrix",
        }
    }
}

pub type RecipeParams = BTreeMap<String, ParamValue>;

/// Family name, parameters and transform chain: everything needed to
/// rebuild a [`SolutionPair`].
///
/// Besides the family's own parameters, every family accepts
/// `blowup_time`, `decay_kappa` (expression in `t`), `decay_power`,
/// `decay_far_field`, `decay_bounded_core` (0 or 1), and one of
/// `rate_annulus` (`[inner, outer]`), `rate_ball` (radius) or `rate_point`.
/// Remaining numbers are expression parameters and must be referenced by
/// some expression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recipe {
    pub family: String,
    pub params: RecipeParams,
    #[serde(default)]
    pub transforms: Vec<TransformSpec>,
}

pub const FAMILIES: [&str; 6] =
    ["ij_vortex", "twin_wave", "twin_profiles", "linear3d", "ns_halfspace_blowup", "affine_ansatz"];

const DECORATION_KEYS: [&str; 8] = [
    "blowup_time",
    "decay_kappa",
    "decay_power",
    "decay_far_field",
    "decay_bounded_core",
    "rate_annulus",
    "rate_ball",
    "rate_point",
];

struct Params<'a> {
    map: &'a RecipeParams,
    used: BTreeSet<&'a str>,
}

impl<'a> Params<'a> {
    fn new(map: &'a RecipeParams) -> Self {
        Self { map, used: BTreeSet::new() }
    }

    fn get(&mut self, key: &'a str) -> Option<&'a ParamValue> {
        let v = self.map.get(key);
        if v.is_some() {
            self.used.insert(key);
        }
        v
    }

    fn wrong(key: &str, want: &str, got: &ParamValue) -> CatalogError {
        CatalogError::invalid(key, format!("expected {want}, got {}", got.kind()))
    }

    fn text(&mut self, key: &'a str) -> Result<&'a str, CatalogError> {
        match self.get(key) {
            Some(ParamValue::Text(s)) => Ok(s),
            Some(v) => Err(Self::wrong(key, "expression string", v)),
            None => Err(CatalogError::invalid(key, "missing")),
        }
    }

    fn number_opt(&mut self, key: &'a str) -> Result<Option<f64>, CatalogError> {
        match self.get(key) {
            Some(ParamValue::Number(v)) => Ok(Some(*v)),
            Some(v) => Err(Self::wrong(key, "number", v)),
            None => Ok(None),
        }
    }

    fn number(&mut self, key: &'a str, default: Option<f64>) -> Result<f64, CatalogError> {
        self.number_opt(key)?.or(default).ok_or_else(|| CatalogError::invalid(key, "missing"))
    }

    fn list_opt(&mut self, key: &'a str) -> Result<Option<Vec<f64>>, CatalogError> {
        match self.get(key) {
            Some(ParamValue::List(v)) => Ok(Some(v.clone())),
            Some(ParamValue::Matrix(m)) if m.is_empty() => Ok(Some(Vec::new())),
            Some(v) => Err(Self::wrong(key, "list", v)),
            None => Ok(None),
        }
    }

    fn vec3(&mut self, key: &'a str, default: [f64; 3]) -> Result<[f64; 3], CatalogError> {
        match self.list_opt(key)? {
            None => Ok(default),
            Some(v) if v.len() == 3 => Ok([v[0], v[1], v[2]]),
            Some(v) => Err(CatalogError::invalid(key, format!("expected 3 components, got {}", v.len()))),
        }
    }

    fn matrix(&mut self, key: &'a str) -> Result<Mat3, CatalogError> {
        match self.get(key) {
            Some(ParamValue::Matrix(m)) if m.len() == 3 && m.iter().all(|r| r.len() == 3) => {
                let mut out = [[0.0; 3]; 3];
                for i in 0..3 {
                    out[i].copy_from_slice(&m[i]);
                }
                Ok(out)
            }
            Some(v) => Err(Self::wrong(key, "3x3 matrix", v)),
            None => Err(CatalogError::invalid(key, "missing")),
        }
    }

    /// Numbers not otherwise consumed, as expression parameters.
    fn env(&self, skip: &[&str]) -> ParamEnv {
        self.map
            .iter()
            .filter(|(k, _)| !skip.contains(&k.as_str()) && !DECORATION_KEYS.contains(&k.as_str()))
            .filter_map(|(k, v)| match v {
                ParamValue::Number(x) => Some((k.clone(), *x)),
                _ => None,
            })
            .collect()
    }

    /// Marks numbers referenced by `texts` as used, then rejects anything
    /// left over.
    fn finish(mut self, texts: &[&str], variables: &[&str]) -> Result<(), CatalogError> {
        let mut texts = texts.to_vec();
        let mut variables = variables.to_vec();
        if let Some(ParamValue::Text(k)) = self.map.get("decay_kappa") {
            texts.push(k);
            variables.push("t");
        }
        for (text, var) in texts.iter().zip(&variables) {
            if let Ok(e) = Expr::parse(text, var) {
                for p in e.parameters() {
                    if let Some((k, _)) = self.map.get_key_value(p) {
                        self.used.insert(k.as_str());
                    }
                }
            }
        }
        for k in self.map.keys() {
            if !self.used.contains(k.as_str()) {
                return Err(CatalogError::invalid(k, "unknown or unused parameter"));
            }
        }
        Ok(())
    }
}

impl Recipe {
    pub fn new(family: &str) -> Self {
        Self { family: family.to_string(), params: RecipeParams::new(), transforms: Vec::new() }
    }

    pub fn num(mut self, key: &str, v: f64) -> Self {
        self.params.insert(key.to_string(), ParamValue::Number(v));
        self
    }

    pub fn text(mut self, key: &str, v: &str) -> Self {
        self.params.insert(key.to_string(), ParamValue::Text(v.to_string()));
        self
    }

    pub fn list(mut self, key: &str, v: &[f64]) -> Self {
        self.params.insert(key.to_string(), ParamValue::List(v.to_vec()));
        self
    }

    pub fn matrix(mut self, key: &str, m: &Mat3) -> Self {
        self.params.insert(key.to_string(), ParamValue::Matrix(m.iter().map(|r| r.to_vec()).collect()));
        self
    }

    pub fn transform(mut self, tr: TransformSpec) -> Self {
        self.transforms.push(tr);
        self
    }

    pub fn build(&self) -> Result<SolutionPair, CatalogError> {
        self.build_with(false)
    }

    /// Builds without validating the linear family's matrix. Only used to
    /// construct deliberately broken evaluators.
    pub(crate) fn build_unchecked(&self) -> Result<SolutionPair, CatalogError> {
        self.build_with(true)
    }

    fn build_with(&self, unchecked: bool) -> Result<SolutionPair, CatalogError> {
        let mut p = Params::new(&self.params);
        let (sol, texts, vars): (SolutionPair, Vec<&str>, Vec<&str>) = match self.family.as_str() {
            "ij_vortex" => {
                let (c, h) = (p.text("c")?, p.text("h")?);
                (ij_vortex(c, h, p.env(&[]))?, vec![c, h], vec!["t", "r"])
            }
            "twin_wave" | "twin_profiles" => {
                let c1 = p.number("c1", Some(0.0))?;
                let c2 = p.number("c2", Some(0.0))?;
                let c3 = p.number("c3", Some(1.0))?;
                let poles = p.list_opt("poles")?.unwrap_or_default();
                let env = p.env(&[]);
                if self.family == "twin_wave" {
                    let v = p.text("v")?;
                    (twin_wave(v, c1, c2, c3, env, &poles)?, vec![v], vec!["x"])
                } else {
                    let (u1, u2) = (p.text("u1")?, p.text("u2")?);
                    (twin_profiles(u1, u2, c1, c2, c3, env, &poles)?, vec![u1, u2], vec!["x", "x"])
                }
            }
            "linear3d" => {
                let f = p.text("f")?;
                let c = p.matrix("C")?;
                let sigma = p.number("sigma", Some(0.0))?;
                let env = p.env(&["sigma"]);
                let sol = if unchecked {
                    let prof = Profile::new("f", f, "t", &env)?;
                    let meta = linear_metadata(&prof, &c, &env);
                    SolutionPair::new(Arc::new(Linear3d::unchecked(prof, c, env)), sigma, Default::default(), meta)
                } else {
                    validate_matrix(&c)?;
                    linear3d(f, c, sigma, env)?
                };
                (sol, vec![f], vec!["t"])
            }
            "ns_halfspace_blowup" => {
                let t = p.number("T", Some(1.0))?;
                let sigma = p.number("sigma", Some(1.0))?;
                let c = p.number("c", Some(0.0))?;
                let x0 = p.vec3("x0", [0.0; 3])?;
                let sign = p.number("pressure_sign", Some(1.0))?;
                (ns_halfspace_blowup(t, sigma, c, x0, sign)?, vec![], vec![])
            }
            "affine_ansatz" => {
                let c1 = p.number("c1", Some(0.0))?;
                let c2 = p.number("c2", None)?;
                let env = p.env(&[]);
                let (v1, v2) = (p.text("v1")?, p.text("v2")?);
                (affine_ansatz(v1, v2, c1, c2, env)?, vec![v1, v2], vec!["x", "x"])
            }
            other => {
                return Err(CatalogError::invalid(
                    "family",
                    format!("unknown family `{other}` (known: {})", FAMILIES.join(", ")),
                ))
            }
        };
        let sol = decorate(sol, &mut p)?;
        p.finish(&texts, &vars)?;
        apply_transforms(&sol, &self.transforms)
    }
}

fn decorate<'a>(mut sol: SolutionPair, p: &mut Params<'a>) -> Result<SolutionPair, CatalogError> {
    if let Some(t) = p.number_opt("blowup_time")? {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CatalogError::invalid("blowup_time", "must be positive and finite"));
        }
        let mut set = sol.singular_set().clone();
        set.push(SingularPrimitive::BlowupTime { time: t });
        sol = SolutionPair::new(sol.field().clone(), sol.viscosity(), set, sol.metadata().clone());
    }
    let kappa = match p.get("decay_kappa") {
        Some(ParamValue::Text(s)) => Some(s.as_str()),
        Some(v) => return Err(Params::wrong("decay_kappa", "expression string", v)),
        None => None,
    };
    if let Some(kappa) = kappa {
        let env = p.env(&[]);
        let prof = Profile::new("decay_kappa", kappa, "t", &env)?;
        let power = p.number("decay_power", None)?;
        if !(power > 0.0 && power.is_finite()) {
            return Err(CatalogError::invalid("decay_power", "must be positive"));
        }
        let far = match p.list_opt("decay_far_field")? {
            None => [0.0; 3],
            Some(v) if v.len() == sol.dim() => {
                let mut f = [0.0; 3];
                f[..v.len()].copy_from_slice(&v);
                f
            }
            Some(_) => return Err(CatalogError::invalid("decay_far_field", "dimension mismatch")),
        };
        let bounded = p.number("decay_bounded_core", Some(0.0))? != 0.0;
        let expr = prof.expr;
        sol = sol.with_decay(DecayEnvelope::new(far, power, bounded, move |t| {
            expr.eval_real(t, &env).map(f64::abs).unwrap_or(f64::INFINITY)
        }));
    }
    if let Some(v) = p.list_opt("rate_annulus")? {
        if v.len() != 2 || !(0.0 < v[0] && v[0] < v[1]) {
            return Err(CatalogError::invalid("rate_annulus", "expected [inner, outer] with 0 < inner < outer"));
        }
        sol = sol.with_rate_region(MeasureRegion::Annulus { inner: v[0], outer: v[1] });
    }
    if let Some(r) = p.number_opt("rate_ball")? {
        if !(r > 0.0) {
            return Err(CatalogError::invalid("rate_ball", "radius must be positive"));
        }
        sol = sol.with_rate_region(MeasureRegion::Ball { radius: r });
    }
    if p.map.contains_key("rate_point") {
        let x = p.vec3("rate_point", [0.0; 3])?;
        sol = sol.with_rate_region(MeasureRegion::Point { x });
    }
    Ok(sol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetId {
    Ex2_5,
    Ex2_6,
    Ex3_2,
    Ex3_10,
    Ex3_4Smooth,
    Ex3_4Singular,
    Ex5_1Const,
    Ex5_1Blowup,
    Ex6_1,
}

pub const LINEAR_PRESET_MATRIX: Mat3 = [[1.0, 0.5, 0.0], [0.5, 1.0, 0.25], [0.0, 0.25, -2.0]];

/// Row of the preset table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PresetInfo {
    pub id: &'static str,
    pub family: &'static str,
    pub description: &'static str,
    pub singular_set: String,
}

impl PresetId {
    pub const ALL: [PresetId; 9] = [
        PresetId::Ex2_5,
        PresetId::Ex2_6,
        PresetId::Ex3_2,
        PresetId::Ex3_10,
        PresetId::Ex3_4Smooth,
        PresetId::Ex3_4Singular,
        PresetId::Ex5_1Const,
        PresetId::Ex5_1Blowup,
        PresetId::Ex6_1,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PresetId::Ex2_5 => "ex_2_5",
            PresetId::Ex2_6 => "ex_2_6",
            PresetId::Ex3_2 => "ex_3_2",
            PresetId::Ex3_10 => "ex_3_10",
            PresetId::Ex3_4Smooth => "ex_3_4_smooth",
            PresetId::Ex3_4Singular => "ex_3_4_singular",
            PresetId::Ex5_1Const => "ex_5_1_const",
            PresetId::Ex5_1Blowup => "ex_5_1_blowup",
            PresetId::Ex6_1 => "ex_6_1",
        }
    }

    pub fn family(self) -> &'static str {
        match self {
            PresetId::Ex2_5 | PresetId::Ex2_6 | PresetId::Ex3_2 => "ij_vortex",
            PresetId::Ex3_10 | PresetId::Ex3_4Smooth | PresetId::Ex3_4Singular => "twin_wave",
            PresetId::Ex5_1Const | PresetId::Ex5_1Blowup => "linear3d",
            PresetId::Ex6_1 => "ns_halfspace_blowup",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            PresetId::Ex2_5 => "vortex c=t, h=-1/r^2; finite energy away from the core only at t=1",
            PresetId::Ex2_6 => "vortex c=1/(T-t), h=-1/r^2; singular at r=0, blows up at t=T",
            PresetId::Ex3_2 => "boosted bump vortex, C=(1,1); global smooth, u-C has finite energy",
            PresetId::Ex3_10 => "twin wave v=1/(xi+T(c1-c2))^2; u1-c1=u2-c2 at t=T",
            PresetId::Ex3_4Smooth => "twin wave v=1/(1+xi^2)^2-c1; global smooth bump",
            PresetId::Ex3_4Singular => "twin wave v=1/xi^2; singular on a moving line",
            PresetId::Ex5_1Const => "linear 3D flow u=Cx with constant f=1",
            PresetId::Ex5_1Blowup => "linear 3D flow u=Cx/(T-t); blows up with f",
            PresetId::Ex6_1 => "viscous half-space flow; boundary speed 3/sqrt(T-t)",
        }
    }

    pub fn recipe(self) -> Recipe {
        match self {
            PresetId::Ex2_5 => Recipe::new("ij_vortex")
                .text("c", "t")
                .text("h", "-1/r^2")
                .text("decay_kappa", "t - 1")
                .num("decay_power", 1.0),
            PresetId::Ex2_6 => Recipe::new("ij_vortex")
                .text("c", "1/(T-t)")
                .text("h", "-1/r^2")
                .num("T", 1.0)
                .num("blowup_time", 1.0)
                .text("decay_kappa", "1/(T-t) - 1")
                .num("decay_power", 1.0)
                .list("rate_annulus", &[1.0, 2.0]),
            PresetId::Ex3_2 => Recipe::new("ij_vortex")
                .text("c", "1")
                .text("h", "-1/r^2 + 1/(1+r^2)^2")
                .text("decay_kappa", "1")
                .num("decay_power", 3.0)
                .num("decay_bounded_core", 1.0)
                .transform(TransformSpec::Boost { velocity: vec![1.0, 1.0] }),
            PresetId::Ex3_10 => Recipe::new("twin_wave")
                .text("v", "1/(x + T*(c1-c2))^2")
                .num("c1", 1.0)
                .num("c2", 0.0)
                .num("c3", 1.0)
                .num("T", 1.0)
                .list("poles", &[-1.0]),
            PresetId::Ex3_4Smooth => {
                Recipe::new("twin_wave").text("v", "1/(1+x^2)^2 - c1").num("c1", 1.0).num("c2", 0.0).num("c3", 1.0)
            }
            PresetId::Ex3_4Singular => Recipe::new("twin_wave")
                .text("v", "1/x^2")
                .num("c1", 1.0)
                .num("c2", 0.0)
                .num("c3", 1.0)
                .list("poles", &[0.0]),
            PresetId::Ex5_1Const => {
                Recipe::new("linear3d").text("f", "1").matrix("C", &LINEAR_PRESET_MATRIX).num("rate_ball", 1.0)
            }
            PresetId::Ex5_1Blowup => Recipe::new("linear3d")
                .text("f", "1/(T-t)")
                .num("T", 1.0)
                .matrix("C", &LINEAR_PRESET_MATRIX)
                .num("blowup_time", 1.0)
                .num("rate_ball", 1.0),
            PresetId::Ex6_1 => Recipe::new("ns_halfspace_blowup")
                .num("T", 1.0)
                .num("sigma", 1.0)
                .num("c", 0.0)
                .list("x0", &[0.0, 0.0, 0.0])
                .num("pressure_sign", 1.0),
        }
    }

    pub fn info(self) -> PresetInfo {
        let singular_set = preset(self).map(|s| s.singular_set().describe()).unwrap_or_else(|e| e.to_string());
        PresetInfo { id: self.as_str(), family: self.family(), description: self.description(), singular_set }
    }
}

impl fmt::Display for PresetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PresetId {
    type Err = CatalogError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PresetId::ALL.into_iter().find(|p| p.as_str() == s).ok_or_else(|| CatalogError::UnknownPreset(s.to_string()))
    }
}

pub fn preset(id: PresetId) -> Result<SolutionPair, CatalogError> {
    Ok(id.recipe().build()?.with_id(id.as_str()))
}
