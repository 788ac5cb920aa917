//! Solution-spec files: a family, its parameters, a transform chain and
//! optional sampling or tolerance overrides.

use crate::CliError;
use exactflow::catalog::{preset, ParamValue, PresetId, Recipe, RecipeParams, TransformSpec};
use exactflow::field::SolutionPair;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const SPEC_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exclusion: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub divergence: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fd: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vorticity: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<RegionOverrides>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceOverrides>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub format_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub family: String,
    pub params: RecipeParams,
    #[serde(default)]
    pub transforms: Vec<TransformSpec>,
    #[serde(default)]
    pub overrides: Overrides,
}

impl SpecFile {
    pub fn from_preset(id: PresetId) -> Self {
        let r = id.recipe();
        SpecFile {
            format_version: SPEC_VERSION,
            id: Some(id.as_str().to_string()),
            family: r.family,
            params: r.params,
            transforms: r.transforms,
            overrides: Overrides::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let spec: SpecFile =
            serde_json::from_str(text).map_err(|e| CliError::Usage(format!("invalid spec file: {e}")))?;
        if spec.format_version != SPEC_VERSION {
            return Err(CliError::Usage(format!(
                "unsupported format_version {} (expected {SPEC_VERSION})",
                spec.format_version
            )));
        }
        Ok(spec)
    }

    pub fn recipe(&self) -> Recipe {
        Recipe { family: self.family.clone(), params: self.params.clone(), transforms: self.transforms.clone() }
    }

    pub fn build(&self) -> Result<SolutionPair, CliError> {
        let sol = self.recipe().build().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(match &self.id {
            Some(id) => sol.with_id(id),
            None => sol,
        })
    }

    /// Replaces the half-space family's pressure sign.
    pub fn set_pressure_sign(&mut self, sign: f64) -> Result<(), CliError> {
        if self.family != "ns_halfspace_blowup" {
            return Err(CliError::Usage(format!(
                "--pressure-sign applies to ns_halfspace_blowup, not {}",
                self.family
            )));
        }
        if sign != 1.0 && sign != -1.0 {
            return Err(CliError::Usage(format!("--pressure-sign must be 1 or -1, got {sign}")));
        }
        self.params.insert("pressure_sign".into(), ParamValue::Number(sign));
        Ok(())
    }
}

/// A preset id, or the path of a spec file.
pub fn load(source: &str) -> Result<SpecFile, CliError> {
    if let Ok(id) = source.parse::<PresetId>() {
        return Ok(SpecFile::from_preset(id));
    }
    let path = Path::new(source);
    if !path.is_file() {
        return Err(CliError::Usage(format!("`{source}` is neither a preset id nor a readable spec file")));
    }
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {source}: {e}")))?;
    SpecFile::parse(&text)
}

/// The preset itself when `source` names one, so ids match `list`.
pub fn solution(spec: &SpecFile) -> Result<SolutionPair, CliError> {
    if let (Some(id), true) = (&spec.id, spec.overrides == Overrides::default()) {
        if let Ok(pid) = id.parse::<PresetId>() {
            if SpecFile::from_preset(pid) == *spec {
                return preset(pid).map_err(|e| CliError::Usage(e.to_string()));
            }
        }
    }
    spec.build()
}
