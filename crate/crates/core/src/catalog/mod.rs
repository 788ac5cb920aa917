//! Solution families, symmetry transforms, and worked-example presets.

mod affine;
mod halfspace;
mod linear;
pub mod mutants;
mod presets;
mod transform;
mod twin;
mod vortex;

pub use affine::{affine_ansatz, AffineAnsatz};
pub use halfspace::{ns_halfspace_blowup, HalfspaceBlowup};
pub use linear::{linear3d, Linear3d};
pub use mutants::Mutation;
pub use presets::{preset, ParamValue, PresetId, PresetInfo, Recipe, RecipeParams, FAMILIES, LINEAR_PRESET_MATRIX};
pub use transform::{apply_transform, apply_transforms, TransformSpec};
pub use twin::{twin_profiles, twin_wave, TwinProfiles};
pub use vortex::{ij_vortex, IjVortex};

use crate::expr::{EvalError, Expr, ParamEnv, ParseError};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalogError {
    #[error("cannot parse `{name}`: {source}")]
    Parse {
        name: String,
        #[source]
        source: ParseError,
    },
    #[error("`{name}` refers to undefined parameter(s): {missing}")]
    Unresolved { name: String, missing: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("invalid parameter `{name}`: {reason}")]
    Invalid { name: String, reason: String },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("transform not applicable: {0}")]
    Transform(String),
}

impl CatalogError {
    pub(crate) fn invalid(name: &str, reason: impl Into<String>) -> Self {
        CatalogError::Invalid { name: name.to_string(), reason: reason.into() }
    }
}

/// A parsed profile together with its source text and parameter values.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub text: String,
    pub expr: Expr,
}

impl Profile {
    /// Parses `text` in `variable` and checks that every other identifier
    /// resolves in `env`.
    pub fn new(name: &str, text: &str, variable: &str, env: &ParamEnv) -> Result<Self, CatalogError> {
        let expr =
            Expr::parse(text, variable).map_err(|source| CatalogError::Parse { name: name.to_string(), source })?;
        let missing = expr.unresolved(env);
        if !missing.is_empty() {
            return Err(CatalogError::Unresolved { name: name.to_string(), missing: missing.join(", ") });
        }
        Ok(Self { text: text.to_string(), expr })
    }
}

pub(crate) fn check_finite(name: &str, v: f64) -> Result<f64, CatalogError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CatalogError::invalid(name, "must be finite"))
    }
}
