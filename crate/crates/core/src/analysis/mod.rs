//! Norms, energy, blow-up rates and falsification probes.

pub mod norms;
pub mod probe;
pub mod quad;
pub mod rate;

use crate::catalog::CatalogError;
use crate::field::FieldError;
use quad::QuadError;
use thiserror::Error;

pub use norms::{
    annulus_lq_norm, l2_energy_difference, DivergenceLaw, EnergyDiagnosis, EnergyOutcome, EnergyReport, NormDomain,
    NormSpec, NormValue, Shell, ENERGY_R_MAX,
};
pub use probe::{affine_probe, twin_wave_form_check, ProbeGrid, ProbeResult};
pub use rate::{blowup_exponent_fit, sup_norm, RateFit, RateFitResult, RateMeasure};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("domain touches the singular set: {0}")]
    Domain(String),
    #[error("no blow-up time in singular set")]
    NoBlowup,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("quadrature failed: {0}")]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

pub(crate) fn field_to_quad(at: f64) -> impl Fn(FieldError) -> QuadError {
    move |e| QuadError::Integrand { at, message: e.to_string() }
}
