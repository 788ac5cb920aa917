//! Deliberately broken evaluators. A residual engine that lets any of these
//! pass is not checking anything.

use super::presets::{PresetId, Recipe};
use super::twin::twin_wave_with_rate_error;
use super::vortex::{vortex_metadata, vortex_singular_set, IjVortex};
use super::{preset, CatalogError};
use crate::expr::ParamEnv;
use crate::field::{FieldError, FlowField, PressureValue, SolutionPair, SpaceTimePoint, Vec3, VelocityJet};
use serde::Serialize;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mutation {
    /// Negated pressure gradient on the boosted bump vortex.
    PressureSignFlip,
    /// Vortex pressure gradient computed as if `c' = 0`, with `c = t`.
    DroppedCPrime,
    /// Analytic laplacian scaled by 1.01 on the boosted bump vortex.
    ScaledLaplacian,
    /// Travelling coordinate moving 0.25 too fast on the smooth twin wave.
    WrongWaveSpeed,
    /// Linear flow with `C = diag(1, 1, -1.5)`, skipping the trace check.
    NonTraceFree,
}

impl Mutation {
    pub const ALL: [Mutation; 5] = [
        Mutation::PressureSignFlip,
        Mutation::DroppedCPrime,
        Mutation::ScaledLaplacian,
        Mutation::WrongWaveSpeed,
        Mutation::NonTraceFree,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mutation::PressureSignFlip => "pressure_sign_flip",
            Mutation::DroppedCPrime => "dropped_c_prime",
            Mutation::ScaledLaplacian => "scaled_laplacian",
            Mutation::WrongWaveSpeed => "wrong_wave_speed",
            Mutation::NonTraceFree => "non_trace_free",
        }
    }

    pub fn base(self) -> PresetId {
        match self {
            Mutation::PressureSignFlip | Mutation::ScaledLaplacian => PresetId::Ex3_2,
            Mutation::DroppedCPrime => PresetId::Ex2_5,
            Mutation::WrongWaveSpeed => PresetId::Ex3_4Smooth,
            Mutation::NonTraceFree => PresetId::Ex5_1Const,
        }
    }

    pub fn build(self) -> Result<SolutionPair, CatalogError> {
        let id = format!("{}+{}", self.base(), self.name());
        let sol = match self {
            Mutation::PressureSignFlip => wrap(preset(self.base())?, Tamper::NegatePressure),
            Mutation::ScaledLaplacian => wrap(preset(self.base())?, Tamper::ScaleLaplacian(1.01)),
            Mutation::DroppedCPrime => {
                let mut field = IjVortex::new("t", "-1/r^2", ParamEnv::new())?;
                field.drop_c_prime = true;
                let meta = vortex_metadata(&field);
                SolutionPair::new(Arc::new(field), 0.0, vortex_singular_set(), meta)
            }
            Mutation::WrongWaveSpeed => {
                let env = ParamEnv::new().with("c1", 1.0).with("c2", 0.0).with("c3", 1.0);
                twin_wave_with_rate_error("1/(1+x^2)^2 - c1", 1.0, 0.0, 1.0, env, &[], 0.25)?
            }
            Mutation::NonTraceFree => {
                let c = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.5]];
                Recipe::new("linear3d").text("f", "1").matrix("C", &c).build_unchecked()?
            }
        };
        Ok(sol.with_id(&id))
    }
}

#[derive(Debug, Clone, Copy)]
enum Tamper {
    NegatePressure,
    ScaleLaplacian(f64),
}

struct Tampered {
    inner: Arc<dyn FlowField>,
    tamper: Tamper,
}

impl FlowField for Tampered {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn jet(&self, p: &SpaceTimePoint) -> Result<VelocityJet, FieldError> {
        let mut j = self.inner.jet(p)?;
        if let Tamper::ScaleLaplacian(k) = self.tamper {
            j.laplacian = j.laplacian.map(|v| v * k);
        }
        Ok(j)
    }

    fn velocity(&self, p: &SpaceTimePoint) -> Result<Vec3, FieldError> {
        self.inner.velocity(p)
    }

    fn pressure_gradient(&self, p: &SpaceTimePoint) -> Result<Vec3, FieldError> {
        let g = self.inner.pressure_gradient(p)?;
        Ok(match self.tamper {
            Tamper::NegatePressure => g.map(|v| -v),
            Tamper::ScaleLaplacian(_) => g,
        })
    }

    fn pressure_value(&self, p: &SpaceTimePoint) -> Result<PressureValue, FieldError> {
        let mut v = self.inner.pressure_value(p)?;
        if let Tamper::NegatePressure = self.tamper {
            v.value = -v.value;
        }
        Ok(v)
    }
}

fn wrap(sol: SolutionPair, tamper: Tamper) -> SolutionPair {
    let field = Arc::new(Tampered { inner: sol.field().clone(), tamper });
    let name = match tamper {
        Tamper::NegatePressure => "mutation: negated pressure gradient".to_string(),
        Tamper::ScaleLaplacian(k) => format!("mutation: laplacian x{k}"),
    };
    sol.replace(
        field,
        sol.viscosity(),
        sol.singular_set().clone(),
        name,
        sol.decay().cloned(),
        sol.rate_region().cloned(),
    )
}
