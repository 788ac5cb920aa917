use super::CatalogError;
use crate::field::{
    FieldError, FlowField, MeasureRegion, PressureValue, SolutionPair, SpaceTimePoint, Vec3, VelocityJet,
};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Symmetry maps taking solutions to solutions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TransformSpec {
    /// `w(x,t) = u(x - C t, t) + C`
    Boost { velocity: Vec<f64> },
    /// `w(x,t) = Q^T u(Q x, t)` with `Q` the rotation by `angle`.
    Rotation { angle: f64 },
    /// `w(x,t) = (lambda/tau) u(x/lambda, t/tau)`; viscosity becomes
    /// `sigma lambda^2 / tau`.
    Rescale { lambda: f64, tau: f64 },
}

impl TransformSpec {
    pub fn describe(&self) -> String {
        match self {
            TransformSpec::Boost { velocity } => format!("boost {velocity:?}"),
            TransformSpec::Rotation { angle } => format!("rotation {angle}"),
            TransformSpec::Rescale { lambda, tau } => format!("rescale lambda={lambda} tau={tau}"),
        }
    }
}

struct Boosted {
    inner: Arc<dyn FlowField>,
    c: Vec3,
}

impl Boosted {
    fn pull(&self, p: &SpaceTimePoint) -> SpaceTimePoint {
        let mut q = *p;
        for i in 0..3 {
            q.x[i] -= self.c[i] * p.t;
        }
        q
    }
}

impl FlowField for Boosted {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn jet(&self, p: &SpaceTimePoint) -> Result<VelocityJet, FieldError> {
        let mut j = self.inner.jet(&self.pull(p))?;
        for i in 0..3 {
            let shift: f64 = (0..3).map(|k| j.jacobian[i][k] * self.c[k]).sum();
            j.dt[i] -= shift;
            j.value[i] += self.c[i];
        }
        Ok(j)
    }

    fn velocity(&self, p: &SpaceTimePoint) -> Result<Vec3, FieldError> {
        let u = self.inner.velocity(&self.pull(p))?;
        Ok([u[0] + self.c[0], u[1] + self.c[1], u[2] + self.c[2]])
    }

    fn pressure_gradient(&self, p: &SpaceTimePoint) -> Result<Vec3, FieldError> {
        self.inner.pressure_gradient(&self.pull(p))
    }

    fn pressure_value(&self, p: &SpaceTimePoint) -> Result<PressureValue, FieldError> {
        self.inner.pressure_value(&self.pull(p))
    }
}

struct Rotated {
    inner: Arc<dyn FlowField>,
    cos: f64,
    sin: f64,
}

impl Rotated {
    fn q(&self, v: &Vec3) -> Vec3 {
        [self.cos * v[0] - self.sin * v[1], self.sin * v[0] + self.cos * v[1], v[2]]
    }

    fn qt(&self, v: &Vec3) -> Vec3 {
        [self.cos * v[0] + self.sin * v[1], -self.sin * v[0] + self.cos * v[1], v[2]]
    }

    fn pull(&self, p: &SpaceTimePoint) -> SpaceTimePoint {
        p.with_x(self.q(&p.x))
    }
}

impl FlowField for Rotated {
    fn dim(&self) -> usize {
        2
    }

    fn jet(&self, p: &SpaceTimePoint) -> Result<VelocityJet, FieldError> {
        let j = self.inner.jet(&self.pull(p))?;
        let mut out = VelocityJet::zero(2);
        out.value = self.qt(&j.value);
        out.laplacian = self.qt(&j.laplacian);
        out.dt = self.qt(&j.dt);
        // Q^T J Q, one column at a time: (J Q) e_k = J (Q e_k)
        let q = [[self.cos, -self.sin], [self.sin, self.cos]];
        for k in 0..2 {
            let mut col = [0.0; 3];
            for (i, c) in col.iter_mut().enumerate().take(2) {
                *c = j.jacobian[i][0] * q[0][k] + j.jacobian[i][1] * q[1][k];
            }
            let rc = self.qt(&col);
            out.jacobian[0][k] = rc[0];
            out.jacobian[1][k] = rc[1];
        }
        Ok(out)
    }

    fn velocity(&self, p: &SpaceTimePoint) -> Result<Vec3, FieldError> {
        Ok(self.qt(&self.inner.velocity(&self.pull(p))?))
    }

    fn pressure_gradient(&self, p: &SpaceTimePoint) -> Result<Vec3, FieldError> {
        Ok(self.qt(&self.inner.pressure_gradient(&self.pull(p))?))
    }

    fn pressure_value(&self, p: &SpaceTimePoint) -> Result<PressureValue, FieldError> {
        self.inner.pressure_value(&self.pull(p))
    }

    fn radial_speed(&self, r: f64, t: f64) -> Option<Result<f64, FieldError>> {
        self.inner.radial_speed(r, t)
    }
}

struct Rescaled {
    inner: Arc<dyn FlowField>,
    lambda: f64,
    tau: f64,
}

impl Rescaled {
    fn pull(&self, p: &SpaceTimePoint) -> SpaceTimePoint {
        SpaceTimePoint { dim: p.dim, x: p.x.map(|v| v / self.lambda), t: p.t / self.tau }
    }
}

impl FlowField for Rescaled {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn jet(&self, p: &SpaceTimePoint) -> Result<VelocityJet, FieldError> {
        let j = self.inner.jet(&self.pull(p))?;
        let (l, t) = (self.lambda, self.tau);
        let mut out = j;
        out.value = j.value.map(|v| v * l / t);
        out.laplacian = j.laplacian.map(|v| v / (l * t));
        out.dt = j.dt.map(|v| v * l / (t * t));
        for row in out.jacobian.iter_mut() {
            *row = row.map(|v| v / t);
        }
        Ok(out)
    }

    fn velocity(&self, p: &SpaceTimePoint) -> Result<Vec3, FieldError> {
        let s = self.lambda / self.tau;
        Ok(self.inner.velocity(&self.pull(p))?.map(|v| v * s))
    }

    fn pressure_gradient(&self, p: &SpaceTimePoint) -> Result<Vec3, FieldError> {
        let s = self.lambda / (self.tau * self.tau);
        Ok(self.inner.pressure_gradient(&self.pull(p))?.map(|v| v * s))
    }

    fn pressure_value(&self, p: &SpaceTimePoint) -> Result<PressureValue, FieldError> {
        let s = (self.lambda / self.tau).powi(2);
        let mut v = self.inner.pressure_value(&self.pull(p))?;
        v.value *= s;
        Ok(v)
    }

    fn radial_speed(&self, r: f64, t: f64) -> Option<Result<f64, FieldError>> {
        let s = self.lambda / self.tau;
        self.inner.radial_speed(r / self.lambda, t / self.tau).map(|v| v.map(|v| v * s))
    }
}

fn finite(name: &str, v: f64) -> Result<f64, CatalogError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CatalogError::Transform(format!("{name} must be finite")))
    }
}

/// Applies one symmetry map, transforming the singular set, decay envelope
/// and measurement region along with the field.
pub fn apply_transform(sol: &SolutionPair, tr: &TransformSpec) -> Result<SolutionPair, CatalogError> {
    let dim = sol.dim();
    let inner = sol.field().clone();
    match tr {
        TransformSpec::Boost { velocity } => {
            if velocity.len() != dim {
                return Err(CatalogError::Transform(format!(
                    "boost velocity has {} components for a {dim}D solution",
                    velocity.len()
                )));
            }
            let mut c = [0.0; 3];
            for (i, v) in velocity.iter().enumerate() {
                c[i] = finite("boost velocity", *v)?;
            }
            let field = Arc::new(Boosted { inner, c });
            Ok(sol.replace(
                field,
                sol.viscosity(),
                sol.singular_set().boosted(&c),
                tr.describe(),
                sol.decay().map(|d| d.boosted(&c)),
                None,
            ))
        }
        TransformSpec::Rotation { angle } => {
            if dim != 2 {
                return Err(CatalogError::Transform("rotation is only defined for 2D solutions".into()));
            }
            let (sin, cos) = finite("angle", *angle)?.sin_cos();
            let field = Arc::new(Rotated { inner, cos, sin });
            let region = sol.rate_region().map(|r| match r {
                MeasureRegion::Point { x } => {
                    MeasureRegion::Point { x: [cos * x[0] + sin * x[1], -sin * x[0] + cos * x[1], x[2]] }
                }
                other => other.clone(),
            });
            Ok(sol.replace(
                field,
                sol.viscosity(),
                sol.singular_set().rotated(cos, sin),
                tr.describe(),
                sol.decay().map(|d| d.rotated(cos, sin)),
                region,
            ))
        }
        TransformSpec::Rescale { lambda, tau } => {
            let (lambda, tau) = (finite("lambda", *lambda)?, finite("tau", *tau)?);
            if lambda <= 0.0 || tau <= 0.0 {
                return Err(CatalogError::Transform("lambda and tau must be positive".into()));
            }
            let field = Arc::new(Rescaled { inner, lambda, tau });
            let region = sol.rate_region().map(|r| match r {
                MeasureRegion::Annulus { inner, outer } => {
                    MeasureRegion::Annulus { inner: inner * lambda, outer: outer * lambda }
                }
                MeasureRegion::Ball { radius } => MeasureRegion::Ball { radius: radius * lambda },
                MeasureRegion::Point { x } => MeasureRegion::Point { x: x.map(|v| v * lambda) },
            });
            Ok(sol.replace(
                field,
                sol.viscosity() * lambda * lambda / tau,
                sol.singular_set().rescaled(lambda, tau),
                tr.describe(),
                sol.decay().map(|d| d.rescaled(lambda, tau)),
                region,
            ))
        }
    }
}

pub fn apply_transforms(sol: &SolutionPair, chain: &[TransformSpec]) -> Result<SolutionPair, CatalogError> {
    let mut out = sol.clone();
    for tr in chain {
        out = apply_transform(&out, tr)?;
    }
    Ok(out)
}
