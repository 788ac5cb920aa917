//! Space-time points, velocity jets, and the evaluable solution pair.

mod singular;

pub use singular::{Rejection, SingularPrimitive, SingularSet, BOUNDARY_STEP_FACTOR, SINGULAR_STEP_FACTOR};

use crate::expr::{EvalError, Jet2};
use serde::Serialize;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

pub(crate) fn dot3(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm3(a: &Vec3) -> f64 {
    dot3(a, a).sqrt()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("point is not admissible: {0}")]
    Inadmissible(String),
    #[error("expected a {expected}D point, got {got}D")]
    Dimension { expected: usize, got: usize },
    #[error(transparent)]
    Expr(#[from] EvalError),
    #[error("evaluation produced a non-finite value")]
    NonFinite,
    #[error("pressure value is not available for this solution")]
    PressureUnavailable,
    #[error("point lies on the pressure branch cut")]
    OnBranchCut,
    #[error("quadrature failed: {0}")]
    Quadrature(String),
}

/// A point `(x, t)` with `x` in two or three dimensions. Unused trailing
/// components of `x` are zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpaceTimePoint {
    pub dim: usize,
    pub x: Vec3,
    pub t: f64,
}

impl SpaceTimePoint {
    pub fn new2(x1: f64, x2: f64, t: f64) -> Self {
        Self { dim: 2, x: [x1, x2, 0.0], t }
    }

    pub fn new3(x1: f64, x2: f64, x3: f64, t: f64) -> Self {
        Self { dim: 3, x: [x1, x2, x3], t }
    }

    pub fn from_slice(x: &[f64], t: f64) -> Result<Self, FieldError> {
        let mut p = Self { dim: x.len(), x: [0.0; 3], t };
        if !(2..=3).contains(&x.len()) {
            return Err(FieldError::Dimension { expected: 2, got: x.len() });
        }
        p.x[..x.len()].copy_from_slice(x);
        if !(p.x.iter().all(|v| v.is_finite()) && t.is_finite()) {
            return Err(FieldError::Inadmissible("non-finite coordinate".into()));
        }
        Ok(p)
    }

    pub fn coords(&self) -> &[f64] {
        &self.x[..self.dim]
    }

    pub fn r(&self) -> f64 {
        norm3(&self.x)
    }

    /// Copy with spatial coordinate `axis` shifted by `h`.
    pub fn shifted(&self, axis: usize, h: f64) -> Self {
        let mut p = *self;
        p.x[axis] += h;
        p
    }

    pub fn shifted_time(&self, h: f64) -> Self {
        let mut p = *self;
        p.t += h;
        p
    }

    pub fn with_x(&self, x: Vec3) -> Self {
        Self { dim: self.dim, x, t: self.t }
    }

    pub fn with_t(&self, t: f64) -> Self {
        Self { t, ..*self }
    }

    /// `[x1, x2, (x3), t]`
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.coords().to_vec();
        v.push(self.t);
        v
    }
}

impl fmt::Display for SpaceTimePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(x = {:?}, t = {})", self.coords(), self.t)
    }
}

/// Velocity and its derivatives at one space-time point.
///
/// `jacobian[i][j]` is `du_i/dx_j`. Entries past `dim` are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityJet {
    pub dim: usize,
    pub value: Vec3,
    pub jacobian: Mat3,
    pub laplacian: Vec3,
    pub dt: Vec3,
}

impl VelocityJet {
    pub fn zero(dim: usize) -> Self {
        Self { dim, value: [0.0; 3], jacobian: [[0.0; 3]; 3], laplacian: [0.0; 3], dt: [0.0; 3] }
    }

    pub fn divergence(&self) -> f64 {
        (0..self.dim).map(|i| self.jacobian[i][i]).sum()
    }

    /// `(u . grad) u`
    pub fn convective(&self) -> Vec3 {
        let mut out = [0.0; 3];
        for (i, o) in out.iter_mut().enumerate().take(self.dim) {
            *o = (0..self.dim).map(|j| self.value[j] * self.jacobian[i][j]).sum();
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.value.iter().chain(self.laplacian.iter()).chain(self.dt.iter()).all(|v| v.is_finite())
            && self.jacobian.iter().flatten().all(|v| v.is_finite())
    }

    pub fn add(&mut self, other: &VelocityJet) {
        for i in 0..3 {
            self.value[i] += other.value[i];
            self.laplacian[i] += other.laplacian[i];
            self.dt[i] += other.dt[i];
            for j in 0..3 {
                self.jacobian[i][j] += other.jacobian[i][j];
            }
        }
    }
}

/// Pressure value on one branch of a possibly multivalued pressure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PressureValue {
    pub value: f64,
    pub branch: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PressureInfo {
    pub gradient: Vec3,
    pub value: Option<PressureValue>,
}

/// Evaluators behind a [`SolutionPair`].
///
/// `velocity` must be computed without going through the jet path so that
/// finite differences of it are an independent check of `jet`.
pub trait FlowField: Send + Sync {
    fn dim(&self) -> usize;
    fn jet(&self, p: &SpaceTimePoint) -> Result<VelocityJet, FieldError>;
    fn velocity(&self, p: &SpaceTimePoint) -> Result<Vec3, FieldError>;
    fn pressure_gradient(&self, p: &SpaceTimePoint) -> Result<Vec3, FieldError>;
    fn pressure_value(&self, _p: &SpaceTimePoint) -> Result<PressureValue, FieldError> {
        Err(FieldError::PressureUnavailable)
    }
    /// `|u|` as a function of `r = |x|` alone, for rotationally symmetric
    /// speeds; lets norms over annuli reduce to a radial integral.
    fn radial_speed(&self, _r: f64, _t: f64) -> Option<Result<f64, FieldError>> {
        None
    }
}

/// Far-field decay certificate `|u - far_field| <= kappa(t) / rho^power`,
/// where `rho` is the distance from the moving centre.
#[derive(Clone)]
pub struct DecayEnvelope {
    pub far_field: Vec3,
    pub center: Vec3,
    pub center_velocity: Vec3,
    pub power: f64,
    kappa: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    /// `u - far_field` stays bounded near the centre.
    pub bounded_core: bool,
}

impl DecayEnvelope {
    pub fn new(
        far_field: Vec3,
        power: f64,
        bounded_core: bool,
        kappa: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { far_field, center: [0.0; 3], center_velocity: [0.0; 3], power, kappa: Arc::new(kappa), bounded_core }
    }

    pub fn kappa(&self, t: f64) -> f64 {
        (self.kappa)(t)
    }

    pub fn center_at(&self, t: f64) -> Vec3 {
        [
            self.center[0] + self.center_velocity[0] * t,
            self.center[1] + self.center_velocity[1] * t,
            self.center[2] + self.center_velocity[2] * t,
        ]
    }

    pub(crate) fn boosted(&self, c: &Vec3) -> Self {
        let mut e = self.clone();
        for i in 0..3 {
            e.far_field[i] += c[i];
            e.center_velocity[i] += c[i];
        }
        e
    }

    pub(crate) fn rotated(&self, cos: f64, sin: f64) -> Self {
        let qt = |v: &Vec3| [cos * v[0] + sin * v[1], -sin * v[0] + cos * v[1], v[2]];
        let mut e = self.clone();
        e.far_field = qt(&self.far_field);
        e.center = qt(&self.center);
        e.center_velocity = qt(&self.center_velocity);
        e
    }

    pub(crate) fn rescaled(&self, lambda: f64, tau: f64) -> Self {
        let s = lambda / tau;
        let inner = self.kappa.clone();
        let power = self.power;
        Self {
            far_field: self.far_field.map(|v| s * v),
            center: self.center.map(|v| lambda * v),
            center_velocity: self.center_velocity.map(|v| s * v),
            power,
            kappa: Arc::new(move |t| s * lambda.powf(power) * inner(t / tau)),
            bounded_core: self.bounded_core,
        }
    }
}

impl fmt::Debug for DecayEnvelope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DecayEnvelope")
            .field("far_field", &self.far_field)
            .field("power", &self.power)
            .field("bounded_core", &self.bounded_core)
            .finish_non_exhaustive()
    }
}

/// Region used for sup-norm measurements in blow-up fits.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureRegion {
    /// `inner <= |x| <= outer` in the plane.
    Annulus { inner: f64, outer: f64 },
    /// `|x| <= radius`.
    Ball { radius: f64 },
    /// A single spatial point.
    Point { x: Vec3 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub id: String,
    pub family: String,
    /// Parameter name and its textual value, in construction order.
    pub parameters: Vec<(String, String)>,
    pub transforms: Vec<String>,
    /// `(I, J)` indices of the similarity ansatz, when the family has them.
    pub similarity_indices: Option<(u32, u32)>,
}

impl Metadata {
    pub fn new(family: &str) -> Self {
        Self {
            id: family.to_string(),
            family: family.to_string(),
            parameters: Vec::new(),
            transforms: Vec::new(),
            similarity_indices: None,
        }
    }

    pub fn param(mut self, name: &str, value: impl fmt::Display) -> Self {
        self.parameters.push((name.to_string(), value.to_string()));
        self
    }

    pub fn indices(mut self, i: u32, j: u32) -> Self {
        self.similarity_indices = Some((i, j));
        self
    }
}

/// An immutable, evaluable solution `(u, p)` of the Euler (`viscosity == 0`)
/// or Navier-Stokes equations.
#[derive(Clone)]
pub struct SolutionPair {
    field: Arc<dyn FlowField>,
    viscosity: f64,
    singular: SingularSet,
    meta: Metadata,
    decay: Option<DecayEnvelope>,
    rate_region: Option<MeasureRegion>,
}

impl fmt::Debug for SolutionPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SolutionPair")
            .field("dim", &self.dim())
            .field("viscosity", &self.viscosity)
            .field("singular", &self.singular)
            .field("meta", &self.meta)
            .finish_non_exhaustive()
    }
}

impl SolutionPair {
    pub fn new(field: Arc<dyn FlowField>, viscosity: f64, singular: SingularSet, meta: Metadata) -> Self {
        Self { field, viscosity, singular, meta, decay: None, rate_region: None }
    }

    pub fn with_decay(mut self, decay: DecayEnvelope) -> Self {
        self.decay = Some(decay);
        self
    }

    pub fn with_rate_region(mut self, region: MeasureRegion) -> Self {
        self.rate_region = Some(region);
        self
    }

    pub fn with_id(mut self, id: &str) -> Self {
        self.meta.id = id.to_string();
        self
    }

    pub(crate) fn replace(
        &self,
        field: Arc<dyn FlowField>,
        viscosity: f64,
        singular: SingularSet,
        transform: String,
        decay: Option<DecayEnvelope>,
        rate_region: Option<MeasureRegion>,
    ) -> Self {
        let mut meta = self.meta.clone();
        meta.transforms.push(transform);
        Self { field, viscosity, singular, meta, decay, rate_region }
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    pub fn viscosity(&self) -> f64 {
        self.viscosity
    }

    pub fn singular_set(&self) -> &SingularSet {
        &self.singular
    }

    pub fn metadata(&self) -> &Metadata {
        &self.meta
    }

    pub fn id(&self) -> &str {
        &self.meta.id
    }

    pub fn decay(&self) -> Option<&DecayEnvelope> {
        self.decay.as_ref()
    }

    pub fn rate_region(&self) -> Option<&MeasureRegion> {
        self.rate_region.as_ref()
    }

    pub fn field(&self) -> &Arc<dyn FlowField> {
        &self.field
    }

    pub fn check_admissible(&self, p: &SpaceTimePoint, exclusion: f64) -> Result<(), FieldError> {
        if p.dim != self.dim() {
            return Err(FieldError::Dimension { expected: self.dim(), got: p.dim });
        }
        self.singular.check(p, exclusion).map_err(|r| {
            let prim = match &r {
                Rejection::NearSingularity(i) | Rejection::OutsideDomain(i) | Rejection::PastBlowup(i) => {
                    self.singular.primitives[*i].describe()
                }
            };
            FieldError::Inadmissible(match r {
                Rejection::NearSingularity(_) => format!("within {exclusion} of {prim}"),
                Rejection::OutsideDomain(_) => format!("outside {prim}"),
                Rejection::PastBlowup(_) => prim,
            })
        })
    }

    pub fn jet(&self, p: &SpaceTimePoint) -> Result<VelocityJet, FieldError> {
        self.check_admissible(p, 0.0)?;
        let j = self.field.jet(p)?;
        if j.is_finite() {
            Ok(j)
        } else {
            Err(FieldError::NonFinite)
        }
    }

    pub fn velocity(&self, p: &SpaceTimePoint) -> Result<Vec3, FieldError> {
        self.check_admissible(p, 0.0)?;
        let v = self.field.velocity(p)?;
        finite3(v)
    }

    pub fn pressure_gradient(&self, p: &SpaceTimePoint) -> Result<Vec3, FieldError> {
        self.check_admissible(p, 0.0)?;
        finite3(self.field.pressure_gradient(p)?)
    }

    pub fn pressure(&self, p: &SpaceTimePoint) -> Result<PressureValue, FieldError> {
        self.check_admissible(p, 0.0)?;
        let v = self.field.pressure_value(p)?;
        if v.value.is_finite() {
            Ok(v)
        } else {
            Err(FieldError::NonFinite)
        }
    }
}

fn finite3(v: Vec3) -> Result<Vec3, FieldError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(v)
    } else {
        Err(FieldError::NonFinite)
    }
}

/// Jet of the planar field `(phi(r) x2, -phi(r) x1)`.
///
/// `phi` is the jet of the profile in `r`, `phi_t` its partial time
/// derivative. Uses
/// `d1(phi x2) = phi' x1 x2 / r`, `d2(phi x2) = phi + phi' x2^2 / r`,
/// `lap(phi x2) = x2 (phi'' + 3 phi' / r)` and the mirrored forms for
/// `-phi x1`.
pub fn radial_field_jet(phi: Jet2, phi_t: f64, p: &SpaceTimePoint, min_radius: f64) -> Result<VelocityJet, FieldError> {
    if p.dim != 2 {
        return Err(FieldError::Dimension { expected: 2, got: p.dim });
    }
    let [x1, x2, _] = p.x;
    let r = x1.hypot(x2);
    if r == 0.0 || r < min_radius {
        return Err(FieldError::Inadmissible(format!("radius {r} below {min_radius}")));
    }
    let dr = phi.d1 / r;
    let cross = dr * x1 * x2;
    let radial_lap = phi.d2 + 3.0 * dr;
    let mut jet = VelocityJet::zero(2);
    jet.value = [phi.value * x2, -phi.value * x1, 0.0];
    jet.jacobian[0][0] = cross;
    jet.jacobian[0][1] = phi.value + dr * x2 * x2;
    jet.jacobian[1][0] = -phi.value - dr * x1 * x1;
    jet.jacobian[1][1] = -cross;
    jet.laplacian = [x2 * radial_lap, -x1 * radial_lap, 0.0];
    jet.dt = [phi_t * x2, -phi_t * x1, 0.0];
    Ok(jet)
}

/// Planar vorticity `du2/dx1 - du1/dx2` from the analytic jacobian.
pub fn vorticity(sol: &SolutionPair, p: &SpaceTimePoint) -> Result<f64, FieldError> {
    if sol.dim() != 2 {
        return Err(FieldError::Dimension { expected: 2, got: sol.dim() });
    }
    let j = sol.jet(p)?;
    Ok(j.jacobian[1][0] - j.jacobian[0][1])
}

/// Pressure gradient together with a pressure value on its branch.
pub fn pressure_value(sol: &SolutionPair, p: &SpaceTimePoint) -> Result<PressureInfo, FieldError> {
    let gradient = sol.pressure_gradient(p)?;
    let value = sol.pressure(p)?;
    Ok(PressureInfo { gradient, value: Some(value) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_jacobian(phi: impl Fn(f64) -> f64, p: &SpaceTimePoint, h: f64) -> Mat3 {
        let u = |q: &SpaceTimePoint| {
            let r = q.r();
            [phi(r) * q.x[1], -phi(r) * q.x[0]]
        };
        let mut j = [[0.0; 3]; 3];
        for axis in 0..2 {
            let f = |k: f64| u(&p.shifted(axis, k * h));
            let (a, b, c, d) = (f(-2.0), f(-1.0), f(1.0), f(2.0));
            for comp in 0..2 {
                j[comp][axis] = (a[comp] - 8.0 * b[comp] + 8.0 * c[comp] - d[comp]) / (12.0 * h);
            }
        }
        j
    }

    #[test]
    fn rigid_rotation() {
        let p = SpaceTimePoint::new2(0.0, 1.0, 0.0);
        let j = radial_field_jet(Jet2::constant(1.0), 0.0, &p, 0.0).unwrap();
        assert_eq!(j.value, [1.0, 0.0, 0.0]);
        assert_eq!(j.jacobian[0][..2], [0.0, 1.0]);
        assert_eq!(j.jacobian[1][..2], [-1.0, 0.0]);
        assert_eq!(j.laplacian, [0.0; 3]);
        assert_eq!(j.jacobian[1][0] - j.jacobian[0][1], -2.0);
    }

    #[test]
    fn inverse_square_profile_value() {
        let p = SpaceTimePoint::new2(1.0, 0.0, 0.0);
        let phi = Jet2::variable(1.0).powi(-2);
        let j = radial_field_jet(phi, 0.0, &p, 0.0).unwrap();
        assert_eq!(j.value[..2], [0.0, -1.0]);
    }

    #[test]
    fn bump_profile_jacobian_matches_finite_differences() {
        let p = SpaceTimePoint::new2(0.0, 1.0, 0.0);
        let r = Jet2::variable(1.0);
        let phi = (Jet2::constant(1.0) + r * r).powi(-2);
        let j = radial_field_jet(phi, 0.0, &p, 0.0).unwrap();
        let fd = fd_jacobian(|r| 1.0 / (1.0 + r * r).powi(2), &p, 1e-3);
        for i in 0..2 {
            for k in 0..2 {
                let rel = (j.jacobian[i][k] - fd[i][k]).abs() / (1.0 + j.jacobian[i][k].abs());
                assert!(rel < 1e-6, "J[{i}][{k}] {} vs {}", j.jacobian[i][k], fd[i][k]);
            }
        }
    }

    #[test]
    fn radial_jet_rejects_small_radius() {
        let p = SpaceTimePoint::new2(1e-4, 0.0, 0.0);
        assert!(radial_field_jet(Jet2::constant(1.0), 0.0, &p, 1e-3).is_err());
        assert!(radial_field_jet(Jet2::constant(1.0), 0.0, &SpaceTimePoint::new2(0.0, 0.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn point_construction() {
        assert!(SpaceTimePoint::from_slice(&[1.0], 0.0).is_err());
        assert!(SpaceTimePoint::from_slice(&[1.0, f64::NAN], 0.0).is_err());
        let p = SpaceTimePoint::from_slice(&[1.0, 2.0, 3.0], 0.5).unwrap();
        assert_eq!(p.to_vec(), vec![1.0, 2.0, 3.0, 0.5]);
    }
}
