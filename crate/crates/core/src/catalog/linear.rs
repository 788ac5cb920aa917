use super::{CatalogError, Profile};
use crate::expr::ParamEnv;
use crate::field::{
    FieldError, FlowField, Mat3, Metadata, SingularSet, SolutionPair, SpaceTimePoint, Vec3, VelocityJet,
};
use std::sync::Arc;

/// `u = f(t) C x` with pressure gradient `-f^2 C^2 x - f' C x`.
#[derive(Debug, Clone)]
pub struct Linear3d {
    f: Profile,
    c: Mat3,
    c2: Mat3,
    env: ParamEnv,
}

fn mat_vec(m: &Mat3, x: &Vec3) -> Vec3 {
    let mut out = [0.0; 3];
    for (i, o) in out.iter_mut().enumerate() {
        *o = m[i][0] * x[0] + m[i][1] * x[1] + m[i][2] * x[2];
    }
    out
}

fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

impl Linear3d {
    /// Builds the field without checking symmetry or the trace.
    pub(crate) fn unchecked(f: Profile, c: Mat3, env: ParamEnv) -> Self {
        Self { f, c2: mat_mul(&c, &c), c, env }
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.c
    }
}

impl FlowField for Linear3d {
    fn dim(&self) -> usize {
        3
    }

    fn jet(&self, p: &SpaceTimePoint) -> Result<VelocityJet, FieldError> {
        let f = self.f.expr.jet_at(p.t, &self.env)?;
        let cx = mat_vec(&self.c, &p.x);
        let mut jet = VelocityJet::zero(3);
        for i in 0..3 {
            jet.value[i] = f.value * cx[i];
            jet.dt[i] = f.d1 * cx[i];
            for j in 0..3 {
                jet.jacobian[i][j] = f.value * self.c[i][j];
            }
        }
        Ok(jet)
    }

    fn velocity(&self, p: &SpaceTimePoint) -> Result<Vec3, FieldError> {
        let f = self.f.expr.eval_real(p.t, &self.env)?;
        Ok(mat_vec(&self.c, &p.x).map(|v| f * v))
    }

    fn pressure_gradient(&self, p: &SpaceTimePoint) -> Result<Vec3, FieldError> {
        let f = self.f.expr.jet_at(p.t, &self.env)?;
        let cx = mat_vec(&self.c, &p.x);
        let c2x = mat_vec(&self.c2, &p.x);
        let mut g = [0.0; 3];
        for i in 0..3 {
            g[i] = -f.value * f.value * c2x[i] - f.d1 * cx[i];
        }
        Ok(g)
    }
}

const MATRIX_TOL: f64 = 1e-12;

pub(crate) fn validate_matrix(c: &Mat3) -> Result<(), CatalogError> {
    let scale = c.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
    if c.iter().flatten().any(|v| !v.is_finite()) {
        return Err(CatalogError::invalid("C", "entries must be finite"));
    }
    for i in 0..3 {
        for j in 0..i {
            if (c[i][j] - c[j][i]).abs() > MATRIX_TOL * scale {
                return Err(CatalogError::invalid("C", format!("not symmetric: C[{i}][{j}] != C[{j}][{i}]")));
            }
        }
    }
    let trace = c[0][0] + c[1][1] + c[2][2];
    if trace.abs() > MATRIX_TOL * scale {
        return Err(CatalogError::invalid("C", format!("trace {trace} is not zero (need c33 = -c11 - c22)")));
    }
    Ok(())
}

pub(crate) fn linear_metadata(f: &Profile, c: &Mat3, env: &ParamEnv) -> Metadata {
    let mut meta = Metadata::new("linear3d").param("f", &f.text).param("C", format!("{c:?}"));
    for (k, v) in env.iter() {
        meta = meta.param(k, v);
    }
    meta
}

/// `u = f(t) C x` for symmetric, trace-free `C`; solves Euler and, since
/// `lap u = 0`, Navier-Stokes for any `viscosity`.
pub fn linear3d(f: &str, c: Mat3, viscosity: f64, env: ParamEnv) -> Result<SolutionPair, CatalogError> {
    validate_matrix(&c)?;
    if !(viscosity >= 0.0 && viscosity.is_finite()) {
        return Err(CatalogError::invalid("sigma", "must be finite and non-negative"));
    }
    let f = Profile::new("f", f, "t", &env)?;
    let meta = linear_metadata(&f, &c, &env);
    let field = Linear3d::unchecked(f, c, env);
    Ok(SolutionPair::new(Arc::new(field), viscosity, SingularSet::empty(), meta))
}
