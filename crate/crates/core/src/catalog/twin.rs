use super::{check_finite, CatalogError, Profile};
use crate::expr::ParamEnv;
use crate::field::{
    FieldError, FlowField, Metadata, SingularPrimitive, SingularSet, SolutionPair, SpaceTimePoint, Vec3, VelocityJet,
};
use std::sync::Arc;

/// Fields `u_i = scale_i P_i(xi) + shift_i` of the single travelling
/// coordinate `xi = c3 (x1 - c1 t) - (x2 - c2 t)`, with zero pressure
/// gradient.
#[derive(Debug, Clone)]
pub struct TwinProfiles {
    profiles: [Profile; 2],
    scales: [f64; 2],
    shifts: [f64; 2],
    c3: f64,
    /// Coefficient `c3 c1 - c2` of `t` in `xi`.
    pub(crate) time_rate: f64,
    env: ParamEnv,
}

impl TwinProfiles {
    fn xi(&self, p: &SpaceTimePoint) -> f64 {
        self.c3 * p.x[0] - p.x[1] - self.time_rate * p.t
    }
}

impl FlowField for TwinProfiles {
    fn dim(&self) -> usize {
        2
    }

    fn jet(&self, p: &SpaceTimePoint) -> Result<VelocityJet, FieldError> {
        let xi = self.xi(p);
        let mut jet = VelocityJet::zero(2);
        let grad_sq = self.c3 * self.c3 + 1.0;
        for i in 0..2 {
            let v = self.profiles[i].expr.jet_at(xi, &self.env)?;
            let s = self.scales[i];
            jet.value[i] = s * v.value + self.shifts[i];
            jet.jacobian[i][0] = s * v.d1 * self.c3;
            jet.jacobian[i][1] = -s * v.d1;
            jet.laplacian[i] = s * v.d2 * grad_sq;
            jet.dt[i] = -s * v.d1 * self.time_rate;
        }
        Ok(jet)
    }

    fn velocity(&self, p: &SpaceTimePoint) -> Result<Vec3, FieldError> {
        let xi = self.xi(p);
        let mut u = [0.0; 3];
        for (i, ui) in u.iter_mut().enumerate().take(2) {
            *ui = self.scales[i] * self.profiles[i].expr.eval_real(xi, &self.env)? + self.shifts[i];
        }
        Ok(u)
    }

    fn pressure_gradient(&self, _p: &SpaceTimePoint) -> Result<Vec3, FieldError> {
        Ok([0.0; 3])
    }
}

fn speeds(c1: f64, c2: f64, c3: f64) -> Result<f64, CatalogError> {
    check_finite("c1", c1)?;
    check_finite("c2", c2)?;
    check_finite("c3", c3)?;
    Ok(c3 * c1 - c2)
}

fn pole_lines(c3: f64, rate: f64, poles: &[f64]) -> SingularSet {
    SingularSet::new(
        poles.iter().map(|&xi0| SingularPrimitive::MovingLine { normal: [c3, -1.0, 0.0], offset: xi0, rate }).collect(),
    )
}

/// `u = (v(xi) + c1, c3 v(xi) + c2)`. `poles` lists the values of `xi` where
/// `v` is singular; each becomes a moving line of the singular set.
pub fn twin_wave(
    v: &str,
    c1: f64,
    c2: f64,
    c3: f64,
    env: ParamEnv,
    poles: &[f64],
) -> Result<SolutionPair, CatalogError> {
    twin_wave_with_rate_error(v, c1, c2, c3, env, poles, 0.0)
}

/// As [`twin_wave`] but with `rate_error` added to the time coefficient of
/// `xi`, which breaks the solution.
pub(crate) fn twin_wave_with_rate_error(
    v: &str,
    c1: f64,
    c2: f64,
    c3: f64,
    env: ParamEnv,
    poles: &[f64],
    rate_error: f64,
) -> Result<SolutionPair, CatalogError> {
    let rate = speeds(c1, c2, c3)?;
    let profile = Profile::new("v", v, "x", &env)?;
    let mut meta = Metadata::new("twin_wave")
        .param("v", &profile.text)
        .param("c1", c1)
        .param("c2", c2)
        .param("c3", c3)
        .indices(1, 3);
    for (k, val) in env.iter() {
        meta = meta.param(k, val);
    }
    let field = TwinProfiles {
        profiles: [profile.clone(), profile],
        scales: [1.0, c3],
        shifts: [c1, c2],
        c3,
        time_rate: rate + rate_error,
        env,
    };
    Ok(SolutionPair::new(Arc::new(field), 0.0, pole_lines(c3, rate, poles), meta))
}

/// `u = (u1(xi), u2(xi))` travelling with speed `(c1, c2)`. This is a
/// solution exactly when `c3 u1 - u2` is the constant `c3 c1 - c2`.
pub fn twin_profiles(
    u1: &str,
    u2: &str,
    c1: f64,
    c2: f64,
    c3: f64,
    env: ParamEnv,
    poles: &[f64],
) -> Result<SolutionPair, CatalogError> {
    let rate = speeds(c1, c2, c3)?;
    let p1 = Profile::new("u1", u1, "x", &env)?;
    let p2 = Profile::new("u2", u2, "x", &env)?;
    let meta = Metadata::new("twin_profiles")
        .param("u1", &p1.text)
        .param("u2", &p2.text)
        .param("c1", c1)
        .param("c2", c2)
        .param("c3", c3);
    let field = TwinProfiles { profiles: [p1, p2], scales: [1.0, 1.0], shifts: [0.0, 0.0], c3, time_rate: rate, env };
    Ok(SolutionPair::new(Arc::new(field), 0.0, pole_lines(c3, rate, poles), meta))
}
