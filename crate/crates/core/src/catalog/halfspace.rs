use super::{check_finite, CatalogError};
use crate::field::{
    FieldError, FlowField, MeasureRegion, Metadata, PressureValue, SingularPrimitive, SingularSet, SolutionPair,
    SpaceTimePoint, Vec3, VelocityJet,
};
use std::sync::Arc;

/// Viscous blow-up solution on the half-space `s >= 0`,
/// `s = sum_i (x_i - x0_i)`.
///
/// With `theta = T - t` and
/// `E = exp(s^2 / (12 sigma theta) - s / (sigma sqrt(theta)))`:
/// `u1 = u2 = (E - 1) / sqrt(theta)`, `u3 = -(1 + 2E) / sqrt(theta)` and
/// `p = sign (s / (2 sqrt(theta)) + c) / theta`.
#[derive(Debug, Clone)]
pub struct HalfspaceBlowup {
    pub blowup_time: f64,
    pub sigma: f64,
    pub c: f64,
    pub x0: Vec3,
    pub pressure_sign: f64,
}

impl HalfspaceBlowup {
    fn coords(&self, p: &SpaceTimePoint) -> Result<(f64, f64), FieldError> {
        let theta = self.blowup_time - p.t;
        let s = (0..3).map(|i| p.x[i] - self.x0[i]).sum::<f64>();
        if !(theta > 0.0) {
            return Err(FieldError::Inadmissible(format!("t = {} is not before T", p.t)));
        }
        if s < 0.0 {
            return Err(FieldError::Inadmissible(format!("s = {s} lies outside the half-space")));
        }
        Ok((s, theta))
    }
}

impl FlowField for HalfspaceBlowup {
    fn dim(&self) -> usize {
        3
    }

    fn jet(&self, p: &SpaceTimePoint) -> Result<VelocityJet, FieldError> {
        let (s, theta) = self.coords(p)?;
        let sig = self.sigma;
        let rt = theta.sqrt();
        let q = 1.0 / rt;
        let q_t = 0.5 / (theta * rt);
        let a = s * s / (12.0 * sig * theta) - s / (sig * rt);
        let a_s = s / (6.0 * sig * theta) - 1.0 / (sig * rt);
        let a_ss = 1.0 / (6.0 * sig * theta);
        let a_t = s * s / (12.0 * sig * theta * theta) - s / (2.0 * sig * theta * rt);
        let e = a.exp();
        let qe = q * e;

        let u1 = [q * (e - 1.0), qe * a_s, qe * (a_s * a_s + a_ss), q_t * (e - 1.0) + qe * a_t];
        let u3 = [
            -q * (1.0 + 2.0 * e),
            -2.0 * qe * a_s,
            -2.0 * qe * (a_s * a_s + a_ss),
            -q_t * (1.0 + 2.0 * e) - 2.0 * qe * a_t,
        ];
        let mut jet = VelocityJet::zero(3);
        for (i, comp) in [u1, u1, u3].into_iter().enumerate() {
            jet.value[i] = comp[0];
            jet.jacobian[i] = [comp[1]; 3];
            jet.laplacian[i] = 3.0 * comp[2];
            jet.dt[i] = comp[3];
        }
        Ok(jet)
    }

    fn velocity(&self, p: &SpaceTimePoint) -> Result<Vec3, FieldError> {
        let (s, theta) = self.coords(p)?;
        let e = (s * s / (12.0 * self.sigma * theta) - s / (self.sigma * theta.sqrt())).exp();
        let u = (e - 1.0) / theta.sqrt();
        Ok([u, u, -(1.0 + 2.0 * e) / theta.sqrt()])
    }

    fn pressure_gradient(&self, p: &SpaceTimePoint) -> Result<Vec3, FieldError> {
        let (_, theta) = self.coords(p)?;
        Ok([self.pressure_sign * 0.5 / (theta * theta.sqrt()); 3])
    }

    fn pressure_value(&self, p: &SpaceTimePoint) -> Result<PressureValue, FieldError> {
        let (s, theta) = self.coords(p)?;
        let value = self.pressure_sign * (s / (2.0 * theta.sqrt()) + self.c) / theta;
        Ok(PressureValue { value, branch: "single-valued".into() })
    }
}

/// See [`HalfspaceBlowup`]. `pressure_sign` must be `+1` or `-1`.
pub fn ns_halfspace_blowup(
    blowup_time: f64,
    sigma: f64,
    c: f64,
    x0: Vec3,
    pressure_sign: f64,
) -> Result<SolutionPair, CatalogError> {
    if !(blowup_time > 0.0 && blowup_time.is_finite()) {
        return Err(CatalogError::invalid("T", "must be positive and finite"));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(CatalogError::invalid("sigma", "must be positive and finite"));
    }
    check_finite("c", c)?;
    for v in x0 {
        check_finite("x0", v)?;
    }
    if pressure_sign != 1.0 && pressure_sign != -1.0 {
        return Err(CatalogError::invalid("pressure_sign", "must be +1 or -1"));
    }
    let field = HalfspaceBlowup { blowup_time, sigma, c, x0, pressure_sign };
    let singular = SingularSet::new(vec![
        SingularPrimitive::HalfSpaceBoundary { normal: [1.0, 1.0, 1.0], offset: x0.iter().sum(), rate: 0.0 },
        SingularPrimitive::BlowupTime { time: blowup_time },
    ]);
    let meta = Metadata::new("ns_halfspace_blowup")
        .param("T", blowup_time)
        .param("sigma", sigma)
        .param("c", c)
        .param("x0", format!("{x0:?}"))
        .param("pressure_sign", pressure_sign);
    Ok(SolutionPair::new(Arc::new(field), sigma, singular, meta).with_rate_region(MeasureRegion::Point { x: x0 }))
}
