use super::{check_finite, CatalogError, Profile};
use crate::expr::ParamEnv;
use crate::field::{
    FieldError, FlowField, Metadata, SingularPrimitive, SingularSet, SolutionPair, SpaceTimePoint, Vec3, VelocityJet,
};
use std::sync::Arc;

/// The candidate field `u = (v1(eta), v2(eta))`,
/// `eta = (x1 - c1 t) / (x2 - c2 t)`, with zero pressure gradient.
///
/// Not a solution unless both profiles are constant; it exists to be
/// measured.
#[derive(Debug, Clone)]
pub struct AffineAnsatz {
    profiles: [Profile; 2],
    c1: f64,
    c2: f64,
    env: ParamEnv,
}

impl AffineAnsatz {
    fn parts(&self, p: &SpaceTimePoint) -> Result<(f64, f64), FieldError> {
        let n = p.x[0] - self.c1 * p.t;
        let d = p.x[1] - self.c2 * p.t;
        if d == 0.0 {
            return Err(FieldError::Inadmissible("x2 = c2 t".into()));
        }
        Ok((n, d))
    }
}

impl FlowField for AffineAnsatz {
    fn dim(&self) -> usize {
        2
    }

    fn jet(&self, p: &SpaceTimePoint) -> Result<VelocityJet, FieldError> {
        let (n, d) = self.parts(p)?;
        let eta = n / d;
        let e1 = 1.0 / d;
        let e2 = -n / (d * d);
        let et = (self.c2 * n - self.c1 * d) / (d * d);
        let e22 = 2.0 * n / (d * d * d);
        let grad_sq = e1 * e1 + e2 * e2;
        let mut jet = VelocityJet::zero(2);
        for i in 0..2 {
            let v = self.profiles[i].expr.jet_at(eta, &self.env)?;
            jet.value[i] = v.value;
            jet.jacobian[i][0] = v.d1 * e1;
            jet.jacobian[i][1] = v.d1 * e2;
            jet.laplacian[i] = v.d2 * grad_sq + v.d1 * e22;
            jet.dt[i] = v.d1 * et;
        }
        Ok(jet)
    }

    fn velocity(&self, p: &SpaceTimePoint) -> Result<Vec3, FieldError> {
        let (n, d) = self.parts(p)?;
        let eta = n / d;
        Ok([self.profiles[0].expr.eval_real(eta, &self.env)?, self.profiles[1].expr.eval_real(eta, &self.env)?, 0.0])
    }

    fn pressure_gradient(&self, _p: &SpaceTimePoint) -> Result<Vec3, FieldError> {
        Ok([0.0; 3])
    }
}

/// Builds the affine candidate; requires `c2 != 0`.
pub fn affine_ansatz(v1: &str, v2: &str, c1: f64, c2: f64, env: ParamEnv) -> Result<SolutionPair, CatalogError> {
    check_finite("c1", c1)?;
    check_finite("c2", c2)?;
    if c2 == 0.0 {
        return Err(CatalogError::invalid("c2", "must be nonzero"));
    }
    let p1 = Profile::new("v1", v1, "x", &env)?;
    let p2 = Profile::new("v2", v2, "x", &env)?;
    let meta = Metadata::new("affine_ansatz")
        .param("v1", &p1.text)
        .param("v2", &p2.text)
        .param("c1", c1)
        .param("c2", c2)
        .indices(1, 4);
    let singular =
        SingularSet::new(vec![SingularPrimitive::MovingLine { normal: [0.0, 1.0, 0.0], offset: 0.0, rate: c2 }]);
    let field = AffineAnsatz { profiles: [p1, p2], c1, c2, env };
    Ok(SolutionPair::new(Arc::new(field), 0.0, singular, meta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_profile_value_and_jacobian() {
        let sol = affine_ansatz("x", "x", 0.0, 1.0, ParamEnv::new()).unwrap();
        let p = SpaceTimePoint::new2(1.0, 2.0, 0.5);
        let j = sol.jet(&p).unwrap();
        assert_eq!(j.value[0], 1.0 / 1.5);
        assert_eq!(j.jacobian[0][0], 1.0 / 1.5);
        assert!(sol.velocity(&SpaceTimePoint::new2(1.0, 0.5, 0.5)).is_err());
        assert!(affine_ansatz("x", "x", 0.0, 0.0, ParamEnv::new()).is_err());
    }
}
