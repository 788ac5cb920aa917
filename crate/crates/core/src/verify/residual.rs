//! Pointwise residuals of the momentum, continuity and vorticity equations.
//!
//! Each check returns the raw residual together with a magnitude scale
//! built from the absolute values of the terms that cancel in it. Near a
//! singular set those terms grow without bound while double precision keeps
//! only about 16 digits, so verdicts are taken on `raw / max(1, scale)`.

use super::fd::{central1, FdSteps};
use crate::field::{FieldError, SolutionPair, SpaceTimePoint, Vec3, VelocityJet};

/// A residual and the size of the terms that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub raw: f64,
    pub scale: f64,
}

impl Scaled {
    pub fn relative(&self) -> f64 {
        self.raw / self.scale.max(1.0)
    }
}

fn norm(v: &Vec3) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// `u_t + (u.grad)u + grad p - sigma lap u` from a jet and pressure gradient,
/// with the per-component sum of term magnitudes.
pub fn assemble_momentum(jet: &VelocityJet, grad_p: &Vec3, sigma: f64) -> (Vec3, Vec3) {
    let mut r = [0.0; 3];
    let mut s = [0.0; 3];
    for i in 0..jet.dim {
        let mut conv = 0.0;
        let mut conv_abs = 0.0;
        for j in 0..jet.dim {
            let term = jet.value[j] * jet.jacobian[i][j];
            conv += term;
            conv_abs += term.abs();
        }
        r[i] = jet.dt[i] + conv + grad_p[i] - sigma * jet.laplacian[i];
        s[i] = jet.dt[i].abs() + conv_abs + grad_p[i].abs() + (sigma * jet.laplacian[i]).abs();
    }
    (r, s)
}

pub fn momentum_residual(sol: &SolutionPair, p: &SpaceTimePoint) -> Result<Vec3, FieldError> {
    let jet = sol.jet(p)?;
    let g = sol.pressure_gradient(p)?;
    Ok(assemble_momentum(&jet, &g, sol.viscosity()).0)
}

/// Euclidean norm of the momentum residual with its term scale.
pub fn momentum_check(sol: &SolutionPair, p: &SpaceTimePoint) -> Result<Scaled, FieldError> {
    let jet = sol.jet(p)?;
    let g = sol.pressure_gradient(p)?;
    let (r, s) = assemble_momentum(&jet, &g, sol.viscosity());
    Ok(Scaled { raw: norm(&r), scale: norm(&s) })
}

pub fn divergence(sol: &SolutionPair, p: &SpaceTimePoint) -> Result<f64, FieldError> {
    Ok(sol.jet(p)?.divergence())
}

pub fn divergence_check_jet(jet: &VelocityJet) -> Scaled {
    let scale = (0..jet.dim).map(|i| jet.jacobian[i][i].abs()).sum();
    Scaled { raw: jet.divergence().abs(), scale }
}

pub fn divergence_check(sol: &SolutionPair, p: &SpaceTimePoint) -> Result<Scaled, FieldError> {
    Ok(divergence_check_jet(&sol.jet(p)?))
}

fn require_2d(sol: &SolutionPair) -> Result<(), FieldError> {
    if sol.dim() == 2 {
        Ok(())
    } else {
        Err(FieldError::Dimension { expected: 2, got: sol.dim() })
    }
}

/// `omega_t + u . grad omega` with `omega = d1 u2 - d2 u1`, derivatives of
/// `omega` by central differences with the default steps.
pub fn vorticity_transport_residual(sol: &SolutionPair, p: &SpaceTimePoint) -> Result<f64, FieldError> {
    Ok(vorticity_transport_check(sol, p, &FdSteps::adaptive(sol, p))?.raw)
}

/// As [`vorticity_transport_residual`] with explicit steps. The two
/// jacobian entries making up `omega` are differenced separately so the
/// scale reflects the size of what cancels.
pub fn vorticity_transport_check(
    sol: &SolutionPair,
    p: &SpaceTimePoint,
    steps: &FdSteps,
) -> Result<Scaled, FieldError> {
    require_2d(sol)?;
    let jet = sol.jet(p)?;
    let parts = |q: &SpaceTimePoint| -> Result<[f64; 2], FieldError> {
        let j = sol.jet(q)?;
        Ok([j.jacobian[1][0], j.jacobian[0][1]])
    };
    let diff = |f: &dyn Fn(f64) -> SpaceTimePoint, h: f64| -> Result<[f64; 2], FieldError> {
        let m2 = parts(&f(-2.0 * h))?;
        let m1 = parts(&f(-h))?;
        let p1 = parts(&f(h))?;
        let p2 = parts(&f(2.0 * h))?;
        Ok([central1(m2[0], m1[0], p1[0], p2[0], h), central1(m2[1], m1[1], p1[1], p2[1], h)])
    };
    let dt = diff(&|k| p.shifted_time(k), steps.transport_time)?;
    let mut raw = dt[0] - dt[1];
    let mut scale = dt[0].abs() + dt[1].abs();
    for axis in 0..2 {
        let d = diff(&|k| p.shifted(axis, k), steps.transport_space[axis])?;
        let u = jet.value[axis];
        raw += u * (d[0] - d[1]);
        scale += u.abs() * (d[0].abs() + d[1].abs());
    }
    Ok(Scaled { raw: raw.abs(), scale })
}

/// Momentum residual with every derivative replaced by central differences
/// of plain velocity evaluations, and the analytic pressure gradient.
pub fn fd_momentum_residual(sol: &SolutionPair, p: &SpaceTimePoint, steps: &FdSteps) -> Result<Vec3, FieldError> {
    let jet = super::fd::fd_jet(sol, p, steps)?;
    let g = sol.pressure_gradient(p)?;
    Ok(assemble_momentum(&jet, &g, sol.viscosity()).0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{ij_vortex, preset, twin_wave, PresetId};
    use crate::expr::ParamEnv;

    #[test]
    fn constant_field_has_zero_residual() {
        let sol = twin_wave("0", 0.4, -1.0, 2.0, ParamEnv::new(), &[]).unwrap();
        let p = SpaceTimePoint::new2(0.1, 0.2, 0.3);
        assert_eq!(momentum_residual(&sol, &p).unwrap(), [0.0; 3]);
        assert_eq!(vorticity_transport_residual(&sol, &p).unwrap(), 0.0);
        assert_eq!(divergence(&sol, &p).unwrap(), 0.0);
    }

    #[test]
    fn boosted_bump_vortex_cancels() {
        let sol = preset(PresetId::Ex3_2).unwrap();
        let r = momentum_residual(&sol, &SpaceTimePoint::new2(1.0, 1.0, 0.5)).unwrap();
        assert!(norm(&r) <= 1e-10, "{r:?}");
    }

    #[test]
    fn flipped_angular_pressure_is_detected() {
        // c = t: negating the angular term leaves a residual 2 |c'| / r
        let sol = ij_vortex("t", "0", ParamEnv::new()).unwrap();
        let p = SpaceTimePoint::new2(1.0, 1.0, 0.0);
        let j = sol.jet(&p).unwrap();
        let mut g = sol.pressure_gradient(&p).unwrap();
        let r2 = 2.0;
        g[0] += 2.0 * p.x[1] / r2;
        g[1] -= 2.0 * p.x[0] / r2;
        let (r, _) = assemble_momentum(&j, &g, 0.0);
        assert!(norm(&r) >= 0.5);
        assert!((norm(&r) - 2.0 / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn vortex_divergence_vanishes() {
        let sol = ij_vortex("cos(t)", "1/(1+r^2)", ParamEnv::new()).unwrap();
        for t in [0.0, 0.5, 3.0] {
            assert!(divergence(&sol, &SpaceTimePoint::new2(1.0, 1.0, t)).unwrap().abs() <= 1e-12);
        }
    }

    #[test]
    fn vorticity_is_transported() {
        let vortex = ij_vortex("1", "-1/r^2 + 1/(1+r^2)^2", ParamEnv::new()).unwrap();
        let wave = twin_wave("1/(1+x^2)", 0.3, -0.2, 1.7, ParamEnv::new(), &[]).unwrap();
        for sol in [vortex, wave] {
            for p in [SpaceTimePoint::new2(0.5, 1.3, 0.2), SpaceTimePoint::new2(-2.0, 0.7, 0.9)] {
                let v = vorticity_transport_residual(&sol, &p).unwrap();
                assert!(v <= 1e-8, "{v}");
            }
        }
    }

    #[test]
    fn hand_cancelling_twin_wave() {
        let sol = twin_wave("x", 0.0, 0.0, 1.0, ParamEnv::new(), &[]).unwrap();
        let p = SpaceTimePoint::new2(1.3, -0.4, 0.6);
        let u = sol.velocity(&p).unwrap();
        assert_eq!(u[0], u[1]);
        assert_eq!(momentum_residual(&sol, &p).unwrap(), [0.0; 3]);
    }

    #[test]
    fn halfspace_sign_discrimination() {
        let good = crate::catalog::ns_halfspace_blowup(1.0, 1.0, 0.0, [0.0; 3], 1.0).unwrap();
        let bad = crate::catalog::ns_halfspace_blowup(1.0, 1.0, 0.0, [0.0; 3], -1.0).unwrap();
        let p = SpaceTimePoint::new3(1.0, 0.0, 0.0, 0.5);
        let g = momentum_check(&good, &p).unwrap();
        assert!(g.relative() <= 1e-12, "{g:?}");
        let b = momentum_check(&bad, &p).unwrap();
        assert!(b.raw >= 0.1);
        // sqrt(3) theta^{-3/2} at theta = 1/2
        assert!((b.raw - 3f64.sqrt() * 0.5f64.powf(-1.5)).abs() < 1e-12);
    }
}
