//! Fourth-order central differences of plain evaluations, used to check
//! every analytic jet entry.

use crate::field::{FieldError, SingularPrimitive, SolutionPair, SpaceTimePoint, Vec3, VelocityJet};
use serde::Serialize;

/// `f'(0)` from samples at `-2h, -h, h, 2h`.
pub fn central1(m2: f64, m1: f64, p1: f64, p2: f64, h: f64) -> f64 {
    (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h)
}

/// `f''(0)` from samples at `-2h, -h, 0, h, 2h`.
pub fn central2(m2: f64, m1: f64, c: f64, p1: f64, p2: f64, h: f64) -> f64 {
    (-m2 + 16.0 * m1 - 30.0 * c + 16.0 * p1 - p2) / (12.0 * h * h)
}

/// Smallest pressure step worth using; closer to a branch cut the pressure
/// comparison is skipped.
pub const MIN_PRESSURE_STEP: f64 = 1e-6;

/// Steps for one point. Spatial steps are per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdSteps {
    pub first: [f64; 3],
    pub second: [f64; 3],
    pub time: f64,
    pub transport_space: [f64; 3],
    pub transport_time: f64,
    /// `None` when the point is too close to a pressure branch cut.
    pub pressure: Option<[f64; 3]>,
}

fn base_step(v: f64) -> f64 {
    1e-4f64.max(1e-4 * v.abs())
}

impl FdSteps {
    /// `h = max(1e-4, 1e-4 |coordinate|)` per axis, ten times that for second
    /// derivatives, every step capped so that stencils keep well clear of
    /// the singular set. The vorticity check differences analytic jacobian
    /// entries once, so like first derivatives it uses `h` itself.
    pub fn adaptive(sol: &SolutionPair, p: &SpaceTimePoint) -> Self {
        let set = sol.singular_set();
        let cap = set.space_step_cap(p);
        let tcap = set.time_step_cap(p);
        let (pcap, _) = set.pressure_step_caps(p);
        let mut s = Self::uniform(0.0);
        for i in 0..p.dim {
            let b = base_step(p.x[i]);
            s.first[i] = b.min(cap);
            s.second[i] = (10.0 * b).min(cap);
            s.transport_space[i] = b.min(cap);
        }
        let tb = base_step(p.t);
        s.time = tb.min(tcap);
        s.transport_time = tb.min(tcap);
        let mut ps = [0.0; 3];
        let mut ok = true;
        for i in 0..p.dim {
            ps[i] = base_step(p.x[i]).min(pcap);
            ok &= ps[i] >= MIN_PRESSURE_STEP;
        }
        s.pressure = ok.then_some(ps);
        s
    }

    /// `h` for first derivatives, pressure and the vorticity check, `10 h`
    /// for second derivatives.
    pub fn uniform(h: f64) -> Self {
        Self {
            first: [h; 3],
            second: [10.0 * h; 3],
            time: h,
            transport_space: [h; 3],
            transport_time: h,
            pressure: Some([h; 3]),
        }
    }
}

/// Velocity derivatives estimated from [`SolutionPair::velocity`] only.
pub fn fd_jet(sol: &SolutionPair, p: &SpaceTimePoint, steps: &FdSteps) -> Result<VelocityJet, FieldError> {
    Ok(fd_jet_with_scale(sol, p, steps)?.0)
}

/// As [`fd_jet`], also returning `sum_j |d_jj u_i|` per component.
fn fd_jet_with_scale(
    sol: &SolutionPair,
    p: &SpaceTimePoint,
    steps: &FdSteps,
) -> Result<(VelocityJet, Vec3), FieldError> {
    let dim = sol.dim();
    let mut lap_scale = [0.0; 3];
    let mut jet = VelocityJet::zero(dim);
    let center = sol.velocity(p)?;
    jet.value = center;
    let at = |q: SpaceTimePoint| sol.velocity(&q);
    for axis in 0..dim {
        let h = steps.first[axis];
        let (m2, m1, p1, p2) = (
            at(p.shifted(axis, -2.0 * h))?,
            at(p.shifted(axis, -h))?,
            at(p.shifted(axis, h))?,
            at(p.shifted(axis, 2.0 * h))?,
        );
        for i in 0..dim {
            jet.jacobian[i][axis] = central1(m2[i], m1[i], p1[i], p2[i], h);
        }
        let h = steps.second[axis];
        let (m2, m1, p1, p2) = (
            at(p.shifted(axis, -2.0 * h))?,
            at(p.shifted(axis, -h))?,
            at(p.shifted(axis, h))?,
            at(p.shifted(axis, 2.0 * h))?,
        );
        for i in 0..dim {
            let d = central2(m2[i], m1[i], center[i], p1[i], p2[i], h);
            jet.laplacian[i] += d;
            lap_scale[i] += d.abs();
        }
    }
    let h = steps.time;
    let (m2, m1, p1, p2) =
        (at(p.shifted_time(-2.0 * h))?, at(p.shifted_time(-h))?, at(p.shifted_time(h))?, at(p.shifted_time(2.0 * h))?);
    for i in 0..dim {
        jet.dt[i] = central1(m2[i], m1[i], p1[i], p2[i], h);
    }
    Ok((jet, lap_scale))
}

/// Pressure gradient from differences of the pressure value.
pub fn fd_pressure_gradient(sol: &SolutionPair, p: &SpaceTimePoint, steps: &[f64; 3]) -> Result<Vec3, FieldError> {
    let mut g = [0.0; 3];
    let here = sol.pressure(p)?;
    for (axis, gi) in g.iter_mut().enumerate().take(sol.dim()) {
        let h = steps[axis];
        let mut vals = [0.0; 4];
        for (k, off) in [-2.0, -1.0, 1.0, 2.0].into_iter().enumerate() {
            let v = sol.pressure(&p.shifted(axis, off * h))?;
            if v.branch != here.branch {
                return Err(FieldError::OnBranchCut);
            }
            vals[k] = v.value;
        }
        *gi = central1(vals[0], vals[1], vals[2], vals[3], h);
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", content = "value", rename_all = "snake_case")]
pub enum PressureCheck {
    Checked(f64),
    /// Too close to a branch cut for a safe stencil.
    Skipped,
    /// The solution has no pressure value.
    Unavailable,
}

/// Relative discrepancy per block: `max |analytic - fd| / max(1, max |analytic|)`.
/// The laplacian block is divided instead by the largest of 1, `|lap u_i|`
/// and `sum_j |d_jj u_i|`, since near a point vortex the axis terms are
/// huge and cancel almost exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FdDiscrepancy {
    pub jacobian: f64,
    pub laplacian: f64,
    pub dt: f64,
    pub pressure_gradient: PressureCheck,
}

impl FdDiscrepancy {
    pub fn max(&self) -> f64 {
        let p = match self.pressure_gradient {
            PressureCheck::Checked(v) => v,
            _ => 0.0,
        };
        self.jacobian.max(self.laplacian).max(self.dt).max(p)
    }
}

fn block(a: &[f64], b: &[f64]) -> f64 {
    block_scaled(a, b, 1.0)
}

fn block_scaled(a: &[f64], b: &[f64], floor: f64) -> f64 {
    let size = a.iter().fold(floor.max(1.0), |m, v| m.max(v.abs()));
    let diff = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    diff / size
}

/// Compares `jet` (the analytic jet at `p`) with finite differences.
pub fn fd_discrepancy(
    sol: &SolutionPair,
    p: &SpaceTimePoint,
    jet: &VelocityJet,
    steps: &FdSteps,
) -> Result<FdDiscrepancy, FieldError> {
    let dim = sol.dim();
    let (fd, lap_scale) = fd_jet_with_scale(sol, p, steps)?;
    let flat = |m: &[[f64; 3]; 3]| m[..dim].iter().flat_map(|r| r[..dim].to_vec()).collect::<Vec<_>>();
    let jacobian = block(&flat(&jet.jacobian), &flat(&fd.jacobian));
    let lap_floor = lap_scale[..dim].iter().fold(0.0f64, |m, v| m.max(*v));
    let laplacian = block_scaled(&jet.laplacian[..dim], &fd.laplacian[..dim], lap_floor);
    let dt = block(&jet.dt[..dim], &fd.dt[..dim]);
    let pressure_gradient = match sol.pressure(p) {
        Err(FieldError::PressureUnavailable) => PressureCheck::Unavailable,
        Err(FieldError::OnBranchCut) => PressureCheck::Skipped,
        Err(e) => return Err(e),
        Ok(_) => match &steps.pressure {
            None => PressureCheck::Skipped,
            Some(h) => {
                let analytic = sol.pressure_gradient(p)?;
                match fd_pressure_gradient(sol, p, h) {
                    Ok(g) => PressureCheck::Checked(block(&analytic[..dim], &g[..dim])),
                    Err(FieldError::OnBranchCut) => PressureCheck::Skipped,
                    Err(e) => return Err(e),
                }
            }
        },
    };
    Ok(FdDiscrepancy { jacobian, laplacian, dt, pressure_gradient })
}

/// Whether every stencil with spatial radius `space` and time radius `time`
/// around `p` stays inside the admissible region.
pub fn stencil_clear(sol: &SolutionPair, p: &SpaceTimePoint, space: f64, time: f64) -> bool {
    sol.singular_set().primitives.iter().all(|prim| match prim {
        SingularPrimitive::BranchPlane { .. } => true,
        SingularPrimitive::BlowupTime { time: t } => t - p.t > time,
        _ => prim.distance(p) > space + time * prim.drift_speed(),
    })
}

/// Maximum relative discrepancy between the analytic jet and fourth-order
/// differences with step `h` (`10 h` for second derivatives).
pub fn fd_crosscheck(sol: &SolutionPair, p: &SpaceTimePoint, h: f64) -> Result<f64, FieldError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(FieldError::Inadmissible(format!("step {h} must be positive")));
    }
    if !stencil_clear(sol, p, 20.0 * h, 2.0 * h) {
        return Err(FieldError::Inadmissible(format!("stencil of step {h} leaves the admissible region at {p}")));
    }
    let jet = sol.jet(p)?;
    Ok(fd_discrepancy(sol, p, &jet, &FdSteps::uniform(h))?.max())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{linear3d, mutants::Mutation, preset, PresetId};
    use crate::expr::ParamEnv;

    #[test]
    fn stencils_are_exact_on_quartics() {
        let f = |x: f64| 3.0 - x + 2.0 * x * x - 0.5 * x.powi(3) + 0.25 * x.powi(4);
        let h = 0.5;
        let d1 = central1(f(-2.0 * h), f(-h), f(h), f(2.0 * h), h);
        let d2 = central2(f(-2.0 * h), f(-h), f(0.0), f(h), f(2.0 * h), h);
        assert!((d1 + 1.0).abs() < 1e-14);
        assert!((d2 - 4.0).abs() < 1e-13);
    }

    #[test]
    fn bump_vortex_agrees() {
        let sol = preset(PresetId::Ex3_2).unwrap();
        let d = fd_crosscheck(&sol, &SpaceTimePoint::new2(0.7, -1.1, 0.3), 1e-3).unwrap();
        assert!(d <= 1e-5, "{d}");
    }

    #[test]
    fn linear_flow_is_exact() {
        let c = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -2.0]];
        let sol = linear3d("1", c, 0.0, ParamEnv::new()).unwrap();
        let p = SpaceTimePoint::new3(0.3, -1.2, 2.0, 0.5);
        let jet = sol.jet(&p).unwrap();
        let d = fd_discrepancy(&sol, &p, &jet, &FdSteps::uniform(1e-3)).unwrap();
        assert!(d.jacobian <= 1e-12, "{d:?}");
        // second differences of a linear field only see rounding
        assert!(d.laplacian <= 1e-9, "{d:?}");
    }

    #[test]
    fn scaled_laplacian_is_detected() {
        let sol = Mutation::ScaledLaplacian.build().unwrap();
        let d = fd_crosscheck(&sol, &SpaceTimePoint::new2(0.2, 0.9, 0.1), 1e-3).unwrap();
        assert!(d >= 1e-3, "{d}");
    }

    #[test]
    fn stencil_must_be_admissible() {
        let sol = preset(PresetId::Ex2_5).unwrap();
        assert!(fd_crosscheck(&sol, &SpaceTimePoint::new2(0.01, 0.0, 0.0), 1e-3).is_err());
        assert!(fd_crosscheck(&sol, &SpaceTimePoint::new2(0.5, 0.0, 0.0), 1e-3).is_ok());
    }
}
