//! Lebesgue norms over planar annuli and boxes, and the whole-plane energy
//! of `u - C` backed by a decay envelope.

use super::quad::{integrate, QuadConfig, QuadError};
use super::{field_to_quad, AnalysisError};
use crate::field::{SingularPrimitive, SolutionPair, SpaceTimePoint, Vec3};
use serde::Serialize;
use std::f64::consts::PI;

/// Truncation radius for whole-plane integrals; the rest is covered by the
/// analytic tail bound of the decay envelope.
pub const ENERGY_R_MAX: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormDomain {
    /// `delta < |x| < outer`; `outer` may be infinite.
    Annulus {
        delta: f64,
        outer: f64,
    },
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormSpec {
    pub q: f64,
    pub domain: NormDomain,
    pub t: f64,
    /// Constant vector subtracted from `u` before taking the norm.
    pub subtract: Option<Vec3>,
}

impl NormSpec {
    pub fn annulus(q: f64, delta: f64, outer: f64, t: f64) -> Self {
        Self { q, domain: NormDomain::Annulus { delta, outer }, t, subtract: None }
    }

    pub fn minus(mut self, c: Vec3) -> Self {
        self.subtract = Some(c);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormValue {
    /// `integral |u - C|^q`.
    pub integral: f64,
    /// `integral^(1/q)`.
    pub norm: f64,
    pub error: f64,
    /// `radial` when the speed depends on `r` only, else `polar` or `box`.
    pub method: &'static str,
}

fn inner_cfg() -> QuadConfig {
    QuadConfig { abs_tol: 1e-15, rel_tol: 1e-12, max_intervals: 2000 }
}

fn outer_cfg() -> QuadConfig {
    QuadConfig { abs_tol: 1e-14, rel_tol: 1e-10, max_intervals: 4000 }
}

fn validate(sol: &SolutionPair, spec: &NormSpec) -> Result<(), AnalysisError> {
    if !(spec.q >= 1.0 && spec.q.is_finite()) {
        return Err(AnalysisError::Invalid(format!("exponent q = {} must be finite and at least 1", spec.q)));
    }
    if !spec.t.is_finite() {
        return Err(AnalysisError::Invalid("time must be finite".into()));
    }
    if let Some(tb) = sol.singular_set().blowup_time() {
        if spec.t >= tb {
            return Err(AnalysisError::Domain(format!("t = {} is not before the blow-up time {tb}", spec.t)));
        }
    }
    match &spec.domain {
        NormDomain::Annulus { delta, outer } => {
            if sol.dim() != 2 {
                return Err(AnalysisError::Invalid("annuli need a planar solution".into()));
            }
            if !(*delta > 0.0 && delta.is_finite() && outer > delta) {
                return Err(AnalysisError::Invalid(format!(
                    "annulus needs 0 < delta < R, got delta = {delta}, R = {outer}"
                )));
            }
            check_annulus(sol, *delta, *outer, spec.t)
        }
        NormDomain::Box { lower, upper } => {
            if lower.len() != sol.dim() || upper.len() != sol.dim() {
                return Err(AnalysisError::Invalid("box dimension does not match the solution".into()));
            }
            if lower.iter().zip(upper).any(|(a, b)| !(a.is_finite() && b.is_finite() && a < b)) {
                return Err(AnalysisError::Invalid("box ranges must be finite and nondegenerate".into()));
            }
            check_box(sol, lower, upper, spec.t)
        }
    }
}

fn moving_offset(normal: &Vec3, offset: f64, rate: f64, t: f64) -> (f64, f64) {
    let n = (normal[0] * normal[0] + normal[1] * normal[1] + normal[2] * normal[2]).sqrt();
    ((offset + rate * t) / n, n)
}

fn check_annulus(sol: &SolutionPair, delta: f64, outer: f64, t: f64) -> Result<(), AnalysisError> {
    for prim in &sol.singular_set().primitives {
        let bad = || Err(AnalysisError::Domain(prim.describe()));
        match prim {
            SingularPrimitive::Point { center, velocity } => {
                let c = [center[0] + velocity[0] * t, center[1] + velocity[1] * t];
                let d = c[0].hypot(c[1]);
                if d >= delta && d <= outer {
                    return bad();
                }
            }
            SingularPrimitive::MovingLine { normal, offset, rate } => {
                if moving_offset(normal, *offset, *rate, t).0.abs() < outer {
                    return bad();
                }
            }
            SingularPrimitive::HalfSpaceBoundary { normal, offset, rate } => {
                if moving_offset(normal, *offset, *rate, t).0 > -outer {
                    return bad();
                }
            }
            _ => {}
        }
    }
    Ok(())
}

fn corners(lower: &[f64], upper: &[f64]) -> Vec<Vec3> {
    let dim = lower.len();
    (0..1usize << dim)
        .map(|mask| {
            let mut x = [0.0; 3];
            for i in 0..dim {
                x[i] = if mask >> i & 1 == 1 { upper[i] } else { lower[i] };
            }
            x
        })
        .collect()
}

fn check_box(sol: &SolutionPair, lower: &[f64], upper: &[f64], t: f64) -> Result<(), AnalysisError> {
    let cs = corners(lower, upper);
    for prim in &sol.singular_set().primitives {
        let bad = || Err(AnalysisError::Domain(prim.describe()));
        match prim {
            SingularPrimitive::Point { center, velocity } => {
                let inside = (0..lower.len()).all(|i| {
                    let c = center[i] + velocity[i] * t;
                    lower[i] <= c && c <= upper[i]
                });
                if inside {
                    return bad();
                }
            }
            SingularPrimitive::MovingLine { normal, offset, rate } => {
                let side: Vec<f64> = cs
                    .iter()
                    .map(|x| normal[0] * x[0] + normal[1] * x[1] + normal[2] * x[2] - offset - rate * t)
                    .collect();
                let pos = side.iter().all(|s| *s > 0.0);
                let neg = side.iter().all(|s| *s < 0.0);
                if !(pos || neg) {
                    return bad();
                }
            }
            SingularPrimitive::HalfSpaceBoundary { normal, offset, rate } => {
                let ok = cs
                    .iter()
                    .all(|x| normal[0] * x[0] + normal[1] * x[1] + normal[2] * x[2] - offset - rate * t >= 0.0);
                if !ok {
                    return bad();
                }
            }
            _ => {}
        }
    }
    Ok(())
}

fn speed_minus(sol: &SolutionPair, p: &SpaceTimePoint, c: &Vec3) -> Result<f64, QuadError> {
    let u = sol.velocity(p).map_err(field_to_quad(p.x[0]))?;
    let mut s = 0.0;
    for i in 0..sol.dim() {
        s += (u[i] - c[i]).powi(2);
    }
    Ok(s.sqrt())
}

/// `integral over [a, b]` of a radial integrand, splitting off `[R1, inf)`
/// and mapping it to `s = 1/r`.
fn radial_integral<F>(mut f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<(f64, f64), QuadError>
where
    F: FnMut(f64) -> Result<f64, QuadError>,
{
    if b.is_finite() {
        let r = integrate(&mut f, a, b, cfg)?;
        return Ok((r.value, r.error));
    }
    let split = (2.0 * a).max(1.0);
    let near = integrate(&mut f, a, split, cfg)?;
    let far = integrate(
        |s: f64| {
            let r = 1.0 / s;
            Ok(f(r)? * r * r)
        },
        0.0,
        1.0 / split,
        cfg,
    )?;
    Ok((near.value + far.value, near.error + far.error))
}

/// Polar integral of `|u - c|^q` over `rho_a < |x - center| < rho_b`.
fn polar_integral(
    sol: &SolutionPair,
    center: [f64; 2],
    c: &Vec3,
    q: f64,
    t: f64,
    rho_a: f64,
    rho_b: f64,
) -> Result<(f64, f64), QuadError> {
    let inner = inner_cfg();
    let radial = |rho: f64| -> Result<f64, QuadError> {
        let ring = integrate(
            |th: f64| {
                let p = SpaceTimePoint::new2(center[0] + rho * th.cos(), center[1] + rho * th.sin(), t);
                Ok(speed_minus(sol, &p, c)?.powf(q))
            },
            0.0,
            2.0 * PI,
            &inner,
        )?;
        Ok(ring.value * rho)
    };
    radial_integral(radial, rho_a, rho_b, &outer_cfg())
}

fn box_integral(
    sol: &SolutionPair,
    lower: &[f64],
    upper: &[f64],
    c: &Vec3,
    q: f64,
    t: f64,
) -> Result<(f64, f64), QuadError> {
    // the last axis is innermost
    fn level(
        sol: &SolutionPair,
        lower: &[f64],
        upper: &[f64],
        c: &Vec3,
        q: f64,
        t: f64,
        x: &mut Vec3,
        axis: usize,
    ) -> Result<(f64, f64), QuadError> {
        let dim = lower.len();
        let cfg = if axis + 1 == dim { inner_cfg() } else { outer_cfg() };
        let mut err = 0.0;
        let mut r = integrate(
            |v: f64| {
                let mut y = *x;
                y[axis] = v;
                if axis + 1 == dim {
                    let p = SpaceTimePoint { dim, x: y, t };
                    Ok(speed_minus(sol, &p, c)?.powf(q))
                } else {
                    let (val, e) = level(sol, lower, upper, c, q, t, &mut y, axis + 1)?;
                    err += e;
                    Ok(val)
                }
            },
            lower[axis],
            upper[axis],
            &cfg,
        )?;
        r.error += err;
        Ok((r.value, r.error))
    }
    let mut x = [0.0; 3];
    level(sol, lower, upper, c, q, t, &mut x, 0)
}

/// `||u - C||_{L^q}` over an annulus or box at a fixed time.
///
/// Rotationally symmetric speeds (with nothing subtracted) reduce to
/// `2 pi integral |u|^q r dr`; everything else uses nested adaptive
/// quadrature.
pub fn annulus_lq_norm(sol: &SolutionPair, spec: &NormSpec) -> Result<NormValue, AnalysisError> {
    validate(sol, spec)?;
    let c = spec.subtract.unwrap_or([0.0; 3]);
    let (integral, error, method) = match &spec.domain {
        NormDomain::Annulus { delta, outer } => {
            let subtracts = c.iter().any(|v| *v != 0.0);
            let probe = if subtracts { None } else { sol.field().radial_speed(*delta, spec.t) };
            match probe {
                Some(first) => {
                    first?;
                    let field = sol.field().clone();
                    let t = spec.t;
                    let f = |r: f64| -> Result<f64, QuadError> {
                        let s = field
                            .radial_speed(r, t)
                            .unwrap_or_else(|| unreachable!("radial speed disappeared"))
                            .map_err(field_to_quad(r))?;
                        if !s.is_finite() {
                            return Err(QuadError::NonFinite(r));
                        }
                        Ok(2.0 * PI * s.powf(spec.q) * r)
                    };
                    let (v, e) = radial_integral(f, *delta, *outer, &QuadConfig::default())?;
                    (v, e, "radial")
                }
                None => {
                    let (v, e) = polar_integral(sol, [0.0, 0.0], &c, spec.q, spec.t, *delta, *outer)?;
                    (v, e, "polar")
                }
            }
        }
        NormDomain::Box { lower, upper } => {
            let (v, e) = box_integral(sol, lower, upper, &c, spec.q, spec.t)?;
            (v, e, "box")
        }
    };
    Ok(NormValue { integral, norm: integral.powf(1.0 / spec.q), error, method })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyReport {
    /// `integral over |x - centre| < r_max of |u - C|^2`.
    pub value: f64,
    pub quadrature_error: f64,
    /// Rigorous bound on the remaining integral beyond `r_max`.
    pub tail_bound: f64,
    pub r_max: f64,
    pub t: f64,
    pub center: [f64; 2],
}

impl EnergyReport {
    /// Interval guaranteed to contain the whole-plane value, up to
    /// quadrature error.
    pub fn bounds(&self) -> (f64, f64) {
        (self.value - self.quadrature_error, self.value + self.quadrature_error + self.tail_bound)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceLaw {
    /// Shell integrals over `[10^k, 10^(k+1)]` are equal: `~ ln R` growth.
    Logarithmic,
    /// Shell integrals grow geometrically.
    Power,
    /// `u - C` tends to a nonzero constant.
    NonDecaying,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Shell {
    pub inner: f64,
    pub outer: f64,
    pub integral: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyDiagnosis {
    pub law: DivergenceLaw,
    pub reason: String,
    pub shells: Vec<Shell>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum EnergyOutcome {
    Finite(EnergyReport),
    NotFinite(EnergyDiagnosis),
}

fn shells(sol: &SolutionPair, center: [f64; 2], c: &Vec3, t: f64) -> Vec<Shell> {
    let mut out = Vec::new();
    for k in 0..3 {
        let (a, b) = (10f64.powi(k), 10f64.powi(k + 1));
        match polar_integral(sol, center, c, 2.0, t, a, b) {
            Ok((v, _)) => out.push(Shell { inner: a, outer: b, integral: v }),
            Err(_) => break,
        }
    }
    out
}

fn classify(shells: &[Shell]) -> DivergenceLaw {
    if shells.len() < 3 || shells.iter().any(|s| !(s.integral > 0.0)) {
        return DivergenceLaw::Unknown;
    }
    let r1 = shells[1].integral / shells[0].integral;
    let r2 = shells[2].integral / shells[1].integral;
    if (r1 - 1.0).abs() < 1e-2 && (r2 - 1.0).abs() < 1e-2 {
        DivergenceLaw::Logarithmic
    } else if r1 > 1.5 && r2 > 1.5 {
        DivergenceLaw::Power
    } else {
        DivergenceLaw::Unknown
    }
}

/// `||u(., t) - C||^2` over the whole plane: quadrature out to
/// [`ENERGY_R_MAX`] around the envelope centre plus the tail bound
/// `2 pi kappa^2 R^(2 - 2p) / (2p - 2)` from `|u - C| <= kappa / rho^p`.
///
/// Without an envelope, or when the envelope does not make the tail
/// integrable, a diagnosis is returned instead of a number.
pub fn l2_energy_difference(sol: &SolutionPair, c: &[f64], t: f64) -> Result<EnergyOutcome, AnalysisError> {
    if sol.dim() != 2 {
        return Err(AnalysisError::Invalid("whole-plane energy needs a planar solution".into()));
    }
    if c.len() != 2 || c.iter().any(|v| !v.is_finite()) {
        return Err(AnalysisError::Invalid("the subtracted constant must have two finite components".into()));
    }
    if !t.is_finite() {
        return Err(AnalysisError::Invalid("time must be finite".into()));
    }
    if let Some(tb) = sol.singular_set().blowup_time() {
        if t >= tb {
            return Err(AnalysisError::Domain(format!("t = {t} is not before the blow-up time {tb}")));
        }
    }
    let cv = [c[0], c[1], 0.0];
    let Some(env) = sol.decay() else {
        return Ok(EnergyOutcome::NotFinite(EnergyDiagnosis {
            law: DivergenceLaw::Unknown,
            reason: "no decay envelope registered; divergent or unknown".into(),
            shells: Vec::new(),
        }));
    };
    let cen = env.center_at(t);
    let center = [cen[0], cen[1]];
    let kappa = env.kappa(t);
    if !kappa.is_finite() {
        return Err(AnalysisError::Invalid(format!("decay constant is not finite at t = {t}")));
    }
    let offset = (env.far_field[0] - cv[0]).hypot(env.far_field[1] - cv[1]);
    if offset > 0.0 {
        let sh = shells(sol, center, &cv, t);
        return Ok(EnergyOutcome::NotFinite(EnergyDiagnosis {
            law: DivergenceLaw::NonDecaying,
            reason: format!("u - C tends to a constant of size {offset} at infinity"),
            shells: sh,
        }));
    }
    if kappa > 0.0 && 2.0 * env.power <= 2.0 {
        let sh = shells(sol, center, &cv, t);
        let law = classify(&sh);
        let reason = match law {
            DivergenceLaw::Logarithmic => {
                format!("log-divergent: |u - C| ~ {kappa} / rho, shell integrals over decades are equal")
            }
            _ => format!("envelope |u - C| <= {kappa} / rho^{} does not bound a finite energy", env.power),
        };
        return Ok(EnergyOutcome::NotFinite(EnergyDiagnosis { law, reason, shells: sh }));
    }
    // The core must be free of singularities or certified bounded.
    for prim in &sol.singular_set().primitives {
        match prim {
            SingularPrimitive::Point { center: pc, velocity } => {
                let at = [pc[0] + velocity[0] * t - center[0], pc[1] + velocity[1] * t - center[1]];
                if at[0].hypot(at[1]) > 1e-12 || !env.bounded_core {
                    return Ok(EnergyOutcome::NotFinite(EnergyDiagnosis {
                        law: DivergenceLaw::Unknown,
                        reason: format!("integrability near {} is not certified", prim.describe()),
                        shells: Vec::new(),
                    }));
                }
            }
            SingularPrimitive::MovingLine { .. } | SingularPrimitive::HalfSpaceBoundary { .. } => {
                return Ok(EnergyOutcome::NotFinite(EnergyDiagnosis {
                    law: DivergenceLaw::Unknown,
                    reason: format!("{} crosses the plane", prim.describe()),
                    shells: Vec::new(),
                }));
            }
            _ => {}
        }
    }
    let mut value = 0.0;
    let mut err = 0.0;
    let edges = [0.0, 1.0, 10.0, 100.0, ENERGY_R_MAX];
    for w in edges.windows(2) {
        let (v, e) = polar_integral(sol, center, &cv, 2.0, t, w[0], w[1])?;
        value += v;
        err += e;
    }
    let p = env.power;
    let tail_bound = 2.0 * PI * kappa * kappa * ENERGY_R_MAX.powf(2.0 - 2.0 * p) / (2.0 * p - 2.0);
    Ok(EnergyOutcome::Finite(EnergyReport { value, quadrature_error: err, tail_bound, r_max: ENERGY_R_MAX, t, center }))
}
