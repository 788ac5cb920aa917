//! Power-law fits of norms approaching a blow-up time.

use super::norms::{annulus_lq_norm, NormSpec};
use super::AnalysisError;
use crate::field::{MeasureRegion, SolutionPair, SpaceTimePoint};
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateMeasure {
    /// `sup |u(., t)|` over the region.
    Sup { region: MeasureRegion },
    /// `||u(., t)||_{L^q(delta < r < outer)}`.
    Lq { q: f64, delta: f64, outer: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    /// `None` uses the solution's registered rate region with the sup norm.
    pub measure: Option<RateMeasure>,
    /// Number of sample times, at least 6.
    pub samples: usize,
    /// Sample times are `T (1 - 2^-k)` for `k = k_start .. k_start + samples - 1`.
    pub k_start: u32,
}

impl Default for RateFit {
    fn default() -> Self {
        Self { measure: None, samples: 10, k_start: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFitResult {
    /// `alpha` in `||u(., t)|| ~ A (T - t)^alpha`.
    pub exponent: f64,
    pub log_prefactor: f64,
    /// Root-mean-square residual of the log-log regression.
    pub rms_residual: f64,
    pub blowup_time: f64,
    pub measure: RateMeasure,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

const GRID: usize = 33;
const ZOOM_GRID: usize = 9;
const ZOOM_ROUNDS: usize = 4;

/// Maps unit coordinates to a point of the region.
fn region_point(region: &MeasureRegion, dim: usize, s: &[f64], t: f64) -> SpaceTimePoint {
    match region {
        MeasureRegion::Annulus { inner, outer } => {
            let r = inner + s[0] * (outer - inner);
            let th = 2.0 * PI * s[1];
            SpaceTimePoint::new2(r * th.cos(), r * th.sin(), t)
        }
        MeasureRegion::Ball { radius } => {
            let r = radius * s[0];
            if dim == 2 {
                let th = 2.0 * PI * s[1];
                SpaceTimePoint::new2(r * th.cos(), r * th.sin(), t)
            } else {
                let polar = PI * s[1];
                let az = 2.0 * PI * s[2];
                SpaceTimePoint::new3(r * polar.sin() * az.cos(), r * polar.sin() * az.sin(), r * polar.cos(), t)
            }
        }
        MeasureRegion::Point { x } => SpaceTimePoint { dim, x: *x, t },
    }
}

fn speed(sol: &SolutionPair, p: &SpaceTimePoint) -> Result<f64, AnalysisError> {
    let u = sol.velocity(p)?;
    Ok((u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt())
}

/// Evaluates on a tensor grid `[lo, hi]^d` (unit coordinates) and returns
/// the best value and its location.
fn grid_max(
    sol: &SolutionPair,
    region: &MeasureRegion,
    lo: &[f64],
    hi: &[f64],
    n: usize,
    t: f64,
) -> Result<(f64, Vec<f64>), AnalysisError> {
    let d = lo.len();
    let mut best = (f64::NEG_INFINITY, lo.to_vec());
    let total = n.pow(d as u32);
    let mut s = vec![0.0; d];
    for idx in 0..total {
        let mut k = idx;
        for a in 0..d {
            let i = k % n;
            k /= n;
            s[a] = lo[a] + (hi[a] - lo[a]) * i as f64 / (n - 1) as f64;
        }
        let v = speed(sol, &region_point(region, sol.dim(), &s, t))?;
        if v > best.0 {
            best = (v, s.clone());
        }
    }
    Ok(best)
}

/// Maximum speed over a measuring region at time `t`: a tensor grid in
/// polar (or spherical) coordinates, refined by repeated zooming around
/// the best node. Boundaries are always on the grid.
pub fn sup_norm(sol: &SolutionPair, region: &MeasureRegion, t: f64) -> Result<f64, AnalysisError> {
    let dim = sol.dim();
    let d = match region {
        MeasureRegion::Point { .. } => 0,
        MeasureRegion::Annulus { inner, outer } => {
            if dim != 2 {
                return Err(AnalysisError::Invalid("annulus regions need a planar solution".into()));
            }
            if !(*inner > 0.0 && outer > inner && outer.is_finite()) {
                return Err(AnalysisError::Invalid("annulus needs 0 < inner < outer".into()));
            }
            2
        }
        MeasureRegion::Ball { radius } => {
            if !(*radius > 0.0 && radius.is_finite()) {
                return Err(AnalysisError::Invalid("ball radius must be positive".into()));
            }
            dim
        }
    };
    if d == 0 {
        return speed(sol, &region_point(region, dim, &[], t));
    }
    let (mut best, mut at) = grid_max(sol, region, &vec![0.0; d], &vec![1.0; d], GRID, t)?;
    let mut half = 1.0 / (GRID - 1) as f64;
    for _ in 0..ZOOM_ROUNDS {
        let lo: Vec<f64> = at.iter().map(|s| (s - half).max(0.0)).collect();
        let hi: Vec<f64> = at.iter().map(|s| (s + half).min(1.0)).collect();
        let (v, s) = grid_max(sol, region, &lo, &hi, ZOOM_GRID, t)?;
        if v > best {
            best = v;
            at = s;
        }
        half *= 2.0 / (ZOOM_GRID - 1) as f64;
    }
    Ok(best)
}

fn measure_at(sol: &SolutionPair, m: &RateMeasure, t: f64) -> Result<f64, AnalysisError> {
    match m {
        RateMeasure::Sup { region } => sup_norm(sol, region, t),
        RateMeasure::Lq { q, delta, outer } => {
            Ok(annulus_lq_norm(sol, &NormSpec::annulus(*q, *delta, *outer, t))?.norm)
        }
    }
}

/// Least-squares fit of `log ||u(., t_k)||` against `log (T - t_k)`.
pub fn blowup_exponent_fit(sol: &SolutionPair, fit: &RateFit) -> Result<RateFitResult, AnalysisError> {
    let big_t = sol.singular_set().blowup_time().ok_or(AnalysisError::NoBlowup)?;
    if fit.samples < 6 {
        return Err(AnalysisError::Invalid(format!("at least 6 sample times are needed, got {}", fit.samples)));
    }
    if fit.k_start == 0 || fit.k_start as usize + fit.samples > 50 {
        return Err(AnalysisError::Invalid("sample exponents must lie in 1..=50".into()));
    }
    let measure = match (&fit.measure, sol.rate_region()) {
        (Some(m), _) => m.clone(),
        (None, Some(r)) => RateMeasure::Sup { region: r.clone() },
        (None, None) => return Err(AnalysisError::Invalid("solution has no registered rate region".into())),
    };
    let mut times = Vec::with_capacity(fit.samples);
    let mut values = Vec::with_capacity(fit.samples);
    let mut xs = Vec::with_capacity(fit.samples);
    let mut ys = Vec::with_capacity(fit.samples);
    for j in 0..fit.samples {
        let k = fit.k_start as i32 + j as i32;
        let gap = big_t * 2f64.powi(-k);
        let t = big_t - gap;
        let v = measure_at(sol, &measure, t)?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(AnalysisError::Invalid(format!("norm {v} at t = {t} has no logarithm")));
        }
        times.push(t);
        values.push(v);
        xs.push(gap.ln());
        ys.push(v.ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let icept = my - slope * mx;
    let ss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - icept - slope * x).powi(2)).sum();
    Ok(RateFitResult {
        exponent: slope,
        log_prefactor: icept,
        rms_residual: (ss / n).sqrt(),
        blowup_time: big_t,
        measure,
        times,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{preset, PresetId};

    #[test]
    fn sup_over_annulus_sits_on_inner_circle() {
        let sol = preset(PresetId::Ex2_6).unwrap();
        // |u| = |1/(1-t) - 1| / r
        let v = sup_norm(&sol, &MeasureRegion::Annulus { inner: 1.0, outer: 2.0 }, 0.5).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sup_over_ball_finds_top_singular_value() {
        let sol = preset(PresetId::Ex5_1Const).unwrap();
        let v = sup_norm(&sol, &MeasureRegion::Ball { radius: 1.0 }, 0.0).unwrap();
        // spectral norm of the symmetric preset matrix (numpy eigvalsh)
        let top = 2.021269192179362;
        assert!(v <= top * (1.0 + 1e-12) && v > top * (1.0 - 1e-6), "{v}");
    }

    #[test]
    fn linear_blowup_has_unit_exponent() {
        let sol = preset(PresetId::Ex5_1Blowup).unwrap();
        let r = blowup_exponent_fit(&sol, &RateFit::default()).unwrap();
        assert!((r.exponent + 1.0).abs() < 1e-9, "{r:?}");
        assert!(r.rms_residual < 1e-9);
    }

    #[test]
    fn global_solution_has_no_blowup() {
        let sol = preset(PresetId::Ex3_2).unwrap();
        assert_eq!(blowup_exponent_fit(&sol, &RateFit::default()).unwrap_err(), AnalysisError::NoBlowup);
    }

    #[test]
    fn too_few_times_rejected() {
        let sol = preset(PresetId::Ex2_6).unwrap();
        let fit = RateFit { samples: 5, ..RateFit::default() };
        assert!(matches!(blowup_exponent_fit(&sol, &fit), Err(AnalysisError::Invalid(_))));
    }
}
