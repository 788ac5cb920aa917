//! Grid probes measuring how far candidate fields are from solving the
//! Euler equations with an `x`-independent pressure.

use super::AnalysisError;
use crate::catalog::{affine_ansatz, twin_profiles};
use crate::expr::ParamEnv;
use crate::field::{SolutionPair, SpaceTimePoint};
use crate::verify::residual::momentum_residual;
use serde::Serialize;

/// Regular space-time lattice over a planar box.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeGrid {
    pub lower: [f64; 2],
    pub upper: [f64; 2],
    pub t_start: f64,
    pub t_end: f64,
    /// Nodes per spatial axis, endpoints included.
    pub n: usize,
    /// Time levels, endpoints included.
    pub nt: usize,
}

impl Default for ProbeGrid {
    /// `[1, 2]^2 x [0, 0.5]` with 21 x 21 x 6 nodes.
    fn default() -> Self {
        Self { lower: [1.0, 1.0], upper: [2.0, 2.0], t_start: 0.0, t_end: 0.5, n: 21, nt: 6 }
    }
}

impl ProbeGrid {
    fn validate(&self) -> Result<(), AnalysisError> {
        let finite = self.lower.iter().chain(&self.upper).chain([&self.t_start, &self.t_end]).all(|v| v.is_finite());
        if !finite || self.lower[0] > self.upper[0] || self.lower[1] > self.upper[1] || self.t_start > self.t_end {
            return Err(AnalysisError::Invalid("probe grid ranges must be finite and ordered".into()));
        }
        if self.n < 2 || self.nt < 1 {
            return Err(AnalysisError::Invalid("probe grid needs n >= 2 and nt >= 1".into()));
        }
        Ok(())
    }

    fn axis(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
        if n == 1 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    }

    pub fn points(&self) -> Vec<SpaceTimePoint> {
        let mut out = Vec::with_capacity(self.n * self.n * self.nt);
        for k in 0..self.nt {
            let t = Self::axis(self.t_start, self.t_end, self.nt, k);
            for j in 0..self.n {
                let y = Self::axis(self.lower[1], self.upper[1], self.n, j);
                for i in 0..self.n {
                    let x = Self::axis(self.lower[0], self.upper[0], self.n, i);
                    out.push(SpaceTimePoint::new2(x, y, t));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeResult {
    /// `max over the grid of |momentum residual| + |div u|`.
    pub sup: f64,
    pub worst_point: Vec<f64>,
    pub points: usize,
}

fn sup_residual(sol: &SolutionPair, grid: &ProbeGrid) -> Result<ProbeResult, AnalysisError> {
    let pts = grid.points();
    let mut best = ProbeResult { sup: 0.0, worst_point: pts[0].to_vec(), points: pts.len() };
    for p in &pts {
        let r = momentum_residual(sol, p)?;
        let div = sol.jet(p)?.divergence();
        let v = (r[0] * r[0] + r[1] * r[1]).sqrt() + div.abs();
        if !v.is_finite() {
            return Err(AnalysisError::Invalid(format!("residual is not finite at {p}")));
        }
        if v > best.sup {
            best.sup = v;
            best.worst_point = p.to_vec();
        }
    }
    Ok(best)
}

/// Sup residual of `u = (v1(eta), v2(eta))`, `eta = (x1 - c1 t)/(x2 - c2 t)`,
/// over the grid. Profiles are written in the variable `x`.
pub fn affine_probe(v1: &str, v2: &str, c1: f64, c2: f64, grid: &ProbeGrid) -> Result<ProbeResult, AnalysisError> {
    grid.validate()?;
    let sol = affine_ansatz(v1, v2, c1, c2, ParamEnv::new())?;
    // x2 - c2 t is affine, so its sign on the grid box is decided at the corners
    let corners = [
        (grid.lower[1], grid.t_start),
        (grid.lower[1], grid.t_end),
        (grid.upper[1], grid.t_start),
        (grid.upper[1], grid.t_end),
    ];
    let d: Vec<f64> = corners.iter().map(|(y, t)| y - c2 * t).collect();
    if !(d.iter().all(|v| *v > 0.0) || d.iter().all(|v| *v < 0.0)) {
        return Err(AnalysisError::Domain("grid meets the line x2 = c2 t".into()));
    }
    sup_residual(&sol, grid)
}

/// Sup residual of `u = (u1(xi), u2(xi))` with `xi = c3 x1 - x2 - (c3 c1 - c2) t`,
/// i.e. profiles carried at speed `(c1, c2)`. Vanishes exactly when
/// `c3 u1 - u2` equals the constant `c3 c1 - c2`.
pub fn twin_wave_form_check(
    u1: &str,
    u2: &str,
    c1: f64,
    c2: f64,
    c3: f64,
    grid: &ProbeGrid,
) -> Result<ProbeResult, AnalysisError> {
    grid.validate()?;
    let sol = twin_profiles(u1, u2, c1, c2, c3, ParamEnv::new(), &[])?;
    sup_residual(&sol, grid)
}
