use super::fd::{fd_discrepancy, FdSteps, PressureCheck};
use super::residual::{assemble_momentum, divergence_check_jet, vorticity_transport_check, Scaled};
use super::sample::{sample_points, SampleError, SampleRegion};
use crate::field::{FieldError, SolutionPair, SpaceTimePoint};
use rayon::prelude::*;
use serde::Serialize;

/// Report layout version.
pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub residual: f64,
    pub divergence: f64,
    pub fd: f64,
    pub vorticity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { residual: 1e-8, divergence: 1e-10, fd: 1e-5, vorticity: 1e-8 }
    }
}

/// Running maximum remembering the first sample attaining it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxStat {
    pub max: f64,
    pub worst_point: Option<Vec<f64>>,
    #[serde(skip)]
    worst_index: Option<usize>,
}

impl MaxStat {
    fn new() -> Self {
        Self { max: 0.0, worst_point: None, worst_index: None }
    }

    fn push(&mut self, v: f64, index: usize, p: &SpaceTimePoint) {
        let nan_first = v.is_nan() && !self.max.is_nan();
        if nan_first || v > self.max || self.worst_index.is_none() {
            self.max = v;
            self.worst_index = Some(index);
            self.worst_point = Some(p.to_vec());
        }
    }
}

/// Compensated (Neumaier) running sum.
#[derive(Debug, Clone, Copy, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualStats {
    /// `|residual| / max(1, term scale)`; the verdict uses this.
    pub max_scaled: MaxStat,
    pub mean_scaled: f64,
    /// Plain `|residual|`, for diagnostics.
    pub max_abs: MaxStat,
    pub mean_abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdStats {
    pub max: MaxStat,
    pub max_jacobian: f64,
    pub max_laplacian: f64,
    pub max_dt: f64,
    pub max_pressure_gradient: Option<f64>,
    pub pressure_checked: usize,
    pub pressure_skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckVerdicts {
    pub residual: bool,
    pub divergence: bool,
    pub fd: bool,
    pub vorticity: Option<bool>,
    pub evaluation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificationReport {
    pub format_version: u32,
    pub solution_id: String,
    pub family: String,
    pub parameters: Vec<(String, String)>,
    pub transforms: Vec<String>,
    pub dimension: usize,
    pub viscosity: f64,
    pub singular_set: String,
    pub region: SampleRegion,
    pub tolerances: Tolerances,
    pub momentum: ResidualStats,
    pub divergence: ResidualStats,
    pub fd_discrepancy: FdStats,
    pub vorticity_transport: Option<ResidualStats>,
    /// Samples whose evaluation failed, with the first message.
    pub evaluation_failures: usize,
    pub first_failure: Option<String>,
    pub checks: CheckVerdicts,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

impl CertificationReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Largest of the scaled residual, divergence, FD and vorticity maxima.
    pub fn worst_metric(&self) -> f64 {
        let mut m = self.momentum.max_scaled.max.max(self.divergence.max_scaled.max).max(self.fd_discrepancy.max.max);
        if let Some(v) = &self.vorticity_transport {
            m = m.max(v.max_scaled.max);
        }
        m
    }
}

struct SampleOutcome {
    momentum: Scaled,
    divergence: Scaled,
    fd: super::fd::FdDiscrepancy,
    vorticity: Option<Scaled>,
}

fn evaluate(sol: &SolutionPair, p: &SpaceTimePoint) -> Result<SampleOutcome, FieldError> {
    let jet = sol.jet(p)?;
    let grad = sol.pressure_gradient(p)?;
    let (r, s) = assemble_momentum(&jet, &grad, sol.viscosity());
    let norm = |v: &[f64; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let momentum = Scaled { raw: norm(&r), scale: norm(&s) };
    let divergence = divergence_check_jet(&jet);
    let steps = FdSteps::adaptive(sol, p);
    let fd = fd_discrepancy(sol, p, &jet, &steps)?;
    let vorticity = if sol.dim() == 2 { Some(vorticity_transport_check(sol, p, &steps)?) } else { None };
    Ok(SampleOutcome { momentum, divergence, fd, vorticity })
}

struct Accum {
    max_scaled: MaxStat,
    max_abs: MaxStat,
    sum_scaled: Neumaier,
    sum_abs: Neumaier,
}

impl Accum {
    fn new() -> Self {
        Self {
            max_scaled: MaxStat::new(),
            max_abs: MaxStat::new(),
            sum_scaled: Neumaier::default(),
            sum_abs: Neumaier::default(),
        }
    }

    fn push(&mut self, s: &Scaled, i: usize, p: &SpaceTimePoint) {
        let rel = s.relative();
        self.max_scaled.push(rel, i, p);
        self.max_abs.push(s.raw, i, p);
        self.sum_scaled.add(rel);
        self.sum_abs.add(s.raw);
    }

    fn finish(self, n: usize) -> ResidualStats {
        let n = n.max(1) as f64;
        ResidualStats {
            max_scaled: self.max_scaled,
            mean_scaled: self.sum_scaled.total() / n,
            max_abs: self.max_abs,
            mean_abs: self.sum_abs.total() / n,
        }
    }
}

fn within(v: f64, tol: f64) -> bool {
    v <= tol
}

/// Samples the region and aggregates momentum, divergence, FD and (in 2D)
/// vorticity-transport checks. Samples are evaluated in parallel and
/// reduced in sample order, so the report does not depend on thread count.
pub fn certify(
    sol: &SolutionPair,
    region: &SampleRegion,
    tol: &Tolerances,
) -> Result<CertificationReport, SampleError> {
    let points = sample_points(region, sol.singular_set())?;
    let outcomes: Vec<Result<SampleOutcome, FieldError>> = points.par_iter().map(|p| evaluate(sol, p)).collect();

    let mut mom = Accum::new();
    let mut div = Accum::new();
    let mut vort = Accum::new();
    let mut fd_max = MaxStat::new();
    let (mut fj, mut fl, mut ft) = (0.0f64, 0.0f64, 0.0f64);
    let mut fp: Option<f64> = None;
    let (mut p_checked, mut p_skipped) = (0, 0);
    let mut failures = 0;
    let mut first_failure = None;
    let mut ok_count = 0;
    for (i, (p, out)) in points.iter().zip(&outcomes).enumerate() {
        let o = match out {
            Ok(o) => o,
            Err(e) => {
                failures += 1;
                if first_failure.is_none() {
                    first_failure = Some(format!("{p}: {e}"));
                }
                continue;
            }
        };
        ok_count += 1;
        mom.push(&o.momentum, i, p);
        div.push(&o.divergence, i, p);
        if let Some(v) = &o.vorticity {
            vort.push(v, i, p);
        }
        fd_max.push(o.fd.max(), i, p);
        fj = fj.max(o.fd.jacobian);
        fl = fl.max(o.fd.laplacian);
        ft = ft.max(o.fd.dt);
        match o.fd.pressure_gradient {
            PressureCheck::Checked(v) => {
                p_checked += 1;
                fp = Some(fp.unwrap_or(0.0).max(v));
            }
            PressureCheck::Skipped => p_skipped += 1,
            PressureCheck::Unavailable => {}
        }
    }

    let momentum = mom.finish(ok_count);
    let divergence = div.finish(ok_count);
    let vorticity_transport = (sol.dim() == 2).then(|| vort.finish(ok_count));
    let checks = CheckVerdicts {
        residual: within(momentum.max_scaled.max, tol.residual),
        divergence: within(divergence.max_scaled.max, tol.divergence),
        fd: within(fd_max.max, tol.fd),
        vorticity: vorticity_transport.as_ref().map(|v| within(v.max_scaled.max, tol.vorticity)),
        evaluation: failures == 0,
    };
    let pass =
        checks.residual && checks.divergence && checks.fd && checks.vorticity.unwrap_or(true) && checks.evaluation;
    let meta = sol.metadata();
    Ok(CertificationReport {
        format_version: REPORT_VERSION,
        solution_id: meta.id.clone(),
        family: meta.family.clone(),
        parameters: meta.parameters.clone(),
        transforms: meta.transforms.clone(),
        dimension: sol.dim(),
        viscosity: sol.viscosity(),
        singular_set: sol.singular_set().describe(),
        region: region.clone(),
        tolerances: *tol,
        momentum,
        divergence,
        fd_discrepancy: FdStats {
            max: fd_max,
            max_jacobian: fj,
            max_laplacian: fl,
            max_dt: ft,
            max_pressure_gradient: fp,
            pressure_checked: p_checked,
            pressure_skipped: p_skipped,
        },
        vorticity_transport,
        evaluation_failures: failures,
        first_failure,
        checks,
        verdict: if pass { Verdict::Pass } else { Verdict::Fail },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{preset, PresetId};

    #[test]
    fn neumaier_recovers_small_terms() {
        let mut s = Neumaier::default();
        for v in [1e16, 1.0, -1e16, 1.0] {
            s.add(v);
        }
        assert_eq!(s.total(), 2.0);
    }

    #[test]
    fn small_certification_passes() {
        let sol = preset(PresetId::Ex3_2).unwrap();
        let region = SampleRegion::default_for(2, sol.singular_set(), 0.9).with_samples(200).with_seed(3);
        let rep = certify(&sol, &region, &Tolerances::default()).unwrap();
        assert!(rep.passed(), "{rep:#?}");
        assert!(rep.fd_discrepancy.pressure_checked > 150);
    }
}
