use crate::output::{float, to_json};
use crate::spec::{self, SpecFile};
use crate::{BlowupArgs, BlowupNorm, CertifyArgs, CliError, GridDumpArgs, NormArgs, ProbeArgs, ProbeMode};
use exactflow::analysis::{
    affine_probe, annulus_lq_norm, blowup_exponent_fit, l2_energy_difference, twin_wave_form_check, AnalysisError,
    EnergyOutcome, NormDomain, NormSpec, NormValue, ProbeGrid, ProbeResult, RateFit, RateFitResult, RateMeasure,
};
use exactflow::catalog::PresetId;
use exactflow::expr::Expr;
use exactflow::field::{SolutionPair, SpaceTimePoint};
use exactflow::verify::sample::{DEFAULT_EXCLUSION, DEFAULT_UNTIL};
use exactflow::verify::{certify as run_certify, momentum_residual, SampleRegion, Tolerances};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;
use std::process::ExitCode;

pub const OUTPUT_VERSION: u32 = 1;

type CmdResult = Result<ExitCode, CliError>;

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(doc: &T, out: Option<&Path>) -> Result<(), CliError> {
    let text = to_json(doc).map_err(|e| CliError::Failed(format!("cannot serialise output: {e}")))?;
    emit(&text, out)
}

fn analysis_error(e: AnalysisError) -> CliError {
    match e {
        AnalysisError::Invalid(_) | AnalysisError::Domain(_) | AnalysisError::Catalog(_) => {
            CliError::Usage(e.to_string())
        }
        AnalysisError::NoBlowup | AnalysisError::Field(_) | AnalysisError::Quad(_) => CliError::Failed(e.to_string()),
    }
}

fn exit(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("{name} must be positive, got {v}")))
    }
}

pub fn list(json: bool) -> CmdResult {
    let rows: Vec<_> = PresetId::ALL.into_iter().map(PresetId::info).collect();
    if json {
        emit_json(&rows, None)?;
        return Ok(ExitCode::SUCCESS);
    }
    let headers = ["id", "family", "description", "singular set"];
    let cells: Vec<[&str; 4]> = rows.iter().map(|r| [r.id, r.family, r.description, r.singular_set.as_str()]).collect();
    let mut widths = headers.map(str::len);
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let mut text = String::new();
    for row in std::iter::once(&headers).chain(&cells) {
        let line: Vec<String> = row.iter().zip(widths).map(|(c, w)| format!("{c:<w$}")).collect();
        writeln!(text, "{}", line.join("  ").trim_end()).unwrap();
    }
    emit(&text, None)?;
    Ok(ExitCode::SUCCESS)
}

fn certify_region(sol: &SolutionPair, spec: &SpecFile, a: &CertifyArgs) -> Result<SampleRegion, CliError> {
    let until = match a.until {
        Some(u) if !(u > 0.0 && u.is_finite()) => {
            return Err(CliError::Usage(format!("--until must be positive, got {u}")))
        }
        Some(u) => u,
        None => DEFAULT_UNTIL,
    };
    let mut region = SampleRegion::default_for(sol.dim(), sol.singular_set(), until);
    if let Some(o) = spec.overrides.region.as_ref() {
        region.lower = o.lower.clone().unwrap_or(region.lower);
        region.upper = o.upper.clone().unwrap_or(region.upper);
        region.t_start = o.t_start.unwrap_or(region.t_start);
        region.t_end = o.t_end.unwrap_or(region.t_end);
        region.exclusion = o.exclusion.unwrap_or(region.exclusion);
        region.samples = o.samples.unwrap_or(region.samples);
        region.seed = o.seed.unwrap_or(region.seed);
    }
    if a.until.is_some() {
        region.t_end = match sol.singular_set().blowup_time() {
            Some(t) => until * t,
            None => until,
        };
    }
    region.samples = a.samples.unwrap_or(region.samples);
    region.seed = a.seed.unwrap_or(region.seed);
    region.exclusion = a.exclusion.unwrap_or(region.exclusion);
    Ok(region)
}

fn certify_tolerances(spec: &SpecFile, a: &CertifyArgs) -> Result<Tolerances, CliError> {
    let mut tol = Tolerances::default();
    if let Some(o) = spec.overrides.tolerances.as_ref() {
        tol.residual = o.residual.unwrap_or(tol.residual);
        tol.divergence = o.divergence.unwrap_or(tol.divergence);
        tol.fd = o.fd.unwrap_or(tol.fd);
        tol.vorticity = o.vorticity.unwrap_or(tol.vorticity);
    }
    tol.residual = positive("residual tolerance", a.tol_residual.unwrap_or(tol.residual))?;
    tol.divergence = positive("divergence tolerance", a.tol_div.unwrap_or(tol.divergence))?;
    tol.fd = positive("FD tolerance", a.tol_fd.unwrap_or(tol.fd))?;
    tol.vorticity = positive("vorticity tolerance", a.tol_vort.unwrap_or(tol.vorticity))?;
    Ok(tol)
}

pub fn certify(a: CertifyArgs) -> CmdResult {
    let mut spec = spec::load(&a.source)?;
    if let Some(sign) = a.pressure_sign {
        spec.set_pressure_sign(sign)?;
    }
    let sol = spec::solution(&spec)?;
    let region = certify_region(&sol, &spec, &a)?;
    let tol = certify_tolerances(&spec, &a)?;
    let run = || run_certify(&sol, &region, &tol).map_err(|e| CliError::Usage(e.to_string()));
    let report = match a.threads {
        Some(0) => return Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {n} threads: {e}")))?
            .install(run)?,
        None => run()?,
    };
    emit_json(&report, a.out.as_deref())?;
    Ok(exit(report.passed()))
}

#[derive(Serialize)]
struct NormDoc<'a> {
    format_version: u32,
    command: &'static str,
    solution_id: &'a str,
    q: f64,
    t: f64,
    subtract: Option<[f64; 3]>,
    domain: Option<NormDomain>,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<NormValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    energy: Option<EnergyOutcome>,
}

pub fn norm(a: NormArgs) -> CmdResult {
    let sol = spec::solution(&spec::load(&a.source)?)?;
    let subtract = if a.subtract_boost {
        let env =
            sol.decay().ok_or_else(|| CliError::Usage(format!("{} has no registered far-field velocity", sol.id())))?;
        Some(env.far_field)
    } else {
        None
    };
    let domain = match (a.delta, &a.bounds) {
        (Some(_), Some(_)) => return Err(CliError::Usage("give either --delta/--R or --box, not both".into())),
        (Some(delta), None) => Some(NormDomain::Annulus { delta, outer: a.outer.unwrap_or(f64::INFINITY) }),
        (None, Some(b)) => {
            if b.len() % 2 != 0 {
                return Err(CliError::Usage("--box needs a lower and upper bound per axis".into()));
            }
            Some(NormDomain::Box {
                lower: b.iter().step_by(2).copied().collect(),
                upper: b.iter().skip(1).step_by(2).copied().collect(),
            })
        }
        (None, None) if a.outer.is_some() => return Err(CliError::Usage("--R needs --delta".into())),
        (None, None) => None,
    };
    let mut doc = NormDoc {
        format_version: OUTPUT_VERSION,
        command: "norm",
        solution_id: sol.id(),
        q: a.q,
        t: a.t,
        subtract,
        domain: domain.clone(),
        value: None,
        energy: None,
    };
    let ok = match (domain, subtract) {
        (Some(domain), _) => {
            let spec = NormSpec { q: a.q, domain, t: a.t, subtract };
            doc.value = Some(annulus_lq_norm(&sol, &spec).map_err(analysis_error)?);
            true
        }
        (None, Some(c)) => {
            if a.q != 2.0 {
                return Err(CliError::Usage("whole-plane norms of u - C are computed for q = 2 only".into()));
            }
            let outcome = l2_energy_difference(&sol, &c[..sol.dim()], a.t).map_err(analysis_error)?;
            let finite = matches!(outcome, EnergyOutcome::Finite(_));
            doc.energy = Some(outcome);
            finite
        }
        (None, None) => return Err(CliError::Usage("give --delta (annulus), --box, or --subtract-boost".into())),
    };
    emit_json(&doc, a.out.as_deref())?;
    Ok(exit(ok))
}

#[derive(Serialize)]
struct BlowupDoc<'a> {
    format_version: u32,
    command: &'static str,
    solution_id: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    fit: Option<RateFitResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

pub fn blowup(a: BlowupArgs) -> CmdResult {
    let sol = spec::solution(&spec::load(&a.source)?)?;
    let measure = match a.norm {
        BlowupNorm::Sup => None,
        BlowupNorm::Lq => Some(RateMeasure::Lq { q: a.q, delta: a.delta, outer: a.outer }),
    };
    let fit = RateFit { measure, samples: a.samples, k_start: a.k_start };
    let mut doc =
        BlowupDoc { format_version: OUTPUT_VERSION, command: "blowup", solution_id: sol.id(), fit: None, error: None };
    match blowup_exponent_fit(&sol, &fit) {
        Ok(r) => {
            doc.fit = Some(r);
            emit_json(&doc, a.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Err(AnalysisError::NoBlowup) => {
            doc.error = Some(AnalysisError::NoBlowup.to_string());
            emit_json(&doc, a.out.as_deref())?;
            Err(CliError::Failed(AnalysisError::NoBlowup.to_string()))
        }
        Err(e) => Err(analysis_error(e)),
    }
}

pub const AFFINE_ZERO: f64 = 1e-10;
pub const AFFINE_WITNESS: f64 = 0.05;
pub const TWIN_ZERO: f64 = 1e-8;
pub const TWIN_WITNESS: f64 = 0.01;

#[derive(Serialize)]
struct Thresholds {
    solution: f64,
    nonsolution: f64,
}

#[derive(Serialize)]
struct ProbeDoc {
    format_version: u32,
    command: &'static str,
    mode: &'static str,
    profiles: Vec<(String, String)>,
    speeds: Vec<(String, f64)>,
    grid: ProbeGrid,
    result: ProbeResult,
    thresholds: Thresholds,
    verdict: &'static str,
}

fn probe_grid(a: &ProbeArgs) -> ProbeGrid {
    let mut g = ProbeGrid::default();
    if let Some(l) = &a.lower {
        g.lower = [l[0], l[1]];
    }
    if let Some(u) = &a.upper {
        g.upper = [u[0], u[1]];
    }
    g.t_start = a.t_start.unwrap_or(g.t_start);
    g.t_end = a.t_end.unwrap_or(g.t_end);
    g.n = a.n.unwrap_or(g.n);
    g.nt = a.nt.unwrap_or(g.nt);
    g
}

fn required<'a>(v: &'a Option<String>, flag: &str, mode: &str) -> Result<&'a str, CliError> {
    v.as_deref().ok_or_else(|| CliError::Usage(format!("--mode {mode} needs {flag}")))
}

fn is_constant(text: &str) -> bool {
    Expr::parse(text, "x").map(|e| e.is_constant()).unwrap_or(false)
}

pub fn probe(a: ProbeArgs) -> CmdResult {
    let grid = probe_grid(&a);
    let doc = match a.mode {
        ProbeMode::Affine => {
            if a.u1.is_some() || a.u2.is_some() || a.c3.is_some() {
                return Err(CliError::Usage("--u1, --u2 and --c3 belong to --mode twinwave".into()));
            }
            let (v1, v2) = (required(&a.v1, "--v1", "affine")?, required(&a.v2, "--v2", "affine")?);
            let (c1, c2) = (a.c1.unwrap_or(0.0), a.c2.unwrap_or(1.0));
            let result = affine_probe(v1, v2, c1, c2, &grid).map_err(analysis_error)?;
            let verdict = if result.sup <= AFFINE_ZERO {
                if is_constant(v1) && is_constant(v2) {
                    "constant solution"
                } else {
                    "nonconstant solution"
                }
            } else if result.sup >= AFFINE_WITNESS {
                "nonsolution"
            } else {
                "inconclusive"
            };
            ProbeDoc {
                format_version: OUTPUT_VERSION,
                command: "probe",
                mode: "affine",
                profiles: vec![("v1".into(), v1.into()), ("v2".into(), v2.into())],
                speeds: vec![("c1".into(), c1), ("c2".into(), c2)],
                grid,
                result,
                thresholds: Thresholds { solution: AFFINE_ZERO, nonsolution: AFFINE_WITNESS },
                verdict,
            }
        }
        ProbeMode::Twinwave => {
            if a.v1.is_some() || a.v2.is_some() {
                return Err(CliError::Usage("--v1 and --v2 belong to --mode affine".into()));
            }
            let (u1, u2) = (required(&a.u1, "--u1", "twinwave")?, required(&a.u2, "--u2", "twinwave")?);
            let (c1, c2, c3) = (a.c1.unwrap_or(0.0), a.c2.unwrap_or(0.0), a.c3.unwrap_or(1.0));
            let result = twin_wave_form_check(u1, u2, c1, c2, c3, &grid).map_err(analysis_error)?;
            let verdict = if result.sup <= TWIN_ZERO {
                "conforming"
            } else if result.sup >= TWIN_WITNESS {
                "non-conforming"
            } else {
                "inconclusive"
            };
            ProbeDoc {
                format_version: OUTPUT_VERSION,
                command: "probe",
                mode: "twinwave",
                profiles: vec![("u1".into(), u1.into()), ("u2".into(), u2.into())],
                speeds: vec![("c1".into(), c1), ("c2".into(), c2), ("c3".into(), c3)],
                grid,
                result,
                thresholds: Thresholds { solution: TWIN_ZERO, nonsolution: TWIN_WITNESS },
                verdict,
            }
        }
    };
    emit_json(&doc, a.out.as_deref())?;
    Ok(exit(!matches!(doc.verdict, "inconclusive" | "nonconstant solution")))
}

fn axis(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
    if n == 1 {
        lo
    } else {
        lo + (hi - lo) * i as f64 / (n - 1) as f64
    }
}

/// CSV row for one node; residual columns are `NA` inside the exclusion
/// radius or wherever evaluation fails.
fn dump_row(sol: &SolutionPair, p: &SpaceTimePoint, exclusion: f64, out: &mut String) {
    let dim = sol.dim();
    let mut cells: Vec<String> = p.coords().iter().map(|v| float(*v)).collect();
    cells.push(float(p.t));
    let admissible = sol.check_admissible(p, exclusion).is_ok();
    match sol.velocity(p) {
        Ok(u) if u[..dim].iter().all(|v| v.is_finite()) => cells.extend(u[..dim].iter().map(|v| float(*v))),
        _ => cells.extend(std::iter::repeat("NA".to_string()).take(dim)),
    }
    if admissible {
        let r = momentum_residual(sol, p).map(|r| (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt());
        let d = sol.jet(p).map(|j| j.divergence());
        cells.push(r.map(float).unwrap_or_else(|_| "NA".into()));
        cells.push(d.map(float).unwrap_or_else(|_| "NA".into()));
    } else {
        cells.push("NA".into());
        cells.push("NA".into());
    }
    out.push_str(&cells.join(","));
    out.push('\n');
}

pub fn grid_dump(a: GridDumpArgs) -> CmdResult {
    let sol = spec::solution(&spec::load(&a.source)?)?;
    let dim = sol.dim();
    if a.bounds.len() != 2 * dim {
        return Err(CliError::Usage(format!("--box needs {} numbers for a {dim}D solution", 2 * dim)));
    }
    if a.bounds.iter().any(|v| !v.is_finite()) || a.bounds.chunks(2).any(|c| c[0] > c[1]) {
        return Err(CliError::Usage("--box bounds must be finite with lo <= hi".into()));
    }
    if a.nx == 0 || a.nt == 0 {
        return Err(CliError::Usage("--nx and --nt must be at least 1".into()));
    }
    let exclusion = a.exclusion.unwrap_or(DEFAULT_EXCLUSION);
    if !(exclusion >= 0.0 && exclusion.is_finite()) {
        return Err(CliError::Usage("--exclusion must be non-negative".into()));
    }
    let region = SampleRegion::default_for(dim, sol.singular_set(), DEFAULT_UNTIL);
    let (t0, t1) = (a.t_start.unwrap_or(region.t_start), a.t_end.unwrap_or(region.t_end));
    if !(t0.is_finite() && t1.is_finite() && t0 <= t1) {
        return Err(CliError::Usage("time range must be finite and ordered".into()));
    }
    let names = ["x1", "x2", "x3"];
    let unames = ["u1", "u2", "u3"];
    let mut text = String::from("#format_version=1\n");
    let header: Vec<&str> =
        names[..dim].iter().chain(&["t"]).chain(&unames[..dim]).chain(&["residual", "divergence"]).copied().collect();
    text.push_str(&header.join(","));
    text.push('\n');
    let nz = if dim == 3 { a.nx } else { 1 };
    for k in 0..a.nt {
        let t = axis(t0, t1, a.nt, k);
        for iz in 0..nz {
            for iy in 0..a.nx {
                for ix in 0..a.nx {
                    let x = axis(a.bounds[0], a.bounds[1], a.nx, ix);
                    let y = axis(a.bounds[2], a.bounds[3], a.nx, iy);
                    let p = if dim == 3 {
                        SpaceTimePoint::new3(x, y, axis(a.bounds[4], a.bounds[5], a.nx, iz), t)
                    } else {
                        SpaceTimePoint::new2(x, y, t)
                    };
                    dump_row(&sol, &p, exclusion, &mut text);
                }
            }
        }
    }
    emit(&text, a.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

pub fn export(preset: &str, out: Option<&Path>) -> CmdResult {
    let id = preset.parse::<PresetId>().map_err(|e| CliError::Usage(e.to_string()))?;
    emit_json(&SpecFile::from_preset(id), out)?;
    Ok(ExitCode::SUCCESS)
}
