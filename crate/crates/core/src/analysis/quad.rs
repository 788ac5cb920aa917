//! Adaptive Gauss-Kronrod (7/15) quadrature on finite intervals.

use thiserror::Error;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("integrand is not finite at {0}")]
    NonFinite(f64),
    #[error("no convergence after {intervals} subintervals (estimate {value}, error {error})")]
    NoConvergence { intervals: usize, value: f64, error: f64 },
    #[error("integrand failed at {at}: {message}")]
    Integrand { at: f64, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-13, rel_tol: 1e-12, max_intervals: 4000 }
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod<F>(f: &mut F, a: f64, b: f64) -> Result<Panel, QuadError>
where
    F: FnMut(f64) -> Result<f64, QuadError>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (k, x) in XGK[..7].iter().enumerate() {
        let f1 = f(center - half * x)?;
        let f2 = f(center + half * x)?;
        kron += WGK[k] * (f1 + f2);
        if k % 2 == 1 {
            gauss += WG[k / 2] * (f1 + f2);
        }
    }
    let value = kron * half;
    let error = ((kron - gauss) * half).abs();
    Ok(Panel { a, b, value, error })
}

/// Integrates `f` over `[a, b]`, bisecting the panel with the largest error
/// estimate until the summed estimate meets the tolerance.
pub fn integrate<F>(mut f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadResult, QuadError>
where
    F: FnMut(f64) -> Result<f64, QuadError>,
{
    if a == b {
        return Ok(QuadResult { value: 0.0, error: 0.0, evaluations: 0 });
    }
    if a > b {
        let r = integrate(f, b, a, cfg)?;
        return Ok(QuadResult { value: -r.value, ..r });
    }
    let mut checked = |x: f64| {
        let v = f(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(QuadError::NonFinite(x))
        }
    };
    let mut panels = vec![kronrod(&mut checked, a, b)?];
    let mut evaluations = 15;
    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        // Below this the estimate is dominated by rounding in the panel sums.
        let floor = 50.0 * f64::EPSILON * panels.iter().map(|p| p.value.abs()).sum::<f64>();
        if error <= cfg.abs_tol.max(cfg.rel_tol * value.abs()).max(floor) {
            return Ok(QuadResult { value, error, evaluations });
        }
        if panels.len() >= cfg.max_intervals {
            return Err(QuadError::NoConvergence { intervals: panels.len(), value, error });
        }
        let worst =
            panels.iter().enumerate().max_by(|x, y| x.1.error.total_cmp(&y.1.error)).map(|(i, _)| i).unwrap_or(0);
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // Panel cannot be split further in floating point.
            return Err(QuadError::NoConvergence { intervals: panels.len() + 1, value, error });
        }
        panels.push(kronrod(&mut checked, p.a, mid)?);
        panels.push(kronrod(&mut checked, mid, p.b)?);
        evaluations += 30;
    }
}

/// Convenience wrapper for infallible integrands.
pub fn integrate_fn(f: impl Fn(f64) -> f64, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadResult, QuadError> {
    integrate(|x| Ok(f(x)), a, b, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate_fn(|x| x.powi(6) - 3.0 * x, 0.0, 2.0, &QuadConfig::default()).unwrap();
        assert!((r.value - (128.0 / 7.0 - 6.0)).abs() < 1e-13);
    }

    #[test]
    fn peaked_integrand() {
        let r = integrate_fn(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, &QuadConfig::default()).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((r.value - exact).abs() < 1e-9 * exact, "{} vs {exact}", r.value);
    }

    #[test]
    fn closed_form_antiderivative() {
        // r^3 (1 + r^2)^-4 integrates to pi/6 / (2 pi) over the half line
        let r = integrate_fn(|r: f64| r.powi(3) / (1.0 + r * r).powi(4), 0.0, 1e3, &QuadConfig::default()).unwrap();
        assert!((2.0 * PI * r.value - PI / 6.0).abs() < 1e-10);
    }

    #[test]
    fn non_finite_is_reported() {
        let e = integrate_fn(|x| 1.0 / x, 0.0, 1.0, &QuadConfig::default());
        assert!(e.is_err());
        let e = integrate_fn(|x| 1.0 / (x - 0.5), 0.0, 1.0, &QuadConfig::default()).unwrap_err();
        assert!(matches!(e, QuadError::NonFinite(_)));
    }

    #[test]
    fn reversed_interval_changes_sign() {
        let f = |x: f64| x.exp();
        let a = integrate_fn(f, 0.0, 1.0, &QuadConfig::default()).unwrap().value;
        let b = integrate_fn(f, 1.0, 0.0, &QuadConfig::default()).unwrap().value;
        assert!((a + b).abs() < 1e-15);
    }
}
