//! Seeded, platform-independent sampling of admissible space-time points.
//!
//! The generator is SplitMix64: the state advances by `0x9E3779B97F4A7C15`
//! and each output is the standard two-multiply finaliser of the state.
//! A uniform double in `[0, 1)` is the top 53 bits times `2^-53`. Each
//! candidate point consumes `dim + 1` draws: the coordinates in order,
//! then the time. Candidates within the exclusion radius of a singular
//! primitive are discarded and do not count towards the sample size.

use crate::field::{SingularSet, SpaceTimePoint};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SampleError {
    #[error("invalid sample region: {0}")]
    InvalidRegion(String),
    #[error("sample count must be at least 1")]
    NoSamples,
    #[error("only {accepted} of {requested} points accepted after {attempts} draws; region is mostly singular")]
    MostlySingular { requested: usize, accepted: usize, attempts: usize },
}

/// Axis-aligned box times a time interval, with an exclusion radius around
/// every singular primitive.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRegion {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub t_start: f64,
    pub t_end: f64,
    pub exclusion: f64,
    pub samples: usize,
    pub seed: u64,
}

pub const DEFAULT_EXCLUSION: f64 = 1e-3;
pub const DEFAULT_SAMPLES: usize = 10_000;
/// Fraction of the blow-up time covered by default.
pub const DEFAULT_UNTIL: f64 = 0.9;

impl SampleRegion {
    pub fn cube(dim: usize, half_width: f64, t_start: f64, t_end: f64) -> Self {
        Self {
            lower: vec![-half_width; dim],
            upper: vec![half_width; dim],
            t_start,
            t_end,
            exclusion: DEFAULT_EXCLUSION,
            samples: DEFAULT_SAMPLES,
            seed: 0,
        }
    }

    /// `[-3, 3]^dim` over `[0, until * T]`, or `[0, 1]` without blow-up.
    pub fn default_for(dim: usize, singular: &SingularSet, until: f64) -> Self {
        let t_end = match singular.blowup_time() {
            Some(t) => until * t,
            None => 1.0,
        };
        Self::cube(dim, 3.0, 0.0, t_end)
    }

    pub fn with_samples(mut self, n: usize) -> Self {
        self.samples = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_exclusion(mut self, r: f64) -> Self {
        self.exclusion = r;
        self
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn validate(&self, dim: usize, singular: &SingularSet) -> Result<(), SampleError> {
        let bad = |m: String| Err(SampleError::InvalidRegion(m));
        if self.lower.len() != dim || self.upper.len() != dim {
            return bad(format!("box has {} axes for a {dim}D solution", self.lower.len()));
        }
        for (i, (lo, hi)) in self.lower.iter().zip(&self.upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return bad(format!("axis {i} range [{lo}, {hi}] is degenerate"));
            }
        }
        if !(self.t_start.is_finite() && self.t_end.is_finite() && self.t_start <= self.t_end) {
            return bad(format!("time interval [{}, {}] is invalid", self.t_start, self.t_end));
        }
        if let Some(t) = singular.blowup_time() {
            if self.t_end >= t {
                return bad(format!("time interval reaches the blow-up time {t}"));
            }
        }
        if !(self.exclusion >= 0.0 && self.exclusion.is_finite()) {
            return bad("exclusion radius must be non-negative".into());
        }
        if self.samples == 0 {
            return Err(SampleError::NoSamples);
        }
        Ok(())
    }
}

/// Draws `region.samples` admissible points; at most `100 * samples`
/// candidates are tried.
pub fn sample_points(region: &SampleRegion, singular: &SingularSet) -> Result<Vec<SpaceTimePoint>, SampleError> {
    let dim = region.dim();
    region.validate(dim, singular)?;
    let mut rng = SplitMix64::new(region.seed);
    let limit = region.samples.saturating_mul(100);
    let mut out = Vec::with_capacity(region.samples);
    let mut attempts = 0;
    while out.len() < region.samples {
        if attempts >= limit {
            return Err(SampleError::MostlySingular { requested: region.samples, accepted: out.len(), attempts });
        }
        attempts += 1;
        let mut x = [0.0; 3];
        for (i, xi) in x.iter_mut().enumerate().take(dim) {
            *xi = region.lower[i] + (region.upper[i] - region.lower[i]) * rng.next_f64();
        }
        let t = region.t_start + (region.t_end - region.t_start) * rng.next_f64();
        let p = SpaceTimePoint { dim, x, t };
        if singular.check(&p, region.exclusion).is_ok() {
            out.push(p);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::SingularPrimitive;

    #[test]
    fn splitmix_reference_values() {
        let mut r = SplitMix64::new(0);
        assert_eq!(r.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(r.next_u64(), 0x6E78_9E6A_A1B9_65F4);
        let mut r = SplitMix64::new(1234567);
        assert_eq!(r.next_u64(), 6457827717110365317);
        assert_eq!(r.next_u64(), 3203168211198807973);
    }

    #[test]
    fn uniform_range() {
        let mut r = SplitMix64::new(9);
        for _ in 0..10_000 {
            let u = r.next_f64();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn zero_samples_rejected() {
        let region = SampleRegion::cube(2, 1.0, 0.0, 1.0).with_samples(0);
        assert_eq!(sample_points(&region, &SingularSet::empty()), Err(SampleError::NoSamples));
    }

    #[test]
    fn exclusion_covering_box_fails() {
        let region = SampleRegion::cube(2, 1.0, 0.0, 1.0).with_samples(10).with_exclusion(10.0);
        let set = SingularSet::new(vec![SingularPrimitive::origin()]);
        assert!(matches!(sample_points(&region, &set), Err(SampleError::MostlySingular { .. })));
    }

    #[test]
    fn blowup_time_bounds_interval() {
        let set = SingularSet::new(vec![SingularPrimitive::BlowupTime { time: 1.0 }]);
        let region = SampleRegion::cube(2, 1.0, 0.0, 1.0);
        assert!(region.validate(2, &set).is_err());
        assert!(SampleRegion::default_for(2, &set, 0.9).validate(2, &set).is_ok());
    }
}
