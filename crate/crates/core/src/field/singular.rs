//! Machine-checkable descriptions of where a solution stops being smooth.

use super::{dot3, norm3, SpaceTimePoint, Vec3};
use serde::Serialize;

/// Stencil safety factor around genuine singularities: finite-difference
/// steps never exceed `distance / SINGULAR_STEP_FACTOR`.
pub const SINGULAR_STEP_FACTOR: f64 = 300.0;
/// Stencil factor for smooth domain boundaries and branch cuts, where the
/// stencil merely has to stay on one side.
pub const BOUNDARY_STEP_FACTOR: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SingularPrimitive {
    /// Point singularity at `center + velocity * t`.
    Point { center: Vec3, velocity: Vec3 },
    /// The moving line (plane in 3D) `normal . x = offset + rate * t`.
    MovingLine { normal: Vec3, offset: f64, rate: f64 },
    /// Finite-time blow-up; the solution lives on `t < time`.
    BlowupTime { time: f64 },
    /// Branch cut of the pressure value only; velocity and pressure
    /// gradient are smooth across it.
    BranchPlane { normal: Vec3, offset: f64, rate: f64 },
    /// Domain boundary; admissible points satisfy `normal . x >= offset + rate * t`.
    HalfSpaceBoundary { normal: Vec3, offset: f64, rate: f64 },
}

impl SingularPrimitive {
    pub fn origin() -> Self {
        SingularPrimitive::Point { center: [0.0; 3], velocity: [0.0; 3] }
    }

    /// Spatial distance for geometric primitives, remaining lifetime for
    /// [`SingularPrimitive::BlowupTime`]. Zero on the primitive itself and,
    /// for a half-space boundary, everywhere outside the domain.
    pub fn distance(&self, p: &SpaceTimePoint) -> f64 {
        match self {
            SingularPrimitive::Point { .. }
            | SingularPrimitive::MovingLine { .. }
            | SingularPrimitive::BranchPlane { .. } => self.signed_distance(p).abs(),
            SingularPrimitive::BlowupTime { time } => (time - p.t).max(0.0),
            SingularPrimitive::HalfSpaceBoundary { .. } => self.signed_distance(p).max(0.0),
        }
    }

    fn signed_distance(&self, p: &SpaceTimePoint) -> f64 {
        match self {
            SingularPrimitive::Point { center, velocity } => {
                let mut d = [0.0; 3];
                for i in 0..3 {
                    d[i] = p.x[i] - center[i] - velocity[i] * p.t;
                }
                norm3(&d)
            }
            SingularPrimitive::MovingLine { normal, offset, rate }
            | SingularPrimitive::BranchPlane { normal, offset, rate }
            | SingularPrimitive::HalfSpaceBoundary { normal, offset, rate } => {
                (dot3(normal, &p.x) - offset - rate * p.t) / norm3(normal)
            }
            SingularPrimitive::BlowupTime { time } => time - p.t,
        }
    }

    /// Whether the primitive restricts where velocity may be evaluated.
    pub fn affects_velocity(&self) -> bool {
        !matches!(self, SingularPrimitive::BranchPlane { .. })
    }

    /// Rate at which the spatial distance to the primitive can change.
    pub fn drift_speed(&self) -> f64 {
        match self {
            SingularPrimitive::Point { velocity, .. } => norm3(velocity),
            SingularPrimitive::MovingLine { normal, rate, .. }
            | SingularPrimitive::BranchPlane { normal, rate, .. }
            | SingularPrimitive::HalfSpaceBoundary { normal, rate, .. } => rate.abs() / norm3(normal),
            SingularPrimitive::BlowupTime { .. } => 0.0,
        }
    }

    /// Image under `x -> x + C t` (the Galilean boost of the field).
    pub fn boosted(&self, c: &Vec3) -> Self {
        match self.clone() {
            SingularPrimitive::Point { center, velocity } => SingularPrimitive::Point {
                center,
                velocity: [velocity[0] + c[0], velocity[1] + c[1], velocity[2] + c[2]],
            },
            SingularPrimitive::MovingLine { normal, offset, rate } => {
                SingularPrimitive::MovingLine { normal, offset, rate: rate + dot3(&normal, c) }
            }
            SingularPrimitive::BranchPlane { normal, offset, rate } => {
                SingularPrimitive::BranchPlane { normal, offset, rate: rate + dot3(&normal, c) }
            }
            SingularPrimitive::HalfSpaceBoundary { normal, offset, rate } => {
                SingularPrimitive::HalfSpaceBoundary { normal, offset, rate: rate + dot3(&normal, c) }
            }
            b @ SingularPrimitive::BlowupTime { .. } => b,
        }
    }

    /// Image under `x -> Q^T x` for the planar rotation `Q = [[c, -s], [s, c]]`.
    pub fn rotated(&self, cos: f64, sin: f64) -> Self {
        // Q^T v
        let qt = |v: &Vec3| [cos * v[0] + sin * v[1], -sin * v[0] + cos * v[1], v[2]];
        match self {
            SingularPrimitive::Point { center, velocity } => {
                SingularPrimitive::Point { center: qt(center), velocity: qt(velocity) }
            }
            SingularPrimitive::MovingLine { normal, offset, rate } => {
                SingularPrimitive::MovingLine { normal: qt(normal), offset: *offset, rate: *rate }
            }
            SingularPrimitive::BranchPlane { normal, offset, rate } => {
                SingularPrimitive::BranchPlane { normal: qt(normal), offset: *offset, rate: *rate }
            }
            SingularPrimitive::HalfSpaceBoundary { normal, offset, rate } => {
                SingularPrimitive::HalfSpaceBoundary { normal: qt(normal), offset: *offset, rate: *rate }
            }
            b @ SingularPrimitive::BlowupTime { .. } => b.clone(),
        }
    }

    /// Image under `(x, t) -> (lambda x, tau t)`.
    pub fn rescaled(&self, lambda: f64, tau: f64) -> Self {
        let s = lambda / tau;
        let scale = |v: &Vec3, k: f64| [k * v[0], k * v[1], k * v[2]];
        match self {
            SingularPrimitive::Point { center, velocity } => {
                SingularPrimitive::Point { center: scale(center, lambda), velocity: scale(velocity, s) }
            }
            SingularPrimitive::MovingLine { normal, offset, rate } => {
                SingularPrimitive::MovingLine { normal: *normal, offset: lambda * offset, rate: s * rate }
            }
            SingularPrimitive::BranchPlane { normal, offset, rate } => {
                SingularPrimitive::BranchPlane { normal: *normal, offset: lambda * offset, rate: s * rate }
            }
            SingularPrimitive::HalfSpaceBoundary { normal, offset, rate } => {
                SingularPrimitive::HalfSpaceBoundary { normal: *normal, offset: lambda * offset, rate: s * rate }
            }
            SingularPrimitive::BlowupTime { time } => SingularPrimitive::BlowupTime { time: tau * time },
        }
    }

    pub fn describe(&self) -> String {
        match self {
            SingularPrimitive::Point { center, velocity } => {
                if velocity.iter().all(|v| *v == 0.0) {
                    format!("point ({}, {})", center[0], center[1])
                } else {
                    format!("point ({}, {}) + t*({}, {})", center[0], center[1], velocity[0], velocity[1])
                }
            }
            SingularPrimitive::MovingLine { normal, offset, rate } => {
                format!("line {}*x1 + {}*x2 = {} + {}*t", normal[0], normal[1], offset, rate)
            }
            SingularPrimitive::BlowupTime { time } => format!("blow-up at t = {time}"),
            SingularPrimitive::BranchPlane { normal, offset, rate } => {
                format!("pressure branch cut {}*x1 + {}*x2 = {} + {}*t", normal[0], normal[1], offset, rate)
            }
            SingularPrimitive::HalfSpaceBoundary { normal, offset, rate } => {
                format!("half-space {}*x1 + {}*x2 + {}*x3 >= {} + {}*t", normal[0], normal[1], normal[2], offset, rate)
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SingularSet {
    pub primitives: Vec<SingularPrimitive>,
}

/// Why a point cannot be evaluated.
#[derive(Debug, Clone, PartialEq)]
pub enum Rejection {
    NearSingularity(usize),
    OutsideDomain(usize),
    PastBlowup(usize),
}

impl SingularSet {
    pub fn new(primitives: Vec<SingularPrimitive>) -> Self {
        Self { primitives }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn push(&mut self, p: SingularPrimitive) {
        self.primitives.push(p);
    }

    pub fn blowup_time(&self) -> Option<f64> {
        self.primitives
            .iter()
            .filter_map(|p| match p {
                SingularPrimitive::BlowupTime { time } => Some(*time),
                _ => None,
            })
            .reduce(f64::min)
    }

    /// Checks a point against every velocity-relevant primitive, rejecting
    /// points closer than `exclusion` to a point or line singularity or to
    /// the domain boundary. With `exclusion == 0` only points exactly on a
    /// singularity, outside the domain, or at/after blow-up are rejected.
    pub fn check(&self, p: &SpaceTimePoint, exclusion: f64) -> Result<(), Rejection> {
        for (i, prim) in self.primitives.iter().enumerate() {
            match prim {
                SingularPrimitive::Point { .. } | SingularPrimitive::MovingLine { .. } => {
                    let d = prim.distance(p);
                    if d == 0.0 || d < exclusion {
                        return Err(Rejection::NearSingularity(i));
                    }
                }
                SingularPrimitive::HalfSpaceBoundary { .. } => {
                    if prim.signed_distance(p) < exclusion {
                        return Err(Rejection::OutsideDomain(i));
                    }
                }
                SingularPrimitive::BlowupTime { time } => {
                    if p.t >= *time {
                        return Err(Rejection::PastBlowup(i));
                    }
                }
                SingularPrimitive::BranchPlane { .. } => {}
            }
        }
        Ok(())
    }

    /// Largest spatial step keeping a finite-difference stencil well clear of
    /// every velocity-relevant primitive at `p`.
    pub fn space_step_cap(&self, p: &SpaceTimePoint) -> f64 {
        let mut cap = f64::INFINITY;
        for prim in &self.primitives {
            match prim {
                SingularPrimitive::Point { .. } | SingularPrimitive::MovingLine { .. } => {
                    cap = cap.min(prim.distance(p) / SINGULAR_STEP_FACTOR);
                }
                SingularPrimitive::HalfSpaceBoundary { .. } => {
                    cap = cap.min(prim.distance(p) / BOUNDARY_STEP_FACTOR);
                }
                _ => {}
            }
        }
        cap
    }

    /// Largest time step with the same guarantee, accounting for moving
    /// primitives and the remaining lifetime before blow-up.
    pub fn time_step_cap(&self, p: &SpaceTimePoint) -> f64 {
        let mut cap = f64::INFINITY;
        for prim in &self.primitives {
            let speed = prim.drift_speed();
            match prim {
                SingularPrimitive::Point { .. } | SingularPrimitive::MovingLine { .. } => {
                    if speed > 0.0 {
                        cap = cap.min(prim.distance(p) / (SINGULAR_STEP_FACTOR * speed));
                    }
                }
                SingularPrimitive::HalfSpaceBoundary { .. } => {
                    if speed > 0.0 {
                        cap = cap.min(prim.distance(p) / (BOUNDARY_STEP_FACTOR * speed));
                    }
                }
                SingularPrimitive::BlowupTime { .. } => {
                    cap = cap.min(prim.distance(p) / SINGULAR_STEP_FACTOR);
                }
                SingularPrimitive::BranchPlane { .. } => {}
            }
        }
        cap
    }

    /// Space and time caps for stencils of the pressure value, which also
    /// must not straddle a branch cut.
    pub fn pressure_step_caps(&self, p: &SpaceTimePoint) -> (f64, f64) {
        let mut space = self.space_step_cap(p);
        let mut time = self.time_step_cap(p);
        for prim in &self.primitives {
            if let SingularPrimitive::BranchPlane { .. } = prim {
                let d = prim.distance(p);
                space = space.min(d / BOUNDARY_STEP_FACTOR);
                let speed = prim.drift_speed();
                if speed > 0.0 {
                    time = time.min(d / (BOUNDARY_STEP_FACTOR * speed));
                }
            }
        }
        (space, time)
    }

    pub fn boosted(&self, c: &Vec3) -> Self {
        Self::new(self.primitives.iter().map(|p| p.boosted(c)).collect())
    }

    pub fn rotated(&self, cos: f64, sin: f64) -> Self {
        Self::new(self.primitives.iter().map(|p| p.rotated(cos, sin)).collect())
    }

    pub fn rescaled(&self, lambda: f64, tau: f64) -> Self {
        Self::new(self.primitives.iter().map(|p| p.rescaled(lambda, tau)).collect())
    }

    pub fn describe(&self) -> String {
        if self.primitives.is_empty() {
            "none".to_string()
        } else {
            self.primitives.iter().map(|p| p.describe()).collect::<Vec<_>>().join("; ")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distances_vanish_on_their_locus() {
        let origin = SingularPrimitive::origin();
        assert_eq!(origin.distance(&SpaceTimePoint::new2(0.0, 0.0, 3.0)), 0.0);
        assert_eq!(origin.distance(&SpaceTimePoint::new2(3.0, 4.0, 0.0)), 5.0);

        let line = SingularPrimitive::MovingLine { normal: [1.0, -1.0, 0.0], offset: 0.0, rate: 1.0 };
        assert_eq!(line.distance(&SpaceTimePoint::new2(1.5, 0.5, 1.0)), 0.0);
        let d = line.distance(&SpaceTimePoint::new2(1.0, 0.0, 0.0));
        assert!((d - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);

        let bt = SingularPrimitive::BlowupTime { time: 1.0 };
        assert_eq!(bt.distance(&SpaceTimePoint::new2(0.0, 0.0, 1.0)), 0.0);
        assert_eq!(bt.distance(&SpaceTimePoint::new2(0.0, 0.0, 0.25)), 0.75);

        let half = SingularPrimitive::HalfSpaceBoundary { normal: [1.0; 3], offset: 0.0, rate: 0.0 };
        assert_eq!(half.distance(&SpaceTimePoint::new3(1.0, -1.0, 0.0, 0.0)), 0.0);
        assert_eq!(half.distance(&SpaceTimePoint::new3(-1.0, -1.0, 0.0, 0.0)), 0.0);
        assert!((half.distance(&SpaceTimePoint::new3(1.0, 1.0, 1.0, 0.0)) - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn boost_moves_singularities_with_the_flow() {
        let c = [1.0, 2.0, 0.0];
        let p = SingularPrimitive::origin().boosted(&c);
        assert_eq!(p.distance(&SpaceTimePoint::new2(2.0, 4.0, 2.0)), 0.0);
        let l = SingularPrimitive::MovingLine { normal: [0.0, 1.0, 0.0], offset: 0.0, rate: 0.0 }.boosted(&c);
        assert_eq!(l.distance(&SpaceTimePoint::new2(7.0, 2.0, 1.0)), 0.0);
    }

    #[test]
    fn rotation_and_rescale_map_loci() {
        let (s, c) = 0.7f64.sin_cos();
        let line = SingularPrimitive::MovingLine { normal: [0.0, 1.0, 0.0], offset: 0.5, rate: 0.0 };
        let rot = line.rotated(c, s);
        // y = Qx lies on the original line iff x lies on the rotated one
        let x = [0.3, 0.0, 0.0];
        let x2 = (0.5 - s * x[0]) / c;
        let p = SpaceTimePoint::new2(x[0], x2, 0.0);
        let y = SpaceTimePoint::new2(c * p.x[0] - s * p.x[1], s * p.x[0] + c * p.x[1], 0.0);
        assert!(line.distance(&y) < 1e-15);
        assert!(rot.distance(&p) < 1e-15);

        let bt = SingularPrimitive::BlowupTime { time: 1.0 }.rescaled(2.0, 3.0);
        assert_eq!(bt, SingularPrimitive::BlowupTime { time: 3.0 });
    }

    #[test]
    fn check_respects_exclusion_and_roles() {
        let set = SingularSet::new(vec![
            SingularPrimitive::origin(),
            SingularPrimitive::BranchPlane { normal: [0.0, 1.0, 0.0], offset: 0.0, rate: 0.0 },
            SingularPrimitive::BlowupTime { time: 1.0 },
        ]);
        assert!(set.check(&SpaceTimePoint::new2(0.5, 0.0, 0.0), 1e-3).is_ok());
        assert_eq!(set.check(&SpaceTimePoint::new2(1e-4, 0.0, 0.0), 1e-3), Err(Rejection::NearSingularity(0)));
        assert!(set.check(&SpaceTimePoint::new2(1e-4, 0.0, 0.0), 0.0).is_ok());
        assert_eq!(set.check(&SpaceTimePoint::new2(1.0, 1.0, 1.0), 0.0), Err(Rejection::PastBlowup(2)));
        assert_eq!(set.blowup_time(), Some(1.0));
    }
}
