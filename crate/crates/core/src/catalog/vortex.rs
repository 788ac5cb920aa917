use super::{CatalogError, Profile};
use crate::analysis::quad::{integrate, QuadConfig, QuadError};
use crate::expr::{BinOp, Expr, Jet2, Node, ParamEnv};
use crate::field::{
    radial_field_jet, FieldError, FlowField, Metadata, PressureValue, SingularPrimitive, SingularSet, SolutionPair,
    SpaceTimePoint, Vec3, VelocityJet,
};
use std::sync::Arc;

/// The planar vortex family `u = g(r,t) (x2, -x1)` with
/// `g = c(t)/r^2 + h(r)`.
///
/// Top-level `k/r^2` terms of `h` are folded into the coefficient of
/// `1/r^2`, so profiles such as `h = -1/r^2 + ...` with `c = 1` are
/// evaluated without cancelling large terms near the origin.
#[derive(Debug, Clone)]
pub struct IjVortex {
    c: Profile,
    h: Profile,
    inverse_square: f64,
    h_rest: Expr,
    env: ParamEnv,
    removable: bool,
    pub(crate) drop_c_prime: bool,
}

impl IjVortex {
    pub fn new(c: &str, h: &str, env: ParamEnv) -> Result<Self, CatalogError> {
        let c = Profile::new("c", c, "t", &env)?;
        let h = Profile::new("h", h, "r", &env)?;
        let (inverse_square, rest) = split_inverse_square(h.expr.root(), &env);
        let h_rest = Expr::from_node(rest, "r");
        let mut field = Self { c, h, inverse_square, h_rest, env, removable: false, drop_c_prime: false };
        field.removable = field.removable_core();
        Ok(field)
    }

    /// Total `1/r^2` coefficient `c(t) + k`.
    fn core(&self, t: f64) -> Result<f64, FieldError> {
        Ok(self.c.expr.eval_real(t, &self.env)? + self.inverse_square)
    }

    fn radius(p: &SpaceTimePoint) -> Result<f64, FieldError> {
        let r = p.x[0].hypot(p.x[1]);
        if r > 0.0 {
            Ok(r)
        } else {
            Err(FieldError::Inadmissible("r = 0".into()))
        }
    }

    /// `g(r, t)` from plain evaluation.
    pub fn g(&self, r: f64, t: f64) -> Result<f64, FieldError> {
        Ok(self.core(t)? / (r * r) + self.h_rest.eval_real(r, &self.env)?)
    }

    fn c_prime(&self, t: f64) -> Result<f64, FieldError> {
        if self.drop_c_prime {
            return Ok(0.0);
        }
        Ok(self.c.expr.jet_at(t, &self.env)?.d1)
    }

    /// `F(r,t)`: integral of `rho g(rho,t)^2` from 1 to `r`.
    pub fn radial_potential(&self, r: f64, t: f64) -> Result<f64, FieldError> {
        let f = |rho: f64| {
            self.g(rho, t).map(|g| rho * g * g).map_err(|e| QuadError::Integrand { at: rho, message: e.to_string() })
        };
        let cfg = QuadConfig { abs_tol: 1e-14, rel_tol: 1e-13, max_intervals: 2000 };
        integrate(f, 1.0, r, &cfg).map(|q| q.value).map_err(|e| FieldError::Quadrature(e.to_string()))
    }

    /// Whether `c` is constant, so the pressure has no angular term.
    fn steady_core(&self) -> bool {
        self.c.expr.is_constant()
    }

    /// The origin is removable when the `1/r^2` coefficient vanishes for all
    /// `t` and the remaining profile depends on `r` through even powers with
    /// a finite second-order jet at `r = 0`. Anything else is kept singular.
    fn removable_core(&self) -> bool {
        if !self.steady_core() || self.core(0.0) != Ok(0.0) || !even_in_var(self.h_rest.root()) {
            return false;
        }
        matches!(self.h_rest.jet_at(0.0, &self.env), Ok(j) if j.value.is_finite() && j.d1.is_finite() && j.d2.is_finite())
    }

    /// `u = g(0) (x2, -x1)` to second order at a removable core.
    fn centre(&self, p: &SpaceTimePoint) -> Option<Result<VelocityJet, FieldError>> {
        if !self.removable || p.x[0] != 0.0 || p.x[1] != 0.0 {
            return None;
        }
        Some(self.h_rest.eval_real(0.0, &self.env).map_err(FieldError::from).map(|g| {
            let mut jet = VelocityJet::zero(2);
            jet.jacobian[0][1] = g;
            jet.jacobian[1][0] = -g;
            jet
        }))
    }

    /// The core point unless it is removable, and the pressure branch cut
    /// unless `c` is constant.
    pub fn singular_set(&self) -> SingularSet {
        let mut parts = Vec::new();
        if !self.removable {
            parts.push(SingularPrimitive::origin());
        }
        if !self.steady_core() {
            parts.push(branch_plane());
        }
        SingularSet::new(parts)
    }
}

/// Every occurrence of the variable is the base of a non-negative even
/// integer power.
fn even_in_var(node: &Node) -> bool {
    match node {
        Node::Var => false,
        Node::Num(_) | Node::Param(_) => true,
        Node::Binary(BinOp::Pow, base, e) if **base == Node::Var => {
            matches!(**e, Node::Num(k) if k >= 0.0 && k % 2.0 == 0.0)
        }
        Node::Neg(a) | Node::Call(_, a) => even_in_var(a),
        Node::Binary(_, a, b) => even_in_var(a) && even_in_var(b),
    }
}

fn constant(node: &Node, env: &ParamEnv) -> Option<f64> {
    if node.contains_var() {
        return None;
    }
    Expr::from_node(node.clone(), "r").eval_real(0.0, env).ok().filter(|v| v.is_finite())
}

/// Coefficient `k` when `node` is `k r^-2` written in one of the usual ways.
fn inverse_square_coefficient(node: &Node, env: &ParamEnv) -> Option<f64> {
    match node {
        Node::Binary(BinOp::Pow, base, e) if **base == Node::Var && constant(e, env) == Some(-2.0) => Some(1.0),
        Node::Binary(BinOp::Div, a, b) => match &**b {
            Node::Binary(BinOp::Pow, base, e) if **base == Node::Var && constant(e, env) == Some(2.0) => {
                constant(a, env)
            }
            _ => Some(inverse_square_coefficient(a, env)? / constant(b, env).filter(|v| *v != 0.0)?),
        },
        Node::Binary(BinOp::Mul, a, b) => match (constant(a, env), constant(b, env)) {
            (Some(k), None) => Some(k * inverse_square_coefficient(b, env)?),
            (None, Some(k)) => Some(k * inverse_square_coefficient(a, env)?),
            _ => None,
        },
        Node::Neg(a) => Some(-inverse_square_coefficient(a, env)?),
        _ => None,
    }
}

fn collect_terms(node: &Node, sign: f64, env: &ParamEnv, k: &mut f64, rest: &mut Vec<(f64, Node)>) {
    match node {
        Node::Binary(BinOp::Add, a, b) => {
            collect_terms(a, sign, env, k, rest);
            collect_terms(b, sign, env, k, rest);
        }
        Node::Binary(BinOp::Sub, a, b) => {
            collect_terms(a, sign, env, k, rest);
            collect_terms(b, -sign, env, k, rest);
        }
        Node::Neg(a) => collect_terms(a, -sign, env, k, rest),
        term => match inverse_square_coefficient(term, env) {
            Some(m) => *k += sign * m,
            None => rest.push((sign, term.clone())),
        },
    }
}

/// Splits `h` into `k / r^2 + rest` over its top-level sum.
fn split_inverse_square(root: &Node, env: &ParamEnv) -> (f64, Node) {
    let mut k = 0.0;
    let mut rest = Vec::new();
    collect_terms(root, 1.0, env, &mut k, &mut rest);
    if k == 0.0 {
        return (0.0, root.clone());
    }
    let mut terms = rest.into_iter();
    let Some((sign, first)) = terms.next() else {
        return (k, Node::Num(0.0));
    };
    let first = if sign < 0.0 { Node::neg(first) } else { first };
    let node =
        terms.fold(first, |acc, (sign, t)| Node::binary(if sign < 0.0 { BinOp::Sub } else { BinOp::Add }, acc, t));
    (k, node)
}

impl FlowField for IjVortex {
    fn dim(&self) -> usize {
        2
    }

    fn jet(&self, p: &SpaceTimePoint) -> Result<VelocityJet, FieldError> {
        if let Some(jet) = self.centre(p) {
            return jet;
        }
        let r = Self::radius(p)?;
        let c = self.c.expr.jet_at(p.t, &self.env)?;
        let h = self.h_rest.jet_at(r, &self.env)?;
        let inv_r2 = Jet2::variable(r).powi(-2);
        let phi = inv_r2.scale(c.value + self.inverse_square) + h;
        radial_field_jet(phi, c.d1 / (r * r), p, 0.0)
    }

    fn velocity(&self, p: &SpaceTimePoint) -> Result<Vec3, FieldError> {
        if let Some(jet) = self.centre(p) {
            return jet.map(|j| j.value);
        }
        let r = Self::radius(p)?;
        let g = self.g(r, p.t)?;
        Ok([g * p.x[1], -g * p.x[0], 0.0])
    }

    fn pressure_gradient(&self, p: &SpaceTimePoint) -> Result<Vec3, FieldError> {
        if let Some(jet) = self.centre(p) {
            return jet.map(|_| [0.0; 3]);
        }
        let r = Self::radius(p)?;
        let [x1, x2, _] = p.x;
        let r2 = r * r;
        let cp = self.c_prime(p.t)?;
        let g2 = self.g(r, p.t)?.powi(2);
        Ok([-cp * x2 / r2 + g2 * x1, cp * x1 / r2 + g2 * x2, 0.0])
    }

    /// `-c'(t) atan(x1/x2) + F(r,t)`, continuous on each half-plane `x2 > 0`
    /// and `x2 < 0`. With constant `c` it is `F(r)` on the whole plane.
    fn pressure_value(&self, p: &SpaceTimePoint) -> Result<PressureValue, FieldError> {
        let [x1, x2, _] = p.x;
        let r = if self.centre(p).is_some() { 0.0 } else { Self::radius(p)? };
        let potential = self.radial_potential(r, p.t)?;
        if self.steady_core() && !self.drop_c_prime {
            return Ok(PressureValue { value: potential, branch: "plane".to_string() });
        }
        if x2 == 0.0 {
            return Err(FieldError::OnBranchCut);
        }
        let cp = self.c_prime(p.t)?;
        let angle = (x1 / x2).atan();
        let value = -cp * angle + potential;
        let branch = if x2 > 0.0 { "x2>0" } else { "x2<0" };
        Ok(PressureValue { value, branch: branch.to_string() })
    }

    fn radial_speed(&self, r: f64, t: f64) -> Option<Result<f64, FieldError>> {
        Some(self.g(r, t).map(|g| g.abs() * r))
    }
}

/// Builds the vortex family from `c` (in `t`) and `h` (in `r`).
pub fn ij_vortex(c: &str, h: &str, env: ParamEnv) -> Result<SolutionPair, CatalogError> {
    let field = IjVortex::new(c, h, env)?;
    let meta = vortex_metadata(&field);
    let singular = field.singular_set();
    Ok(SolutionPair::new(Arc::new(field), 0.0, singular, meta))
}

fn branch_plane() -> SingularPrimitive {
    SingularPrimitive::BranchPlane { normal: [0.0, 1.0, 0.0], offset: 0.0, rate: 0.0 }
}

pub(crate) fn vortex_singular_set() -> SingularSet {
    SingularSet::new(vec![SingularPrimitive::origin(), branch_plane()])
}

pub(crate) fn vortex_metadata(field: &IjVortex) -> Metadata {
    let mut meta = Metadata::new("ij_vortex").param("c", &field.c.text).param("h", &field.h.text).indices(1, 2);
    for (k, v) in field.env.iter() {
        meta = meta.param(k, v);
    }
    meta
}
