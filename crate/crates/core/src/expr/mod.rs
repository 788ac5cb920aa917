//! Profile expression language.
//!
//! The free functions of every solution family (`c(t)`, `h(r)`, wave
//! profiles, `f(t)`) are written as single-variable expressions:
//!
//! * numbers in decimal or scientific notation,
//! * the declared variable and any number of named parameters,
//! * `+ - * / ^`, unary minus, parentheses,
//! * `exp ln sqrt sin cos atan`.
//!
//! `abs` and `sign` are deliberately absent; write `|x|^2` as `x^2`.
//! Integer powers are evaluated by repeated multiplication, any other
//! power as `exp(b*ln(a))` which needs `a > 0`.
//!
//! Expressions evaluate either to plain reals ([`Expr::eval_real`]) or to
//! second-order jets ([`Expr::eval_jet`]). The two paths share no
//! arithmetic, which lets finite differences of the first check the second.

mod ast;
mod jet;
mod parse;

pub use ast::{BinOp, Func, Node};
pub use jet::Jet2;
pub use parse::ParseError;

use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Maximum number of AST levels accepted by the parser.
pub const MAX_DEPTH: usize = 256;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("parameter `{0}` is not defined")]
    Unresolved(String),
    #[error("domain violation in `{node}`: {reason}")]
    Domain { node: String, reason: &'static str },
}

/// Named parameter values; lookups of missing names are errors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamEnv {
    values: BTreeMap<String, f64>,
}

impl ParamEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.values.insert(name.to_string(), value);
        self
    }

    pub fn insert(&mut self, name: &str, value: f64) {
        self.values.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Result<f64, EvalError> {
        self.values.get(name).copied().ok_or_else(|| EvalError::Unresolved(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.values.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl FromIterator<(String, f64)> for ParamEnv {
    fn from_iter<I: IntoIterator<Item = (String, f64)>>(iter: I) -> Self {
        Self { values: iter.into_iter().collect() }
    }
}

/// A parsed single-variable expression.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
    variable: String,
}

impl Expr {
    pub fn parse(text: &str, variable: &str) -> Result<Expr, ParseError> {
        parse::parse(text, variable)
    }

    pub fn from_node(root: Node, variable: &str) -> Expr {
        Expr { root, variable: variable.to_string() }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn variable(&self) -> &str {
        &self.variable
    }

    /// True when the variable does not occur.
    pub fn is_constant(&self) -> bool {
        !self.root.contains_var()
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    /// Identifiers other than the variable, in order of first appearance.
    pub fn parameters(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.root.collect_params(&mut out);
        out
    }

    /// Names referenced by the expression but missing from `env`.
    pub fn unresolved<'a>(&'a self, env: &ParamEnv) -> Vec<&'a str> {
        self.parameters().into_iter().filter(|p| !env.contains(p)).collect()
    }

    pub fn eval_real(&self, x: f64, env: &ParamEnv) -> Result<f64, EvalError> {
        real(&self.root, x, env)
    }

    pub fn eval_jet(&self, seed: Jet2, env: &ParamEnv) -> Result<Jet2, EvalError> {
        jet(&self.root, seed, env)
    }

    /// Jet of the expression at `x` seeded as the identity variable.
    pub fn jet_at(&self, x: f64, env: &ParamEnv) -> Result<Jet2, EvalError> {
        self.eval_jet(Jet2::variable(x), env)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.root.render(&self.variable))
    }
}

fn domain(node: &Node, reason: &'static str) -> EvalError {
    EvalError::Domain { node: node.to_string(), reason }
}

/// Integer exponents small enough for repeated multiplication.
fn integer_exponent(b: f64) -> Option<i64> {
    (b.fract() == 0.0 && b.abs() <= 1024.0).then_some(b as i64)
}

fn real(node: &Node, x: f64, env: &ParamEnv) -> Result<f64, EvalError> {
    Ok(match node {
        Node::Num(v) => *v,
        Node::Var => x,
        Node::Param(name) => env.get(name)?,
        Node::Neg(a) => -real(a, x, env)?,
        Node::Binary(op, a, b) => {
            let a_val = real(a, x, env)?;
            let b_val = real(b, x, env)?;
            match op {
                BinOp::Add => a_val + b_val,
                BinOp::Sub => a_val - b_val,
                BinOp::Mul => a_val * b_val,
                BinOp::Div => {
                    if b_val == 0.0 {
                        return Err(domain(node, "division by zero"));
                    }
                    a_val / b_val
                }
                BinOp::Pow => match integer_exponent(b_val) {
                    Some(n) => {
                        if n < 0 && a_val == 0.0 {
                            return Err(domain(node, "negative power of zero"));
                        }
                        a_val.powi(n as i32)
                    }
                    None => {
                        if a_val <= 0.0 {
                            return Err(domain(node, "non-integer power needs a positive base"));
                        }
                        a_val.powf(b_val)
                    }
                },
            }
        }
        Node::Call(f, a) => {
            let v = real(a, x, env)?;
            match f {
                Func::Exp => v.exp(),
                Func::Ln => {
                    if v <= 0.0 {
                        return Err(domain(node, "ln needs a positive argument"));
                    }
                    v.ln()
                }
                Func::Sqrt => {
                    if v <= 0.0 {
                        return Err(domain(node, "sqrt needs a positive argument"));
                    }
                    v.sqrt()
                }
                Func::Sin => v.sin(),
                Func::Cos => v.cos(),
                Func::Atan => v.atan(),
            }
        }
    })
}

fn jet(node: &Node, seed: Jet2, env: &ParamEnv) -> Result<Jet2, EvalError> {
    Ok(match node {
        Node::Num(v) => Jet2::constant(*v),
        Node::Var => seed,
        Node::Param(name) => Jet2::constant(env.get(name)?),
        Node::Neg(a) => -jet(a, seed, env)?,
        Node::Binary(op, a, b) => {
            let ja = jet(a, seed, env)?;
            let jb = jet(b, seed, env)?;
            match op {
                BinOp::Add => ja + jb,
                BinOp::Sub => ja - jb,
                BinOp::Mul => ja * jb,
                BinOp::Div => {
                    if jb.value == 0.0 {
                        return Err(domain(node, "division by zero"));
                    }
                    ja / jb
                }
                BinOp::Pow => match integer_exponent(jb.value).filter(|_| jb.is_constant()) {
                    Some(n) => {
                        if n < 0 && ja.value == 0.0 {
                            return Err(domain(node, "negative power of zero"));
                        }
                        ja.powi(n)
                    }
                    None => {
                        if ja.value <= 0.0 {
                            return Err(domain(node, "non-integer power needs a positive base"));
                        }
                        ja.powj(jb)
                    }
                },
            }
        }
        Node::Call(f, a) => {
            let j = jet(a, seed, env)?;
            match f {
                Func::Exp => j.exp(),
                Func::Ln => {
                    if j.value <= 0.0 {
                        return Err(domain(node, "ln needs a positive argument"));
                    }
                    j.ln()
                }
                Func::Sqrt => {
                    if j.value <= 0.0 {
                        return Err(domain(node, "sqrt needs a positive argument"));
                    }
                    j.sqrt()
                }
                Func::Sin => j.sin(),
                Func::Cos => j.cos(),
                Func::Atan => j.atan(),
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd1(e: &Expr, x: f64, h: f64, env: &ParamEnv) -> f64 {
        (e.eval_real(x + h, env).unwrap() - e.eval_real(x - h, env).unwrap()) / (2.0 * h)
    }

    fn fd2(e: &Expr, x: f64, h: f64, env: &ParamEnv) -> f64 {
        (e.eval_real(x + h, env).unwrap() - 2.0 * e.eval_real(x, env).unwrap() + e.eval_real(x - h, env).unwrap())
            / (h * h)
    }

    #[test]
    fn exp_jet_at_zero() {
        let e = Expr::parse("exp(x)", "x").unwrap();
        assert_eq!(e.eval_jet(Jet2::new(0.0, 1.0, 0.0), &ParamEnv::new()).unwrap(), Jet2::new(1.0, 1.0, 1.0));
    }

    #[test]
    fn square_jet() {
        let e = Expr::parse("x^2", "x").unwrap();
        assert_eq!(e.jet_at(3.0, &ParamEnv::new()).unwrap(), Jet2::new(9.0, 6.0, 2.0));
    }

    #[test]
    fn bump_profile_against_finite_differences() {
        let env = ParamEnv::new();
        let e = Expr::parse("1/(1+x^2)^2", "x").unwrap();
        let j = e.jet_at(1.0, &env).unwrap();
        assert_eq!(j.value, 0.25);
        assert_eq!(j.d1, -0.5);
        // oracle: second central difference with step 1e-5 gives 1.0000 to ~1e-5
        let oracle = fd2(&e, 1.0, 1e-5, &env);
        assert!((j.d2 - oracle).abs() < 1e-4, "{} vs {}", j.d2, oracle);
        assert!((j.d2 - 1.0).abs() < 1e-14);
        assert!((j.d1 - fd1(&e, 1.0, 1e-5, &env)).abs() < 1e-8);
    }

    #[test]
    fn eval_real_examples() {
        let e = Expr::parse("1/(T-x)", "x").unwrap();
        assert_eq!(e.eval_real(1.0, &ParamEnv::new().with("T", 2.0)).unwrap(), 1.0);
        let err = e.eval_real(1.0, &ParamEnv::new().with("T", 1.0)).unwrap_err();
        assert!(matches!(err, EvalError::Domain { reason: "division by zero", .. }));
        assert_eq!(e.eval_real(1.0, &ParamEnv::new()).unwrap_err(), EvalError::Unresolved("T".into()));
        let t = Expr::parse("t", "t").unwrap();
        assert_eq!(t.eval_real(1.0, &ParamEnv::new()).unwrap(), 1.0);
    }

    #[test]
    fn domain_errors_name_the_node() {
        let env = ParamEnv::new();
        let e = Expr::parse("1 + ln(x - 2)", "x").unwrap();
        match e.eval_jet(Jet2::variable(1.0), &env).unwrap_err() {
            EvalError::Domain { node, .. } => assert!(node.starts_with("ln("), "{node}"),
            other => panic!("{other:?}"),
        }
        assert!(Expr::parse("sqrt(x)", "x").unwrap().eval_real(0.0, &env).is_err());
        assert!(Expr::parse("x^0.5", "x").unwrap().eval_real(-1.0, &env).is_err());
        assert!(Expr::parse("x^-1", "x").unwrap().eval_jet(Jet2::variable(0.0), &env).is_err());
        // integer powers of negative bases are fine
        assert_eq!(Expr::parse("x^3", "x").unwrap().eval_real(-2.0, &env).unwrap(), -8.0);
    }

    #[test]
    fn non_constant_exponent_uses_exp_ln() {
        let env = ParamEnv::new();
        let e = Expr::parse("x^x", "x").unwrap();
        let j = e.jet_at(2.0, &env).unwrap();
        assert!((j.value - 4.0).abs() < 1e-14);
        // d/dx x^x = x^x (ln x + 1)
        assert!((j.d1 - 4.0 * (2f64.ln() + 1.0)).abs() < 1e-13);
    }

    #[test]
    fn print_parse_round_trip_is_exact() {
        let env = ParamEnv::new().with("T", 1.5);
        for src in ["-1/r^2 + 1/(1+r^2)^2", "exp(r/12 - sqrt(r))*atan(r)", "2^-r^2", "1/(T-r)"] {
            let e = Expr::parse(src, "r").unwrap();
            let back = Expr::parse(&e.to_string(), "r").unwrap();
            assert_eq!(e, back, "{src}");
            let _ = back.eval_real(0.3, &env);
        }
    }
}
