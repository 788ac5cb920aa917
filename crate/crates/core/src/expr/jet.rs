//! Second-order truncated Taylor arithmetic in one variable.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Value, first and second derivative of a scalar with respect to one seed variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet2 {
    pub const fn new(value: f64, d1: f64, d2: f64) -> Self {
        Self { value, d1, d2 }
    }

    /// The seed variable itself: `(x, 1, 0)`.
    pub const fn variable(x: f64) -> Self {
        Self::new(x, 1.0, 0.0)
    }

    /// A constant: `(k, 0, 0)`.
    pub const fn constant(k: f64) -> Self {
        Self::new(k, 0.0, 0.0)
    }

    pub fn is_constant(&self) -> bool {
        self.d1 == 0.0 && self.d2 == 0.0
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.d1.is_finite() && self.d2.is_finite()
    }

    /// Compose with a scalar function whose value, first and second
    /// derivative at `self.value` are `f0`, `f1`, `f2`.
    #[inline]
    pub fn compose(self, f0: f64, f1: f64, f2: f64) -> Self {
        Self { value: f0, d1: f1 * self.d1, d2: f1 * self.d2 + f2 * self.d1 * self.d1 }
    }

    pub fn scale(self, k: f64) -> Self {
        Self::new(k * self.value, k * self.d1, k * self.d2)
    }

    pub fn recip(self) -> Self {
        let inv = 1.0 / self.value;
        self.compose(inv, -inv * inv, 2.0 * inv * inv * inv)
    }

    pub fn exp(self) -> Self {
        let e = self.value.exp();
        self.compose(e, e, e)
    }

    /// Natural logarithm; the caller guarantees a positive value.
    pub fn ln(self) -> Self {
        let inv = 1.0 / self.value;
        self.compose(self.value.ln(), inv, -inv * inv)
    }

    /// Square root; the caller guarantees a positive value.
    pub fn sqrt(self) -> Self {
        let s = self.value.sqrt();
        let f1 = 0.5 / s;
        self.compose(s, f1, -0.25 / (s * self.value))
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.compose(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.compose(c, -s, -c)
    }

    pub fn atan(self) -> Self {
        let a = 1.0 / (1.0 + self.value * self.value);
        self.compose(self.value.atan(), a, -2.0 * self.value * a * a)
    }

    /// Integer power by repeated squaring and multiplication.
    ///
    /// Negative exponents take the reciprocal of the positive power, so the
    /// caller must rule out a zero base.
    pub fn powi(self, n: i64) -> Self {
        let mut exp = n.unsigned_abs();
        let mut base = self;
        let mut acc = Jet2::constant(1.0);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base;
            }
            exp >>= 1;
            if exp > 0 {
                base = base * base;
            }
        }
        if n < 0 {
            acc.recip()
        } else {
            acc
        }
    }

    /// `self^rhs` through `exp(rhs * ln(self))`; requires a positive base.
    pub fn powj(self, rhs: Jet2) -> Self {
        (rhs * self.ln()).exp()
    }
}

impl From<f64> for Jet2 {
    fn from(k: f64) -> Self {
        Jet2::constant(k)
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    #[inline]
    fn add(self, rhs: Jet2) -> Jet2 {
        Jet2::new(self.value + rhs.value, self.d1 + rhs.d1, self.d2 + rhs.d2)
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    #[inline]
    fn sub(self, rhs: Jet2) -> Jet2 {
        Jet2::new(self.value - rhs.value, self.d1 - rhs.d1, self.d2 - rhs.d2)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    #[inline]
    fn mul(self, rhs: Jet2) -> Jet2 {
        Jet2::new(
            self.value * rhs.value,
            self.d1 * rhs.value + self.value * rhs.d1,
            self.d2 * rhs.value + 2.0 * self.d1 * rhs.d1 + self.value * rhs.d2,
        )
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    #[inline]
    fn div(self, rhs: Jet2) -> Jet2 {
        let q = self.value / rhs.value;
        let q1 = (self.d1 - q * rhs.d1) / rhs.value;
        let q2 = (self.d2 - 2.0 * q1 * rhs.d1 - q * rhs.d2) / rhs.value;
        Jet2::new(q, q1, q2)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    #[inline]
    fn neg(self) -> Jet2 {
        Jet2::new(-self.value, -self.d1, -self.d2)
    }
}
