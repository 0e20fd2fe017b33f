//! Scalar fields for series coefficients.
//!
//! Two instantiations are provided: [`Exact`], a complex number whose real and
//! imaginary parts are arbitrary-precision rationals, and [`Float`], a double
//! precision complex number. Algorithms in this crate are written once against
//! the [`Coefficient`] trait and run unchanged over either field.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::Value;
use thiserror::Error;

/// Double precision complex coefficients.
pub type Float = Complex64;

/// Exact rational complex coefficients.
pub type Exact = Complex<BigRational>;

/// Largest denominator tried when reconstructing a rational from a float.
const MAX_RECONSTRUCTED_DENOMINATOR: i64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoefficientError {
    #[error("malformed coefficient: {0}")]
    Malformed(String),
    #[error("expected an exact coefficient (\"num/den\" strings), found {0}")]
    ExpectedExact(String),
    #[error("expected a floating coefficient (numbers), found {0}")]
    ExpectedFloat(String),
}

/// A commutative field element used as a series or polynomial coefficient.
pub trait Coefficient:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    /// True when arithmetic is exact and zero tests need no tolerance.
    const EXACT: bool;
    /// Default zero-test tolerance (0 for exact arithmetic).
    const DEFAULT_TOLERANCE: f64;

    /// Zero test. Exact values ignore `eps`.
    fn is_negligible(&self, eps: f64) -> bool;

    fn from_i64(n: i64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self;

    /// The imaginary unit.
    fn imaginary_unit() -> Self;

    fn to_c64(&self) -> Complex64;

    /// Converts a float into this field. Exact fields reconstruct the closest
    /// rational with a bounded denominator; callers must verify the result.
    fn approximate(z: Complex64) -> Option<Self>;

    fn conj(&self) -> Self;

    /// Real part, as an element of the same field.
    fn re_part(&self) -> Self;

    /// Imaginary part, as an element of the same field.
    fn im_part(&self) -> Self;

    /// Principal-branch real power. Exact fields only support integer exponents.
    fn pow_real(&self, exponent: f64) -> Option<Self>;

    fn to_json(&self) -> Value;

    fn from_json(value: &Value) -> Result<Self, CoefficientError>;

    fn abs(&self) -> f64 {
        self.to_c64().norm()
    }

    /// Integer power by repeated squaring; negative exponents invert.
    fn powi(&self, n: i64) -> Self {
        let mut base = if n < 0 {
            Self::one() / self.clone()
        } else {
            self.clone()
        };
        let mut e = n.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }

    fn is_real(&self, eps: f64) -> bool {
        self.im_part().is_negligible(eps)
    }
}

impl Coefficient for Float {
    const EXACT: bool = false;
    const DEFAULT_TOLERANCE: f64 = 1e-12;

    fn is_negligible(&self, eps: f64) -> bool {
        self.norm() <= eps
    }

    fn from_i64(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Complex64::new(num as f64 / den as f64, 0.0)
    }

    fn imaginary_unit() -> Self {
        Complex64::i()
    }

    fn to_c64(&self) -> Complex64 {
        *self
    }

    fn approximate(z: Complex64) -> Option<Self> {
        (z.re.is_finite() && z.im.is_finite()).then_some(z)
    }

    fn conj(&self) -> Self {
        Complex64::conj(self)
    }

    fn re_part(&self) -> Self {
        Complex64::new(self.re, 0.0)
    }

    fn im_part(&self) -> Self {
        Complex64::new(self.im, 0.0)
    }

    fn pow_real(&self, exponent: f64) -> Option<Self> {
        if !exponent.is_finite() {
            return None;
        }
        if exponent.fract() == 0.0 && exponent.abs() < i64::MAX as f64 {
            if exponent < 0.0 && self.is_zero() {
                return None;
            }
            return Some(Coefficient::powi(self, exponent as i64));
        }
        if self.is_zero() {
            return (exponent > 0.0).then(Complex64::zero);
        }
        Some(self.powf(exponent))
    }

    fn to_json(&self) -> Value {
        Value::Array(vec![float_json(self.re), float_json(self.im)])
    }

    fn from_json(value: &Value) -> Result<Self, CoefficientError> {
        match value {
            Value::Number(n) => n
                .as_f64()
                .map(|re| Complex64::new(re, 0.0))
                .ok_or_else(|| CoefficientError::Malformed(value.to_string())),
            Value::Array(parts) if parts.len() == 2 => {
                let part = |v: &Value| match v {
                    Value::Number(n) => n
                        .as_f64()
                        .ok_or_else(|| CoefficientError::Malformed(value.to_string())),
                    Value::String(_) => Err(CoefficientError::ExpectedFloat(value.to_string())),
                    _ => Err(CoefficientError::Malformed(value.to_string())),
                };
                Ok(Complex64::new(part(&parts[0])?, part(&parts[1])?))
            }
            Value::String(_) => Err(CoefficientError::ExpectedFloat(value.to_string())),
            _ => Err(CoefficientError::Malformed(value.to_string())),
        }
    }
}

fn float_json(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or_else(|| Value::String(x.to_string()))
}

impl Coefficient for Exact {
    const EXACT: bool = true;
    const DEFAULT_TOLERANCE: f64 = 0.0;

    fn is_negligible(&self, _eps: f64) -> bool {
        self.is_zero()
    }

    fn from_i64(n: i64) -> Self {
        Complex::new(BigRational::from_integer(n.into()), BigRational::zero())
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Complex::new(
            BigRational::new(num.into(), den.into()),
            BigRational::zero(),
        )
    }

    fn imaginary_unit() -> Self {
        Complex::new(BigRational::zero(), BigRational::one())
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }

    fn approximate(z: Complex64) -> Option<Self> {
        Some(Complex::new(
            best_rational(z.re, MAX_RECONSTRUCTED_DENOMINATOR)?,
            best_rational(z.im, MAX_RECONSTRUCTED_DENOMINATOR)?,
        ))
    }

    fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }

    fn re_part(&self) -> Self {
        Complex::new(self.re.clone(), BigRational::zero())
    }

    fn im_part(&self) -> Self {
        Complex::new(self.im.clone(), BigRational::zero())
    }

    fn pow_real(&self, exponent: f64) -> Option<Self> {
        if exponent.fract() != 0.0 || !exponent.is_finite() || exponent.abs() > 1e6 {
            return None;
        }
        if exponent < 0.0 && self.is_zero() {
            return None;
        }
        Some(Coefficient::powi(self, exponent as i64))
    }

    fn to_json(&self) -> Value {
        Value::Array(vec![
            Value::String(rational_string(&self.re)),
            Value::String(rational_string(&self.im)),
        ])
    }

    fn from_json(value: &Value) -> Result<Self, CoefficientError> {
        match value {
            Value::String(s) => Ok(Complex::new(parse_rational(s)?, BigRational::zero())),
            Value::Array(parts) if parts.len() == 2 => {
                let part = |v: &Value| match v {
                    Value::String(s) => parse_rational(s),
                    Value::Number(_) => Err(CoefficientError::ExpectedExact(value.to_string())),
                    _ => Err(CoefficientError::Malformed(value.to_string())),
                };
                Ok(Complex::new(part(&parts[0])?, part(&parts[1])?))
            }
            Value::Number(_) => Err(CoefficientError::ExpectedExact(value.to_string())),
            _ => Err(CoefficientError::Malformed(value.to_string())),
        }
    }
}

/// `"num/den"`, or just `"num"` for integers.
pub fn rational_string(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational, CoefficientError> {
    let bad = || CoefficientError::Malformed(format!("{s:?}"));
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}

fn rational_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Scale huge numerators/denominators down before dividing.
    let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000) as usize;
    let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

/// Closest rational with denominator at most `max_den`, by continued fractions.
fn best_rational(x: f64, max_den: i64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let negative = x < 0.0;
    let mut rest = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    for _ in 0..64 {
        let a = rest.floor();
        if a > 1e15 {
            break;
        }
        let a = a as i128;
        let (p2, q2) = (a * p1 + p0, a * q1 + q0);
        if q2 > max_den as i128 {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = rest - a as f64;
        if frac < 1e-12 {
            break;
        }
        rest = 1.0 / frac;
    }
    if q1 == 0 {
        return None;
    }
    let value = BigRational::new(BigInt::from(p1), BigInt::from(q1));
    Some(if negative { -value } else { value })
}
