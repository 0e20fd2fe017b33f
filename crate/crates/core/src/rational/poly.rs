use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde_json::Value;

use crate::coefficient::Coefficient;

/// A polynomial in the transform symbol `B`, coefficients in ascending powers.
///
/// Trailing (highest-power) zero coefficients are stripped on construction, so
/// the zero polynomial has no coefficients at all.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<C> {
    coeffs: Vec<C>,
}

impl<C: Coefficient> Polynomial<C> {
    pub fn new(mut coeffs: Vec<C>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: C) -> Self {
        Self::new(vec![c])
    }

    /// `c * B^power`.
    pub fn monomial(power: usize, c: C) -> Self {
        let mut coeffs = vec![C::zero(); power];
        coeffs.push(c);
        Self::new(coeffs)
    }

    /// `lead * Π (B - r)^m`.
    pub fn from_roots(lead: C, roots: &[(C, usize)]) -> Self {
        let mut p = Self::constant(lead);
        for (r, m) in roots {
            let linear = Self::new(vec![-r.clone(), C::one()]);
            for _ in 0..*m {
                p = &p * &linear;
            }
        }
        p
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn coeff(&self, power: usize) -> C {
        self.coeffs.get(power).cloned().unwrap_or_else(C::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&C> {
        self.coeffs.last()
    }

    /// Drops highest-power coefficients that are zero within `eps`.
    pub fn trimmed(mut self, eps: f64) -> Self {
        while self.coeffs.last().is_some_and(|c| c.is_negligible(eps)) {
            self.coeffs.pop();
        }
        self
    }

    /// Multiplicity of `B = 0` as an exact root.
    pub fn low_order_zeros(&self) -> usize {
        self.coeffs.iter().take_while(|c| c.is_zero()).count()
    }

    /// Divides by `B^k`, dropping the lowest `k` coefficients.
    pub fn lower(&self, k: usize) -> Self {
        Self::new(self.coeffs.iter().skip(k).cloned().collect())
    }

    pub fn scale(&self, c: &C) -> Self {
        Self::new(self.coeffs.iter().map(|x| x.clone() * c.clone()).collect())
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &C) -> C {
        self.coeffs
            .iter()
            .rev()
            .fold(C::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c.clone() * C::from_i64(k as i64))
                .collect(),
        )
    }

    /// Euclidean division. Returns `None` when `divisor` is zero.
    pub fn div_rem(&self, divisor: &Self) -> Option<(Self, Self)> {
        let d = divisor.degree()?;
        let lead = divisor.leading()?.clone();
        let mut rem = self.coeffs.clone();
        if rem.len() <= d {
            return Some((Self::zero(), self.clone()));
        }
        let mut quot = vec![C::zero(); rem.len() - d];
        for i in (0..quot.len()).rev() {
            let c = rem[i + d].clone() / lead.clone();
            for (k, dk) in divisor.coeffs.iter().enumerate() {
                rem[i + k] = rem[i + k].clone() - c.clone() * dk.clone();
            }
            quot[i] = c;
        }
        rem.truncate(d);
        Some((Self::new(quot), Self::new(rem)))
    }

    /// Coefficients of `h ↦ p(r + h)`.
    pub fn taylor_shift(&self, r: &C) -> Self {
        // repeated synthetic division by (B - r)
        let mut work = self.coeffs.clone();
        let n = work.len();
        for i in 0..n {
            for k in (i..n - 1).rev() {
                let carry = work[k + 1].clone() * r.clone();
                work[k] = work[k].clone() + carry;
            }
        }
        Self::new(work)
    }

    pub fn to_c64(&self) -> Vec<Complex64> {
        self.coeffs.iter().map(Coefficient::to_c64).collect()
    }

    pub fn map<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> Polynomial<D> {
        Polynomial::new(self.coeffs.iter().map(f).collect())
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(Coefficient::abs).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.coeffs.iter().map(Coefficient::to_json).collect())
    }
}

impl<C: Coefficient> Add for &Polynomial<C> {
    type Output = Polynomial<C>;

    fn add(self, rhs: Self) -> Polynomial<C> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl<C: Coefficient> Sub for &Polynomial<C> {
    type Output = Polynomial<C>;

    fn sub(self, rhs: Self) -> Polynomial<C> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl<C: Coefficient> Mul for &Polynomial<C> {
    type Output = Polynomial<C>;

    fn mul(self, rhs: Self) -> Polynomial<C> {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![C::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Polynomial::new(out)
    }
}

impl<C: Coefficient> Neg for &Polynomial<C> {
    type Output = Polynomial<C>;

    fn neg(self) -> Polynomial<C> {
        Polynomial::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}
