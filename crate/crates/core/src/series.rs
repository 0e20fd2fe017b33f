//! The field of formal series `Σ a_k p_k` with finitely many negative indices.
//!
//! A [`FormalSeries`] stores the coefficients from its valuation `v(a)` up to a
//! truncation order `T`. Indices above `T` are unknown rather than zero, and
//! every operation tracks how far its result is determined. The basis symbols
//! obey `p_k * p_n = p_{k+n}`, which is implemented as index arithmetic inside
//! [`FormalSeries::mul`].

use std::fmt;

use serde_json::{json, Value};
use thiserror::Error;

use crate::coefficient::{Coefficient, CoefficientError};

pub const DEFAULT_TRUNCATION: i64 = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("division by the zero series")]
    ZeroDivision,
    #[error("coefficient of p_{index} is unknown (series truncated at {truncation})")]
    TruncationExceeded { index: i64, truncation: i64 },
    #[error("cannot combine series realized with nu = {left} and nu = {right}")]
    RealizationMismatch { left: f64, right: f64 },
    #[error("nu must be finite, got {0}")]
    InvalidNu(f64),
    #[error("malformed series: {0}")]
    Malformed(String),
    #[error(transparent)]
    Coefficient(#[from] CoefficientError),
}

/// `v(a)`: the smallest index carrying a nonzero coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

/// Which concrete realization `p_{k,nu}` the abstract indices refer to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesIndexMeta {
    pub nu: f64,
}

impl SeriesIndexMeta {
    pub fn new(nu: f64) -> Result<Self, SeriesError> {
        if nu.is_finite() {
            Ok(SeriesIndexMeta { nu })
        } else {
            Err(SeriesError::InvalidNu(nu))
        }
    }
}

impl Default for SeriesIndexMeta {
    fn default() -> Self {
        SeriesIndexMeta { nu: 0.0 }
    }
}

/// A truncated element of the series field.
///
/// Normalized after every operation: when nonzero, the first stored
/// coefficient is nonzero (within the zero-test tolerance), and no stored
/// index exceeds the truncation order.
#[derive(Debug, Clone, PartialEq)]
pub struct FormalSeries<C> {
    meta: SeriesIndexMeta,
    start: i64,
    coeffs: Vec<C>,
    truncation: i64,
    tolerance: f64,
}

impl<C: Coefficient> FormalSeries<C> {
    pub fn zero(meta: SeriesIndexMeta, truncation: i64) -> Self {
        FormalSeries {
            meta,
            start: 0,
            coeffs: Vec::new(),
            truncation,
            tolerance: C::DEFAULT_TOLERANCE,
        }
    }

    /// `c * p_index`.
    pub fn monomial(meta: SeriesIndexMeta, index: i64, c: C, truncation: i64) -> Self {
        Self::from_coefficients(meta, index, vec![c], truncation)
    }

    /// Builds `Σ coeffs[i] p_{start+i}`, then normalizes.
    pub fn from_coefficients(
        meta: SeriesIndexMeta,
        start: i64,
        coeffs: Vec<C>,
        truncation: i64,
    ) -> Self {
        let mut s = FormalSeries {
            meta,
            start,
            coeffs,
            truncation,
            tolerance: C::DEFAULT_TOLERANCE,
        };
        s.normalize();
        s
    }

    /// The geometric series `Σ_{k≥0} x^k p_k`, which spans the kernel of `L - xI`.
    pub fn geometric(meta: SeriesIndexMeta, x: C, truncation: i64) -> Self {
        let mut coeffs = Vec::new();
        let mut power = C::one();
        for _ in 0..=truncation.max(-1) {
            coeffs.push(power.clone());
            power = power * x.clone();
        }
        Self::from_coefficients(meta, 0, coeffs, truncation)
    }

    /// Replaces the zero-test tolerance and renormalizes.
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance.max(0.0);
        self.normalize();
        self
    }

    pub fn meta(&self) -> SeriesIndexMeta {
        self.meta
    }

    pub fn nu(&self) -> f64 {
        self.meta.nu
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn truncation(&self) -> i64 {
        self.truncation
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn valuation(&self) -> Valuation {
        if self.coeffs.is_empty() {
            Valuation::Infinite
        } else {
            Valuation::Finite(self.start)
        }
    }

    /// Index of the last stored coefficient, if any.
    pub fn last_index(&self) -> Option<i64> {
        (!self.coeffs.is_empty()).then(|| self.start + self.coeffs.len() as i64 - 1)
    }

    /// `a_n`, zero inside the window when not stored.
    pub fn coefficient(&self, n: i64) -> Result<C, SeriesError> {
        if n > self.truncation {
            return Err(SeriesError::TruncationExceeded {
                index: n,
                truncation: self.truncation,
            });
        }
        Ok(self.stored(n))
    }

    /// Stored coefficients as `(index, coefficient)` pairs in increasing order.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &C)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, c)| (self.start + i as i64, c))
    }

    /// Dense coefficients for indices `from..=to`, zero-filled.
    pub fn dense(&self, from: i64, to: i64) -> Vec<C> {
        (from..=to).map(|n| self.stored(n)).collect()
    }

    fn stored(&self, n: i64) -> C {
        if self.coeffs.is_empty() || n < self.start {
            return C::zero();
        }
        self.coeffs
            .get((n - self.start) as usize)
            .cloned()
            .unwrap_or_else(C::zero)
    }

    fn normalize(&mut self) {
        if self.start > self.truncation {
            self.coeffs.clear();
        } else {
            let keep = (self.truncation - self.start + 1) as usize;
            self.coeffs.truncate(keep);
        }
        let lead = self
            .coeffs
            .iter()
            .position(|c| !c.is_negligible(self.tolerance));
        match lead {
            None => {
                self.coeffs.clear();
                self.start = 0;
            }
            Some(skip) => {
                self.coeffs.drain(..skip);
                self.start += skip as i64;
                while self
                    .coeffs
                    .last()
                    .is_some_and(|c| c.is_negligible(self.tolerance))
                {
                    self.coeffs.pop();
                }
            }
        }
    }

    fn check_meta(&self, other: &Self) -> Result<(), SeriesError> {
        if self.meta.nu == other.meta.nu {
            Ok(())
        } else {
            Err(SeriesError::RealizationMismatch {
                left: self.meta.nu,
                right: other.meta.nu,
            })
        }
    }

    fn combine_linear(
        &self,
        other: &Self,
        op: impl Fn(C, C) -> C,
    ) -> Result<Self, SeriesError> {
        self.check_meta(other)?;
        let truncation = self.truncation.min(other.truncation);
        let tolerance = self.tolerance.max(other.tolerance);
        let lo = match (self.valuation(), other.valuation()) {
            (Valuation::Finite(a), Valuation::Finite(b)) => a.min(b),
            (Valuation::Finite(a), Valuation::Infinite) => a,
            (Valuation::Infinite, Valuation::Finite(b)) => b,
            (Valuation::Infinite, Valuation::Infinite) => {
                return Ok(Self::zero(self.meta, truncation).with_tolerance(tolerance))
            }
        };
        let hi = self
            .last_index()
            .into_iter()
            .chain(other.last_index())
            .max()
            .unwrap_or(lo)
            .min(truncation);
        let coeffs = if hi < lo {
            Vec::new()
        } else {
            (lo..=hi).map(|n| op(self.stored(n), other.stored(n))).collect()
        };
        let mut out = FormalSeries {
            meta: self.meta,
            start: lo,
            coeffs,
            truncation,
            tolerance,
        };
        out.normalize();
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.combine_linear(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.combine_linear(other, |a, b| a - b)
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = self.clone();
        for x in out.coeffs.iter_mut() {
            *x = x.clone() * c.clone();
        }
        out.normalize();
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for x in out.coeffs.iter_mut() {
            *x = -x.clone();
        }
        out
    }

    /// Cauchy product `c_n = Σ_{v(a) ≤ k ≤ n - v(b)} a_k b_{n-k}`.
    ///
    /// The result is determined up to `min(v(a) + T_b, v(b) + T_a)`.
    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_meta(other)?;
        let tolerance = self.tolerance.max(other.tolerance);
        let (ta, tb) = (self.truncation, other.truncation);
        let truncation = match (self.valuation(), other.valuation()) {
            (Valuation::Finite(a), Valuation::Finite(b)) => {
                a.saturating_add(tb).min(b.saturating_add(ta))
            }
            (Valuation::Finite(a), Valuation::Infinite) => a.saturating_add(tb),
            (Valuation::Infinite, Valuation::Finite(b)) => b.saturating_add(ta),
            (Valuation::Infinite, Valuation::Infinite) => ta.min(tb),
        };
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(self.meta, truncation).with_tolerance(tolerance));
        }
        let (va, vb) = (self.start, other.start);
        let a_last = self.last_index().unwrap_or(va);
        let b_last = other.last_index().unwrap_or(vb);
        let lo = va + vb;
        let hi = truncation.min(a_last + b_last);
        let mut coeffs = Vec::with_capacity((hi - lo + 1).max(0) as usize);
        for n in lo..=hi {
            let k_lo = va.max(n - b_last);
            let k_hi = a_last.min(n - vb);
            let mut acc = C::zero();
            for k in k_lo..=k_hi {
                acc = acc
                    + self.coeffs[(k - va) as usize].clone()
                        * other.coeffs[(n - k - vb) as usize].clone();
            }
            coeffs.push(acc);
        }
        let mut out = FormalSeries {
            meta: self.meta,
            start: lo,
            coeffs,
            truncation,
            tolerance,
        };
        out.normalize();
        Ok(out)
    }

    /// Multiplicative inverse by forward substitution on the product identity.
    ///
    /// For `v = v(a)`, the inverse has valuation `-v` and is determined up to
    /// `T_a - 2v`, so that `a * a^{-1} = p_0` through index `T_a - v`.
    pub fn invert(&self) -> Result<Self, SeriesError> {
        let Valuation::Finite(v) = self.valuation() else {
            return Err(SeriesError::ZeroDivision);
        };
        let truncation = self.truncation - 2 * v;
        let a_last = self.last_index().unwrap_or(v);
        let lead_inv = C::one() / self.coeffs[0].clone();
        let len = (truncation + v + 1).max(0) as usize;
        let mut b: Vec<C> = Vec::with_capacity(len);
        for i in 0..len {
            if i == 0 {
                b.push(lead_inv.clone());
                continue;
            }
            // b_{m}, m = -v + i: Σ_{k=v+1}^{min(m+2v, a_last)} a_k b_{m+v-k}
            let m = -v + i as i64;
            let mut acc = C::zero();
            for k in (v + 1)..=(m + 2 * v).min(a_last) {
                let bi = (m + v - k + v) as usize;
                acc = acc + self.coeffs[(k - v) as usize].clone() * b[bi].clone();
            }
            b.push(-(acc * lead_inv.clone()));
        }
        let mut out = FormalSeries {
            meta: self.meta,
            start: -v,
            coeffs: b,
            truncation,
            tolerance: self.tolerance,
        };
        out.normalize();
        Ok(out)
    }

    pub fn div(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_meta(other)?;
        self.mul(&other.invert()?)
    }

    /// Multiplication by `p_n`: `S` for `n = 1`, `S^{-1}` for `n = -1`.
    pub fn shift(&self, n: i64) -> Self {
        let mut out = self.clone();
        out.truncation = self.truncation.saturating_add(n);
        if !out.coeffs.is_empty() {
            out.start += n;
        }
        out
    }

    /// `P_n a = a_n p_n`.
    pub fn project(&self, n: i64) -> Result<Self, SeriesError> {
        let c = self.coefficient(n)?;
        Ok(
            Self::monomial(self.meta, n, c, self.truncation.max(n))
                .with_tolerance(self.tolerance),
        )
    }

    /// The modified left shift `L a = S^{-1}(I - P_0) a`.
    pub fn modified_left_shift(&self) -> Self {
        if self.truncation < 0 {
            return self.shift(-1);
        }
        let mut out = self.clone();
        if let Some(i) = (0i64)
            .checked_sub(out.start)
            .filter(|i| *i >= 0 && (*i as usize) < out.coeffs.len())
        {
            out.coeffs[i as usize] = C::zero();
        }
        out.normalize();
        out.shift(-1)
    }

    /// `A_0 a = a_0`.
    pub fn eval_at_zero_index(&self) -> Result<C, SeriesError> {
        self.coefficient(0)
    }

    /// Forgets coefficients above `truncation`.
    pub fn truncated(&self, truncation: i64) -> Self {
        let mut out = self.clone();
        out.truncation = out.truncation.min(truncation);
        out.normalize();
        out
    }

    pub fn map_coefficients<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> FormalSeries<D> {
        let mut out = FormalSeries {
            meta: self.meta,
            start: self.start,
            coeffs: self.coeffs.iter().map(f).collect(),
            truncation: self.truncation,
            tolerance: D::DEFAULT_TOLERANCE.max(if D::EXACT { 0.0 } else { self.tolerance }),
        };
        out.normalize();
        out
    }

    /// Largest `|a_n - b_n|` over the common window `..=min(T_a, T_b)`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let hi = self.truncation.min(other.truncation);
        let lo = self
            .valuation()
            .finite()
            .into_iter()
            .chain(other.valuation().finite())
            .min();
        let Some(lo) = lo else { return 0.0 };
        (lo..=hi)
            .map(|n| (self.stored(n) - other.stored(n)).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "nu": self.meta.nu,
            "valuation": self.valuation().finite(),
            "coefficients": self.coeffs.iter().map(Coefficient::to_json).collect::<Vec<_>>(),
            "truncation": self.truncation,
        })
    }

    pub fn from_json(value: &Value) -> Result<Self, SeriesError> {
        let obj = value
            .as_object()
            .ok_or_else(|| SeriesError::Malformed("expected an object".into()))?;
        let nu = obj.get("nu").and_then(Value::as_f64).unwrap_or(0.0);
        let meta = SeriesIndexMeta::new(nu)?;
        let truncation = obj
            .get("truncation")
            .and_then(Value::as_i64)
            .ok_or_else(|| SeriesError::Malformed("missing integer \"truncation\"".into()))?;
        let coeffs = obj
            .get("coefficients")
            .and_then(Value::as_array)
            .ok_or_else(|| SeriesError::Malformed("missing \"coefficients\" array".into()))?
            .iter()
            .map(C::from_json)
            .collect::<Result<Vec<_>, _>>()?;
        let start = match obj.get("valuation") {
            Some(Value::Number(n)) => n
                .as_i64()
                .ok_or_else(|| SeriesError::Malformed("\"valuation\" must be an integer".into()))?,
            None | Some(Value::Null) if coeffs.is_empty() => 0,
            _ => {
                return Err(SeriesError::Malformed(
                    "\"valuation\" must be an integer for a nonzero series".into(),
                ))
            }
        };
        Ok(Self::from_coefficients(meta, start, coeffs, truncation))
    }
}

impl<C: Coefficient> fmt::Display for FormalSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (n, c) in self.terms() {
            if c.is_negligible(self.tolerance) {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let z = c.to_c64();
            if z.im == 0.0 {
                write!(f, "{}·p_{n}", z.re)?;
            } else {
                write!(f, "({z})·p_{n}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(p_{})", self.truncation + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficient::{Exact, Float};

    const T: i64 = DEFAULT_TRUNCATION;

    fn meta() -> SeriesIndexMeta {
        SeriesIndexMeta::default()
    }

    fn q(n: i64) -> Exact {
        Exact::from_i64(n)
    }

    fn series(start: i64, coeffs: &[i64]) -> FormalSeries<Exact> {
        FormalSeries::from_coefficients(meta(), start, coeffs.iter().map(|&c| q(c)).collect(), T)
    }

    fn p(n: i64) -> FormalSeries<Exact> {
        FormalSeries::monomial(meta(), n, q(1), T)
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(FormalSeries::<Exact>::zero(meta(), T).valuation(), Valuation::Infinite);
        assert_eq!(series(-2, &[3, 0, 1]).valuation(), Valuation::Finite(-2));
        assert_eq!(p(5).valuation(), Valuation::Finite(5));
    }

    #[test]
    fn add_and_scale() {
        let z = p(0).add(&p(0).neg()).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.valuation(), Valuation::Infinite);
        let s = p(-1).add(&p(1)).unwrap();
        assert_eq!(s, series(-1, &[1, 0, 1]));
        assert_eq!(series(0, &[1, 1]).scale(&q(2)), series(0, &[2, 2]));
    }

    #[test]
    fn add_takes_min_truncation() {
        let a = FormalSeries::monomial(meta(), 0, q(1), 10);
        let b = FormalSeries::monomial(meta(), 3, q(1), 5);
        assert_eq!(a.add(&b).unwrap().truncation(), 5);
    }

    #[test]
    fn mul_examples() {
        // (p_0 + 2p_1)(p_{-1} + p_0) = p_{-1} + 3p_0 + 2p_1
        let prod = series(0, &[1, 2]).mul(&series(-1, &[1, 1])).unwrap();
        assert_eq!(prod.terms().map(|(n, c)| (n, c.clone())).collect::<Vec<_>>(),
            vec![(-1, q(1)), (0, q(3)), (1, q(2))]);
        let unit = p(1).mul(&p(-1)).unwrap();
        assert_eq!(unit.terms().map(|(n, c)| (n, c.clone())).collect::<Vec<_>>(), vec![(0, q(1))]);
        assert!(series(0, &[1, 2]).mul(&FormalSeries::zero(meta(), T)).unwrap().is_zero());
    }

    #[test]
    fn mul_truncation_rule() {
        let a = FormalSeries::from_coefficients(meta(), 2, vec![q(1)], 20);
        let b = FormalSeries::from_coefficients(meta(), -1, vec![q(1), q(1)], 30);
        // min(v(a) + T_b, v(b) + T_a) = min(32, 19)
        assert_eq!(a.mul(&b).unwrap().truncation(), 19);
    }

    #[test]
    fn invert_examples() {
        let g = series(0, &[1, -1]).invert().unwrap();
        assert_eq!(g, FormalSeries::geometric(meta(), q(1), T));
        let alt = series(0, &[1, 1]).invert().unwrap();
        assert_eq!(alt, FormalSeries::geometric(meta(), q(-1), T));
        let m = FormalSeries::monomial(meta(), 3, q(2), T).invert().unwrap();
        assert_eq!(m.terms().map(|(n, c)| (n, c.clone())).collect::<Vec<_>>(), vec![(-3, Exact::from_ratio(1, 2))]);
        assert_eq!(m.truncation(), T - 6);
        assert_eq!(
            FormalSeries::<Exact>::zero(meta(), T).invert(),
            Err(SeriesError::ZeroDivision)
        );
    }

    #[test]
    fn invert_negative_valuation() {
        let a = series(-2, &[3, 1, 4, 1, 5]);
        let inv = a.invert().unwrap();
        let prod = a.mul(&inv).unwrap();
        assert_eq!(prod.truncation(), T + 2);
        assert_eq!(prod, FormalSeries::monomial(meta(), 0, q(1), T + 2));
    }

    #[test]
    fn shift_examples() {
        assert_eq!(p(0).shift(1).terms().next().map(|(n, _)| n), Some(1));
        let back = p(4).shift(-1).shift(1);
        assert_eq!(back, p(4));
        let s = series(-2, &[3, 0, 1]).shift(2);
        assert_eq!(s.dense(0, 2), series(0, &[3, 0, 1]).dense(0, 2));
        assert_eq!(s.truncation(), T + 2);
        assert_eq!(p(0).shift(3), p(0).mul(&FormalSeries::monomial(meta(), 3, q(1), i64::MAX / 4)).unwrap());
    }

    #[test]
    fn project_examples() {
        let a = series(-1, &[3, 5, 0, 1]);
        assert_eq!(a.project(0).unwrap().terms().map(|(n, c)| (n, c.clone())).collect::<Vec<_>>(), vec![(0, q(5))]);
        assert!(p(1).project(0).unwrap().is_zero());
        assert!(matches!(a.project(T + 1), Err(SeriesError::TruncationExceeded { .. })));
    }

    #[test]
    fn modified_left_shift_examples() {
        assert!(p(0).modified_left_shift().is_zero());
        assert_eq!(p(3).modified_left_shift().terms().next().map(|(n, _)| n), Some(2));
        // L(2p_{-1} + p_0 + 4p_1) = 2p_{-2} + 4p_0
        let l = series(-1, &[2, 1, 4]).modified_left_shift();
        assert_eq!(l.terms().filter(|(_, c)| !c.is_negligible(0.0)).map(|(n, c)| (n, c.clone())).collect::<Vec<_>>(),
            vec![(-2, q(2)), (0, q(4))]);
    }

    #[test]
    fn eval_at_zero_index_examples() {
        assert_eq!(series(-1, &[3, 5, 0, 1]).eval_at_zero_index().unwrap(), q(5));
        assert_eq!(p(1).eval_at_zero_index().unwrap(), q(0));
        let short = FormalSeries::monomial(meta(), -4, q(1), -2);
        assert!(matches!(short.eval_at_zero_index(), Err(SeriesError::TruncationExceeded { .. })));
    }

    #[test]
    fn geometric_examples() {
        let g = FormalSeries::geometric(meta(), q(2), T);
        assert_eq!(g.dense(0, 2), vec![q(1), q(2), q(4)]);
        assert_eq!(FormalSeries::geometric(meta(), q(0), T), p(0));
        let e = FormalSeries::geometric(meta(), q(-1), 10);
        assert_eq!(e.dense(0, 3), vec![q(1), q(-1), q(1), q(-1)]);
    }

    #[test]
    fn geometric_is_eigenvector_of_l() {
        let x = Exact::from_ratio(-3, 7);
        let g = FormalSeries::geometric(meta(), x.clone(), 30);
        let residual = g.modified_left_shift().sub(&g.scale(&x)).unwrap();
        assert!(residual.is_zero());
    }

    #[test]
    fn mixing_realizations_is_an_error() {
        let a = p(0);
        let b = FormalSeries::monomial(SeriesIndexMeta::new(2.0).unwrap(), 0, q(1), T);
        assert!(matches!(a.add(&b), Err(SeriesError::RealizationMismatch { .. })));
        assert!(matches!(a.mul(&b), Err(SeriesError::RealizationMismatch { .. })));
    }

    #[test]
    fn float_normalization_uses_tolerance() {
        let s = FormalSeries::from_coefficients(
            meta(),
            0,
            vec![Float::new(1e-14, 0.0), Float::new(1.0, 0.0)],
            T,
        );
        assert_eq!(s.valuation(), Valuation::Finite(1));
        let loose = FormalSeries::monomial(meta(), 1, Float::new(1.0, 0.0), T).with_tolerance(1e-6);
        let tiny = FormalSeries::monomial(meta(), 0, Float::new(1e-8, 0.0), T);
        assert_eq!(loose.add(&tiny).unwrap().valuation(), Valuation::Finite(1));
        let strict = loose.clone().with_tolerance(0.0);
        assert_eq!(strict.add(&tiny).unwrap().valuation(), Valuation::Finite(0));
    }

    #[test]
    fn json_roundtrip() {
        let a = series(-1, &[3, 5, 0, 1]);
        let back = FormalSeries::<Exact>::from_json(&a.to_json()).unwrap();
        assert_eq!(a, back);
        let z = FormalSeries::<Float>::zero(meta(), 12);
        assert_eq!(z.to_json()["valuation"], Value::Null);
        assert_eq!(FormalSeries::<Float>::from_json(&z.to_json()).unwrap(), z);
    }
}
