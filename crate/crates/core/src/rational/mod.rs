//! Polynomials and rational functions in the transform symbol `B`.
//!
//! The basis correspondence `p_k ↔ B^{-k}` turns every rational function of
//! `B` into an element of the series field by expansion in powers of `B^{-1}`
//! (see [`RationalOperator::to_series`]).

mod partial;
mod poly;
mod roots;

pub use partial::PartialFractionTerm;
pub use poly::Polynomial;
pub use roots::{find_roots, RootOptions};

use thiserror::Error;

use crate::coefficient::Coefficient;
use crate::series::{FormalSeries, SeriesError, SeriesIndexMeta};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RationalError {
    #[error("polynomial has degree zero")]
    DegreeZero,
    #[error("root iteration did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("root is not representable exactly: {0}")]
    NonRationalRoot(String),
    #[error("denominator factors are not pairwise distinct")]
    UnfactoredDenominator,
    #[error("zero denominator")]
    ZeroDenominator,
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// A polynomial in factored form `leading * Π (B - r)^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactoredPoly<C> {
    leading: C,
    factors: Vec<(C, usize)>,
}

impl<C: Coefficient> FactoredPoly<C> {
    /// Factors with multiplicity zero are dropped.
    pub fn new(leading: C, factors: Vec<(C, usize)>) -> Self {
        FactoredPoly {
            leading,
            factors: factors.into_iter().filter(|(_, m)| *m > 0).collect(),
        }
    }

    pub fn constant(c: C) -> Self {
        FactoredPoly::new(c, Vec::new())
    }

    pub fn leading(&self) -> &C {
        &self.leading
    }

    pub fn factors(&self) -> &[(C, usize)] {
        &self.factors
    }

    pub fn degree(&self) -> usize {
        self.factors.iter().map(|(_, m)| m).sum()
    }

    pub fn expand(&self) -> Polynomial<C> {
        Polynomial::from_roots(self.leading.clone(), &self.factors)
    }

    pub fn eval(&self, x: &C) -> C {
        self.factors.iter().fold(self.leading.clone(), |acc, (r, m)| {
            acc * (x.clone() - r.clone()).powi(*m as i64)
        })
    }

    /// Multiplicity of `r` among the factors, matching within `eps`.
    pub fn multiplicity_of(&self, r: &C, eps: f64) -> usize {
        self.factors
            .iter()
            .filter(|(s, _)| (s.clone() - r.clone()).is_negligible(eps))
            .map(|(_, m)| *m)
            .sum()
    }

    /// Least common multiple with leading coefficient one.
    pub fn lcm(&self, other: &Self, eps: f64) -> Self {
        let mut factors = self.factors.clone();
        for (r, m) in &other.factors {
            match factors
                .iter_mut()
                .find(|(s, _)| (s.clone() - r.clone()).is_negligible(eps))
            {
                Some(entry) => entry.1 = entry.1.max(*m),
                None => factors.push((r.clone(), *m)),
            }
        }
        FactoredPoly::new(C::one(), factors)
    }

    /// `self / divisor` when every factor of `divisor` divides `self`.
    fn cofactor(&self, divisor: &Self, eps: f64) -> Polynomial<C> {
        let mut rest = Vec::new();
        for (r, m) in &self.factors {
            let used = divisor.multiplicity_of(r, eps);
            rest.push((r.clone(), m.saturating_sub(used)));
        }
        Polynomial::from_roots(self.leading.clone() / divisor.leading.clone(), &rest)
    }

    fn has_distinct_roots(&self, eps: f64) -> bool {
        self.factors.iter().enumerate().all(|(i, (r, _))| {
            self.factors[i + 1..]
                .iter()
                .all(|(s, _)| !(s.clone() - r.clone()).is_negligible(eps))
        })
    }
}

/// `numerator(B) / denominator(B)` with the denominator kept factored.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalOperator<C> {
    pub numerator: Polynomial<C>,
    pub denominator: FactoredPoly<C>,
}

impl<C: Coefficient> RationalOperator<C> {
    pub fn new(numerator: Polynomial<C>, denominator: FactoredPoly<C>) -> Result<Self, RationalError> {
        if denominator.leading().is_zero() {
            return Err(RationalError::ZeroDenominator);
        }
        Ok(RationalOperator {
            numerator,
            denominator,
        })
    }

    pub fn polynomial(p: Polynomial<C>) -> Self {
        RationalOperator {
            numerator: p,
            denominator: FactoredPoly::constant(C::one()),
        }
    }

    pub fn zero() -> Self {
        Self::polynomial(Polynomial::zero())
    }

    /// `B^{-k}`, the image of the basis element `p_k`.
    pub fn basis(k: i64) -> Self {
        if k > 0 {
            RationalOperator {
                numerator: Polynomial::constant(C::one()),
                denominator: FactoredPoly::new(C::one(), vec![(C::zero(), k as usize)]),
            }
        } else {
            Self::polynomial(Polynomial::monomial((-k) as usize, C::one()))
        }
    }

    pub fn is_proper(&self) -> bool {
        self.numerator
            .degree()
            .is_none_or(|d| d <= self.denominator.degree())
    }

    pub fn scale(&self, c: &C) -> Self {
        RationalOperator {
            numerator: self.numerator.scale(c),
            denominator: self.denominator.clone(),
        }
    }

    /// Sum over the least common denominator; roots closer than `eps` merge.
    pub fn add(&self, other: &Self, eps: f64) -> Self {
        let lcm = self.denominator.lcm(&other.denominator, eps);
        let left = &self.numerator * &lcm.cofactor(&self.denominator, eps);
        let right = &other.numerator * &lcm.cofactor(&other.denominator, eps);
        RationalOperator {
            numerator: &left + &right,
            denominator: lcm,
        }
    }

    pub fn sub(&self, other: &Self, eps: f64) -> Self {
        self.add(&other.scale(&-C::one()), eps)
    }

    /// Largest coefficient of the numerator of `self - other` over the common
    /// denominator, relative to the larger numerator on that denominator.
    pub fn relative_difference(&self, other: &Self, eps: f64) -> f64 {
        let lcm = self.denominator.lcm(&other.denominator, eps);
        let left = &self.numerator * &lcm.cofactor(&self.denominator, eps);
        let right = &other.numerator * &lcm.cofactor(&other.denominator, eps);
        let diff = (&left - &right).max_abs();
        diff / left.max_abs().max(right.max_abs()).max(1.0)
    }

    /// Evaluates at a point off the poles.
    pub fn eval(&self, b: &C) -> C {
        self.numerator.eval(b) / self.denominator.eval(b)
    }

    /// Expansion `Σ d_k B^{-k}` returned as `Σ d_k p_k`, known through `truncation`.
    ///
    /// Computed as a quotient in the series field, with `B` itself realized as
    /// `p_{-1}`.
    pub fn to_series(
        &self,
        meta: SeriesIndexMeta,
        truncation: i64,
    ) -> Result<FormalSeries<C>, RationalError> {
        let Some(dn) = self.numerator.degree() else {
            return Ok(FormalSeries::zero(meta, truncation));
        };
        let den = self.denominator.expand();
        let dd = den.degree().ok_or(RationalError::ZeroDenominator)?;
        let window = truncation + 2 * (dn + dd) as i64 + 2;
        let as_series = |p: &Polynomial<C>, d: usize| {
            let coeffs = p.coeffs().iter().rev().cloned().collect();
            FormalSeries::from_coefficients(meta, -(d as i64), coeffs, window)
        };
        let n = as_series(&self.numerator, dn);
        let d = as_series(&den, dd);
        Ok(n.mul(&d.invert()?)?.truncated(truncation))
    }

    /// Partial-fraction decomposition; see [`PartialFractionTerm`].
    pub fn partial_fractions(&self, eps: f64) -> Result<Vec<PartialFractionTerm<C>>, RationalError> {
        partial::decompose(self, eps)
    }

    pub fn map<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> RationalOperator<D> {
        RationalOperator {
            numerator: self.numerator.map(&f),
            denominator: FactoredPoly::new(
                f(&self.denominator.leading),
                self.denominator
                    .factors
                    .iter()
                    .map(|(r, m)| (f(r), *m))
                    .collect(),
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficient::{Exact, Float};

    fn meta() -> SeriesIndexMeta {
        SeriesIndexMeta::default()
    }

    #[test]
    fn b_over_b_plus_one_is_alternating() {
        // B/(B + 1) with lambda = 1
        let r = RationalOperator::new(
            Polynomial::monomial(1, Exact::from_i64(1)),
            FactoredPoly::new(Exact::from_i64(1), vec![(Exact::from_i64(-1), 1)]),
        )
        .unwrap();
        let s = r.to_series(meta(), 20).unwrap();
        assert_eq!(s, FormalSeries::geometric(meta(), Exact::from_i64(-1), 20));
    }

    #[test]
    fn one_over_b_minus_r() {
        // 1/(B - r) = Σ r^k p_{k+1}
        let root = Exact::from_ratio(3, 2);
        let r = RationalOperator::new(
            Polynomial::constant(Exact::from_i64(1)),
            FactoredPoly::new(Exact::from_i64(1), vec![(root.clone(), 1)]),
        )
        .unwrap();
        let s = r.to_series(meta(), 12).unwrap();
        let expected = FormalSeries::geometric(meta(), root, 11).shift(1);
        assert_eq!(s, expected);
    }

    #[test]
    fn basis_correspondence() {
        for k in -5i64..=5 {
            let s = RationalOperator::<Exact>::basis(k).to_series(meta(), 10).unwrap();
            assert_eq!(s, FormalSeries::monomial(meta(), k, Exact::from_i64(1), 10));
        }
    }

    #[test]
    fn add_over_common_denominator() {
        let a = RationalOperator::new(
            Polynomial::constant(Float::new(1.0, 0.0)),
            FactoredPoly::new(Float::new(1.0, 0.0), vec![(Float::new(1.0, 0.0), 1)]),
        )
        .unwrap();
        let b = RationalOperator::new(
            Polynomial::constant(Float::new(2.0, 0.0)),
            FactoredPoly::new(Float::new(2.0, 0.0), vec![(Float::new(1.0, 0.0), 2)]),
        )
        .unwrap();
        let sum = a.add(&b, 1e-12);
        assert_eq!(sum.denominator.factors(), &[(Float::new(1.0, 0.0), 2)]);
        // 1/(B-1) + 1/(B-1)^2 = B/(B-1)^2
        let x = Float::new(3.5, 0.0);
        assert!((sum.eval(&x) - x / ((x - 1.0) * (x - 1.0))).norm() < 1e-14);
        assert!(sum.relative_difference(&sum.clone(), 1e-12) == 0.0);
    }
}
