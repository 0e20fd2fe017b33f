//! The algebraic transform `p_{k,nu} ↦ B^{-k}` and its use on equations that are
//! polynomial in `L_nu`.
//!
//! Forward: every `L_nu^j y` becomes `B^j Y` minus initial-condition terms, so
//! the equation turns into `lhs(B) Y = correction(B) + H(B)`. Inverse: the
//! partial fractions of `Y` are matched against the transform table and become
//! named Bessel atoms; anything unmatched stays a formal series.

use std::fmt;

use serde_json::{json, Value};
use thiserror::Error;

use crate::coefficient::{Coefficient, Float};
use crate::rational::{
    find_roots, FactoredPoly, PartialFractionTerm, Polynomial, RationalError, RationalOperator,
    RootOptions,
};
use crate::series::{FormalSeries, SeriesError, SeriesIndexMeta};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransformError {
    #[error("degenerate operator: leading coefficient is zero")]
    DegenerateOperator,
    #[error("expected {expected} initial conditions, found {found}")]
    InitialConditionCount { expected: usize, found: usize },
    #[error("right-hand side must have nonnegative valuation")]
    NegativeRhsValuation,
    #[error("exact arithmetic cannot represent {0}")]
    NeedsFloating(String),
    #[error("residual series has unbounded support and no rational form")]
    InfiniteResidual,
    #[error(transparent)]
    Rational(#[from] RationalError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// How the supplied initial conditions enter the transformed equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IcConvention {
    /// Correction `q_K Σ_{i<K} g_i B^{K-i} - Σ_{0<j<K} q_j Σ_{i<j} g_i B^{j-i}`.
    /// For
    /// `(L - c1)(L - c2) y = 0` with data `(α, β)` it gives
    /// `α B² + ((c1 + c2) α + β) B`.
    #[default]
    Generalized,
    /// The data are the leading series coefficients `a_0..a_{K-1}` of `y`, and
    /// `L^j y ↦ B^j Y - Σ_{i<j} a_i B^{j-i}` is applied literally.
    LeadingCoefficients,
}

/// Right-hand side `h` of the equation.
#[derive(Debug, Clone, PartialEq)]
pub enum Rhs<C> {
    Zero,
    /// All coefficients beyond the stored ones are zero.
    Finite(FormalSeries<C>),
    /// Only known up to its truncation order; solved in the series field.
    Series(FormalSeries<C>),
}

impl<C: Coefficient> Rhs<C> {
    pub fn series(&self) -> Option<&FormalSeries<C>> {
        match self {
            Rhs::Zero => None,
            Rhs::Finite(s) | Rhs::Series(s) => Some(s),
        }
    }

    fn map<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> Rhs<D> {
        match self {
            Rhs::Zero => Rhs::Zero,
            Rhs::Finite(s) => Rhs::Finite(s.map_coefficients(f)),
            Rhs::Series(s) => Rhs::Series(s.map_coefficients(f)),
        }
    }
}

/// `Σ_j q_j L_nu^j y = h` with initial data.
#[derive(Debug, Clone, PartialEq)]
pub struct EquationSpec<C> {
    pub nu: f64,
    /// `q_0..q_K`.
    pub operator: Vec<C>,
    pub rhs: Rhs<C>,
    pub initial_conditions: Vec<C>,
    pub ic_convention: IcConvention,
}

impl<C: Coefficient> EquationSpec<C> {
    pub fn homogeneous(nu: f64, operator: Vec<C>, initial_conditions: Vec<C>) -> Self {
        EquationSpec {
            nu,
            operator,
            rhs: Rhs::Zero,
            initial_conditions,
            ic_convention: IcConvention::default(),
        }
    }

    pub fn order(&self) -> usize {
        self.operator.len().saturating_sub(1)
    }

    pub fn meta(&self) -> Result<SeriesIndexMeta, TransformError> {
        Ok(SeriesIndexMeta::new(self.nu)?)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.rhs.series().is_none_or(FormalSeries::is_zero)
    }

    pub fn validate(&self, eps: f64) -> Result<(), TransformError> {
        self.meta()?;
        match self.operator.last() {
            Some(q) if !q.is_negligible(eps) => {}
            _ => return Err(TransformError::DegenerateOperator),
        }
        let k = self.order();
        if self.initial_conditions.len() != k {
            return Err(TransformError::InitialConditionCount {
                expected: k,
                found: self.initial_conditions.len(),
            });
        }
        if let Some(h) = self.rhs.series() {
            if h.nu() != self.nu {
                return Err(SeriesError::RealizationMismatch {
                    left: self.nu,
                    right: h.nu(),
                }
                .into());
            }
            if h.valuation().finite().is_some_and(|v| v < 0) {
                return Err(TransformError::NegativeRhsValuation);
            }
        }
        Ok(())
    }

    /// `Σ q_j B^j`.
    pub fn lhs(&self) -> Polynomial<C> {
        Polynomial::new(self.operator.clone())
    }

    /// The initial-condition polynomial on the right of `lhs(B) Y = ...`.
    pub fn correction(&self) -> Polynomial<C> {
        let k = self.order();
        let q = &self.operator;
        let g = &self.initial_conditions;
        let mut c = vec![C::zero(); k + 1];
        match self.ic_convention {
            IcConvention::LeadingCoefficients => {
                for j in 1..=k {
                    for i in 0..j {
                        c[j - i] = c[j - i].clone() + q[j].clone() * g[i].clone();
                    }
                }
            }
            IcConvention::Generalized => {
                for i in 0..k {
                    c[k - i] = c[k - i].clone() + q[k].clone() * g[i].clone();
                }
                for j in 1..k {
                    for i in 0..j {
                        c[j - i] = c[j - i].clone() - q[j].clone() * g[i].clone();
                    }
                }
            }
        }
        Polynomial::new(c)
    }

    /// The leading series coefficients `a_0..a_{K-1}` the initial data imply.
    ///
    /// The literal rule gives correction coefficient `t_m = Σ_{j≥m} q_j a_{j-m}`
    /// at `B^m`; solving that triangular system recovers `a` from any correction.
    pub fn leading_coefficients(&self) -> Vec<C> {
        if self.ic_convention == IcConvention::LeadingCoefficients {
            return self.initial_conditions.clone();
        }
        let k = self.order();
        let q = &self.operator;
        let t = self.correction();
        let mut a = vec![C::zero(); k];
        for m in (1..=k).rev() {
            let known = (m..k).fold(C::zero(), |acc, j| acc + q[j].clone() * a[j - m].clone());
            a[k - m] = (t.coeff(m) - known) / q[k].clone();
        }
        a
    }

    pub fn map<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> EquationSpec<D> {
        EquationSpec {
            nu: self.nu,
            operator: self.operator.iter().map(&f).collect(),
            rhs: self.rhs.map(&f),
            initial_conditions: self.initial_conditions.iter().map(&f).collect(),
            ic_convention: self.ic_convention,
        }
    }

    pub fn to_float(&self) -> EquationSpec<Float> {
        self.map(Coefficient::to_c64)
    }
}

/// `lhs(B) Y = correction(B) + rhs_transform`, and its solution when the
/// right-hand side has a rational transform.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedEquation<C> {
    pub lhs: Polynomial<C>,
    pub correction: Polynomial<C>,
    pub rhs_transform: Option<RationalOperator<C>>,
    pub solution: Option<RationalOperator<C>>,
}

/// `B^{-k}`, the transform of `p_{k,nu}` for every `nu`.
pub fn forward_basis<C: Coefficient>(k: i64) -> RationalOperator<C> {
    RationalOperator::basis(k)
}

/// `Σ h_k B^{-k}` for a series with finite support and nonnegative valuation.
fn finite_series_transform<C: Coefficient>(h: &FormalSeries<C>) -> RationalOperator<C> {
    let Some(last) = h.last_index() else {
        return RationalOperator::zero();
    };
    let m = last.max(0) as usize;
    let mut num = vec![C::zero(); m + 1];
    for (k, c) in h.terms() {
        num[m - k as usize] = c.clone();
    }
    RationalOperator {
        numerator: Polynomial::new(num),
        denominator: FactoredPoly::new(C::one(), vec![(C::zero(), m)]),
    }
}

fn times_power_of_b<C: Coefficient>(f: &FactoredPoly<C>, m: usize) -> FactoredPoly<C> {
    let mut factors = f.factors().to_vec();
    match factors.iter_mut().find(|(r, _)| r.is_zero()) {
        Some(entry) => entry.1 += m,
        None => factors.push((C::zero(), m)),
    }
    FactoredPoly::new(f.leading().clone(), factors)
}

pub fn forward_equation<C: Coefficient>(
    spec: &EquationSpec<C>,
    roots: &RootOptions,
    eps: f64,
) -> Result<TransformedEquation<C>, TransformError> {
    spec.validate(eps)?;
    let lhs = spec.lhs();
    let correction = spec.correction();
    let rhs_transform = match &spec.rhs {
        Rhs::Zero => Some(RationalOperator::zero()),
        Rhs::Finite(h) => Some(finite_series_transform(h)),
        Rhs::Series(_) => None,
    };
    let solution = match &rhs_transform {
        None => None,
        Some(h) => {
            let factored = if spec.order() == 0 {
                FactoredPoly::constant(spec.operator[0].clone())
            } else {
                find_roots(&lhs, roots)?
            };
            let m = h.denominator.degree();
            let shifted = Polynomial::monomial(m, h.denominator.leading().clone());
            let numerator = &(&correction * &shifted) + &h.numerator;
            let denominator = times_power_of_b(&factored, m);
            let denominator = FactoredPoly::new(
                denominator.leading().clone() * h.denominator.leading().clone(),
                denominator.factors().to_vec(),
            );
            Some(RationalOperator::new(numerator, denominator)?)
        }
    };
    Ok(TransformedEquation {
        lhs,
        correction,
        rhs_transform,
        solution,
    })
}

/// The solution series computed directly in the series field:
/// `Y = (correction + h) / lhs` with `B` realized as `p_{-1}`.
pub fn series_solution<C: Coefficient>(
    spec: &EquationSpec<C>,
    truncation: i64,
) -> Result<FormalSeries<C>, TransformError> {
    let meta = spec.meta()?;
    let k = spec.order() as i64;
    let window = truncation + 2 * k + 2;
    let as_series = |p: &Polynomial<C>| {
        let coeffs = p.coeffs().iter().rev().cloned().collect();
        FormalSeries::from_coefficients(meta, -(p.degree().unwrap_or(0) as i64), coeffs, window)
    };
    let lhs = as_series(&spec.lhs());
    let mut top = as_series(&spec.correction());
    if let Some(h) = spec.rhs.series() {
        let h = match &spec.rhs {
            Rhs::Finite(h) => h.truncated(h.last_index().unwrap_or(0)).clone(),
            _ => h.clone(),
        };
        let h = FormalSeries::from_coefficients(
            meta,
            h.valuation().finite().unwrap_or(0),
            h.terms().map(|(_, c)| c.clone()).collect(),
            if matches!(spec.rhs, Rhs::Finite(_)) { window } else { h.truncation() },
        );
        top = top.add(&h)?;
    }
    Ok(top.div(&lhs)?.truncated(truncation))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AtomKind {
    /// `I_nu(√λ t)`.
    I,
    /// `J_nu(√λ t)`.
    J,
    /// Real part of the `I` atom at `λ = iω`, in the `p_{k,nu}` basis.
    Ber,
    /// Imaginary part of the `I` atom at `λ = iω`.
    Bei,
    /// `(t^n / (n! 2^n λ^{n/2})) I_n(√λ t)`, for `nu = 0`.
    TWeightedI,
    /// `(t^n / (n! 2^n λ^{n/2})) J_n(√λ t)`, for `nu = 0`.
    TWeightedJ,
}

impl AtomKind {
    pub fn name(self) -> &'static str {
        match self {
            AtomKind::I => "I",
            AtomKind::J => "J",
            AtomKind::Ber => "ber",
            AtomKind::Bei => "bei",
            AtomKind::TWeightedI => "t_weighted_I",
            AtomKind::TWeightedJ => "t_weighted_J",
        }
    }
}

/// `coeff` times a named Bessel function; `param` is `λ` (or `ω` for ber/bei).
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionAtom<C> {
    pub kind: AtomKind,
    pub param: C,
    pub order: usize,
    pub coeff: C,
    pub nu: f64,
}

fn scale_factor<C: Coefficient>(lambda: &C, nu: f64) -> Result<C, TransformError> {
    lambda
        .pow_real(nu / 2.0)
        .ok_or_else(|| TransformError::NeedsFloating(format!("lambda^{}", nu / 2.0)))
}

impl<C: Coefficient> SolutionAtom<C> {
    pub fn new(kind: AtomKind, param: C, coeff: C, nu: f64) -> Self {
        SolutionAtom {
            kind,
            param,
            order: 0,
            coeff,
            nu,
        }
    }

    pub fn weighted(kind: AtomKind, param: C, order: usize, coeff: C) -> Self {
        SolutionAtom {
            kind,
            param,
            order,
            coeff,
            nu: 0.0,
        }
    }

    /// Leading index and the coefficients `c_i` of `p_{start + step*i}`,
    /// before multiplication by `coeff`.
    fn pattern(&self, truncation: i64) -> Result<(i64, i64, Vec<C>), TransformError> {
        let mut out = Vec::new();
        let (start, step) = match self.kind {
            AtomKind::I | AtomKind::J => {
                let x = if self.kind == AtomKind::I {
                    self.param.clone()
                } else {
                    -self.param.clone()
                };
                let mut c = scale_factor(&self.param, self.nu)?;
                for _ in 0..=truncation.max(-1) {
                    out.push(c.clone());
                    c = c * x.clone();
                }
                (0, 1)
            }
            AtomKind::Ber | AtomKind::Bei => {
                let neg_square = -(self.param.clone() * self.param.clone());
                let (start, mut c) = if self.kind == AtomKind::Ber {
                    (0, C::one())
                } else {
                    (1, self.param.clone())
                };
                let mut k = start;
                while k <= truncation {
                    out.push(c.clone());
                    c = c * neg_square.clone();
                    k += 2;
                }
                (start, 2)
            }
            AtomKind::TWeightedI | AtomKind::TWeightedJ => {
                let x = if self.kind == AtomKind::TWeightedI {
                    self.param.clone()
                } else {
                    -self.param.clone()
                };
                let n = self.order as i64;
                let mut c = C::one();
                for k in 0..=(truncation - n).max(-1) {
                    out.push(c.clone());
                    c = c * x.clone() * C::from_ratio(n + k + 1, k + 1);
                }
                (n, 1)
            }
        };
        Ok((start, step, out))
    }

    /// Expansion in the `p_{k,nu}` basis.
    pub fn to_series(&self, truncation: i64) -> Result<FormalSeries<C>, TransformError> {
        let meta = SeriesIndexMeta::new(self.nu)?;
        let (start, step, pattern) = self.pattern(truncation)?;
        let len = pattern.len() * step as usize;
        let mut coeffs = vec![C::zero(); len];
        for (i, c) in pattern.into_iter().enumerate() {
            coeffs[i * step as usize] = self.coeff.clone() * c;
        }
        Ok(FormalSeries::from_coefficients(meta, start, coeffs, truncation))
    }

    /// Coefficient pattern as floats, for evaluation: `(start, step, coeff·c_i)`
    /// generated lazily by ratio. Returns the first coefficient and the
    /// coefficient ratio from one nonzero index to the next.
    pub(crate) fn float_recurrence(&self) -> Result<AtomRecurrence, TransformError> {
        let lambda = self.param.to_c64();
        let coeff = self.coeff.to_c64();
        Ok(match self.kind {
            AtomKind::I | AtomKind::J => {
                let x = if self.kind == AtomKind::I { lambda } else { -lambda };
                let scale = Coefficient::pow_real(&lambda, self.nu / 2.0)
                    .ok_or_else(|| TransformError::NeedsFloating("lambda power".into()))?;
                AtomRecurrence {
                    start: 0,
                    step: 1,
                    first: coeff * scale,
                    ratio: Box::new(move |_| x),
                }
            }
            AtomKind::Ber | AtomKind::Bei => {
                let neg_square = -(lambda * lambda);
                AtomRecurrence {
                    start: if self.kind == AtomKind::Ber { 0 } else { 1 },
                    step: 2,
                    first: if self.kind == AtomKind::Ber { coeff } else { coeff * lambda },
                    ratio: Box::new(move |_| neg_square),
                }
            }
            AtomKind::TWeightedI | AtomKind::TWeightedJ => {
                let x = if self.kind == AtomKind::TWeightedI { lambda } else { -lambda };
                let n = self.order as f64;
                AtomRecurrence {
                    start: self.order as i64,
                    step: 1,
                    first: coeff,
                    ratio: Box::new(move |i| x * ((n + i as f64 + 1.0) / (i as f64 + 1.0))),
                }
            }
        })
    }

    /// The table transform of this atom.
    pub fn transform(&self) -> Result<RationalOperator<C>, TransformError> {
        let one = C::one();
        let b = |power: usize, c: C| Polynomial::monomial(power, c);
        let (numerator, factors) = match self.kind {
            AtomKind::I => (
                b(1, self.coeff.clone() * scale_factor(&self.param, self.nu)?),
                vec![(self.param.clone(), 1)],
            ),
            AtomKind::J => (
                b(1, self.coeff.clone() * scale_factor(&self.param, self.nu)?),
                vec![(-self.param.clone(), 1)],
            ),
            AtomKind::Ber | AtomKind::Bei => {
                let iw = C::imaginary_unit() * self.param.clone();
                let num = if self.kind == AtomKind::Ber {
                    b(2, self.coeff.clone())
                } else {
                    b(1, self.coeff.clone() * self.param.clone())
                };
                (num, vec![(iw.clone(), 1), (-iw, 1)])
            }
            AtomKind::TWeightedI => (b(1, self.coeff.clone()), vec![(self.param.clone(), self.order + 1)]),
            AtomKind::TWeightedJ => (b(1, self.coeff.clone()), vec![(-self.param.clone(), self.order + 1)]),
        };
        Ok(RationalOperator::new(numerator, FactoredPoly::new(one, factors))?)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "kind": self.kind.name(),
            "param": self.param.to_json(),
            "order": self.order,
            "coeff": self.coeff.to_json(),
            "nu": self.nu,
            "label": self.to_string(),
        })
    }
}

/// Float coefficients of an atom series, one nonzero index at a time.
pub(crate) struct AtomRecurrence {
    pub start: i64,
    pub step: i64,
    pub first: Float,
    /// Ratio between the `i`-th and `(i+1)`-th nonzero coefficients.
    pub ratio: Box<dyn Fn(usize) -> Float>,
}

pub(crate) fn scalar_label<C: Coefficient>(c: &C) -> String {
    let part = |v: &Value| match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    match c.to_json() {
        Value::Array(parts) if c.is_real(0.0) => part(&parts[0]),
        Value::Array(parts) => format!("({}{}{}i)", part(&parts[0]), if part(&parts[1]).starts_with('-') { "" } else { "+" }, part(&parts[1])),
        other => part(&other),
    }
}

impl<C: Coefficient> fmt::Display for SolutionAtom<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = scalar_label(&self.coeff);
        let p = scalar_label(&self.param);
        let n = self.order;
        match self.kind {
            AtomKind::I | AtomKind::J => write!(f, "{c}*{}_{}(sqrt({p}) t)", self.kind.name(), self.nu),
            AtomKind::Ber | AtomKind::Bei => write!(f, "{c}*{}_{}(sqrt({p}) t)", self.kind.name(), self.nu),
            AtomKind::TWeightedI => write!(f, "{c}*t^{n}/({n}! 2^{n} ({p})^({n}/2)) I_{n}(sqrt({p}) t)"),
            AtomKind::TWeightedJ => write!(f, "{c}*t^{n}/({n}! 2^{n} ({p})^({n}/2)) J_{n}(sqrt({p}) t)"),
        }
    }
}

/// The part of a solution not matched by any atom.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual<C> {
    /// Its transform, when known in closed form.
    pub rational: Option<RationalOperator<C>>,
    pub series: FormalSeries<C>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionExpression<C> {
    pub nu: f64,
    pub atoms: Vec<SolutionAtom<C>>,
    pub residual: Option<Residual<C>>,
}

impl<C: Coefficient> SolutionExpression<C> {
    /// Sum of all atom series and the residual, known through `truncation`.
    pub fn to_series(&self, truncation: i64) -> Result<FormalSeries<C>, TransformError> {
        let meta = SeriesIndexMeta::new(self.nu)?;
        let mut total = FormalSeries::zero(meta, truncation);
        for atom in &self.atoms {
            total = total.add(&atom.to_series(truncation)?)?;
        }
        if let Some(r) = &self.residual {
            total = total.add(&r.series.truncated(truncation))?;
        }
        Ok(total)
    }

    /// False when the residual has negative valuation and so has no
    /// realization as a function.
    pub fn is_evaluable(&self) -> bool {
        self.residual
            .as_ref()
            .is_none_or(|r| r.series.valuation().finite().is_none_or(|v| v >= 0))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "nu": self.nu,
            "atoms": self.atoms.iter().map(SolutionAtom::to_json).collect::<Vec<_>>(),
            "residual": self.residual.as_ref().map(|r| json!({
                "series": r.series.to_json(),
                "rational": r.rational.as_ref().map(|q| json!({
                    "numerator": q.numerator.to_json(),
                    "denominator_leading": q.denominator.leading().to_json(),
                    "denominator_factors": q.denominator.factors().iter()
                        .map(|(root, m)| json!({"root": root.to_json(), "multiplicity": m}))
                        .collect::<Vec<_>>(),
                })),
            })),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseOptions {
    /// Rewrite poles on the negative real axis as `J` atoms and conjugate
    /// imaginary pairs as ber/bei.
    pub real_form: bool,
    pub tolerance: f64,
    pub truncation: i64,
}

impl Default for InverseOptions {
    fn default() -> Self {
        InverseOptions {
            real_form: false,
            tolerance: 1e-12,
            truncation: crate::series::DEFAULT_TRUNCATION,
        }
    }
}

fn is_negative_real<C: Coefficient>(r: &C, eps: f64) -> bool {
    r.is_real(eps) && r.to_c64().re < 0.0
}

pub fn inverse_transform<C: Coefficient>(
    y: &RationalOperator<C>,
    nu: f64,
    options: &InverseOptions,
) -> Result<SolutionExpression<C>, TransformError> {
    let eps = options.tolerance;
    let meta = SeriesIndexMeta::new(nu)?;
    let terms = y.partial_fractions(eps)?;
    let pole_order = |root: &C| {
        terms
            .iter()
            .filter_map(|t| match t {
                PartialFractionTerm::BOverPow { root: r, multiplicity, .. }
                | PartialFractionTerm::OneOverPow { root: r, multiplicity, .. }
                    if (r.clone() - root.clone()).is_negligible(eps) =>
                {
                    Some(*multiplicity)
                }
                _ => None,
            })
            .max()
            .unwrap_or(0)
    };

    let mut used = vec![false; terms.len()];
    let mut atoms = Vec::new();
    if options.real_form {
        for i in 0..terms.len() {
            let PartialFractionTerm::BOverPow { root: r1, multiplicity: 1, coeff: c1 } = &terms[i] else {
                continue;
            };
            let omega = r1.im_part();
            if used[i] || !r1.re_part().is_negligible(eps) || omega.to_c64().re <= 0.0 || pole_order(r1) != 1 {
                continue;
            }
            let partner = (0..terms.len()).find(|&j| {
                !used[j]
                    && matches!(&terms[j], PartialFractionTerm::BOverPow { root: r2, multiplicity: 1, coeff: c2 }
                        if (r2.clone() - r1.conj()).is_negligible(eps)
                            && (c2.clone() - c1.conj()).is_negligible(eps))
            });
            let Some(j) = partner else { continue };
            if pole_order(&r1.conj()) != 1 {
                continue;
            }
            let c2 = terms[j].coeff().clone();
            used[i] = true;
            used[j] = true;
            atoms.push(SolutionAtom::new(AtomKind::Ber, omega.clone(), c1.clone() + c2.clone(), nu));
            atoms.push(SolutionAtom::new(
                AtomKind::Bei,
                omega,
                C::imaginary_unit() * (c1.clone() - c2),
                nu,
            ));
        }
    }

    let mut leftover: Vec<&PartialFractionTerm<C>> = Vec::new();
    for (i, term) in terms.iter().enumerate() {
        if used[i] {
            continue;
        }
        let PartialFractionTerm::BOverPow { root, multiplicity, coeff } = term else {
            leftover.push(term);
            continue;
        };
        if root.is_negligible(eps) {
            leftover.push(term);
            continue;
        }
        let negative = options.real_form && is_negative_real(root, eps);
        let atom = match (*multiplicity, negative) {
            (1, false) => {
                let c = coeff.clone() / scale_factor(root, nu)?;
                SolutionAtom::new(AtomKind::I, root.clone(), c, nu)
            }
            (1, true) => {
                let lambda = -root.re_part();
                let c = coeff.clone() / scale_factor(&lambda, nu)?;
                SolutionAtom::new(AtomKind::J, lambda, c, nu)
            }
            (m, _) if nu != 0.0 => {
                let _ = m;
                leftover.push(term);
                continue;
            }
            (m, false) => SolutionAtom::weighted(AtomKind::TWeightedI, root.clone(), m - 1, coeff.clone()),
            (m, true) => SolutionAtom::weighted(AtomKind::TWeightedJ, -root.re_part(), m - 1, coeff.clone()),
        };
        atoms.push(atom);
    }

    let residual = if leftover.is_empty() {
        None
    } else {
        let rational = leftover
            .iter()
            .fold(RationalOperator::zero(), |acc, t| acc.add(&t.to_rational(), eps));
        let series = rational.to_series(meta, options.truncation)?;
        Some(Residual {
            rational: Some(rational),
            series,
        })
    };
    Ok(SolutionExpression { nu, atoms, residual })
}

/// The transform of a solution expression, read off the table row by row.
pub fn forward_expression<C: Coefficient>(
    e: &SolutionExpression<C>,
    eps: f64,
) -> Result<RationalOperator<C>, TransformError> {
    let mut total = RationalOperator::zero();
    for atom in &e.atoms {
        total = total.add(&atom.transform()?, eps);
    }
    if let Some(r) = &e.residual {
        let rational = r.rational.as_ref().ok_or(TransformError::InfiniteResidual)?;
        total = total.add(rational, eps);
    }
    Ok(total)
}

/// Rows of the transform table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableEntry {
    Ber,
    Bei,
    HalfSum,
    HalfDifference,
    I,
    J,
}

impl TableEntry {
    pub const ALL: [TableEntry; 6] = [
        TableEntry::Ber,
        TableEntry::Bei,
        TableEntry::HalfSum,
        TableEntry::HalfDifference,
        TableEntry::I,
        TableEntry::J,
    ];

    pub fn function(self, nu: f64) -> String {
        match self {
            TableEntry::Ber => format!("ber_{nu}(sqrt(omega) t)"),
            TableEntry::Bei => format!("bei_{nu}(sqrt(omega) t)"),
            TableEntry::HalfSum => format!("(I_{nu}(sqrt(lambda) t) + J_{nu}(sqrt(lambda) t))/2"),
            TableEntry::HalfDifference => format!("(I_{nu}(sqrt(lambda) t) - J_{nu}(sqrt(lambda) t))/2"),
            TableEntry::I => format!("I_{nu}(sqrt(lambda) t)"),
            TableEntry::J => format!("J_{nu}(sqrt(lambda) t)"),
        }
    }

    /// The power of `λ` in front of the row, as text.
    pub fn nu_dependence(self, nu: f64) -> String {
        let power = match self {
            TableEntry::Ber | TableEntry::Bei => return "none".into(),
            TableEntry::HalfDifference => nu / 2.0 + 1.0,
            _ => nu / 2.0,
        };
        lambda_power(power)
    }

    pub fn numerator(self, nu: f64) -> String {
        let front = |power: f64, rest: &str| match lambda_power(power).as_str() {
            "1" => rest.to_string(),
            p => format!("{p} {rest}"),
        };
        match self {
            TableEntry::Ber => "B^2".into(),
            TableEntry::Bei => "omega B".into(),
            TableEntry::HalfSum => front(nu / 2.0, "B^2"),
            TableEntry::HalfDifference => front(nu / 2.0 + 1.0, "B"),
            TableEntry::I | TableEntry::J => front(nu / 2.0, "B"),
        }
    }

    pub fn denominator(self) -> &'static str {
        match self {
            TableEntry::Ber | TableEntry::Bei => "B^2 + omega^2",
            TableEntry::HalfSum | TableEntry::HalfDifference => "B^2 - lambda^2",
            TableEntry::I => "B - lambda",
            TableEntry::J => "B + lambda",
        }
    }

    /// The left column as atoms with parameter `param` (`λ`, or `ω`).
    pub fn atoms<C: Coefficient>(self, param: &C, nu: f64) -> Vec<SolutionAtom<C>> {
        let half = C::from_ratio(1, 2);
        let atom = |kind, c: C| SolutionAtom::new(kind, param.clone(), c, nu);
        match self {
            TableEntry::Ber => vec![atom(AtomKind::Ber, C::one())],
            TableEntry::Bei => vec![atom(AtomKind::Bei, C::one())],
            TableEntry::HalfSum => vec![atom(AtomKind::I, half.clone()), atom(AtomKind::J, half)],
            TableEntry::HalfDifference => vec![atom(AtomKind::I, half.clone()), atom(AtomKind::J, -half)],
            TableEntry::I => vec![atom(AtomKind::I, C::one())],
            TableEntry::J => vec![atom(AtomKind::J, C::one())],
        }
    }

    /// The right column with parameter `param`, built directly from the row.
    pub fn transform<C: Coefficient>(self, param: &C, nu: f64) -> Result<RationalOperator<C>, TransformError> {
        let p = param.clone();
        let s = scale_factor(param, nu)?;
        let (numerator, roots) = match self {
            TableEntry::Ber | TableEntry::Bei => {
                let iw = C::imaginary_unit() * p.clone();
                let num = if self == TableEntry::Ber {
                    Polynomial::monomial(2, C::one())
                } else {
                    Polynomial::monomial(1, p)
                };
                (num, vec![(iw.clone(), 1), (-iw, 1)])
            }
            TableEntry::HalfSum => (Polynomial::monomial(2, s), vec![(p.clone(), 1), (-p, 1)]),
            TableEntry::HalfDifference => (
                Polynomial::monomial(1, s * p.clone()),
                vec![(p.clone(), 1), (-p, 1)],
            ),
            TableEntry::I => (Polynomial::monomial(1, s), vec![(p, 1)]),
            TableEntry::J => (Polynomial::monomial(1, s), vec![(-p, 1)]),
        };
        Ok(RationalOperator::new(numerator, FactoredPoly::new(C::one(), roots))?)
    }

    pub fn to_json(self, nu: f64) -> Value {
        json!({
            "function": self.function(nu),
            "transform_numerator": self.numerator(nu),
            "transform_denominator": self.denominator(),
            "nu_dependence": self.nu_dependence(nu),
        })
    }
}

fn lambda_power(power: f64) -> String {
    if power == 0.0 {
        "1".into()
    } else if power == 1.0 {
        "lambda".into()
    } else {
        format!("lambda^{power}")
    }
}

/// The whole table with `nu` substituted.
pub fn table_json(nu: f64) -> Value {
    Value::Array(TableEntry::ALL.iter().map(|row| row.to_json(nu)).collect())
}
