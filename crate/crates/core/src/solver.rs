//! Forward transform, partial fractions, inverse transform, then an
//! independent check of the expanded series against the equation itself.

use serde_json::{json, Value};
use thiserror::Error;

use crate::bessel::{eval_expression, EvalError, EvalResult};
use crate::coefficient::{Coefficient, Exact, Float};
use crate::rational::{find_roots, PartialFractionTerm, RationalError, RationalOperator, RootOptions};
use crate::series::{FormalSeries, DEFAULT_TRUNCATION};
use crate::transform::{
    forward_equation, inverse_transform, series_solution, AtomKind, EquationSpec, InverseOptions,
    Residual, Rhs, SolutionAtom, SolutionExpression, TransformError,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("space decomposition needs a homogeneous equation")]
    NonHomogeneous,
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl From<RationalError> for SolveError {
    fn from(e: RationalError) -> Self {
        SolveError::Transform(e.into())
    }
}

impl SolveError {
    /// Errors that a floating-point solve can get past.
    fn wants_floating(&self) -> bool {
        matches!(
            self,
            SolveError::Transform(TransformError::NeedsFloating(_))
                | SolveError::Transform(TransformError::Rational(RationalError::NonRationalRoot(_)))
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub truncation: i64,
    pub real_form: bool,
    /// Pass/fail threshold for floating verification.
    pub tolerance: f64,
    pub roots: RootOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            truncation: DEFAULT_TRUNCATION,
            real_form: false,
            tolerance: 1e-10,
            roots: RootOptions::default(),
        }
    }
}

/// Zero test used for root matching and partial fractions in floating runs.
const ZERO_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Verification {
    /// `max_n |(Σ q_j L^j y - h)_n|` over `n = 0..=T-K`.
    pub residual_norm: f64,
    /// The same, each index scaled by `max(1, |q_j a_{n+j}|, |h_n|)`.
    pub relative_residual: f64,
    /// `|a_i - expected a_i|` for `i < K`.
    pub ic_errors: Vec<f64>,
}

impl Verification {
    /// Exact runs must verify exactly; floating runs use the relative
    /// residual and initial-data errors scaled by the data.
    pub fn passed<C: Coefficient>(&self, expected_leading: &[C], tolerance: f64) -> bool {
        if C::EXACT {
            return self.residual_norm == 0.0 && self.ic_errors.iter().all(|e| *e == 0.0);
        }
        self.relative_residual <= tolerance
            && self
                .ic_errors
                .iter()
                .zip(expected_leading)
                .all(|(e, a)| *e <= tolerance * a.abs().max(1.0))
    }
}

/// Applies `Σ q_j L^j` to `series` by powers of the modified left shift and
/// compares with the right-hand side and the initial data.
pub fn verify<C: Coefficient>(
    spec: &EquationSpec<C>,
    series: &FormalSeries<C>,
) -> Result<Verification, SolveError> {
    if let Some(v) = series.valuation().finite() {
        if v < 0 {
            return Err(EvalError::NegativeValuation(v).into());
        }
    }
    let k = spec.order();
    let mut powers = vec![series.clone()];
    for j in 1..=k {
        powers.push(powers[j - 1].modified_left_shift());
    }
    let mut hi = series.truncation() - k as i64;
    let rhs_at = |n: i64| -> C {
        match &spec.rhs {
            Rhs::Zero => C::zero(),
            Rhs::Finite(h) => h.terms().find(|(i, _)| *i == n).map(|(_, c)| c.clone()).unwrap_or_else(C::zero),
            Rhs::Series(h) => h.coefficient(n).unwrap_or_else(|_| C::zero()),
        }
    };
    if let Rhs::Series(h) = &spec.rhs {
        hi = hi.min(h.truncation());
    }
    let mut residual_norm = 0.0f64;
    let mut relative_residual = 0.0f64;
    for n in 0..=hi {
        let h = rhs_at(n);
        let mut scale = h.abs().max(1.0);
        let mut r = -h;
        for (j, q) in spec.operator.iter().enumerate() {
            let term = q.clone() * powers[j].coefficient(n).map_err(TransformError::from)?;
            scale = scale.max(term.abs());
            r = r + term;
        }
        residual_norm = residual_norm.max(r.abs());
        relative_residual = relative_residual.max(r.abs() / scale);
    }
    let expected = spec.leading_coefficients();
    let ic_errors = expected
        .iter()
        .enumerate()
        .map(|(i, a)| {
            series
                .coefficient(i as i64)
                .map(|c| (c - a.clone()).abs())
                .map_err(|e| SolveError::Transform(e.into()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Verification {
        residual_norm,
        relative_residual,
        ic_errors,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport<C> {
    pub solution: SolutionExpression<C>,
    /// The transformed unknown, when the rational pathway was used.
    pub transform: Option<RationalOperator<C>>,
    pub series: FormalSeries<C>,
    pub verification: Verification,
    pub expected_leading: Vec<C>,
    pub atom_count: usize,
    pub used_series_fallback: bool,
}

impl<C: Coefficient> SolveReport<C> {
    pub fn evaluable(&self) -> bool {
        self.solution.is_evaluable()
    }

    pub fn passed(&self, tolerance: f64) -> bool {
        self.verification.passed(&self.expected_leading, tolerance)
    }

    pub fn eval(&self, t: f64) -> Result<EvalResult, EvalError> {
        eval_expression(&self.solution, t)
    }

    pub fn to_json(&self) -> Value {
        let v = &self.verification;
        json!({
            "exact": C::EXACT,
            "solution": self.solution.to_json(),
            "series": self.series.to_json(),
            "residual_norm": v.residual_norm,
            "relative_residual": v.relative_residual,
            "ic_errors": v.ic_errors,
            "atom_count": self.atom_count,
            "used_series_fallback": self.used_series_fallback,
            "evaluable": self.evaluable(),
        })
    }
}

pub fn solve<C: Coefficient>(
    spec: &EquationSpec<C>,
    options: &SolveOptions,
) -> Result<SolveReport<C>, SolveError> {
    let truncation = options.truncation;
    let transformed = forward_equation(spec, &options.roots, ZERO_TOLERANCE)?;
    let inverse = InverseOptions {
        real_form: options.real_form,
        tolerance: ZERO_TOLERANCE,
        truncation,
    };
    let (solution, transform) = match transformed.solution {
        Some(y) => (inverse_transform(&y, spec.nu, &inverse)?, Some(y)),
        None => {
            let series = series_solution(spec, truncation)?;
            let residual = Residual {
                rational: None,
                series,
            };
            (
                SolutionExpression {
                    nu: spec.nu,
                    atoms: Vec::new(),
                    residual: Some(residual),
                },
                None,
            )
        }
    };
    let series = solution.to_series(truncation)?;
    let verification = verify(spec, &series)?;
    Ok(SolveReport {
        atom_count: solution.atoms.len(),
        used_series_fallback: solution.residual.is_some(),
        solution,
        transform,
        series,
        verification,
        expected_leading: spec.leading_coefficients(),
    })
}

/// A report from either field.
#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum AnySolveReport {
    Exact(SolveReport<Exact>),
    Float(SolveReport<Float>),
}

impl AnySolveReport {
    pub fn passed(&self, tolerance: f64) -> bool {
        match self {
            AnySolveReport::Exact(r) => r.passed(tolerance),
            AnySolveReport::Float(r) => r.passed(tolerance),
        }
    }

    pub fn evaluable(&self) -> bool {
        match self {
            AnySolveReport::Exact(r) => r.evaluable(),
            AnySolveReport::Float(r) => r.evaluable(),
        }
    }

    pub fn eval(&self, t: f64) -> Result<EvalResult, EvalError> {
        match self {
            AnySolveReport::Exact(r) => r.eval(t),
            AnySolveReport::Float(r) => r.eval(t),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            AnySolveReport::Exact(r) => r.to_json(),
            AnySolveReport::Float(r) => r.to_json(),
        }
    }
}

/// Solves exactly, falling back to floating point when a root is irrational
/// or a power `λ^{nu/2}` has no exact value.
pub fn solve_auto(spec: &EquationSpec<Exact>, options: &SolveOptions) -> Result<AnySolveReport, SolveError> {
    match solve(spec, options) {
        Ok(r) => Ok(AnySolveReport::Exact(r)),
        Err(e) if e.wants_floating() => Ok(AnySolveReport::Float(solve(&spec.to_float(), options)?)),
        Err(e) => Err(e),
    }
}

/// A basis of the solution space of a homogeneous equation.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceBasis<C> {
    pub atoms: Vec<SolutionAtom<C>>,
    /// Basis transforms without a named atom (zero roots, repeated roots for
    /// `nu != 0`).
    pub series_elements: Vec<PartialFractionTerm<C>>,
    /// For `nu = 2`: the span written with orders 0 and 1 through
    /// `J_2(x) = -J_0(x) + (2/x) J_1(x)` and `I_2(x) = I_0(x) - (2/x) I_1(x)`.
    pub reduced: Vec<String>,
}

pub fn decompose_space<C: Coefficient>(
    spec: &EquationSpec<C>,
    options: &SolveOptions,
) -> Result<SpaceBasis<C>, SolveError> {
    if !spec.is_homogeneous() {
        return Err(SolveError::NonHomogeneous);
    }
    spec.validate(ZERO_TOLERANCE)?;
    let eps = ZERO_TOLERANCE;
    let nu = spec.nu;
    let factors = if spec.order() == 0 {
        Vec::new()
    } else {
        find_roots(&spec.lhs(), &options.roots)?.factors().to_vec()
    };
    let mut basis = SpaceBasis {
        atoms: Vec::new(),
        series_elements: Vec::new(),
        reduced: Vec::new(),
    };
    let mut paired = vec![false; factors.len()];
    for (i, (r, m)) in factors.iter().enumerate() {
        if paired[i] {
            continue;
        }
        let element = |j: usize| PartialFractionTerm::BOverPow {
            root: r.clone(),
            multiplicity: j,
            coeff: C::one(),
        };
        if r.is_negligible(eps) {
            basis.series_elements.extend((1..=*m).map(element));
            continue;
        }
        let omega = r.im_part();
        let kelvin_partner = (options.real_form && *m == 1 && r.re_part().is_negligible(eps) && omega.to_c64().re > 0.0)
            .then(|| {
                factors
                    .iter()
                    .position(|(s, n)| *n == 1 && (s.clone() - r.conj()).is_negligible(eps))
            })
            .flatten();
        if let Some(j) = kelvin_partner {
            paired[j] = true;
            basis.atoms.push(SolutionAtom::new(AtomKind::Ber, omega.clone(), C::one(), nu));
            basis.atoms.push(SolutionAtom::new(AtomKind::Bei, omega, C::one(), nu));
            continue;
        }
        let negative = options.real_form && r.is_real(eps) && r.to_c64().re < 0.0;
        let (kind, weighted, param) = if negative {
            (AtomKind::J, AtomKind::TWeightedJ, -r.re_part())
        } else {
            (AtomKind::I, AtomKind::TWeightedI, r.clone())
        };
        basis.atoms.push(SolutionAtom::new(kind, param.clone(), C::one(), nu));
        for j in 2..=*m {
            if nu == 0.0 {
                basis.atoms.push(SolutionAtom::weighted(weighted, param.clone(), j - 1, C::one()));
            } else {
                basis.series_elements.push(element(j));
            }
        }
    }
    if nu == 2.0 {
        for atom in &basis.atoms {
            let name = match atom.kind {
                AtomKind::I => "I",
                AtomKind::J => "J",
                _ => continue,
            };
            let x = format!("sqrt({}) t", crate::transform::scalar_label(&atom.param));
            basis.reduced.push(format!("{name}_0({x})"));
            basis.reduced.push(format!("{name}_1({x})/({x})"));
        }
    }
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::SeriesIndexMeta;

    fn ex(n: i64) -> Exact {
        Exact::from_i64(n)
    }

    fn j0_spec() -> EquationSpec<Exact> {
        EquationSpec::homogeneous(0.0, vec![ex(1), ex(1)], vec![ex(1)])
    }

    #[test]
    fn j0_solution() {
        let opts = SolveOptions { real_form: true, ..Default::default() };
        let r = solve(&j0_spec(), &opts).unwrap();
        assert_eq!(r.solution.atoms, vec![SolutionAtom::new(AtomKind::J, ex(1), ex(1), 0.0)]);
        assert_eq!(r.series, FormalSeries::geometric(SeriesIndexMeta::default(), ex(-1), 64));
        assert_eq!(r.verification.residual_norm, 0.0);
        assert!(r.passed(0.0));
        assert!(!r.used_series_fallback);
    }

    #[test]
    fn verify_examples() {
        let meta = SeriesIndexMeta::default();
        let series = FormalSeries::geometric(meta, ex(-1), 64);
        let v = verify(&j0_spec(), &series).unwrap();
        assert_eq!(v.residual_norm, 0.0);
        assert_eq!(v.ic_errors, vec![0.0]);
        let mut wrong = j0_spec();
        wrong.initial_conditions = vec![ex(2)];
        assert_eq!(verify(&wrong, &series).unwrap().ic_errors, vec![1.0]);
        let delta = Exact::from_ratio(1, 1000);
        let bumped = series.add(&FormalSeries::monomial(meta, 7, delta, 64)).unwrap();
        assert!(verify(&j0_spec(), &bumped).unwrap().residual_norm >= 0.001);
    }

    #[test]
    fn second_order_exact() {
        let spec = EquationSpec::homogeneous(0.0, vec![ex(2), ex(-3), ex(1)], vec![ex(1), ex(0)]);
        let r = solve(&spec, &SolveOptions::default()).unwrap();
        let coeffs: Vec<_> = r.solution.atoms.iter().map(|a| a.coeff.clone()).collect();
        assert_eq!(coeffs, vec![ex(-4), ex(5)]);
        assert_eq!(r.verification.residual_norm, 0.0);
        assert_eq!(r.series.dense(0, 1), vec![ex(1), ex(6)]);
        assert!(r.passed(0.0));
    }

    #[test]
    fn irrational_roots_fall_back_to_floating() {
        // (L^2 - 2) y = 0
        let spec = EquationSpec::homogeneous(0.0, vec![ex(-2), ex(0), ex(1)], vec![ex(1), ex(0)]);
        let r = solve_auto(&spec, &SolveOptions::default()).unwrap();
        assert!(matches!(r, AnySolveReport::Float(_)));
        assert!(r.passed(1e-10));
    }

    #[test]
    fn infinite_rhs_uses_series_field() {
        // (L + 1) y = Σ p_k, a_0 = 0
        let meta = SeriesIndexMeta::default();
        let spec = EquationSpec {
            nu: 0.0,
            operator: vec![ex(1), ex(1)],
            rhs: Rhs::Series(FormalSeries::geometric(meta, ex(1), 64)),
            initial_conditions: vec![ex(0)],
            ic_convention: Default::default(),
        };
        let r = solve(&spec, &SolveOptions::default()).unwrap();
        assert!(r.used_series_fallback);
        assert_eq!(r.atom_count, 0);
        assert_eq!(r.verification.residual_norm, 0.0);
        assert_eq!(r.verification.ic_errors, vec![0.0]);
    }

    #[test]
    fn space_of_repeated_root() {
        // (L - 4)^2 y = 0
        let spec = EquationSpec::homogeneous(0.0, vec![ex(16), ex(-8), ex(1)], vec![ex(0), ex(0)]);
        let basis = decompose_space(&spec, &SolveOptions::default()).unwrap();
        assert_eq!(
            basis.atoms,
            vec![
                SolutionAtom::new(AtomKind::I, ex(4), ex(1), 0.0),
                SolutionAtom::weighted(AtomKind::TWeightedI, ex(4), 1, ex(1)),
            ]
        );
    }

    #[test]
    fn fourth_order_space() {
        let spec = EquationSpec::homogeneous(2.0, vec![ex(-9), ex(-8), ex(1)], vec![ex(0), ex(0)]);
        let opts = SolveOptions { real_form: true, ..Default::default() };
        let basis = decompose_space(&spec, &opts).unwrap();
        let kinds: Vec<_> = basis.atoms.iter().map(|a| (a.kind, a.param.clone())).collect();
        assert!(kinds.contains(&(AtomKind::J, ex(1))));
        assert!(kinds.contains(&(AtomKind::I, ex(9))));
        assert_eq!(basis.reduced.len(), 4);
        assert!(basis.reduced.contains(&"J_1(sqrt(1) t)/(sqrt(1) t)".to_string()));
    }

    #[test]
    fn space_requires_homogeneous() {
        let meta = SeriesIndexMeta::default();
        let mut spec = j0_spec();
        spec.rhs = Rhs::Finite(FormalSeries::monomial(meta, 0, ex(1), 0));
        assert_eq!(decompose_space(&spec, &SolveOptions::default()), Err(SolveError::NonHomogeneous));
    }
}
