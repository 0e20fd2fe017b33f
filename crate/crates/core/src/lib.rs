//! Algebraic operational calculus over a field of formal series, applied to
//! Bessel-type differential equations.
//!
//! Equations polynomial in `L_nu = (1/t)DtD - nu^2/t^2` are moved into rational
//! equations in a transform symbol `B`, solved there, split into partial
//! fractions, and mapped back to Bessel functions through a transform table.
//! Every solution is checked independently against the defining recurrence.

pub mod bessel;
pub mod coefficient;
pub mod rational;
pub mod series;
pub mod solver;
pub mod transform;

pub use bessel::{bessel_atom_eval, eval_expression, eval_series, p_eval, EvalError, EvalResult};
pub use coefficient::{Coefficient, Exact, Float};
pub use rational::{
    find_roots, FactoredPoly, PartialFractionTerm, Polynomial, RationalError, RationalOperator,
    RootOptions,
};
pub use series::{FormalSeries, SeriesError, SeriesIndexMeta, Valuation, DEFAULT_TRUNCATION};
pub use solver::{
    solve, solve_auto, verify, AnySolveReport, SolveError, SolveOptions, SolveReport, Verification,
};
pub use transform::{
    forward_equation, forward_expression, inverse_transform, AtomKind, EquationSpec, IcConvention,
    InverseOptions, Rhs, SolutionAtom, SolutionExpression, TableEntry, TransformError,
};
