//! Realization of the abstract basis as functions of `t`:
//! `p_{k,nu}(t) = (t/2)^{2k+nu} / (Γ(nu+1+k) k!)`.
//!
//! With this realization `L_nu = (1/t) D t D - nu²/t²` acts as the modified
//! left shift, and the geometric series become Bessel functions.

use num_complex::Complex64;
use thiserror::Error;

use crate::coefficient::Coefficient;
use crate::series::FormalSeries;
use crate::transform::{SolutionAtom, SolutionExpression, TransformError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("series has negative valuation {0}; negative indices have no realization")]
    NegativeValuation(i64),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error(transparent)]
    Transform(#[from] TransformError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalResult {
    pub value: Complex64,
    /// Estimated bound on the dropped tail.
    pub truncation_bound: f64,
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(x: f64) -> f64 {
    LANCZOS[1..]
        .iter()
        .enumerate()
        .fold(LANCZOS[0], |acc, (i, c)| acc + c / (x + i as f64 + 1.0))
}

fn is_pole(x: f64) -> bool {
    x <= 0.0 && x.fract() == 0.0
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection keeps the Lanczos sum in its accurate range
        let s = (std::f64::consts::PI * x).sin();
        return (std::f64::consts::PI / s).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let tmp = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * tmp.ln() - tmp + lanczos_sum(x).ln()
}

/// `Γ(x)`; `None` at the poles.
pub fn gamma(x: f64) -> Option<f64> {
    if is_pole(x) || !x.is_finite() {
        return None;
    }
    if x < 0.5 {
        let s = (std::f64::consts::PI * x).sin();
        return Some(std::f64::consts::PI / (s * gamma(1.0 - x)?));
    }
    if x.fract() == 0.0 && x <= 171.0 {
        return Some((1..x as u64).map(|k| k as f64).product());
    }
    Some(ln_gamma(x).exp())
}

/// `p_{k,nu}(t)`.
pub fn p_eval(k: i64, nu: f64, t: f64) -> Result<f64, EvalError> {
    if k < 0 {
        return Err(EvalError::DomainError(format!(
            "p_{k} has a negative index and no realization"
        )));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(EvalError::DomainError(format!("t = {t} must be nonnegative")));
    }
    let x = nu + 1.0 + k as f64;
    if is_pole(x) {
        return Err(EvalError::DomainError(format!("Gamma({x}) has a pole")));
    }
    let e = 2.0 * k as f64 + nu;
    let k_factorial = gamma(k as f64 + 1.0).unwrap_or(f64::INFINITY);
    let g = gamma(x).ok_or_else(|| EvalError::DomainError(format!("Gamma({x}) has a pole")))?;
    if t == 0.0 {
        return if e > 0.0 {
            Ok(0.0)
        } else if e == 0.0 {
            Ok(1.0 / (g * k_factorial))
        } else {
            Err(EvalError::DomainError(format!("p_{k} is singular at t = 0 for nu = {nu}")))
        };
    }
    let direct = (t / 2.0).powf(e) / (g * k_factorial);
    if direct.is_normal() {
        return Ok(direct);
    }
    // out of range: work with logarithms
    let ln_power = e * (t / 2.0).ln() - ln_gamma(k as f64 + 1.0);
    if x > 0.0 {
        Ok((ln_power - ln_gamma(x)).exp())
    } else {
        Ok(ln_power.exp() / g)
    }
}

/// `p_{k+1}(t) / p_k(t)`.
fn p_ratio(k: i64, nu: f64, t: f64) -> f64 {
    let h = t / 2.0;
    h * h / ((k as f64 + 1.0) * (nu + k as f64 + 1.0))
}

/// Geometric growth rate of the stored tail, at least one.
fn tail_growth(magnitudes: &[(i64, f64)]) -> f64 {
    let nonzero: Vec<_> = magnitudes.iter().filter(|(_, m)| *m > 0.0).collect();
    nonzero
        .windows(2)
        .map(|w| (w[1].1 / w[0].1).powf(1.0 / (w[1].0 - w[0].0) as f64))
        .fold(1.0, f64::max)
}

/// `Σ_{k=v}^{T} a_k p_{k,nu}(t)` with the realization index taken from the
/// series. The bound is `|last term| ρ/(1 - ρ)` with
/// `ρ = g (t/2)² / ((T+1)(nu+T+1))`, `g` the coefficient growth of the tail,
/// and "last term" the larger of the final two (Kelvin-type series skip every
/// other index).
pub fn eval_series<C: Coefficient>(a: &FormalSeries<C>, t: f64) -> Result<EvalResult, EvalError> {
    let Some(v) = a.valuation().finite() else {
        return Ok(EvalResult {
            value: Complex64::new(0.0, 0.0),
            truncation_bound: 0.0,
        });
    };
    if v < 0 {
        return Err(EvalError::NegativeValuation(v));
    }
    let nu = a.nu();
    let top = a.truncation();
    let mut p = p_eval(v, nu, t)?;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut last_terms = [0.0f64; 2];
    let mut tail = Vec::new();
    for (k, c) in a.terms() {
        if k > top {
            break;
        }
        let c = c.to_c64();
        let term = c * p;
        sum += term;
        if k >= top - 1 {
            last_terms[(top - k) as usize] = term.norm();
        }
        if k >= top - 8 {
            tail.push((k, c.norm()));
        }
        p *= p_ratio(k, nu, t);
    }
    let rho = tail_growth(&tail) * p_ratio(top, nu, t);
    let last = last_terms[0].max(last_terms[1]);
    let bound = if last == 0.0 {
        0.0
    } else if rho < 1.0 && nu + top as f64 + 1.0 > 0.0 {
        last * rho / (1.0 - rho)
    } else {
        f64::INFINITY
    };
    Ok(EvalResult {
        value: sum,
        truncation_bound: bound,
    })
}

/// An atom evaluated from its defining series, summed until the terms fall
/// below double precision relative to the partial sum.
pub fn bessel_atom_eval<C: Coefficient>(atom: &SolutionAtom<C>, t: f64) -> Result<EvalResult, EvalError> {
    let rec = atom.float_recurrence()?;
    let nu = atom.nu;
    let mut k = rec.start;
    let mut p = p_eval(k, nu, t)?;
    let mut c = rec.first;
    let mut sum = Complex64::new(0.0, 0.0);
    for i in 0..100_000usize {
        let term = c * p;
        sum += term;
        let mut step_ratio = 1.0;
        for j in 0..rec.step {
            step_ratio *= p_ratio(k + j, nu, t);
        }
        let next_c = c * (rec.ratio)(i);
        let rho = if c.norm() > 0.0 {
            step_ratio * next_c.norm() / c.norm()
        } else {
            0.0
        };
        if rho < 0.5 && term.norm() <= 1e-17 * sum.norm().max(f64::MIN_POSITIVE) {
            return Ok(EvalResult {
                value: sum,
                truncation_bound: term.norm() * rho / (1.0 - rho),
            });
        }
        if term.norm() == 0.0 && rho == 0.0 {
            return Ok(EvalResult {
                value: sum,
                truncation_bound: 0.0,
            });
        }
        p *= step_ratio;
        c = next_c;
        k += rec.step;
    }
    Err(EvalError::DomainError(format!("series for {atom} did not settle at t = {t}")))
}

/// Atoms plus the residual series.
pub fn eval_expression<C: Coefficient>(e: &SolutionExpression<C>, t: f64) -> Result<EvalResult, EvalError> {
    let mut total = EvalResult {
        value: Complex64::new(0.0, 0.0),
        truncation_bound: 0.0,
    };
    let mut parts = Vec::new();
    for atom in &e.atoms {
        parts.push(bessel_atom_eval(atom, t)?);
    }
    if let Some(r) = &e.residual {
        parts.push(eval_series(&r.series, t)?);
    }
    for part in parts {
        total.value += part.value;
        total.truncation_bound += part.truncation_bound;
    }
    Ok(total)
}

/// `L_nu` on the series side: the modified left shift.
pub fn apply_lnu_series<C: Coefficient>(a: &FormalSeries<C>) -> FormalSeries<C> {
    a.modified_left_shift()
}

/// Default step of the finite-difference stencil.
pub const FD_STEP: f64 = 1e-4;

/// `(1/t)(t F')' - nu² F / t² = F'' + F'/t - nu² F/t²` by fourth-order
/// central differences.
pub fn apply_lnu_numeric(f: impl Fn(f64) -> Complex64, nu: f64, t: f64, h: f64) -> Complex64 {
    let (m2, m1, z, p1, p2) = (f(t - 2.0 * h), f(t - h), f(t), f(t + h), f(t + 2.0 * h));
    let d1 = (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h);
    let d2 = (-p2 + 16.0 * p1 - 30.0 * z + 16.0 * m1 - m2) / (12.0 * h * h);
    d2 + d1 / t - z * (nu * nu / (t * t))
}
