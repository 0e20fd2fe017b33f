use crate::coefficient::Coefficient;
use crate::series::{FormalSeries, SeriesIndexMeta};

use super::poly::Polynomial;
use super::{FactoredPoly, RationalError, RationalOperator};

/// One summand of a partial-fraction decomposition.
#[derive(Debug, Clone, PartialEq)]
pub enum PartialFractionTerm<C> {
    /// `coeff * B / (B - root)^multiplicity`, the shape used by the transform table.
    BOverPow { root: C, multiplicity: usize, coeff: C },
    /// `coeff / (B - root)^multiplicity`.
    OneOverPow { root: C, multiplicity: usize, coeff: C },
    /// `coeff * B^power`, from the polynomial part of an improper rational.
    PolyPart { power: usize, coeff: C },
}

impl<C: Coefficient> PartialFractionTerm<C> {
    pub fn coeff(&self) -> &C {
        match self {
            PartialFractionTerm::BOverPow { coeff, .. }
            | PartialFractionTerm::OneOverPow { coeff, .. }
            | PartialFractionTerm::PolyPart { coeff, .. } => coeff,
        }
    }

    pub fn to_rational(&self) -> RationalOperator<C> {
        match self {
            PartialFractionTerm::BOverPow {
                root,
                multiplicity,
                coeff,
            } => RationalOperator {
                numerator: Polynomial::monomial(1, coeff.clone()),
                denominator: FactoredPoly::new(C::one(), vec![(root.clone(), *multiplicity)]),
            },
            PartialFractionTerm::OneOverPow {
                root,
                multiplicity,
                coeff,
            } => RationalOperator {
                numerator: Polynomial::constant(coeff.clone()),
                denominator: FactoredPoly::new(C::one(), vec![(root.clone(), *multiplicity)]),
            },
            PartialFractionTerm::PolyPart { power, coeff } => {
                RationalOperator::polynomial(Polynomial::monomial(*power, coeff.clone()))
            }
        }
    }

    /// Expansion in `p_k` by the binomial series
    /// `(B - r)^{-m} = Σ_{j≥0} C(j+m-1, m-1) r^j B^{-j-m}`.
    pub fn to_series(&self, meta: SeriesIndexMeta, truncation: i64) -> FormalSeries<C> {
        let (root, m, coeff, lift) = match self {
            PartialFractionTerm::BOverPow {
                root,
                multiplicity,
                coeff,
            } => (root, *multiplicity, coeff, 1),
            PartialFractionTerm::OneOverPow {
                root,
                multiplicity,
                coeff,
            } => (root, *multiplicity, coeff, 0),
            PartialFractionTerm::PolyPart { power, coeff } => {
                return FormalSeries::monomial(meta, -(*power as i64), coeff.clone(), truncation)
            }
        };
        let start = m as i64 - lift;
        let count = (truncation - start + 1).max(0);
        let mut coeffs = Vec::with_capacity(count as usize);
        // binomial(j+m-1, m-1) built incrementally
        let mut binom = C::one();
        let mut power = C::one();
        for j in 0..count {
            if j > 0 {
                binom = binom * C::from_ratio(j + m as i64 - 1, j);
                power = power * root.clone();
            }
            coeffs.push(coeff.clone() * binom.clone() * power.clone());
        }
        FormalSeries::from_coefficients(meta, start, coeffs, truncation)
    }
}

/// Coefficients `c_j` of `Σ_j c_j / (B - r_i)^j` for every root, plus the
/// polynomial quotient, for `num / den`.
fn decompose_plain<C: Coefficient>(
    num: &Polynomial<C>,
    den: &FactoredPoly<C>,
) -> (Polynomial<C>, Vec<(C, usize, C)>) {
    let expanded = den.expand();
    let (quotient, remainder) = num
        .div_rem(&expanded)
        .expect("denominator has a nonzero leading coefficient");
    let mut terms = Vec::new();
    let lead_inv = C::one() / den.leading().clone();
    for (i, (r, m)) in den.factors().iter().enumerate() {
        let m = *m;
        // g(h) = R(r + h) / (lead * Π_{k≠i} (r - r_k + h)^{m_k}), to order h^{m-1}
        let shifted = remainder.taylor_shift(r);
        let mut g: Vec<C> = (0..m).map(|s| shifted.coeff(s) * lead_inv.clone()).collect();
        for (k, (rk, mk)) in den.factors().iter().enumerate() {
            if k == i {
                continue;
            }
            let d = r.clone() - rk.clone();
            let d_inv = C::one() / d;
            // (d + h)^{-mk} = Σ_s C(s+mk-1, s) (-1)^s d^{-mk-s} h^s
            let mut factor = Vec::with_capacity(m);
            let mut binom = C::one();
            let mut power = d_inv.clone().powi(*mk as i64);
            for s in 0..m {
                if s > 0 {
                    binom = binom * C::from_ratio((s + mk - 1) as i64, s as i64);
                    power = power * d_inv.clone();
                }
                let sign = if s % 2 == 0 { C::one() } else { -C::one() };
                factor.push(sign * binom.clone() * power.clone());
            }
            g = truncated_product(&g, &factor, m);
        }
        for j in 1..=m {
            terms.push((r.clone(), j, g[m - j].clone()));
        }
    }
    (quotient, terms)
}

fn truncated_product<C: Coefficient>(a: &[C], b: &[C], len: usize) -> Vec<C> {
    (0..len)
        .map(|n| {
            (0..=n).fold(C::zero(), |acc, k| {
                acc + a.get(k).cloned().unwrap_or_else(C::zero)
                    * b.get(n - k).cloned().unwrap_or_else(C::zero)
            })
        })
        .collect()
}

fn poly_terms<C: Coefficient>(q: &Polynomial<C>, lift: usize) -> Vec<PartialFractionTerm<C>> {
    q.coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(k, c)| PartialFractionTerm::PolyPart {
            power: k + lift,
            coeff: c.clone(),
        })
        .collect()
}

/// Decomposes into table-friendly `c·B/(B - r)^j` terms whenever possible:
/// directly when `B` divides the numerator, otherwise by splitting off the
/// constant `N(0)/D(0)` when no root is zero. Falls back to `c/(B - r)^j`.
pub(super) fn decompose<C: Coefficient>(
    r: &RationalOperator<C>,
    eps: f64,
) -> Result<Vec<PartialFractionTerm<C>>, RationalError> {
    let den = &r.denominator;
    if !den.has_distinct_roots(eps) {
        return Err(RationalError::UnfactoredDenominator);
    }
    let num = &r.numerator;
    if num.is_zero() {
        return Ok(Vec::new());
    }
    let has_zero_root = den.factors().iter().any(|(root, _)| root.is_zero());

    let b_form = |n: &Polynomial<C>| {
        let (q, parts) = decompose_plain(&n.lower(1), den);
        let mut terms: Vec<_> = parts
            .into_iter()
            .map(|(root, j, coeff)| PartialFractionTerm::BOverPow {
                root,
                multiplicity: j,
                coeff,
            })
            .collect();
        terms.extend(poly_terms(&q, 1));
        terms
    };

    if num.coeff(0).is_zero() {
        return Ok(b_form(num));
    }
    if !has_zero_root {
        let constant = num.coeff(0) / den.eval(&C::zero());
        let rest = num - &den.expand().scale(&constant);
        let mut terms = vec![PartialFractionTerm::PolyPart {
            power: 0,
            coeff: constant,
        }];
        if !rest.is_zero() {
            terms.extend(b_form(&rest));
        }
        return Ok(terms);
    }
    let (q, parts) = decompose_plain(num, den);
    let mut terms: Vec<_> = parts
        .into_iter()
        .map(|(root, j, coeff)| PartialFractionTerm::OneOverPow {
            root,
            multiplicity: j,
            coeff,
        })
        .collect();
    terms.extend(poly_terms(&q, 0));
    Ok(terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficient::{Exact, Float};

    fn ex(n: i64) -> Exact {
        Exact::from_i64(n)
    }

    fn rational(num: &[i64], roots: &[(i64, usize)]) -> RationalOperator<Exact> {
        RationalOperator::new(
            Polynomial::new(num.iter().map(|&c| ex(c)).collect()),
            FactoredPoly::new(ex(1), roots.iter().map(|&(r, m)| (ex(r), m)).collect()),
        )
        .unwrap()
    }

    fn recombine(terms: &[PartialFractionTerm<Exact>]) -> RationalOperator<Exact> {
        terms
            .iter()
            .fold(RationalOperator::zero(), |acc, t| acc.add(&t.to_rational(), 0.0))
    }

    #[test]
    fn second_order_coefficients() {
        // (c1, c2, alpha, beta) = (1, 2, 1, 0):
        // [B^2 + 3B] / [(B-1)(B-2)] = -4 B/(B-1) + 5 B/(B-2)
        let r = rational(&[0, 3, 1], &[(1, 1), (2, 1)]);
        let terms = r.partial_fractions(0.0).unwrap();
        assert_eq!(
            terms,
            vec![
                PartialFractionTerm::BOverPow { root: ex(1), multiplicity: 1, coeff: ex(-4) },
                PartialFractionTerm::BOverPow { root: ex(2), multiplicity: 1, coeff: ex(5) },
            ]
        );
    }

    #[test]
    fn single_term() {
        let r = rational(&[0, 1], &[(3, 1)]);
        assert_eq!(
            r.partial_fractions(0.0).unwrap(),
            vec![PartialFractionTerm::BOverPow { root: ex(3), multiplicity: 1, coeff: ex(1) }]
        );
    }

    #[test]
    fn repeated_roots_recombine() {
        let r = rational(&[0, 4, -1, 7], &[(2, 3), (-1, 1)]);
        let terms = r.partial_fractions(0.0).unwrap();
        assert!(terms.iter().all(|t| matches!(t, PartialFractionTerm::BOverPow { .. })));
        assert_eq!(recombine(&terms).relative_difference(&r, 0.0), 0.0);
    }

    #[test]
    fn constant_split_when_numerator_not_divisible_by_b() {
        let r = rational(&[5, 1], &[(2, 1), (-3, 1)]);
        let terms = r.partial_fractions(0.0).unwrap();
        assert!(matches!(terms[0], PartialFractionTerm::PolyPart { power: 0, .. }));
        assert_eq!(recombine(&terms).relative_difference(&r, 0.0), 0.0);
    }

    #[test]
    fn zero_root_without_b_factor_uses_plain_terms() {
        let r = rational(&[1, 0, 0, 2], &[(0, 2), (1, 1)]);
        let terms = r.partial_fractions(0.0).unwrap();
        assert!(terms.iter().any(|t| matches!(t, PartialFractionTerm::OneOverPow { .. })));
        assert!(terms.iter().any(|t| matches!(t, PartialFractionTerm::PolyPart { power: 0, .. })));
        assert_eq!(recombine(&terms).relative_difference(&r, 0.0), 0.0);
    }

    #[test]
    fn improper_rational_keeps_polynomial_part() {
        let r = rational(&[0, 1, 0, 0, 1], &[(1, 1)]);
        let terms = r.partial_fractions(0.0).unwrap();
        assert!(terms.iter().any(|t| matches!(t, PartialFractionTerm::PolyPart { power: 3, .. })));
        assert_eq!(recombine(&terms).relative_difference(&r, 0.0), 0.0);
    }

    #[test]
    fn duplicate_factors_rejected() {
        let r = rational(&[0, 1], &[(1, 1), (1, 1)]);
        assert_eq!(r.partial_fractions(0.0), Err(RationalError::UnfactoredDenominator));
    }

    #[test]
    fn binomial_series_matches_division() {
        let meta = SeriesIndexMeta::default();
        let term = PartialFractionTerm::BOverPow { root: Exact::from_ratio(-2, 3), multiplicity: 3, coeff: ex(5) };
        let direct = term.to_rational().to_series(meta, 25).unwrap();
        assert_eq!(term.to_series(meta, 25), direct);
        let plain = PartialFractionTerm::OneOverPow { root: ex(4), multiplicity: 2, coeff: ex(-1) };
        assert_eq!(plain.to_series(meta, 25), plain.to_rational().to_series(meta, 25).unwrap());
    }

    #[test]
    fn fourth_order_residue_float() {
        // [a B^2 + ((8/M) a + b) B] / [(B + l^2)(B - mu)], l = 1, M = 1, a = 1, b = 0
        let (l2, m_inv, a, b) = (1.0, 1.0, 1.0, 0.0);
        let mu = l2 + 8.0 * m_inv;
        let r = RationalOperator::new(
            Polynomial::new(vec![Float::new(0.0, 0.0), Float::new(8.0 * m_inv * a + b, 0.0), Float::new(a, 0.0)]),
            FactoredPoly::new(Float::new(1.0, 0.0), vec![(Float::new(-l2, 0.0), 1), (Float::new(mu, 0.0), 1)]),
        )
        .unwrap();
        let terms = r.partial_fractions(1e-12).unwrap();
        let at_mu = terms
            .iter()
            .find_map(|t| match t {
                PartialFractionTerm::BOverPow { root, coeff, .. } if (root.re - mu).abs() < 1e-12 => Some(*coeff),
                _ => None,
            })
            .unwrap();
        // residue: ((l^2 + 16/M) a + b) / (2 l^2 + 8/M)
        let expected = ((l2 + 16.0 * m_inv) * a + b) / (2.0 * l2 + 8.0 * m_inv);
        assert!((at_mu.re - expected).abs() < 1e-14);
    }
}
