//! Polynomial root finding with multiplicities.
//!
//! All roots are first approximated simultaneously with the Aberth–Ehrlich
//! iteration in double precision. Approximations are then grouped into
//! clusters, and a cluster of size `m` is accepted as one root of
//! multiplicity `m` only if the Taylor coefficients of orders `0..m` at its
//! center are negligible. Accepted centers are polished by Newton's method
//! on the `(m-1)`-th derivative, where the root is simple.
//!
//! Exact coefficient fields reconstruct each root as a rational and confirm
//! it, together with its multiplicity, by exact division.

use num_complex::Complex64;

use super::poly::Polynomial;
use super::{FactoredPoly, RationalError};
use crate::coefficient::Coefficient;

const MACHINE_EPS: f64 = f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootOptions {
    /// Two approximations closer than this (relative) may be one multiple root.
    pub cluster_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions {
            cluster_tolerance: 1e-8,
            max_iterations: 1000,
        }
    }
}

/// Factors `p` as `lead * Π (B - r)^m` over the coefficient field.
pub fn find_roots<C: Coefficient>(
    p: &Polynomial<C>,
    options: &RootOptions,
) -> Result<FactoredPoly<C>, RationalError> {
    let degree = p.degree().ok_or(RationalError::DegreeZero)?;
    if degree == 0 {
        return Err(RationalError::DegreeZero);
    }
    let lead = p.leading().cloned().ok_or(RationalError::DegreeZero)?;
    let zeros = p.low_order_zeros();
    let rest = p.lower(zeros);
    let mut factors: Vec<(C, usize)> = Vec::new();
    if zeros > 0 {
        factors.push((C::zero(), zeros));
    }
    if rest.degree().unwrap_or(0) > 0 {
        let approx = aberth(&rest.to_c64(), options.max_iterations)?;
        let clusters = cluster_roots(&rest.to_c64(), &approx, options.cluster_tolerance);
        if C::EXACT {
            factors.extend(confirm_exact(&rest, &clusters)?);
        } else {
            for (z, m) in clusters {
                let r = C::approximate(z).ok_or(RationalError::NonConvergence {
                    iterations: options.max_iterations,
                })?;
                factors.push((r, m));
            }
        }
    }
    Ok(FactoredPoly::new(lead, factors))
}

fn confirm_exact<C: Coefficient>(
    p: &Polynomial<C>,
    clusters: &[(Complex64, usize)],
) -> Result<Vec<(C, usize)>, RationalError> {
    let mut remaining = p.clone();
    let mut found: Vec<(C, usize)> = Vec::new();
    for (z, _) in clusters {
        let r = C::approximate(*z)
            .ok_or_else(|| RationalError::NonRationalRoot(format!("{z}")))?;
        if found.iter().any(|(s, _)| *s == r) {
            continue;
        }
        let linear = Polynomial::new(vec![-r.clone(), C::one()]);
        let mut multiplicity = 0;
        while let Some((q, rem)) = remaining.div_rem(&linear) {
            if !rem.is_zero() || remaining.degree().unwrap_or(0) == 0 {
                break;
            }
            remaining = q;
            multiplicity += 1;
        }
        if multiplicity == 0 {
            return Err(RationalError::NonRationalRoot(format!("{z}")));
        }
        found.push((r, multiplicity));
    }
    if remaining.degree().unwrap_or(0) > 0 {
        return Err(RationalError::NonRationalRoot(format!(
            "{} roots are not rational",
            remaining.degree().unwrap_or(0)
        )));
    }
    Ok(found)
}

/// `(p(z), p'(z))` by Horner's scheme.
fn eval_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// `Σ |c_k| |z|^k`, the rounding scale of `p(z)`.
fn magnitude(coeffs: &[Complex64], z: Complex64) -> f64 {
    let r = z.norm();
    coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
}

/// Simultaneous approximation of all roots. `coeffs` must have a nonzero
/// constant term and degree at least one.
pub(crate) fn aberth(coeffs: &[Complex64], max_iterations: usize) -> Result<Vec<Complex64>, RationalError> {
    let n = coeffs.len() - 1;
    if n == 1 {
        return Ok(vec![-coeffs[0] / coeffs[1]]);
    }
    let lead = coeffs[n];
    // Start on a circle with the geometric mean of the root moduli as radius.
    let radius = (coeffs[0] / lead).norm().powf(1.0 / n as f64).max(1e-3);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let angle = std::f64::consts::TAU * k as f64 / n as f64 + 0.4;
            Complex64::from_polar(radius, angle)
        })
        .collect();
    let mut done = vec![false; n];
    for _ in 0..max_iterations {
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (p, dp) = eval_with_derivative(coeffs, z[i]);
            if p.norm() <= 4.0 * MACHINE_EPS * magnitude(coeffs, z[i]) {
                done[i] = true;
                continue;
            }
            let ratio = if dp.norm() == 0.0 {
                Complex64::new(1e-3 * (1.0 + z[i].norm()), 0.0)
            } else {
                p / dp
            };
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let d = z[i] - z[j];
                    if d.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !step.re.is_finite() || !step.im.is_finite() {
                continue;
            }
            z[i] -= step;
            if step.norm() <= 2.0 * MACHINE_EPS * z[i].norm() {
                done[i] = true;
            }
        }
        if done.iter().all(|&d| d) {
            return Ok(z);
        }
    }
    Err(RationalError::NonConvergence {
        iterations: max_iterations,
    })
}

/// Taylor coefficients of `p` at `c` up to order `upto` together with their
/// rounding scales `Σ_k |a_k| C(k, j) |c|^{k-j}`.
fn taylor_at(coeffs: &[Complex64], c: Complex64, upto: usize) -> Vec<(Complex64, f64)> {
    let mut work: Vec<Complex64> = coeffs.to_vec();
    let mut scale: Vec<f64> = coeffs.iter().map(|x| x.norm()).collect();
    let r = c.norm();
    let n = work.len();
    let mut out = Vec::with_capacity(upto + 1);
    for j in 0..n.min(upto + 1) {
        for k in (j..n - 1).rev() {
            work[k] = work[k] + work[k + 1] * c;
            scale[k] += scale[k + 1] * r;
        }
        out.push((work[j], scale[j]));
    }
    out
}

fn is_multiple_root(coeffs: &[Complex64], c: Complex64, m: usize, tol: f64) -> bool {
    let taylor = taylor_at(coeffs, c, m);
    if taylor.len() <= m {
        return false;
    }
    let floor = 64.0 * MACHINE_EPS;
    let lower_vanish = (0..m).all(|j| {
        let (t, s) = taylor[j];
        t.norm() <= tol.powi((m - j) as i32).max(floor) * s
    });
    let (tm, sm) = taylor[m];
    lower_vanish && tm.norm() > tol.max(floor) * sm
}

/// Newton on the `(m-1)`-th derivative, where an `m`-fold root is simple.
fn polish(coeffs: &[Complex64], start: Complex64, m: usize) -> Complex64 {
    let mut d: Vec<Complex64> = coeffs.to_vec();
    for _ in 1..m {
        d = d
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * k as f64)
            .collect();
    }
    let mut z = start;
    let mut best = (eval_with_derivative(&d, z).0.norm(), z);
    for _ in 0..8 {
        let (p, dp) = eval_with_derivative(&d, z);
        if dp.norm() == 0.0 {
            break;
        }
        z -= p / dp;
        let value = eval_with_derivative(&d, z).0.norm();
        if value < best.0 {
            best = (value, z);
        }
    }
    best.1
}

fn group_by_distance(points: &[Complex64], radius: f64) -> Vec<Vec<Complex64>> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        parent[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            let scale = 1f64.max(points[i].norm()).max(points[j].norm());
            if (points[i] - points[j]).norm() <= radius * scale {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: Vec<(usize, Vec<Complex64>)> = Vec::new();
    for (i, &z) in points.iter().enumerate() {
        let root = find(&mut parent, i);
        match groups.iter_mut().find(|(r, _)| *r == root) {
            Some((_, g)) => g.push(z),
            None => groups.push((root, vec![z])),
        }
    }
    groups.into_iter().map(|(_, g)| g).collect()
}

fn resolve_group(
    coeffs: &[Complex64],
    group: Vec<Complex64>,
    radius: f64,
    tol: f64,
    out: &mut Vec<(Complex64, usize)>,
) {
    let m = group.len();
    if m == 1 {
        out.push((polish(coeffs, group[0], 1), 1));
        return;
    }
    let mean = group.iter().sum::<Complex64>() / m as f64;
    let center = polish(coeffs, mean, m);
    if is_multiple_root(coeffs, center, m, tol) {
        out.push((center, m));
        return;
    }
    if radius < 1e-14 {
        out.extend(group.into_iter().map(|z| (polish(coeffs, z, 1), 1)));
        return;
    }
    for sub in group_by_distance(&group, radius / 10.0) {
        resolve_group(coeffs, sub, radius / 10.0, tol, out);
    }
}

/// Groups approximate roots into `(center, multiplicity)` pairs.
pub(crate) fn cluster_roots(
    coeffs: &[Complex64],
    approx: &[Complex64],
    tol: f64,
) -> Vec<(Complex64, usize)> {
    let radius = 1e-2;
    let mut out = Vec::new();
    for group in group_by_distance(approx, radius) {
        resolve_group(coeffs, group, radius, tol, &mut out);
    }
    out.sort_by(|a, b| {
        a.0.re
            .total_cmp(&b.0.re)
            .then(a.0.im.total_cmp(&b.0.im))
    });
    out
}
