use opcalc_core::{
    solve, Coefficient, EquationSpec, Exact, FormalSeries, IcConvention, SeriesIndexMeta, SolveOptions,
};
use proptest::prelude::*;

const T: i64 = 12;

fn ex(n: i64) -> Exact {
    Exact::from_i64(n)
}

fn series(start: i64, coeffs: &[(i64, i64)]) -> FormalSeries<Exact> {
    let meta = SeriesIndexMeta::new(0.0).unwrap();
    let c = coeffs.iter().map(|&(n, d)| Exact::from_ratio(n, d)).collect();
    FormalSeries::from_coefficients(meta, start, c, T)
}

fn arb_series() -> impl Strategy<Value = FormalSeries<Exact>> {
    (0i64..3, prop::collection::vec((-6i64..7, 1i64..5), 1..6)).prop_map(|(start, c)| series(start, &c))
}

/// Equal on every index both operands determine.
fn agree(a: &FormalSeries<Exact>, b: &FormalSeries<Exact>) -> bool {
    let hi = a.truncation().min(b.truncation());
    (-4..=hi).all(|n| a.coefficient(n).unwrap() == b.coefficient(n).unwrap())
}

/// `Π (B - r)` for distinct nonzero integer roots.
fn operator_from_roots(roots: &[i64]) -> Vec<Exact> {
    let mut q = vec![ex(1)];
    for &r in roots {
        let mut next = vec![ex(0); q.len() + 1];
        for (i, c) in q.iter().enumerate() {
            next[i + 1] = next[i + 1].clone() + c.clone();
            next[i] = next[i].clone() - c.clone() * ex(r);
        }
        q = next;
    }
    q
}

fn arb_roots() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::btree_set(prop_oneof![-5i64..0, 1i64..6], 1..4).prop_map(|s| s.into_iter().collect())
}

fn options() -> SolveOptions {
    SolveOptions {
        truncation: 16,
        ..SolveOptions::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn addition_is_associative_and_commutative(a in arb_series(), b in arb_series(), c in arb_series()) {
        let left = a.add(&b).unwrap().add(&c).unwrap();
        let right = a.add(&b.add(&c).unwrap()).unwrap();
        prop_assert!(agree(&left, &right));
        prop_assert!(agree(&a.add(&b).unwrap(), &b.add(&a).unwrap()));
    }

    #[test]
    fn multiplication_distributes(a in arb_series(), b in arb_series(), c in arb_series()) {
        let left = a.mul(&b.add(&c).unwrap()).unwrap();
        let right = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
        prop_assert!(agree(&left, &right));
        prop_assert!(agree(&a.mul(&b).unwrap(), &b.mul(&a).unwrap()));
    }

    #[test]
    fn nonzero_series_are_invertible(a in arb_series()) {
        prop_assume!(!a.is_zero());
        let meta = a.meta();
        let one = FormalSeries::monomial(meta, 0, ex(1), T);
        let product = a.mul(&a.invert().unwrap()).unwrap();
        prop_assert!(agree(&product, &one), "{:?}", product);
    }

    #[test]
    fn solve_is_linear_in_initial_data(
        roots in arb_roots(),
        g in prop::collection::vec(-4i64..5, 3),
        h in prop::collection::vec(-4i64..5, 3),
    ) {
        let q = operator_from_roots(&roots);
        let k = roots.len();
        let spec = |data: Vec<Exact>| EquationSpec::homogeneous(0.0, q.clone(), data);
        let gs: Vec<Exact> = g[..k].iter().map(|&x| ex(x)).collect();
        let hs: Vec<Exact> = h[..k].iter().map(|&x| ex(x)).collect();
        let sum: Vec<Exact> = gs.iter().zip(&hs).map(|(a, b)| a.clone() + b.clone()).collect();
        let yg = solve(&spec(gs), &options()).unwrap().series;
        let yh = solve(&spec(hs), &options()).unwrap().series;
        let ysum = solve(&spec(sum), &options()).unwrap().series;
        prop_assert!(agree(&yg.add(&yh).unwrap(), &ysum));
    }

    #[test]
    fn initial_data_round_trip(
        roots in arb_roots(),
        g in prop::collection::vec(-4i64..5, 3),
        literal in any::<bool>(),
    ) {
        let k = roots.len();
        let mut spec = EquationSpec::homogeneous(0.0, operator_from_roots(&roots), g[..k].iter().map(|&x| ex(x)).collect());
        if literal {
            spec.ic_convention = IcConvention::LeadingCoefficients;
        }
        let report = solve(&spec, &options()).unwrap();
        prop_assert_eq!(report.verification.residual_norm, 0.0);
        let leading = spec.leading_coefficients();
        for (i, a) in leading.iter().enumerate() {
            prop_assert_eq!(&report.series.coefficient(i as i64).unwrap(), a);
        }
        if literal {
            prop_assert_eq!(leading, spec.initial_conditions.clone());
        }
    }
}
