//! Property tests for the variational test: round trips through the
//! Euler-Lagrange operator and insensitivity to total differences.

use addvar_core::expr::{ClosedForm, Monomial, Poly, RationalExpr, Scalar, Var};
use addvar_core::lagrangian::{
    equation_key, euler_lagrange, euler_lagrange_closed, variational_test_equation, DiscreteLagrangian, Multiplier,
};
use proptest::prelude::*;

fn coeff() -> impl Strategy<Value = Scalar> {
    (-4i64..=4, 1i64..=3).prop_map(|(n, d)| Scalar::ratio(n, d))
}

fn univariate(v: Var, max_deg: u32) -> impl Strategy<Value = Poly> {
    prop::collection::vec(coeff(), (max_deg + 1) as usize).prop_map(move |cs| {
        Poly::from_terms(cs.into_iter().enumerate().map(|(k, c)| (Monomial::var(v, k as u32), c)).collect())
    })
}

fn bivariate(a: Var, b: Var, max_deg: u32) -> impl Strategy<Value = Poly> {
    let mut exps = Vec::new();
    for i in 0..=max_deg {
        for j in 0..=(max_deg - i) {
            exps.push((i, j));
        }
    }
    let n = exps.len();
    prop::collection::vec((coeff(), prop::bool::weighted(0.5)), n).prop_map(move |cs| {
        Poly::from_terms(
            cs.into_iter()
                .zip(exps.iter())
                .filter(|((_, keep), _)| *keep)
                .map(|((c, _), (i, j))| (Monomial::from_pairs(&[(a, *i), (b, *j)]), c))
                .collect(),
        )
    })
}

fn lambda() -> impl Strategy<Value = Scalar> {
    prop::sample::select(vec![Scalar::one(), Scalar::from_int(2), Scalar::ratio(1, 3), Scalar::from_int(-1)])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn euler_lagrange_round_trip(
        g in univariate(Var::XI, 3).prop_filter("g nonzero", |g| !g.is_zero()),
        v in bivariate(Var::XI, Var::ETA, 4),
        l in lambda(),
    ) {
        let lag = DiscreteLagrangian::from_potential(
            RationalExpr::from_poly(g),
            Multiplier::numeric(l.clone()),
            ClosedForm::from(RationalExpr::from_poly(v)),
        );
        let eq = euler_lagrange(&lag).unwrap().expression();
        let report = variational_test_equation(&eq);
        prop_assert!(report.is_variational(), "{:?}", report.message);
        let want = RationalExpr::scalar(l);
        prop_assert!(report.signs.iter().any(|o| o.passed && o.lambda.value == want));
        let s = report.structured.unwrap();
        prop_assert_eq!(equation_key(&s.expression()), equation_key(&eq));
        let lag2 = report.lagrangian.unwrap();
        prop_assert!(lag2.gradient_is_closed());
        if let Some(vc) = &lag2.v_closed {
            prop_assert_eq!(vc.differentiate(Var::ETA), lag2.v_eta.clone());
            prop_assert_eq!(vc.differentiate(Var::XI), lag2.v_xi.clone());
        }
    }

    #[test]
    fn total_difference_is_invisible(
        g in univariate(Var::shift(1), 2).prop_filter("g nonzero", |g| !g.is_zero()),
        v in bivariate(Var::shift(1), Var::shift(0), 3),
        f in bivariate(Var::shift(1), Var::shift(0), 3),
    ) {
        let x0x2 = Poly::var(Var::shift(0)).mul(&Poly::var(Var::shift(2)));
        let l = RationalExpr::from_poly(g.mul(&x0x2).add(&v));
        let shifted = f.rename(&|u| match u.shift_offset() {
            Some(k) => Var::shift(k + 1),
            None => u,
        });
        let l2 = &l + &RationalExpr::from_poly(shifted.sub(&f));
        let one = Multiplier::one();
        let e1 = euler_lagrange_closed(&ClosedForm::from(l), &one).unwrap();
        let e2 = euler_lagrange_closed(&ClosedForm::from(l2), &one).unwrap();
        prop_assert_eq!(e1, e2);
    }
}
