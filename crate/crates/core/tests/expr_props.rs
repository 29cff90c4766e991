//! Property tests for the rational-function kernel.

use addvar_core::expr::{parse_expr, Context, Poly, RationalExpr, Scalar, Var};
use proptest::prelude::*;

fn vars() -> Vec<Var> {
    vec![Var::shift(-1), Var::shift(0), Var::shift(1), Var::param("pa")]
}

fn poly_strategy() -> impl Strategy<Value = Poly> {
    prop::collection::vec((-5i64..=5, 1i64..=3, prop::collection::vec(0u32..=2, 4)), 1..5).prop_map(|ts| {
        let vs = vars();
        let mut p = Poly::zero();
        for (n, d, es) in ts {
            let mut t = Poly::constant(Scalar::ratio(n, d));
            for (v, e) in vs.iter().zip(es) {
                t = t.mul(&Poly::var(*v).pow(e));
            }
            p = p.add(&t);
        }
        p
    })
}

fn rat_strategy() -> impl Strategy<Value = RationalExpr> {
    (poly_strategy(), poly_strategy())
        .prop_filter("nonzero denominator", |(_, d)| !d.is_zero())
        .prop_map(|(n, d)| RationalExpr::new(n, d).unwrap())
}

fn point(seed: &[f64; 4]) -> impl Fn(Var) -> Option<f64> + '_ {
    move |v| vars().iter().position(|w| *w == v).map(|i| seed[i])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(a in rat_strategy(), b in rat_strategy(), c in rat_strategy()) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn normalization_is_idempotent(a in rat_strategy()) {
        let again = RationalExpr::new(a.num().clone(), a.den().clone()).unwrap();
        prop_assert_eq!(again, a);
    }

    #[test]
    fn product_rule(a in rat_strategy(), b in rat_strategy()) {
        let v = Var::shift(0);
        let lhs = (&a * &b).differentiate(v);
        let rhs = &(&a.differentiate(v) * &b) + &(&a * &b.differentiate(v));
        prop_assert!((&lhs - &rhs).is_zero());
    }

    #[test]
    fn derivative_matches_finite_difference(a in rat_strategy(), pt in prop::array::uniform4(0.3f64..1.7)) {
        let v = Var::shift(0);
        let d = a.differentiate(v);
        let f = |x0: f64| {
            let mut q = pt;
            q[1] = x0;
            let r = a.eval_f64(&point(&q));
            r
        };
        let h = 1e-5;
        if let (Ok(exact), Ok(fp), Ok(fm)) = (d.eval_f64(&point(&pt)), f(pt[1] + h), f(pt[1] - h)) {
            let den_here = a.den().eval_f64(&point(&pt)).unwrap_or(0.0).abs();
            prop_assume!(den_here > 1e-2);
            let fd = (fp - fm) / (2.0 * h);
            let scale = exact.abs().max(1.0);
            prop_assert!((fd - exact).abs() / scale < 1e-6, "fd {} exact {}", fd, exact);
        }
    }

    #[test]
    fn parse_print_roundtrip(a in rat_strategy()) {
        let ctx = Context::new(&["pa"]);
        let printed = a.to_string();
        let back = parse_expr(&printed, &ctx).unwrap();
        prop_assert_eq!(&back, &a);
        prop_assert_eq!(back.to_string(), printed);
    }
}

#[test]
fn corpus_roundtrip() {
    let ctx = Context::new(&["alpha", "beta", "gamma", "mu", "lambda", "a02", "a11", "a20", "c1", "c0", "cm1", "cm2", "b", "kappa", "r1", "r2", "r3"]);
    let corpus = [
        "(x[1]^2-1)*x[2] + (x[-1]^2-1)*x[-2] + x[0]*(x[1]+x[-1])^2 + gamma*(x[1]+x[-1]) + (alpha*x[0]+beta)/(x[0]^2-1)",
        "x[1]^2*x[2] + x[-1]^2*x[-2] + x[0]*(x[1]+x[-1])^2 + gamma*(x[1]+x[-1]) + alpha/x[0]^2 + beta/x[0]",
        "(x[1]^2+1)*x[2] + (x[-1]^2+1)*x[-2] + x[0]*(x[1]+x[-1])^2 + gamma*(x[1]+x[-1]) + (alpha+beta*x[0])/(x[0]^2+1)",
        "x[1]*x[2] + x[-1]*x[-2] + x[0]*(x[0]+2*x[1]+2*x[-1]) + (x[1]+x[-1])^2 - x[1]*x[-1] + gamma*(x[0]+x[1]+x[-1]) + alpha/x[0] + beta",
        "x[2] + x[-2] + gamma*(x[1]+x[-1]) + beta*x[0] + alpha",
        "x[-1]^2*x[-2] + x[1]^2*x[2] + 1/(1-x[0]) + x[0]*(a02*x[-1]^2 + a11*x[-1]*x[1] + a20*x[1]^2)",
        "x[2] + c1*x[1] + c0*x[0] + cm1*x[-1] + cm2*x[-2] + b",
        "x[1]*x[2] + x[-1]*x[1] + x[-1]*x[-2] - x[1]/(x[0]^2+x[1]^2) + x[-1]/(x[0]^2+x[-1]^2)",
        "-(3*x[0]^2*(x[0]^2-1)*x[-1]*x[1] - mu)/((x[0]^2-1)*x[1]^3)",
        "x'''' + 10*x*x'' + r1/2*x'' + 5*x'^2 + 10*x^3 + 3/2*r1*x^2 + 2*r2*x + r3",
        "x'''' - (10*x^2 + r1)*x'' + 6*x^5 + 2*r1*x^3 - 10*x*x'^2 + r2",
    ];
    for src in corpus {
        let e = parse_expr(src, &ctx).unwrap();
        let back = parse_expr(&e.to_string(), &ctx).unwrap();
        assert_eq!(back, e, "{}", src);
    }
}
