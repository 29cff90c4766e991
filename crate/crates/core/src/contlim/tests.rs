use super::*;

fn q(n: i64, d: i64) -> Scalar {
    Scalar::ratio(n, d)
}

#[test]
fn printed_targets_parse_as_monic_fourth_order() {
    for tag in TargetTag::ALL {
        let t = target(tag);
        assert!(t.residual.differentiate(Var::deriv(4)).is_one(), "{tag:?}");
        assert!(!t.top_derivative().contains_var(Var::deriv(4)));
    }
}

#[test]
fn scalings_hit_the_listed_constants_at_zero_step() {
    let r = standard_r();
    let at0 = |c: CaseTag| scaling(c).params_at(&Scalar::zero(), &r);
    assert_eq!(at0(CaseTag::DoubleRoot), [q(-16, 1), q(30, 1), q(-10, 1)]);
    assert_eq!(at0(CaseTag::ComplexPair), [q(-16, 1), q(56, 1), q(-14, 1)]);
    assert_eq!(at0(CaseTag::Linear), [q(-10, 1), q(30, 1), q(-10, 1)]);
    assert_eq!(at0(CaseTag::TwoRealRoots), [q(6, 1), q(0, 1), q(4, 1)]);
    assert_eq!(at0(CaseTag::Constant), [q(0, 1), q(6, 1), q(-4, 1)]);
}

#[test]
fn every_case_converges_to_its_target() {
    for case in CaseTag::ALL {
        let rep = run_case(case, 5).unwrap();
        assert!(rep.verdict, "case {}: {rep:?}", case.number());
        let last = rep.rungs.last().unwrap();
        assert!(last.deviation.abs() < 1e-2, "case {}: {last:?}", case.number());
    }
}

#[test]
fn slope_is_stable_under_ladder_doubling() {
    for case in [CaseTag::Linear, CaseTag::Constant, CaseTag::TwoRealRoots] {
        let a = run_case(case, 4).unwrap().slope;
        let b = run_case(case, 8).unwrap().slope;
        assert!((a - b).abs() < 0.05, "case {}: {a} vs {b}", case.number());
    }
}

#[test]
fn wrong_ratio_does_not_converge() {
    let mut rule = scaling(CaseTag::DoubleRoot).clone();
    rule.equation_ratio = (1, 1);
    let rep = convergence_order(&rule, &standard_r(), TestFunction::Sin, 0.5, &default_ladder(5)).unwrap();
    assert!(!rep.verdict && rep.slope.abs() < 0.2, "{rep:?}");
}

#[test]
fn zero_function_reduces_to_constant_terms() {
    let r = [q(1, 1), q(2, 1), q(0, 1)];
    for case in CaseTag::ALL {
        let rule = scaling(case);
        let d = discrete_residual_on_samples(rule, &r, TestFunction::Zero, 0.0, &q(1, 20)).unwrap();
        let cont = target(rule.target).eval(&vec![Scalar::zero(); 5], &r).unwrap();
        assert_eq!(d.continuum_residual, cont.to_f64());
        assert!(d.deviation.abs() < 0.2, "case {}: {d:?}", case.number());
    }
    let zero = [Scalar::zero(), Scalar::zero(), Scalar::zero()];
    let rule = scaling(CaseTag::Constant);
    let d = discrete_residual_on_samples(rule, &zero, TestFunction::Zero, 0.0, &q(1, 20)).unwrap();
    assert_eq!((d.deviation, d.continuum_residual), (0.0, 0.0));
    let err = convergence_order(rule, &zero, TestFunction::Zero, 0.0, &default_ladder(3)).unwrap_err();
    assert!(matches!(err, ContlimError::Underflow { .. }));
}

#[test]
fn taylor_samples_track_sine() {
    let jet = TestFunction::Sin.jet(0.7, JET_ORDER);
    for k in [-2i64, -1, 1, 2] {
        let v = taylor_value(&jet, &q(k, 10)).to_f64();
        assert!((v - (0.7 + k as f64 / 10.0).sin()).abs() < 1e-15);
    }
}

#[test]
fn shipped_integrals_are_conserved() {
    for tag in [TargetTag::PI2, TargetTag::PII2] {
        let [d1, d2] = conservation_residuals(tag, &continuum_integrals(tag).unwrap()).unwrap();
        assert!(d1.is_zero() && d2.is_zero(), "{tag:?}: {d1} / {d2}");
    }
    assert!(continuum_integrals(TargetTag::Linear4).is_err());
}

#[test]
fn printed_integrals_are_not_conserved() {
    let [d1, d2] = conservation_residuals(TargetTag::PI2, &printed_integrals(TargetTag::PI2).unwrap()).unwrap();
    assert_eq!(d1, parse("5/6*x''*x'''"));
    assert!(!d2.is_zero());
    let [d1, d2] = conservation_residuals(TargetTag::PII2, &printed_integrals(TargetTag::PII2).unwrap()).unwrap();
    assert!(!d1.is_zero() && !d2.is_zero());
}

#[test]
fn printed_integral_terms() {
    assert!(K1_PI2_PRINTED.contains("x''^2/12"));
    let k = parse(K1_PII2);
    let lead = parse("x'*x''' - x''^2/2");
    let rest = &k - &lead;
    assert!(!rest.contains_var(Var::deriv(3)));
}

#[test]
fn continuum_lagrangians() {
    for tag in TargetTag::ALL {
        let c = continuum_lagrangian_check(tag).unwrap();
        assert!(c.holds(), "{tag:?}: {c:?}");
        assert!(c.scale.is_one());
    }
    let printed = lagrangian_check(&parse(L_LINEAR_PRINTED), &RationalExpr::zero(), &target(TargetTag::Linear4).residual).unwrap();
    assert_eq!(printed.residual, parse("(r1 - r2)*x"));
}

#[test]
fn quadratic_lagrangian_gives_fourth_derivative() {
    let c = lagrangian_check(&parse("x''^2/2"), &RationalExpr::zero(), &parse("x''''")).unwrap();
    assert!(c.holds());
    assert_eq!(c.euler_lagrange, parse("x''''"));
}

#[test]
fn weighted_linear_lagrangian() {
    assert!(weighted_linear_check(L_WEIGHTED).unwrap().holds());
    let printed = weighted_linear_check(L_WEIGHTED_PRINTED).unwrap();
    assert_eq!(printed.residual, parse("(r1 - r2)*x"));
}

#[test]
fn total_derivative_basics() {
    assert_eq!(total_derivative(&parse("x^2")), parse("2*x*x'"));
    assert_eq!(total_derivative(&RationalExpr::var(Var::T)), RationalExpr::one());
    assert!(total_derivative(&parse("r1")).is_zero());
}

#[test]
fn reference_run_conserves_integrals() {
    let run = ode_reference_run(TargetTag::PI2, [1.0, 0.0, 0.0], SMALL_IC, 1e-3, 10_000).unwrap();
    assert!(run.relative_drift.iter().all(|d| *d < 1e-8), "{run:?}");
}

#[test]
fn reference_drift_is_fourth_order() {
    for tag in [TargetTag::PI2, TargetTag::PII2] {
        let ratio = drift_ratio(tag, [1.0, 0.0, 0.0], SMALL_IC, 0.2, 50).unwrap();
        assert!(ratio.iter().all(|r| (8.0..=32.0).contains(r)), "{tag:?}: {ratio:?}");
    }
}

#[test]
fn stationary_point_has_no_drift() {
    let run = ode_reference_run(TargetTag::PI2, [1.0, 1.0, 0.0], [0.0; 4], 0.01, 100).unwrap();
    assert_eq!(run.max_drift, [0.0, 0.0]);
}

#[test]
fn blowup_is_reported() {
    let err = ode_reference_run(TargetTag::PII2, [0.0, 0.0, 0.0], [3.0, 3.0, 3.0, 3.0], 0.01, 1000).unwrap_err();
    assert!(matches!(err, ContlimError::Blowup { .. }));
}

#[test]
fn collapse_of_first_invariant() {
    let r = standard_r();
    let h = q(1, 1000);
    let ts = collapse_times();
    for case in [CaseTag::DoubleRoot, CaseTag::ComplexPair] {
        let rep = invariant_collapse_check(case, &r, &h, &ts).unwrap();
        assert!(rep.i_relative_error.unwrap() < COLLAPSE_TOLERANCE, "case {}: {rep:?}", case.number());
        assert!(rep.i.r_squared > 0.999);
    }
    let rep = invariant_collapse_check(CaseTag::Linear, &r, &h, &ts).unwrap();
    assert!((rep.i.ratio + 2.0).abs() < 0.1, "{rep:?}");
    let rep = invariant_collapse_check(CaseTag::TwoRealRoots, &r, &h, &ts).unwrap();
    assert!(rep.i.r_squared > 0.999 && rep.j.r_squared > 0.999, "{rep:?}");
    assert!(invariant_collapse_check(CaseTag::Constant, &r, &h, &ts).is_err());
}

#[test]
fn characteristic_roots_converge() {
    let ladder: Vec<f64> = (0..5).map(|k| 0.1 / (1 << k) as f64).collect();
    let rc = case5_root_convergence(1.0, -2.0, &ladder);
    assert!((rc.slope - 1.0).abs() < 0.2, "{rc:?}");
    for m in continuum_char_roots(1.0, -2.0) {
        let v = m * m * m * m + m * m - 2.0;
        assert!(v.norm() < 1e-12);
    }
}
