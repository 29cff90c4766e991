use super::*;
use crate::canonical::CanonicalModel;
use crate::family::FamilyParams;

fn model(tag: CaseTag, a: (i64, i64), b: (i64, i64), g: (i64, i64)) -> CanonicalModel {
    let r = |(n, d): (i64, i64)| RationalExpr::ratio(n, d);
    canonical_model(tag, &r(a), &r(b), &r(g)).unwrap()
}

fn q(n: i64, d: i64) -> Scalar {
    Scalar::ratio(n, d)
}

#[test]
fn linear_map_reflects() {
    let m = model(CaseTag::Constant, (0, 1), (0, 1), (0, 1));
    let map = AdditiveMap::new(&m.equation).unwrap();
    assert_eq!(map.step_forward(&[0.0, 0.0, 0.0, 1.0]).unwrap(), [-1.0, 0.0, 0.0, 0.0]);
}

#[test]
fn exact_round_trip() {
    for tag in CaseTag::ALL {
        let m = model(tag, (3, 2), (-1, 3), (2, 5));
        let map = AdditiveMap::new(&m.equation).unwrap();
        let s0 = [q(1, 3), q(-2, 5), q(3, 7), q(1, 2)];
        let fwd = iterate_exact(&map, s0.clone(), 50, true);
        assert!(fwd.complete(), "case {}: {:?}", tag.number(), fwd.diagnostic);
        assert!(fwd.is_shift_consistent());
        let back = iterate_exact(&map, fwd.states.last().unwrap().clone(), 50, false);
        assert_eq!(back.states.last().unwrap(), &s0, "case {}", tag.number());
    }
}

#[test]
fn float_round_trip_linear() {
    let m = model(CaseTag::Constant, (1, 2), (1, 3), (-1, 4));
    let map = AdditiveMap::new(&m.equation).unwrap();
    let s0 = [0.1, -0.2, 0.3, 0.05];
    let fwd = iterate(&map, s0, 100, true);
    let back = iterate(&map, *fwd.states.last().unwrap(), 100, false);
    let end = back.states.last().unwrap();
    let err = (0..4).map(|i| (end[i] - s0[i]).abs()).fold(0.0, f64::max);
    assert!(err < 1e-10, "{err}");
}

#[test]
fn singular_steps_are_reported() {
    let m = model(CaseTag::TwoRealRoots, (2, 1), (0, 1), (-1, 1));
    let map = AdditiveMap::new(&m.equation).unwrap();
    assert!(matches!(map.step_forward(&[1.0, 0.2, 0.1, 0.3]), Err(StepError::Singular { .. })));
    assert!(matches!(map.step_backward(&[0.3, 0.2, 0.1, -1.0]), Err(StepError::Singular { .. })));
    let o = iterate(&map, [1.0, 0.2, 0.1, 0.3], 5, true);
    assert_eq!(o.states.len(), 1);
    assert!(o.diagnostic.is_some());
}

#[test]
fn zero_steps() {
    let m = model(CaseTag::Constant, (0, 1), (0, 1), (0, 1));
    let map = AdditiveMap::new(&m.equation).unwrap();
    let o = iterate(&map, [1.0, 2.0, 3.0, 4.0], 0, true);
    assert_eq!(o.states, vec![[1.0, 2.0, 3.0, 4.0]]);
}

#[test]
fn symbolic_jacobian_matches_formula() {
    let p = FamilyParams::symbolic();
    for lambda in [Multiplier::one(), Multiplier::numeric(q(2, 3)), Multiplier::symbolic(RationalExpr::param("c"))] {
        let eq = StructuredEquation::new(p.g(), lambda.clone(), p.m(), p.n());
        let d = &jacobian_det_symbolic(&eq) - &jacobian_formula_symbolic(&eq);
        assert!(lambda.is_zero(&d));
    }
}

#[test]
fn unit_jacobian_when_g_values_agree() {
    let m = model(CaseTag::TwoRealRoots, (2, 1), (0, 1), (-1, 1));
    let map = AdditiveMap::new(&m.equation).unwrap();
    let d = map.jacobian_det(&[0.4, 0.1, -0.4, 0.2]).unwrap();
    assert!((d - 1.0).abs() < 1e-12, "{d}");
}

#[test]
fn numeric_jacobian_matches_finite_differences() {
    for tag in CaseTag::ALL {
        let m = model(tag, (3, 2), (-1, 3), (2, 5));
        let map = AdditiveMap::new(&m.equation).unwrap();
        let s = [0.7, -0.4, 0.3, 0.5];
        let h = 1e-6;
        let mut jac = [[0.0; 4]; 4];
        for j in 0..4 {
            let (mut sp, mut sm) = (s, s);
            sp[j] += h;
            sm[j] -= h;
            let (fp, fm) = (map.step_forward(&sp).unwrap(), map.step_forward(&sm).unwrap());
            for i in 0..4 {
                jac[i][j] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        let fd = det4_f64(&jac);
        let an = map.jacobian_det(&s).unwrap();
        assert!(((fd - an) / an).abs() < 1e-6, "case {}: {fd} vs {an}", tag.number());
        assert!(((an - map.jacobian_formula(&s)) / an).abs() < 1e-12);
    }
}

#[test]
fn volume_is_preserved_for_unit_lambda() {
    let map = first_case_map(&q(2, 1), &q(0, 1), &q(-1, 1), &Scalar::one());
    let o = iterate(&map, FIGURE1_INITIAL, 1000, true);
    let v = volume_series(&o, &map).unwrap();
    assert!(v.max_relative_error < 1e-9, "{}", v.max_relative_error);
}

#[test]
fn volume_contracts_by_lambda_squared() {
    let lam = q(999, 1000);
    let map = first_case_map(&q(2, 1), &q(0, 1), &q(-1, 1), &lam);
    let o = iterate(&map, FIGURE1_INITIAL, 1000, true);
    let v = volume_series(&o, &map).unwrap();
    let ratio = (v.log_volume[1000] - v.log_volume[0]).exp();
    let expect = 0.999f64.powi(2000);
    assert!(((ratio - expect) / expect).abs() < 1e-6, "{ratio} vs {expect}");
}

#[test]
fn constant_g_volume_is_exact_power() {
    let m = model(CaseTag::Constant, (1, 1), (1, 2), (1, 3));
    let map = AdditiveMap::new(&m.equation).unwrap();
    let o = iterate(&map, [0.1, 0.2, 0.3, 0.4], 50, true);
    let v = volume_series(&o, &map).unwrap();
    assert!(v.log_volume.iter().all(|x| x.abs() < 1e-12));
}

#[test]
fn exact_invariants_do_not_drift() {
    let m = model(CaseTag::TwoRealRoots, (2, 3), (1, 5), (-1, 2));
    let map = AdditiveMap::new(&m.equation).unwrap();
    let o = iterate_exact(&map, [q(1, 3), q(1, 4), q(-1, 5), q(1, 7)], 100, true);
    assert!(o.complete(), "{:?}", o.diagnostic);
    let d = drift_report_exact(&o, &m.invariants).unwrap();
    assert_eq!(d.exact_zero, Some(true));
}

#[test]
fn float_invariant_drift_is_round_off() {
    let m = model(CaseTag::TwoRealRoots, (2, 1), (0, 1), (-1, 1));
    let map = AdditiveMap::new(&m.equation).unwrap();
    let o = iterate(&map, FIGURE1_INITIAL, 10_000, true);
    assert!(o.complete());
    let d = drift_report(&o, &m.invariants).unwrap();
    assert!(d.i_max_relative < 1e-8 && d.j_max_relative < 1e-8, "{d:?}");
}

#[test]
fn constant_invariant_has_no_drift() {
    let m = model(CaseTag::Constant, (0, 1), (0, 1), (0, 1));
    let map = AdditiveMap::new(&m.equation).unwrap();
    let o = iterate(&map, [0.1, 0.2, 0.3, 0.4], 20, true);
    let one = InvariantPair::new(RationalExpr::one(), RationalExpr::int(3));
    let d = drift_report(&o, &one).unwrap();
    assert_eq!((d.i_max_relative, d.j_max_relative), (0.0, 0.0));
}

#[test]
fn dissipation_figure() {
    let ((_, cons), (_, diss)) = figure1(FIGURE1_STEPS);
    assert!(cons.complete && diss.complete);
    assert!(diss.tail_max_abs < 1e-3, "{diss:?}");
    assert!(cons.tail_max_abs > 1e-3 && cons.min_pole_distance > 0.5, "{cons:?}");
}
