//! Jacobi identity, map preservation and involution of the invariants for
//! every canonical form with symbolic parameters.

use std::time::Instant;

use addvar_core::canonical::{canonical_model, CaseTag};
use addvar_core::expr::RationalExpr;
use addvar_core::family::CheckMode;
use addvar_core::poisson::{check_involution, check_jacobi, check_preservation};

fn model(tag: CaseTag) -> addvar_core::canonical::CanonicalModel {
    let [a, b, g] = ["alpha", "beta", "gamma"].map(RationalExpr::param);
    canonical_model(tag, &a, &b, &g).unwrap()
}

#[test]
fn jacobi_and_preservation() {
    for tag in CaseTag::ALL {
        let m = model(tag);
        assert!(check_jacobi(&m.poisson).iter().all(|(_, r)| r.is_zero()), "case {}", tag.number());
        let bad: Vec<_> = check_preservation(&m.poisson, &m.equation).into_iter().filter(|(_, r)| !r.is_zero()).collect();
        assert!(bad.is_empty(), "case {}: {:?}", tag.number(), bad);
    }
}

#[test]
fn invariants_are_in_involution() {
    for tag in CaseTag::ALL {
        let t = Instant::now();
        let m = model(tag);
        let c = check_involution(&m.invariants.i, &m.invariants.j, &m.poisson, CheckMode::Auto);
        eprintln!("case {}: {:?} in {:?}", tag.number(), c, t.elapsed());
        assert!(c.holds(), "case {}", tag.number());
    }
}

#[test]
fn involution_detects_non_commuting_pairs() {
    for tag in CaseTag::ALL {
        let m = model(tag);
        let f = &RationalExpr::x(0) * &RationalExpr::x(1);
        assert!(!check_involution(&m.invariants.i, &f, &m.poisson, CheckMode::Symbolic).holds());
        assert!(!check_involution(&m.invariants.j, &f, &m.poisson, CheckMode::Symbolic).holds());
        assert!(m.invariants.j.num().nterms() > 10, "case {}", tag.number());
    }
}
