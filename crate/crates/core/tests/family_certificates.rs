//! Invariance certificates for the symbolic family.

use std::time::Instant;

use addvar_core::family::{build_equation, build_invariant_i, build_invariant_j, check_invariance, CheckMode, FamilyParams};

#[test]
fn symbolic_i_and_j_are_invariant() {
    let p = FamilyParams::symbolic();
    let eq = build_equation(&p);
    let t = Instant::now();
    let ci = check_invariance(&eq, &build_invariant_i(&p), CheckMode::Symbolic);
    assert!(ci.holds(), "{:?}", ci);
    let cj = check_invariance(&eq, &build_invariant_j(&p), CheckMode::Symbolic);
    eprintln!("symbolic J certificate in {:?}", t.elapsed());
    assert!(cj.holds(), "{:?}", cj);
}

#[test]
fn sampled_fallback_passes_at_200_points() {
    let p = FamilyParams::symbolic();
    let eq = build_equation(&p);
    let c = check_invariance(&eq, &build_invariant_j(&p), CheckMode::Sampled { points: 200, seed: 7 });
    assert!(c.holds(), "{:?}", c);
}
