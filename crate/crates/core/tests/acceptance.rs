//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the lines always reach the
//! terminal. The process fails when a criterion fails that is not listed in
//! [`KNOWN_FAILURES`].

use std::time::{Duration, Instant};

use rand::Rng;

use addvar_core::canonical::{canonical_model, CaseTag};
use addvar_core::contlim::{
    self, collapse_times, conservation_residuals, continuum_integrals, continuum_lagrangian_check, drift_ratio,
    invariant_collapse_check, run_case, standard_r, weighted_linear_check, TargetTag, COLLAPSE_TOLERANCE, SLOPE_WINDOW,
    SMALL_IC,
};
use addvar_core::dynamics::{
    canonical_map, drift_report_exact, figure1, iterate_exact, jacobian_det_symbolic, jacobian_formula_symbolic,
    FIGURE1_STEPS,
};
use addvar_core::expr::{parse_closed, parse_expr, ClosedForm, Context, Monomial, Poly, RationalExpr, Scalar, Var};
use addvar_core::family::{
    build_equation, build_invariant_i, build_invariant_j, build_invariant_j_printed, check_invariance, CheckMode,
    FamilyParams,
};
use addvar_core::lagrangian::{
    equation_key, euler_lagrange, variational_test, variational_test_equation, DiscreteLagrangian, Multiplier,
    StructuredEquation, Verdict,
};
use addvar_core::poisson::{check_involution, check_jacobi, check_preservation};
use addvar_core::sample;

/// Criteria whose failure is expected and recorded with its reason.
const KNOWN_FAILURES: &[u8] = &[8];

/// Seed of every random draw in the suite.
const SEED: u64 = sample::DEFAULT_SEED;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Outcome { passed, detail: detail.into() }
    }
}

struct Criterion {
    id: u8,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn open(text: &str) -> RationalExpr {
    parse_expr(text, &Context::open()).unwrap()
}

fn worked_examples() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;

    let ctx = Context::new(&["mu"]);
    let f = parse_expr("-x[-1]^3/x[1]^3", &ctx).unwrap();
    let h = parse_expr("-(3*x[0]^2*(x[0]^2-1)*x[-1]*x[1] - mu)/((x[0]^2-1)*x[1]^3)", &ctx).unwrap();
    let t = Instant::now();
    let r = variational_test(&f, &h);
    let first = r.is_variational()
        && r.lagrangian.as_ref().is_some_and(|l| {
            let want = parse_closed("mu/2*arctanh(xi) + mu/2*arctanh(eta)", &ctx).unwrap();
            let v = l.v_closed.clone().unwrap_or_else(|| ClosedForm::from(RationalExpr::zero()));
            l.g == open("xi^3")
                && l.lambda.is_one()
                && v.differentiate(Var::XI) == want.differentiate(Var::XI)
                && v.differentiate(Var::ETA) == want.differentiate(Var::ETA)
        })
        && r.lagrangian_display.as_deref().is_some_and(|d| d.contains("arctanh"))
        && t.elapsed() < Duration::from_secs(1);
    notes.push(format!("first example {}", if first { "ok" } else { "mismatch" }));
    ok &= first;

    let cx = Context::new(&["lambda", "a11", "a02", "a20"]);
    let filter = |a11: &str, a02: &str, a20: &str| {
        let text = format!("xm1^2*xm2 + x1^2*x2 + 1/(1-x0) + x0*(({a02})*xm1^2 + ({a11})*xm1*x1 + ({a20})*x1^2)");
        parse_expr(&text, &cx).unwrap()
    };
    let t = Instant::now();
    let r = variational_test_equation(&filter("2*lambda", "a02", "a20"));
    let closure = r.symbolic.as_ref().and_then(|s| s.closure_residual.clone());
    let mut second = closure == Some(parse_expr("2*xi*eta*(lambda*a20 - a02)", &cx).unwrap());
    let mut grid = 0;
    for a11 in [2i64, -2, 1] {
        for a20 in [1i64, 3] {
            for a02 in [1i64, 3, -1, -3, 2] {
                let predicted = [1i64, -1].iter().any(|l| a11 == 2 * l && a02 == l * a20);
                let got = variational_test_equation(&filter(&a11.to_string(), &a02.to_string(), &a20.to_string()))
                    .is_variational();
                second &= predicted == got;
                grid += 1;
            }
        }
    }
    second &= t.elapsed() < Duration::from_secs(1);
    notes.push(format!("second example closure and {grid}-point grid {}", if second { "ok" } else { "mismatch" }));
    ok &= second;

    let t = Instant::now();
    let mut third = true;
    let mut grid = 0;
    for c1 in [1i64, 3, -2] {
        for cm1 in [2i64, -6, 1] {
            for cm2 in [(4i64, 1i64), (36, 1), (1, 9), (4, 9), (9, 1), (1, 4)] {
                let e = open(&format!("x[2] + {}/{}*x[-2] + ({c1})*x[1] + 5*x[0] + ({cm1})*x[-1] + 7", cm2.0, cm2.1));
                let ratio = Scalar::ratio(cm1, c1);
                let predicted = &ratio * &ratio == Scalar::ratio(cm2.0, cm2.1);
                third &= variational_test_equation(&e).is_variational() == predicted;
                grid += 1;
            }
        }
    }
    third &= t.elapsed() < Duration::from_secs(1);
    notes.push(format!("linear example {grid}-point grid {}", if third { "ok" } else { "mismatch" }));
    ok &= third;
    Outcome::new(ok, notes.join("; "))
}

fn family_invariance() -> Outcome {
    let p = FamilyParams::symbolic();
    let eq = build_equation(&p);
    let ci = check_invariance(&eq, &build_invariant_i(&p), CheckMode::Symbolic);
    let t = Instant::now();
    let cj = check_invariance(&eq, &build_invariant_j(&p), CheckMode::Symbolic);
    let tj = t.elapsed();
    let sj = check_invariance(&eq, &build_invariant_j(&p), CheckMode::Sampled { points: 200, seed: SEED });
    let printed = check_invariance(&eq, &build_invariant_j_printed(&p), CheckMode::Sampled { points: 20, seed: SEED });
    let ok = ci.holds() && cj.holds() && sj.holds() && tj < Duration::from_secs(600);
    Outcome::new(
        ok,
        format!(
            "I {:?}; J {:?} in {:.1?}; J sampled {:?}; J as printed {}",
            ci,
            cj,
            tj,
            sj,
            if printed.holds() { "also invariant" } else { "not invariant (two corrected terms)" }
        ),
    )
}

fn bracket_tables() -> Outcome {
    let [a, b, g] = ["alpha", "beta", "gamma"].map(RationalExpr::param);
    let mut ok = true;
    let mut notes = Vec::new();
    for tag in CaseTag::ALL {
        let t = Instant::now();
        let m = canonical_model(tag, &a, &b, &g).unwrap();
        let table = m.poisson == m.printed_poisson;
        let skew = m.poisson.is_skew();
        let jacobi = check_jacobi(&m.poisson).iter().all(|(_, r)| r.is_zero());
        let pres = check_preservation(&m.poisson, &m.equation).iter().all(|(_, r)| r.is_zero());
        let inv = check_involution(&m.invariants.i, &m.invariants.j, &m.poisson, CheckMode::Auto);
        let fast = t.elapsed() < Duration::from_secs(300);
        let case_ok = table && skew && jacobi && pres && inv.holds() && fast;
        ok &= case_ok;
        notes.push(format!(
            "case {}: table {} skew {} jacobi {} preservation {} involution {} ({:.1?})",
            tag.number(),
            table,
            skew,
            jacobi,
            pres,
            inv.holds(),
            t.elapsed()
        ));
    }
    notes.push("third table uses the corrected middle-bracket denominator".into());
    Outcome::new(ok, notes.join("; "))
}

fn random_poly(rng: &mut impl Rng, vars: &[Var], max_deg: u32) -> Poly {
    let mut terms = Vec::new();
    let mut exps = vec![vec![]];
    for _ in vars {
        exps = exps.into_iter().flat_map(|e: Vec<u32>| (0..=max_deg).map(move |k| [e.clone(), vec![k]].concat())).collect();
    }
    for e in exps.into_iter().filter(|e| e.iter().sum::<u32>() <= max_deg) {
        if rng.gen_bool(0.5) {
            let pairs: Vec<(Var, u32)> = vars.iter().copied().zip(e).collect();
            terms.push((Monomial::from_pairs(&pairs), sample::rational(rng, 4, 3)));
        }
    }
    Poly::from_terms(terms)
}

fn round_trips() -> Outcome {
    let mut rng = sample::rng(SEED);
    let lambdas = [Scalar::one(), Scalar::from_int(2), Scalar::ratio(1, 3), Scalar::from_int(-1)];
    let mut failures = Vec::new();
    let mut done = 0;
    while done < 100 {
        let g = random_poly(&mut rng, &[Var::XI], 3);
        if g.is_zero() {
            continue;
        }
        let v = random_poly(&mut rng, &[Var::XI, Var::ETA], 4);
        let l = lambdas[rng.gen_range(0..lambdas.len())].clone();
        let lag = DiscreteLagrangian::from_potential(
            RationalExpr::from_poly(g),
            Multiplier::numeric(l.clone()),
            ClosedForm::from(RationalExpr::from_poly(v)),
        );
        let eq = euler_lagrange(&lag).unwrap().expression();
        let r = variational_test_equation(&eq);
        let want = RationalExpr::scalar(l);
        let same = r.structured.as_ref().is_some_and(|s| equation_key(&s.expression()) == equation_key(&eq));
        let lam = r.signs.iter().any(|o| o.passed && o.lambda.value == want);
        if !(r.is_variational() && same && lam) {
            failures.push(done);
        }
        done += 1;
    }
    Outcome::new(failures.is_empty(), format!("{done} Lagrangians, failures at {failures:?}"))
}

fn volume_law() -> Outcome {
    let p = FamilyParams::symbolic();
    let mut exact = true;
    for lambda in [Multiplier::one(), Multiplier::numeric(Scalar::ratio(2, 3)), Multiplier::symbolic(RationalExpr::param("c"))] {
        let eq = StructuredEquation::new(p.g(), lambda.clone(), p.m(), p.n());
        exact &= lambda.is_zero(&(&jacobian_det_symbolic(&eq) - &jacobian_formula_symbolic(&eq)));
    }
    let ((_, cons), (_, diss)) = figure1(FIGURE1_STEPS);
    let collapses = diss.complete && diss.tail_max_abs < 1e-3;
    let bounded = cons.complete && cons.tail_max_abs > 1e-3 && cons.min_pole_distance > 0.5;
    Outcome::new(
        exact && collapses && bounded,
        format!(
            "symbolic determinant {}; dissipative tail max {:.2e}; conservative tail max {:.2e}, pole distance {:.3}",
            if exact { "equals the formula" } else { "differs" },
            diss.tail_max_abs,
            cons.tail_max_abs,
            cons.min_pole_distance
        ),
    )
}

fn exact_drift() -> Outcome {
    let mut rng = sample::rng(SEED ^ 6);
    let mut ok = true;
    let mut notes = Vec::new();
    for tag in CaseTag::ALL {
        let t = Instant::now();
        let mut verdict = None;
        for _attempt in 0..5 {
            let [a, b, g] = [0; 3].map(|_| sample::rational(&mut rng, 3, 4));
            let s0 = [0; 4].map(|_| sample::rational(&mut rng, 1, 5));
            let model = canonical_model(tag, &RationalExpr::scalar(a.clone()), &RationalExpr::scalar(b.clone()), &RationalExpr::scalar(g.clone())).unwrap();
            let map = canonical_map(tag, &a, &b, &g, &Scalar::one()).unwrap();
            let o = iterate_exact(&map, s0, 50, true);
            if !o.complete() {
                continue;
            }
            let d = drift_report_exact(&o, &model.invariants).unwrap();
            verdict = Some(d.exact_zero == Some(true));
            break;
        }
        let case_ok = verdict == Some(true) && t.elapsed() < Duration::from_secs(60);
        ok &= case_ok;
        notes.push(format!(
            "case {}: {} ({:.1?})",
            tag.number(),
            match verdict {
                Some(true) => "zero drift over 50 steps",
                Some(false) => "drift",
                None => "no complete orbit",
            },
            t.elapsed()
        ));
    }
    Outcome::new(ok, notes.join("; "))
}

fn continuum_limits() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    let mut slopes = Vec::new();
    for case in CaseTag::ALL {
        match run_case(case, 5) {
            Ok(rep) => {
                ok &= rep.verdict;
                slopes.push(format!("{}:{:.2}", case.number(), rep.slope));
            }
            Err(e) => {
                ok = false;
                slopes.push(format!("{}:{e}", case.number()));
            }
        }
    }
    notes.push(format!("slopes {} in [{}, {}]", slopes.join(" "), SLOPE_WINDOW.0, SLOPE_WINDOW.1));
    let lag = TargetTag::ALL.iter().all(|t| continuum_lagrangian_check(*t).map(|c| c.holds()).unwrap_or(false))
        && weighted_linear_check(contlim::L_WEIGHTED).map(|c| c.holds()).unwrap_or(false);
    ok &= lag;
    notes.push(format!("Lagrangian residuals {}", if lag { "zero" } else { "nonzero" }));
    let mut conserved = true;
    let mut ratios = Vec::new();
    for tag in [TargetTag::PI2, TargetTag::PII2] {
        let k = continuum_integrals(tag).unwrap();
        conserved &= conservation_residuals(tag, &k).map(|r| r.iter().all(|x| x.is_zero())).unwrap_or(false);
        match drift_ratio(tag, [1.0, 0.0, 0.0], SMALL_IC, 0.2, 50) {
            Ok(r) => {
                ok &= r.iter().all(|x| (8.0..=32.0).contains(x));
                ratios.push(format!("{} {:.1}/{:.1}", tag.name(), r[0], r[1]));
            }
            Err(e) => {
                ok = false;
                ratios.push(format!("{} {e}", tag.name()));
            }
        }
    }
    ok &= conserved;
    notes.push(format!("dK/dt {}", if conserved { "zero" } else { "nonzero" }));
    notes.push(format!("drift ratios {}", ratios.join(", ")));
    Outcome::new(ok, notes.join("; "))
}

fn invariant_collapse() -> Outcome {
    let r = standard_r();
    let h = Scalar::ratio(1, 1000);
    let ts = collapse_times();
    let mut ok = true;
    let mut notes = Vec::new();
    for case in [CaseTag::DoubleRoot, CaseTag::Linear] {
        match invariant_collapse_check(case, &r, &h, &ts) {
            Ok(rep) => {
                let err = rep.i_relative_error.unwrap_or(f64::INFINITY);
                ok &= err < COLLAPSE_TOLERANCE;
                notes.push(format!(
                    "case {}: I/h^{} = {:.4}·K1 against {:?} (error {:.1}%)",
                    case.number(),
                    rep.power,
                    rep.i.ratio,
                    rep.listed_i_coefficient,
                    100.0 * err
                ));
            }
            Err(e) => {
                ok = false;
                notes.push(format!("case {}: {e}", case.number()));
            }
        }
    }
    match invariant_collapse_check(CaseTag::TwoRealRoots, &r, &h, &ts) {
        Ok(rep) => {
            ok &= rep.i.r_squared > 0.999;
            notes.push(format!("case 1: I ∝ K1 with R² = {:.6}", rep.i.r_squared));
        }
        Err(e) => {
            ok = false;
            notes.push(format!("case 1: {e}"));
        }
    }
    Outcome::new(ok, notes.join("; "))
}

fn beam() -> Outcome {
    let c = Context::new(&["alpha", "omega", "beta", "h"]);
    let naive = parse_expr(
        "(x2 - 4*x1 + 6*x0 - 4*xm1 + xm2)/h^4 + alpha*(xm1 - xm2)^2*(x0 - 2*xm1 + xm2)/h^4 + omega^2*xm2 - beta",
        &c,
    )
    .unwrap();
    let good = parse_expr(
        "x2 - 4*x1 + (6 - omega^2*h^4)*x0 - 4*xm1 + xm2 \
         + alpha/3*(x1 + xm1 - 2*x0)*(x1^2 + x0^2 + xm1^2 - x1*x0 - x1*xm1 - x0*xm1) - h^4*beta",
        &c,
    )
    .unwrap();
    let r0 = variational_test_equation(&naive);
    let rejected = r0.verdict != Verdict::Variational;
    let r1 = variational_test_equation(&good);
    let Some(lag) = r1.lagrangian.clone().filter(|_| r1.is_variational()) else {
        return Outcome::new(false, "variational discretization rejected");
    };
    let v = RationalExpr::from(lag.v_closed.clone().unwrap().rational);
    let omega = v.differentiate(Var::param("omega")) == parse_expr("-omega*h^4*(xi^2 + eta^2)/2", &c).unwrap();
    let beta = v.differentiate(Var::param("beta")) == parse_expr("-h^4*(xi + eta)/2", &c).unwrap();
    let back = euler_lagrange(&lag).map(|e| equation_key(&e.expression()) == equation_key(&good)).unwrap_or(false);
    Outcome::new(
        rejected && omega && beta && back,
        format!(
            "naive: {:?} ({}); variational: Lagrangian {}; ω-term {}, β-term {}",
            r0.verdict,
            r0.message.unwrap_or_default(),
            if back { "reproduces the equation" } else { "does not reproduce the equation" },
            if omega { "matches" } else { "differs" },
            if beta { "matches" } else { "differs" }
        ),
    )
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "worked examples", budget: Duration::from_secs(3), run: worked_examples },
        Criterion { id: 2, name: "family invariance certificate", budget: Duration::from_secs(660), run: family_invariance },
        Criterion { id: 3, name: "bracket tables", budget: Duration::from_secs(1500), run: bracket_tables },
        Criterion { id: 4, name: "round-trip property suite", budget: Duration::from_secs(60), run: round_trips },
        Criterion { id: 5, name: "Jacobian and volume law", budget: Duration::from_secs(5), run: volume_law },
        Criterion { id: 6, name: "exact drift certificate", budget: Duration::from_secs(300), run: exact_drift },
        Criterion { id: 7, name: "continuum limits", budget: Duration::from_secs(120), run: continuum_limits },
        Criterion { id: 8, name: "invariant-collapse coefficients", budget: Duration::from_secs(120), run: invariant_collapse },
        Criterion { id: 9, name: "beam discretization", budget: Duration::from_secs(1), run: beam },
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut unexpected = Vec::new();
    for c in &criteria {
        if !filter.is_empty() && !filter.iter().any(|f| c.name.contains(f.as_str()) || c.id.to_string() == *f) {
            continue;
        }
        let t = Instant::now();
        let out = (c.run)();
        let elapsed = t.elapsed();
        let passed = out.passed && elapsed <= c.budget;
        let known = KNOWN_FAILURES.contains(&c.id);
        println!(
            "criterion {} [{}]: {} ({:.2?}) {}{}",
            c.id,
            c.name,
            if passed { "PASS" } else { "FAIL" },
            elapsed,
            out.detail,
            if !passed && known { " [known failure]" } else { "" }
        );
        if !passed && !known {
            unexpected.push(c.id);
        }
    }
    if !unexpected.is_empty() {
        println!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
