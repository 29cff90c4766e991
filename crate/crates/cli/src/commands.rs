//! One function per subcommand.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;

use addvar_core::canonical::{canonical_model, to_canonical, CanonicalModel, CaseTag};
use addvar_core::contlim::{
    conservation_residuals, continuum_integrals, continuum_lagrangian_check, convergence_order, collapse_times,
    default_ladder, invariant_collapse_check, scaling, TargetTag, TestFunction,
};
use addvar_core::dynamics::{
    canonical_map, drift_report, drift_report_exact, iterate, iterate_exact, orbit_rows, volume_series, AdditiveMap,
    Orbit, State4,
};
use addvar_core::expr::{parse_closed, parse_expr, Context, RationalExpr, Scalar};
use addvar_core::family::{build_equation, build_invariants, check_invariance, CheckMode, FamilyParams};
use addvar_core::lagrangian::{
    euler_lagrange_closed, test_raw, variational_test, variational_test_equation, Multiplier, RawAdditiveEquation,
};
use addvar_core::poisson::{check_involution, check_jacobi, check_preservation, PoissonStructure};

use crate::args::{
    CaseArgs, CertArgs, CheckKind, ClassifyArgs, ContlimArgs, ElArgs, EquationInput, FamilyArgs, IterateArgs,
};
use crate::report::{input, internal, Failure, Outcome};

/// Largest relative deviation from the `λ^(2n)` volume law counted as agreement.
pub const VOLUME_TOLERANCE: f64 = 1e-6;

/// Step size of the invariant-collapse fit.
pub const COLLAPSE_STEP: (i64, i64) = (1, 1000);

fn context(params: &Option<Vec<String>>) -> Context {
    match params {
        Some(names) => Context::new(names),
        None => Context::open(),
    }
}

fn expr(text: &str, ctx: &Context) -> Result<RationalExpr, Failure> {
    parse_expr(text, ctx).map_err(|e| input(format!("'{text}': {e}")))
}

/// A rational number written as an integer, a decimal, a fraction or a
/// constant expression.
pub fn scalar(text: &str) -> Result<Scalar, Failure> {
    if let Ok(s) = text.trim().parse::<Scalar>() {
        return Ok(s);
    }
    expr(text, &Context::new::<&str>(&[]))?
        .constant_value()
        .ok_or_else(|| input(format!("'{text}' is not a rational number")))
}

fn case_tag(n: u8) -> Result<CaseTag, Failure> {
    CaseTag::from_number(n).ok_or_else(|| input(format!("case must be 1..5, got {n}")))
}

fn check_mode(symbolic: bool, sampled: bool, points: usize, seed: u64) -> CheckMode {
    if symbolic {
        CheckMode::Symbolic
    } else if sampled {
        CheckMode::Sampled { points, seed }
    } else {
        CheckMode::Auto
    }
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct InputFile {
    f: Option<String>,
    h: Option<String>,
    a: Option<String>,
    b: Option<String>,
    c: Option<String>,
    equation: Option<String>,
    params: Option<Vec<String>>,
}

/// The equation source of `test`, after reading `--input`.
enum Source {
    Fh(String, String),
    Triple(String, String, String),
    Equation(String),
}

fn resolve_source(args: &EquationInput) -> Result<(Source, Option<Vec<String>>), Failure> {
    let inline = args.f.is_some()
        || args.h.is_some()
        || args.a.is_some()
        || args.b.is_some()
        || args.c.is_some()
        || args.equation.is_some();
    let file = match &args.input {
        Some(path) if inline => {
            return Err(input(format!("{} given together with an inline equation", path.display())));
        }
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<InputFile>(&text).map_err(|e| input(format!("{}: {e}", path.display())))?
        }
        None => InputFile {
            f: args.f.clone(),
            h: args.h.clone(),
            a: args.a.clone(),
            b: args.b.clone(),
            c: args.c.clone(),
            equation: args.equation.clone(),
            params: None,
        },
    };
    let params = args.params.clone().or(file.params);
    let fh = file.f.is_some() || file.h.is_some();
    let abc = file.a.is_some() || file.b.is_some() || file.c.is_some();
    let eq = file.equation.is_some();
    if [fh, abc, eq].iter().filter(|x| **x).count() != 1 {
        return Err(input("give exactly one of (f, h), (a, b, c) or equation"));
    }
    let source = if fh {
        match (file.f, file.h) {
            (Some(f), Some(h)) => Source::Fh(f, h),
            _ => return Err(input("f and h must be given together")),
        }
    } else if abc {
        match (file.a, file.b, file.c) {
            (Some(a), Some(b), Some(c)) => Source::Triple(a, b, c),
            _ => return Err(input("a, b and c must be given together")),
        }
    } else {
        Source::Equation(file.equation.expect("checked above"))
    };
    Ok((source, params))
}

pub fn test(args: &EquationInput) -> Result<Outcome, Failure> {
    let (source, params) = resolve_source(args)?;
    let ctx = context(&params);
    let report = match source {
        Source::Fh(f, h) => variational_test(&expr(&f, &ctx)?, &expr(&h, &ctx)?),
        Source::Equation(e) => variational_test_equation(&expr(&e, &ctx)?),
        Source::Triple(a, b, c) => {
            let raw = RawAdditiveEquation::from_triple(&expr(&a, &ctx)?, &expr(&b, &ctx)?, &expr(&c, &ctx)?);
            match raw {
                Ok(raw) => test_raw(raw),
                Err(e) => variational_test_equation(&expr(&format!("({a})*x[2] + ({b})*x[-2] + ({c})"), &ctx)?)
                    .with_message_fallback(e.to_string()),
            }
        }
    };
    let positive = report.is_variational();
    Outcome::new(report, positive)
}

/// Keeps the triple-specific error when the generic path has no message.
trait MessageFallback {
    fn with_message_fallback(self, msg: String) -> Self;
}

impl MessageFallback for addvar_core::lagrangian::TestReport {
    fn with_message_fallback(mut self, msg: String) -> Self {
        if self.message.is_none() && !self.is_variational() {
            self.message = Some(msg);
        }
        self
    }
}

pub fn el(args: &ElArgs) -> Result<Outcome, Failure> {
    let ctx = context(&args.params);
    let l = parse_closed(&args.lagrangian, &ctx).map_err(|e| input(format!("'{}': {e}", args.lagrangian)))?;
    let lambda = scalar(&args.lambda)?;
    if lambda.is_zero() {
        return Err(input("lambda must be nonzero"));
    }
    let mult = if lambda.is_one() { Multiplier::one() } else { Multiplier::numeric(lambda.clone()) };
    let equation = euler_lagrange_closed(&l, &mult).map_err(input)?;
    let check = variational_test_equation(&equation);
    let result = json!({
        "lagrangian": l,
        "lambda": lambda,
        "equation": format!("{equation} = 0"),
        "expression": equation,
        "variational_test": check,
    });
    Outcome::new(result, true)
}

fn family_params(values: &Option<Vec<String>>) -> Result<FamilyParams, Failure> {
    let Some(values) = values else {
        return Ok(FamilyParams::symbolic());
    };
    let ctx = Context::open();
    let v: Vec<RationalExpr> = values.iter().map(|s| expr(s, &ctx)).collect::<Result<_, _>>()?;
    let arr: [RationalExpr; 7] =
        v.try_into().map_err(|v: Vec<RationalExpr>| input(format!("expected 7 parameters, got {}", v.len())))?;
    FamilyParams::new(arr).map_err(input)
}

#[derive(Serialize)]
struct NamedCertificate {
    name: &'static str,
    certificate: addvar_core::family::Certificate,
    holds: bool,
}

pub fn family(args: &FamilyArgs, seed: u64) -> Result<Outcome, Failure> {
    let p = family_params(&args.params)?;
    let eq = build_equation(&p);
    let inv = build_invariants(&p);
    let mode = match args.check {
        CheckKind::None => None,
        CheckKind::Auto => Some(CheckMode::Auto),
        CheckKind::Symbolic => Some(CheckMode::Symbolic),
        CheckKind::Sampled => Some(CheckMode::Sampled { points: args.points, seed }),
    };
    let certificates: Vec<NamedCertificate> = match mode {
        None => Vec::new(),
        Some(mode) => [("I", &inv.i), ("J", &inv.j)]
            .into_iter()
            .map(|(name, f)| {
                let certificate = check_invariance(&eq, f, mode);
                NamedCertificate { name, holds: certificate.holds(), certificate }
            })
            .collect(),
    };
    let positive = certificates.iter().all(|c| c.holds);
    let result = json!({
        "params": p,
        "g": eq.g,
        "equation": format!("{} = 0", eq.expression()),
        "invariants": inv,
        "certificates": certificates,
    });
    Outcome::new(result, positive)
}

pub fn classify(args: &ClassifyArgs) -> Result<Outcome, Failure> {
    let values: Vec<Scalar> = args.params.iter().map(|s| scalar(s)).collect::<Result<_, _>>()?;
    let p = FamilyParams::from_slice(&values).map_err(input)?;
    let (case, model) = to_canonical(&p).map_err(internal)?;
    let result = json!({
        "classification": case,
        "lagrangian": model.lagrangian_closed,
        "invariants": model.invariants,
    });
    Outcome::new(result, true)
}

/// `(α, β, γ)` from the flags, symbolic where absent.
fn case_params(args: &CaseArgs) -> Result<[RationalExpr; 3], Failure> {
    let ctx = Context::open();
    let one = |v: &Option<String>, name: &str| match v {
        Some(text) => expr(text, &ctx),
        None => Ok(RationalExpr::param(name)),
    };
    Ok([one(&args.alpha, "alpha")?, one(&args.beta, "beta")?, one(&args.gamma, "gamma")?])
}

fn case_model(args: &CaseArgs) -> Result<CanonicalModel, Failure> {
    let tag = case_tag(args.case)?;
    let [a, b, g] = case_params(args)?;
    canonical_model(tag, &a, &b, &g).map_err(internal)
}

#[derive(Serialize)]
struct BracketEntry {
    bracket: String,
    value: RationalExpr,
}

fn table(p: &PoissonStructure) -> Vec<BracketEntry> {
    p.table().into_iter().map(|(bracket, value)| BracketEntry { bracket, value }).collect()
}

pub fn poisson(args: &CaseArgs) -> Result<Outcome, Failure> {
    let model = case_model(args)?;
    let matches = model.poisson == model.printed_poisson;
    let skew = model.poisson.is_skew();
    let result = json!({
        "case": args.case,
        "equation": format!("{} = 0", model.equation.expression()),
        "lagrangian": model.lagrangian_closed,
        "table": table(&model.poisson),
        "listed_table": table(&model.printed_poisson),
        "matches_listed_table": matches,
        "skew_symmetric": skew,
        "determinant": model.poisson.determinant(),
    });
    Outcome::new(result, matches && skew)
}

pub fn involution(args: &CertArgs, seed: u64) -> Result<Outcome, Failure> {
    let model = case_model(&args.case)?;
    let mode = check_mode(args.symbolic, args.sampled, args.points, seed);
    let cert = check_involution(&model.invariants.i, &model.invariants.j, &model.poisson, mode);
    let holds = cert.holds();
    Outcome::new(json!({ "case": args.case.case, "certificate": cert, "holds": holds }), holds)
}

#[derive(Serialize)]
struct Stage {
    stage: &'static str,
    passed: bool,
    detail: serde_json::Value,
}

pub fn certify(args: &CertArgs, seed: u64) -> Result<Outcome, Failure> {
    let model = case_model(&args.case)?;
    let mode = check_mode(args.symbolic, args.sampled, args.points, seed);
    let p = &model.poisson;
    let inv = &model.invariants;
    let mut stages = Vec::new();
    for (stage, f) in [("invariance-I", &inv.i), ("invariance-J", &inv.j)] {
        let c = check_invariance(&model.equation, f, mode);
        stages.push(Stage { stage, passed: c.holds(), detail: serde_json::to_value(&c).map_err(internal)? });
    }
    stages.push(Stage { stage: "skew-symmetry", passed: p.is_skew(), detail: json!(null) });
    let residuals = |v: Vec<String>| json!({ "nonzero_residuals": v });
    let mut jac = check_jacobi(p);
    jac.retain(|(_, e)| !e.is_zero());
    stages.push(Stage {
        stage: "jacobi",
        passed: jac.is_empty(),
        detail: residuals(jac.iter().map(|(k, e)| format!("{k:?}: {e}")).collect()),
    });
    let mut pres = check_preservation(p, &model.equation);
    pres.retain(|(_, e)| !e.is_zero());
    stages.push(Stage {
        stage: "preservation",
        passed: pres.is_empty(),
        detail: residuals(pres.iter().map(|(k, e)| format!("{k:?}: {e}")).collect()),
    });
    let c = check_involution(&inv.i, &inv.j, p, mode);
    stages.push(Stage { stage: "involution", passed: c.holds(), detail: serde_json::to_value(&c).map_err(internal)? });
    let all = stages.iter().all(|s| s.passed);
    let result = json!({
        "case": args.case.case,
        "equation": format!("{} = 0", model.equation.expression()),
        "invariants": inv,
        "table": table(p),
        "stages": stages,
        "passed": all,
    });
    Outcome::new(result, all)
}

struct Run {
    map: AdditiveMap,
    model: Option<CanonicalModel>,
    float: Orbit<State4>,
    exact: Option<Orbit<[Scalar; 4]>>,
}

fn run_orbit(args: &IterateArgs) -> Result<Run, Failure> {
    let tag = case_tag(args.case)?;
    let [a, b, g] = [&args.alpha, &args.beta, &args.gamma].map(|s| scalar(s));
    let (a, b, g) = (a?, b?, g?);
    let lambda = scalar(&args.lambda)?;
    if lambda.is_zero() {
        return Err(input("lambda must be nonzero"));
    }
    if args.init.len() != 4 {
        return Err(input(format!("--init needs 4 values x1,x0,xm1,xm2, got {}", args.init.len())));
    }
    let init: Vec<Scalar> = args.init.iter().map(|s| scalar(s)).collect::<Result<_, _>>()?;
    let init: [Scalar; 4] = init.try_into().expect("length checked");
    let map = canonical_map(tag, &a, &b, &g, &lambda).map_err(internal)?;
    let model = if lambda.is_one() {
        let r = |s: &Scalar| RationalExpr::scalar(s.clone());
        Some(canonical_model(tag, &r(&a), &r(&b), &r(&g)).map_err(internal)?)
    } else {
        None
    };
    let forward = !args.backward;
    let (float, exact) = if args.exact {
        let o = iterate_exact(&map, init, args.steps, forward);
        let states = o.states.iter().map(|s| s.clone().map(|x| x.to_f64())).collect();
        let f = Orbit { states, mode: o.mode, label: o.label.clone(), diagnostic: o.diagnostic.clone() };
        (f, Some(o))
    } else {
        (iterate(&map, init.map(|x| x.to_f64()), args.steps, forward), None)
    };
    Ok(Run { map, model, float, exact })
}

fn write_csv<T: Serialize>(rows: &[T], headers: Option<&[&str]>, out: &Option<std::path::PathBuf>) -> Result<Option<String>, Failure> {
    let mut w = csv::WriterBuilder::new().has_headers(headers.is_none()).from_writer(Vec::new());
    if let Some(h) = headers {
        w.write_record(h).map_err(internal)?;
    }
    for r in rows {
        w.serialize(r).map_err(internal)?;
    }
    let bytes = w.into_inner().map_err(internal)?;
    let text = String::from_utf8(bytes).map_err(internal)?;
    match out {
        Some(path) => {
            write_file(path, &text)?;
            Ok(None)
        }
        None => Ok(Some(text)),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn last_state(run: &Run) -> serde_json::Value {
    match &run.exact {
        Some(o) => json!(o.states.last()),
        None => json!(run.float.states.last()),
    }
}

pub fn iterate_cmd(args: &IterateArgs) -> Result<(Outcome, Option<String>), Failure> {
    let run = run_orbit(args)?;
    let inv = run.model.as_ref().map(|m| &m.invariants);
    let rows = orbit_rows(&run.float, &run.map, inv).map_err(internal)?;
    let drift = match (inv, &run.exact) {
        (Some(inv), Some(o)) => Some(drift_report_exact(o, inv).map_err(internal)?),
        (Some(inv), None) => Some(drift_report(&run.float, inv).map_err(internal)?),
        (None, _) => None,
    };
    let csv = write_csv(&rows, None, &args.out)?;
    let complete = run.float.complete();
    let result = json!({
        "case": args.case,
        "mode": run.float.mode,
        "direction": if args.backward { "backward" } else { "forward" },
        "steps_requested": args.steps,
        "steps_completed": run.float.steps(),
        "complete": complete,
        "diagnostic": run.float.diagnostic,
        "final_state": last_state(&run),
        "drift": drift,
        "csv": args.out.as_ref().map(|p| p.display().to_string()),
    });
    Ok((Outcome::new(result, complete)?, csv))
}

#[derive(Serialize)]
struct VolumeRow {
    n: usize,
    log_volume: f64,
    log_expected: f64,
}

pub fn volume(args: &IterateArgs) -> Result<(Outcome, Option<String>), Failure> {
    let run = run_orbit(args)?;
    let v = volume_series(&run.float, &run.map).map_err(internal)?;
    let rows: Vec<VolumeRow> = v
        .log_volume
        .iter()
        .zip(&v.log_expected)
        .enumerate()
        .map(|(n, (lv, le))| VolumeRow { n, log_volume: lv - v.log_volume[0], log_expected: *le })
        .collect();
    let csv = write_csv(&rows, None, &args.out)?;
    let complete = run.float.complete();
    let holds = v.max_relative_error < VOLUME_TOLERANCE;
    let last = rows.last().expect("orbit has a first state");
    let result = json!({
        "case": args.case,
        "lambda": scalar(&args.lambda)?,
        "lambda_squared": run.map.lambda_squared(),
        "steps_completed": run.float.steps(),
        "complete": complete,
        "diagnostic": run.float.diagnostic,
        "log_volume_final": last.log_volume,
        "log_expected_final": last.log_expected,
        "max_relative_error": v.max_relative_error,
        "tolerance": VOLUME_TOLERANCE,
        "holds": holds,
    });
    Ok((Outcome::new(result, complete && holds)?, csv))
}

#[derive(Serialize)]
struct PlotRow {
    n: usize,
    x_n: f64,
    x_n_plus_1: f64,
}

pub fn plot_data(args: &IterateArgs) -> Result<(Outcome, Option<String>), Failure> {
    let run = run_orbit(args)?;
    let rows: Vec<PlotRow> =
        run.float.states.iter().enumerate().map(|(n, s)| PlotRow { n, x_n: s[1], x_n_plus_1: s[0] }).collect();
    let csv = write_csv(&rows, None, &args.out)?;
    let complete = run.float.complete();
    let max_abs = rows.iter().fold(0.0f64, |m, r| m.max(r.x_n.abs()));
    let result = json!({
        "case": args.case,
        "rows": rows.len(),
        "complete": complete,
        "diagnostic": run.float.diagnostic,
        "max_abs": max_abs,
        "csv": args.out.as_ref().map(|p| p.display().to_string()),
    });
    Ok((Outcome::new(result, complete)?, csv))
}

pub fn contlim(args: &ContlimArgs) -> Result<Outcome, Failure> {
    let tag = case_tag(args.case)?;
    if args.r.len() != 3 {
        return Err(input(format!("--r needs 3 values r1,r2,r3, got {}", args.r.len())));
    }
    let r: Vec<Scalar> = args.r.iter().map(|s| scalar(s)).collect::<Result<_, _>>()?;
    let r: [Scalar; 3] = r.try_into().expect("length checked");
    if args.ladder < 2 {
        return Err(input("--ladder needs at least 2 step sizes"));
    }
    let rule = scaling(tag);
    let conv = convergence_order(rule, &r, TestFunction::Sin, args.t, &default_ladder(args.ladder)).map_err(internal)?;
    let lag = continuum_lagrangian_check(rule.target).map_err(internal)?;
    let integrals = match rule.target {
        TargetTag::Linear4 => None,
        t => {
            let k = continuum_integrals(t).map_err(internal)?;
            let [d1, d2] = conservation_residuals(t, &k).map_err(internal)?;
            Some(json!({
                "k1": k.k1,
                "k2": k.k2,
                "dk1_dt": d1,
                "dk2_dt": d2,
                "conserved": d1.is_zero() && d2.is_zero(),
            }))
        }
    };
    let conserved = integrals.as_ref().map(|v| v["conserved"] == json!(true)).unwrap_or(true);
    let collapse = if args.collapse {
        let h = Scalar::ratio(COLLAPSE_STEP.0, COLLAPSE_STEP.1);
        Some(match invariant_collapse_check(tag, &r, &h, &collapse_times()) {
            Ok(rep) => serde_json::to_value(rep).map_err(internal)?,
            Err(e) => json!({ "unavailable": e.to_string() }),
        })
    } else {
        None
    };
    let positive = conv.verdict && lag.holds() && conserved;
    let result = json!({
        "case": args.case,
        "target": rule.target.name(),
        "scaling": rule,
        "convergence": conv,
        "lagrangian_check": { "holds": lag.holds(), "scale": lag.scale, "residual": lag.residual },
        "integrals": integrals,
        "collapse": collapse,
        "verdict": positive,
    });
    Outcome::new(result, positive)
}
