//! Continuum limits of the canonical forms.
//!
//! Under a scaling `x_n = c(h) + s(h)·x(t)`, `t = nh`, with parameters that
//! are polynomials in `h`, each canonical form tends to an autonomous
//! fourth-order ODE: the second member of the P_I hierarchy (cases 2, 3, 4),
//! the second member of the P_II hierarchy (case 1) or a linear equation
//! (case 5). The limits are checked on smooth samples rather than on orbits:
//! a fixed test function is sampled on the stencil, the discrete equation is
//! divided by its leading power of `h`, and the deviation from the ODE
//! residual must vanish along a ladder of step sizes.
//!
//! All discrete evaluations are exact. The test function is represented by
//! its Taylor polynomial about `t` (degree [`JET_ORDER`]) with rational
//! coefficients, so the deviation carries no round-off even where it is
//! far below machine precision relative to the individual terms.
//!
//! The continuum layer uses the derivative variables `x, x', …, x''''` of
//! module [`crate::expr`]; `d/dt` is the total derivative and the top
//! derivative is eliminated through the ODE.

use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::canonical::{canonical_expression, canonical_model, CaseTag};
use crate::expr::{parse_expr, Context, ExprError, RationalExpr, Scalar, Var};
use crate::family::InvariantPair;

/// Number of Taylor terms used to sample a test function.
pub const JET_ORDER: usize = 24;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ContlimError {
    #[error("pole of the discrete equation at a sample (h = {h})")]
    Pole { h: f64 },
    #[error("deviation vanishes at h = {h}; choose another test function")]
    Underflow { h: f64 },
    #[error("numeric solution left the bounded region at t = {t}")]
    Blowup { t: f64 },
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// The three limiting ODEs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetTag {
    PI2,
    PII2,
    Linear4,
}

impl TargetTag {
    pub const ALL: [TargetTag; 3] = [TargetTag::PI2, TargetTag::PII2, TargetTag::Linear4];

    pub fn name(self) -> &'static str {
        match self {
            TargetTag::PI2 => "PI2",
            TargetTag::PII2 => "PII2",
            TargetTag::Linear4 => "linear4",
        }
    }
}

pub const PI2_RESIDUAL: &str = "x'''' + 10*x*x'' + r1/2*x'' + 5*x'^2 + 10*x^3 + 3/2*r1*x^2 + 2*r2*x + r3";
pub const PII2_RESIDUAL: &str = "x'''' - (10*x^2 + r1)*x'' + 6*x^5 + 2*r1*x^3 - 10*x*x'^2 + r2";
pub const LINEAR_RESIDUAL: &str = "x'''' + r1*x'' + r2*x + r3";
/// General fourth-order linear equation with a Lagrangian carrying the
/// weight `exp(r0 t/2)`.
pub const WEIGHTED_LINEAR_RESIDUAL: &str = "x'''' + r0*x''' + r1*x'' + r0/2*(r1 - r0^2/4)*x' + r2*x + r3";

pub const K1_PI2_PRINTED: &str =
    "x'*x''' + 5*x^4/2 + r1/2*x^3 + r2*x^2 + x/16*(80*x'^2 + 16*r3) + r1/4*x'^2 - x''^2/12";
pub const K2_PI2_PRINTED: &str = "x'''^2 + (20*x + r1)*x''^2/2 - (60*x^2 + 6*x*r1 + 4*r2)*x'^2/2 \
     + (40*x^3 + 6*x^2*r1 + 8*x*r2 - 4*x'^2 + 4*r3)*x''/2 - 3*x^2/2*(r1*x^2 + 4*x^3 + 8*r2/3*x + 4*r3)";
pub const K1_PII2_PRINTED: &str =
    "x'*x''' - x''^2/2 - (10*x^2 + r1)*x'^2/2 + x/2*(2*x^5 + r1*x^3 - r2*x - 2*r3)";
pub const K2_PII2_PRINTED: &str = "x'''^2 - (10*x^2 + r1)*x''^2 + x'^4 + (30*x^4 + 6*r1*x^2 - r2)*x'^2 \
     + (12*x^5 + 4*r1*x^3 + 4*x*x'^2 - 2*r2*x - 2*r3)*x'' + x^3*(3*x^4*(x - r2) + 2*r1*x^3 - 8*r3)";

pub const K1_PI2: &str =
    "x'*x''' + 5*x^4/2 + r1/2*x^3 + r2*x^2 + 5*x*x'^2 + r3*x + r1/4*x'^2 - x''^2/2";
pub const K2_PI2: &str = "x'''^2 + 12*x*x'*x''' + 4*x*x''^2 + r1/2*x''^2 + 20*x^3*x'' + 3*r1*x^2*x'' \
     + 4*r2*x*x'' + 2*r3*x'' - 2*x'^2*x'' + 30*x^2*x'^2 - 2*r2*x'^2 + 24*x^5 + 9/2*r1*x^4 + 8*r2*x^3 + 6*r3*x^2";
pub const K1_PII2: &str = "x'*x''' - x''^2/2 - (10*x^2 + r1)*x'^2/2 + x^6 + r1/2*x^4 + r2*x";
pub const K2_PII2: &str = "x'''^2 - 12*x^2*x'*x''' - 4*x^2*x''^2 - r1*x''^2 + 12*x^5*x'' + 4*r1*x^3*x'' \
     + 4*x*x'^2*x'' + 2*r2*x'' + 30*x^4*x'^2 - x'^4 - 9*x^8 - 4*r1*x^6 - 4*r2*x^3";

pub const L_PI2: &str = "x''^2/2 + x*(21*x + r1)*x''/4 + 11*x/2*x'^2 + x/2*(5*x^3 + r1*x^2 + 2*r2*x + 2*r3)";
pub const L_PII2: &str = "x''^2/2 - x*(5*x^2/3 + r1/2)*x'' + x*(x^5 + r1/2*x^3 + r2)";
pub const L_LINEAR_PRINTED: &str = "x''^2/2 - r1/2*x'^2 + r1/2*x^2 + r3*x";
pub const L_LINEAR: &str = "x''^2/2 - r1/2*x'^2 + r2/2*x^2 + r3*x";
/// Bracket of the weighted linear Lagrangian; the weight is `exp(r0 t/2)`.
pub const L_WEIGHTED_PRINTED: &str = "x''^2/2 + (r0^2/8 - r1/2)*x'^2 + r1/2*x^2 + r3*x";
pub const L_WEIGHTED: &str = "x''^2/2 + (r0^2/8 - r1/2)*x'^2 + r2/2*x^2 + r3*x";

fn ctx() -> &'static Context {
    static C: OnceLock<Context> = OnceLock::new();
    C.get_or_init(|| Context::new(&["r0", "r1", "r2", "r3", "h"]))
}

/// Parses an expression in the continuum variables, `r0..r3` and `h`.
pub fn parse(text: &str) -> RationalExpr {
    parse_expr(text, ctx()).unwrap_or_else(|e| panic!("built-in expression {text:?}: {e}"))
}

fn r_vars() -> [Var; 3] {
    [Var::param("r1"), Var::param("r2"), Var::param("r3")]
}

/// A limiting ODE, `residual = 0`, with residual monic in `x''''`.
#[derive(Clone, Debug, Serialize)]
pub struct ContinuumTarget {
    pub tag: TargetTag,
    pub residual: RationalExpr,
}

pub fn target(tag: TargetTag) -> ContinuumTarget {
    let text = match tag {
        TargetTag::PI2 => PI2_RESIDUAL,
        TargetTag::PII2 => PII2_RESIDUAL,
        TargetTag::Linear4 => LINEAR_RESIDUAL,
    };
    ContinuumTarget { tag, residual: parse(text) }
}

impl ContinuumTarget {
    /// `x''''` expressed through lower derivatives.
    pub fn top_derivative(&self) -> RationalExpr {
        &RationalExpr::var(Var::deriv(4)) - &self.residual
    }

    /// Residual at a jet `(x, x', x'', x''', x'''')` and parameters `r`.
    pub fn eval(&self, jet: &[Scalar], r: &[Scalar; 3]) -> Result<Scalar, ExprError> {
        let rv = r_vars();
        self.residual.eval_scalar(&|v| {
            if let Some(k) = v.deriv_order() {
                return jet.get(k as usize).cloned();
            }
            rv.iter().position(|&p| p == v).map(|i| r[i].clone())
        })
    }
}

/// Total time derivative: `x^(k) -> x^(k+1)` plus the explicit `t` part.
pub fn total_derivative(e: &RationalExpr) -> RationalExpr {
    let mut out = e.differentiate(Var::T);
    for v in e.vars() {
        if let Some(k) = v.deriv_order() {
            let d = e.differentiate(v);
            out = &out + &(&d * &RationalExpr::var(Var::deriv(k + 1)));
        }
    }
    out
}

/// `d/dt` of `e` along the ODE: the total derivative with `x''''`
/// eliminated.
pub fn derivative_along(e: &RationalExpr, t: &ContinuumTarget) -> Result<RationalExpr, ExprError> {
    total_derivative(e).substitute_one(Var::deriv(4), &t.top_derivative())
}

/// The two first integrals of a nonlinear target.
#[derive(Clone, Debug, Serialize)]
pub struct ContinuumIntegrals {
    pub k1: RationalExpr,
    pub k2: RationalExpr,
}

pub fn continuum_integrals(tag: TargetTag) -> Result<ContinuumIntegrals, ContlimError> {
    let (k1, k2) = match tag {
        TargetTag::PI2 => (K1_PI2, K2_PI2),
        TargetTag::PII2 => (K1_PII2, K2_PII2),
        TargetTag::Linear4 => return Err(ContlimError::Unsupported("the linear target has no listed integrals".into())),
    };
    Ok(ContinuumIntegrals { k1: parse(k1), k2: parse(k2) })
}

/// The integrals as printed, kept to report that they are not conserved.
pub fn printed_integrals(tag: TargetTag) -> Result<ContinuumIntegrals, ContlimError> {
    let (k1, k2) = match tag {
        TargetTag::PI2 => (K1_PI2_PRINTED, K2_PI2_PRINTED),
        TargetTag::PII2 => (K1_PII2_PRINTED, K2_PII2_PRINTED),
        TargetTag::Linear4 => return Err(ContlimError::Unsupported("the linear target has no listed integrals".into())),
    };
    Ok(ContinuumIntegrals { k1: parse(k1), k2: parse(k2) })
}

/// Symbolic conservation residuals `dK1/dt`, `dK2/dt` along the target.
pub fn conservation_residuals(tag: TargetTag, k: &ContinuumIntegrals) -> Result<[RationalExpr; 2], ExprError> {
    let t = target(tag);
    Ok([derivative_along(&k.k1, &t)?, derivative_along(&k.k2, &t)?])
}

/// Fourth-order Euler–Lagrange expression of `w(t)·L`, divided by `w`,
/// for a weight with `w'/w = rate`:
/// `∂L/∂x - (D + rate)∂L/∂x' + (D + rate)²∂L/∂x''`.
pub fn euler_lagrange_continuum(l: &RationalExpr, rate: &RationalExpr) -> RationalExpr {
    let dd = |e: &RationalExpr| &total_derivative(e) + &(rate * e);
    let p0 = l.differentiate(Var::deriv(0));
    let p1 = l.differentiate(Var::deriv(1));
    let p2 = l.differentiate(Var::deriv(2));
    &(&p0 - &dd(&p1)) + &dd(&dd(&p2))
}

/// Result of comparing an Euler–Lagrange expression with a target.
#[derive(Clone, Debug, Serialize)]
pub struct LagrangianCheck {
    pub euler_lagrange: RationalExpr,
    /// Ratio of the `x''''` coefficients.
    pub scale: RationalExpr,
    /// `EL - scale·target`.
    pub residual: RationalExpr,
}

impl LagrangianCheck {
    pub fn holds(&self) -> bool {
        self.residual.is_zero() && !self.scale.is_zero()
    }
}

pub fn lagrangian_check(l: &RationalExpr, rate: &RationalExpr, target: &RationalExpr) -> Result<LagrangianCheck, ExprError> {
    let el = euler_lagrange_continuum(l, rate);
    let top = Var::deriv(4);
    let scale = el.differentiate(top).checked_div(&target.differentiate(top))?;
    let residual = &el - &(&scale * target);
    Ok(LagrangianCheck { euler_lagrange: el, scale, residual })
}

/// Checks a shipped Lagrangian of a target.
pub fn continuum_lagrangian_check(tag: TargetTag) -> Result<LagrangianCheck, ExprError> {
    let l = match tag {
        TargetTag::PI2 => L_PI2,
        TargetTag::PII2 => L_PII2,
        TargetTag::Linear4 => L_LINEAR,
    };
    lagrangian_check(&parse(l), &RationalExpr::zero(), &target(tag).residual)
}

/// Checks a weighted linear Lagrangian against the general linear equation.
pub fn weighted_linear_check(bracket: &str) -> Result<LagrangianCheck, ExprError> {
    let rate = &parse("r0") / &RationalExpr::int(2);
    lagrangian_check(&parse(bracket), &rate, &parse(WEIGHTED_LINEAR_RESIDUAL))
}

/// Scaling of a canonical form towards its continuum limit.
#[derive(Clone, Debug, Serialize)]
pub struct ScalingRule {
    pub case: CaseTag,
    pub target: TargetTag,
    /// `x_n = offset + scale·x(t)`, both in `h`.
    pub offset: &'static str,
    pub scale: &'static str,
    pub alpha: &'static str,
    pub beta: &'static str,
    pub gamma: &'static str,
    /// The scaled equation equals `ratio·h^power·residual + O(h^(power+2))`.
    pub equation_power: u32,
    pub equation_ratio: (i64, i64),
    /// Power of `h` at which the invariants collapse onto `K1`.
    pub invariant_power: u32,
    /// Listed limit `I -> c·K1·h^power`, when unambiguous.
    pub listed_i_coefficient: Option<(i64, i64)>,
}

pub static SCALINGS: [ScalingRule; 5] = [
    ScalingRule {
        case: CaseTag::TwoRealRoots,
        target: TargetTag::PII2,
        offset: "0",
        scale: "h",
        alpha: "6 + 2*r1*h^2",
        beta: "r2*h^5",
        gamma: "4 + r1*h^2",
        equation_power: 5,
        equation_ratio: (-1, 1),
        invariant_power: 6,
        listed_i_coefficient: None,
    },
    ScalingRule {
        case: CaseTag::DoubleRoot,
        target: TargetTag::PI2,
        offset: "1",
        scale: "h^2/2",
        alpha: "-16 + 2*r1*h^2 - 2*r2*h^4",
        beta: "30 - 3*r1*h^2 + 2*r2*h^4",
        gamma: "-10 + r1/2*h^2 + r3/4*h^6",
        equation_power: 6,
        equation_ratio: (1, 2),
        invariant_power: 8,
        listed_i_coefficient: Some((-1, 2)),
    },
    ScalingRule {
        case: CaseTag::ComplexPair,
        target: TargetTag::PI2,
        offset: "1",
        scale: "h^2",
        alpha: "-16 + 4*r1*h^2 - 4*r2*h^4",
        beta: "56 - 8*r1*h^2",
        gamma: "-14 + r1*h^2 + r2*h^4 + r3*h^6",
        equation_power: 6,
        equation_ratio: (2, 1),
        invariant_power: 8,
        listed_i_coefficient: Some((-8, 1)),
    },
    ScalingRule {
        case: CaseTag::Linear,
        target: TargetTag::PI2,
        offset: "1",
        scale: "h^2",
        alpha: "-10 + 3/2*r1*h^2 - r2*h^4",
        beta: "30 - 3*r1*h^2",
        gamma: "-10 + r1/2*h^2 + r2/3*h^4 + r3/3*h^6",
        equation_power: 6,
        equation_ratio: (1, 1),
        invariant_power: 8,
        listed_i_coefficient: Some((2, 1)),
    },
    ScalingRule {
        case: CaseTag::Constant,
        target: TargetTag::Linear4,
        offset: "0",
        scale: "1",
        alpha: "r3*h^4",
        beta: "6 - 2*r1*h^2 + r2*h^4",
        gamma: "-4 + r1*h^2",
        equation_power: 4,
        equation_ratio: (1, 1),
        invariant_power: 4,
        listed_i_coefficient: None,
    },
];

pub fn scaling(case: CaseTag) -> &'static ScalingRule {
    &SCALINGS[case.number() as usize - 1]
}

fn eval_hr(text: &str, h: &Scalar, r: &[Scalar; 3]) -> Scalar {
    let hv = Var::param("h");
    let rv = r_vars();
    parse(text)
        .eval_scalar(&|v| if v == hv { Some(h.clone()) } else { rv.iter().position(|&p| p == v).map(|i| r[i].clone()) })
        .expect("scaling expressions only involve h and r1..r3")
}

impl ScalingRule {
    /// `(α, β, γ)` at step `h`.
    pub fn params_at(&self, h: &Scalar, r: &[Scalar; 3]) -> [Scalar; 3] {
        [self.alpha, self.beta, self.gamma].map(|e| eval_hr(e, h, r))
    }

    /// `(offset, scale)` at step `h`.
    pub fn affine_at(&self, h: &Scalar, r: &[Scalar; 3]) -> (Scalar, Scalar) {
        (eval_hr(self.offset, h, r), eval_hr(self.scale, h, r))
    }
}

/// A smooth test function, known through its derivatives at a point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestFunction {
    Sin,
    Zero,
}

impl TestFunction {
    /// Rational approximations of `x^(j)(t)`, `j = 0..=order`.
    pub fn jet(self, t: f64, order: usize) -> Vec<Scalar> {
        match self {
            TestFunction::Zero => vec![Scalar::zero(); order + 1],
            TestFunction::Sin => {
                let s = Scalar::from_f64_exact(t.sin()).expect("finite");
                let c = Scalar::from_f64_exact(t.cos()).expect("finite");
                (0..=order)
                    .map(|j| match j % 4 {
                        0 => s.clone(),
                        1 => c.clone(),
                        2 => -&s,
                        _ => -&c,
                    })
                    .collect()
            }
        }
    }
}

/// Value at `t + dt` of the Taylor polynomial with coefficients `jet`.
pub fn taylor_value(jet: &[Scalar], dt: &Scalar) -> Scalar {
    let mut acc = Scalar::zero();
    for j in (0..jet.len()).rev() {
        acc = &jet[j] + &(&(&acc * dt) / &Scalar::from_int(j as i64 + 1));
    }
    acc
}

fn stencil(jet: &[Scalar], h: &Scalar, offset: &Scalar, scale: &Scalar, ks: &[i32]) -> Vec<(Var, Scalar)> {
    ks.iter()
        .map(|&k| {
            let dt = h * &Scalar::from_int(k as i64);
            (Var::shift(k), offset + &(scale * &taylor_value(jet, &dt)))
        })
        .collect()
}

fn abg_vars() -> [Var; 3] {
    [Var::param("alpha"), Var::param("beta"), Var::param("gamma")]
}

fn eval_window(e: &RationalExpr, window: &[(Var, Scalar)], abg: &[Scalar; 3]) -> Result<Scalar, ExprError> {
    let pv = abg_vars();
    e.eval_scalar(&|v| {
        window
            .iter()
            .find(|(w, _)| *w == v)
            .map(|(_, s)| s.clone())
            .or_else(|| pv.iter().position(|&p| p == v).map(|i| abg[i].clone()))
    })
}

fn symbolic_equation(case: CaseTag) -> RationalExpr {
    let [a, b, g] = ["alpha", "beta", "gamma"].map(RationalExpr::param);
    canonical_expression(case, &a, &b, &g)
}

/// One rung of a convergence ladder.
#[derive(Clone, Debug, Serialize)]
pub struct Deviation {
    pub h: f64,
    /// Scaled discrete residual minus continuum residual.
    pub deviation: f64,
    pub continuum_residual: f64,
}

fn deviation_with(
    eq: &RationalExpr,
    rule: &ScalingRule,
    r: &[Scalar; 3],
    jet: &[Scalar],
    h: &Scalar,
) -> Result<Deviation, ContlimError> {
    let (offset, scale) = rule.affine_at(h, r);
    let window = stencil(jet, h, &offset, &scale, &[-2, -1, 0, 1, 2]);
    let abg = rule.params_at(h, r);
    let e = eval_window(eq, &window, &abg).map_err(|err| match err {
        ExprError::Pole(_) => ContlimError::Pole { h: h.to_f64() },
        other => other.into(),
    })?;
    let (rn, rd) = rule.equation_ratio;
    let norm = &Scalar::ratio(rn, rd) * &h.pow(rule.equation_power);
    let scaled = &e / &norm;
    let cont = target(rule.target).eval(jet, r)?;
    Ok(Deviation { h: h.to_f64(), deviation: (&scaled - &cont).to_f64(), continuum_residual: cont.to_f64() })
}

/// Scaled discrete residual minus the continuum residual at `t`, for the
/// test function `f` and step `h`.
pub fn discrete_residual_on_samples(
    rule: &ScalingRule,
    r: &[Scalar; 3],
    f: TestFunction,
    t: f64,
    h: &Scalar,
) -> Result<Deviation, ContlimError> {
    let jet = f.jet(t, JET_ORDER);
    deviation_with(&symbolic_equation(rule.case), rule, r, &jet, h)
}

/// `h_k = 2^-k / 10`, `k = 0..n`.
pub fn default_ladder(n: usize) -> Vec<Scalar> {
    (0..n).map(|k| Scalar::ratio(1, 10 * (1i64 << k))).collect()
}

/// Least-squares slope of `log|dev|` against `log h`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.abs().ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Slope window for first-order (or better) agreement with a limit.
pub const SLOPE_WINDOW: (f64, f64) = (0.8, 2.5);

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub case: CaseTag,
    pub target: TargetTag,
    pub t: f64,
    pub r: [f64; 3],
    pub rungs: Vec<Deviation>,
    pub slope: f64,
    pub verdict: bool,
}

/// Deviations along a ladder of step sizes and their log-log slope.
pub fn convergence_order(
    rule: &ScalingRule,
    r: &[Scalar; 3],
    f: TestFunction,
    t: f64,
    ladder: &[Scalar],
) -> Result<ConvergenceReport, ContlimError> {
    if ladder.len() < 2 {
        return Err(ContlimError::Unsupported("a ladder needs at least two step sizes".into()));
    }
    let eq = symbolic_equation(rule.case);
    let jet = f.jet(t, JET_ORDER);
    let rungs = ladder
        .par_iter()
        .map(|h| deviation_with(&eq, rule, r, &jet, h))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(z) = rungs.iter().find(|d| d.deviation == 0.0) {
        return Err(ContlimError::Underflow { h: z.h });
    }
    let slope = log_log_slope(&rungs.iter().map(|d| (d.h, d.deviation)).collect::<Vec<_>>());
    Ok(ConvergenceReport {
        case: rule.case,
        target: rule.target,
        t,
        r: [0, 1, 2].map(|i| r[i].to_f64()),
        rungs,
        slope,
        verdict: (SLOPE_WINDOW.0..=SLOPE_WINDOW.1).contains(&slope),
    })
}

/// Parameters used by the standard suites.
pub fn standard_r() -> [Scalar; 3] {
    [Scalar::one(), Scalar::one(), Scalar::one()]
}

/// Sampling point used by the standard suites.
pub const STANDARD_T: f64 = 0.5;

/// Convergence report for `case` with the standard test function.
pub fn run_case(case: CaseTag, ladder_len: usize) -> Result<ConvergenceReport, ContlimError> {
    convergence_order(scaling(case), &standard_r(), TestFunction::Sin, STANDARD_T, &default_ladder(ladder_len))
}

/// Statistics of a first-integral check along a numeric ODE solution.
#[derive(Clone, Debug, Serialize)]
pub struct OdeRun {
    pub target: TargetTag,
    pub h: f64,
    pub steps: usize,
    pub k_initial: [f64; 2],
    /// `max_n |K(t_n) - K(0)|`.
    pub max_drift: [f64; 2],
    /// `max_drift / |K(0)|` (the absolute drift when `K(0) = 0`).
    pub relative_drift: [f64; 2],
}

struct Field {
    top: RationalExpr,
    k: [RationalExpr; 2],
    r: [f64; 3],
}

impl Field {
    fn bind<'a>(&'a self, y: &'a [f64; 4]) -> impl Fn(Var) -> Option<f64> + 'a {
        let rv = r_vars();
        move |v| match v.deriv_order() {
            Some(k) if k < 4 => Some(y[k as usize]),
            _ => rv.iter().position(|&p| p == v).map(|i| self.r[i]),
        }
    }

    fn rhs(&self, y: &[f64; 4]) -> [f64; 4] {
        let top = self.top.eval_f64(&self.bind(y)).expect("polynomial vector field");
        [y[1], y[2], y[3], top]
    }

    fn integrals(&self, y: &[f64; 4]) -> [f64; 2] {
        [0, 1].map(|i| self.k[i].eval_f64(&self.bind(y)).expect("polynomial integral"))
    }
}

fn rk4_step(f: &Field, y: &[f64; 4], h: f64) -> [f64; 4] {
    let add = |a: &[f64; 4], b: &[f64; 4], s: f64| [0, 1, 2, 3].map(|i| a[i] + s * b[i]);
    let k1 = f.rhs(y);
    let k2 = f.rhs(&add(y, &k1, h / 2.0));
    let k3 = f.rhs(&add(y, &k2, h / 2.0));
    let k4 = f.rhs(&add(y, &k3, h));
    [0, 1, 2, 3].map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// Small initial data `(x, x', x'', x''')` for reference runs.
pub const SMALL_IC: [f64; 4] = [0.01, 0.0, 0.0, 0.0];

/// Bound on the state beyond which a run is declared to blow up.
pub const BLOWUP_BOUND: f64 = 1e6;

/// Classical fourth-order Runge–Kutta run of a nonlinear target from
/// `ic = (x, x', x'', x''')`, tracking the drift of both first integrals.
pub fn ode_reference_run(tag: TargetTag, r: [f64; 3], ic: [f64; 4], h: f64, n: usize) -> Result<OdeRun, ContlimError> {
    let ints = continuum_integrals(tag)?;
    let field = Field { top: target(tag).top_derivative(), k: [ints.k1, ints.k2], r };
    let k0 = field.integrals(&ic);
    let mut y = ic;
    let mut drift = [0.0f64; 2];
    for step in 1..=n {
        y = rk4_step(&field, &y, h);
        if y.iter().any(|v| !v.is_finite() || v.abs() > BLOWUP_BOUND) {
            return Err(ContlimError::Blowup { t: step as f64 * h });
        }
        let k = field.integrals(&y);
        for i in 0..2 {
            drift[i] = drift[i].max((k[i] - k0[i]).abs());
        }
    }
    let rel = [0, 1].map(|i| if k0[i] == 0.0 { drift[i] } else { drift[i] / k0[i].abs() });
    Ok(OdeRun { target: tag, h, steps: n, k_initial: k0, max_drift: drift, relative_drift: rel })
}

/// Drift ratios between runs with steps `h` and `h/2` over the same
/// interval; fourth-order accuracy gives ratios near 16.
pub fn drift_ratio(tag: TargetTag, r: [f64; 3], ic: [f64; 4], h: f64, n: usize) -> Result<[f64; 2], ContlimError> {
    let (a, b) = rayon::join(|| ode_reference_run(tag, r, ic, h, n), || ode_reference_run(tag, r, ic, h / 2.0, 2 * n));
    let (a, b) = (a?, b?);
    Ok([0, 1].map(|i| a.max_drift[i] / b.max_drift[i]))
}

/// Leading behaviour of one discrete invariant on smooth samples.
#[derive(Clone, Debug, Serialize)]
pub struct CollapseFit {
    /// Points `(K1(t), (F - F|x≡0)/h^p)`.
    pub points: Vec<(f64, f64)>,
    /// Least-squares ratio through the origin.
    pub ratio: f64,
    pub r_squared: f64,
}

fn fit_through_origin(points: Vec<(f64, f64)>) -> CollapseFit {
    let sxy: f64 = points.iter().map(|(k, m)| k * m).sum();
    let sxx: f64 = points.iter().map(|(k, _)| k * k).sum();
    let ratio = sxy / sxx;
    let mean = points.iter().map(|p| p.1).sum::<f64>() / points.len() as f64;
    let ss_res: f64 = points.iter().map(|(k, m)| (m - ratio * k).powi(2)).sum();
    let ss_tot: f64 = points.iter().map(|(_, m)| (m - mean).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { if ss_res == 0.0 { 1.0 } else { 0.0 } } else { 1.0 - ss_res / ss_tot };
    CollapseFit { points, ratio, r_squared }
}

#[derive(Clone, Debug, Serialize)]
pub struct CollapseReport {
    pub case: CaseTag,
    pub h: f64,
    pub power: u32,
    pub i: CollapseFit,
    pub j: CollapseFit,
    pub listed_i_coefficient: Option<f64>,
    /// `|measured - listed| / |listed|` for `I`.
    pub i_relative_error: Option<f64>,
}

/// Sample times used by the collapse fits.
pub fn collapse_times() -> Vec<f64> {
    (0..12).map(|k| 0.3 + 0.5 * k as f64).collect()
}

/// Evaluates the canonical invariants on samples `x_{n+k} = x(t + kh)` under
/// the scaling, removes their value on `x ≡ 0`, divides by `h^p` and fits
/// the result against `K1` of the target.
pub fn invariant_collapse_check(case: CaseTag, r: &[Scalar; 3], h: &Scalar, ts: &[f64]) -> Result<CollapseReport, ContlimError> {
    let rule = scaling(case);
    if rule.target == TargetTag::Linear4 {
        return Err(ContlimError::Unsupported("the linear case has no collapsing invariants".into()));
    }
    let [a, b, g] = ["alpha", "beta", "gamma"].map(RationalExpr::param);
    let model = canonical_model(case, &a, &b, &g).map_err(|e| ContlimError::Unsupported(e.to_string()))?;
    let InvariantPair { i: inv_i, j: inv_j, .. } = model.invariants;
    let k1 = continuum_integrals(rule.target)?.k1;
    let abg = rule.params_at(h, r);
    let (offset, scale) = rule.affine_at(h, r);
    let ks = [1, 0, -1, -2];
    let zero = stencil(&TestFunction::Zero.jet(0.0, 0), h, &offset, &scale, &ks);
    let base = [eval_window(&inv_i, &zero, &abg)?, eval_window(&inv_j, &zero, &abg)?];
    let hp = h.pow(rule.invariant_power);
    let rv = r_vars();
    let per_t = ts
        .par_iter()
        .map(|&t| -> Result<(f64, f64, f64), ContlimError> {
            let jet = TestFunction::Sin.jet(t, JET_ORDER);
            let w = stencil(&jet, h, &offset, &scale, &ks);
            let mi = &(&eval_window(&inv_i, &w, &abg)? - &base[0]) / &hp;
            let mj = &(&eval_window(&inv_j, &w, &abg)? - &base[1]) / &hp;
            let kv = k1.eval_scalar(&|v| match v.deriv_order() {
                Some(k) => jet.get(k as usize).cloned(),
                None => rv.iter().position(|&p| p == v).map(|i| r[i].clone()),
            })?;
            Ok((kv.to_f64(), mi.to_f64(), mj.to_f64()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let i = fit_through_origin(per_t.iter().map(|p| (p.0, p.1)).collect());
    let j = fit_through_origin(per_t.iter().map(|p| (p.0, p.2)).collect());
    let listed = rule.listed_i_coefficient.map(|(n, d)| n as f64 / d as f64);
    let err = listed.map(|c| (i.ratio - c).abs() / c.abs());
    Ok(CollapseReport { case, h: h.to_f64(), power: rule.invariant_power, i, j, listed_i_coefficient: listed, i_relative_error: err })
}

/// Tolerance for agreement of a measured collapse coefficient.
pub const COLLAPSE_TOLERANCE: f64 = 0.05;

/// Roots of `μ⁴ + r1 μ² + r2`.
pub fn continuum_char_roots(r1: f64, r2: f64) -> [Complex64; 4] {
    let disc = Complex64::new(r1 * r1 - 4.0 * r2, 0.0).sqrt();
    let w1 = (Complex64::new(-r1, 0.0) + disc) / 2.0;
    let w2 = (Complex64::new(-r1, 0.0) - disc) / 2.0;
    let (m1, m2) = (w1.sqrt(), w2.sqrt());
    [m1, -m1, m2, -m2]
}

/// Roots of the palindromic `q⁴ + γq³ + βq² + γq + 1`, via `z = q + 1/q`.
pub fn discrete_char_roots(beta: f64, gamma: f64) -> [Complex64; 4] {
    let disc = Complex64::new(gamma * gamma - 4.0 * (beta - 2.0), 0.0).sqrt();
    let zs = [(Complex64::new(-gamma, 0.0) + disc) / 2.0, (Complex64::new(-gamma, 0.0) - disc) / 2.0];
    let mut out = [Complex64::new(0.0, 0.0); 4];
    for (i, z) in zs.iter().enumerate() {
        let d = (z * z - 4.0).sqrt();
        out[2 * i] = (z + d) / 2.0;
        out[2 * i + 1] = (z - d) / 2.0;
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct RootConvergence {
    pub r: [f64; 2],
    /// `(h, max_i |(q_i - 1)/h - μ_i|)`.
    pub errors: Vec<(f64, f64)>,
    pub slope: f64,
}

/// Distance between the rescaled characteristic roots of the linear
/// canonical form and those of the linear limit, along a ladder.
pub fn case5_root_convergence(r1: f64, r2: f64, ladder: &[f64]) -> RootConvergence {
    let mu = continuum_char_roots(r1, r2);
    let errors: Vec<(f64, f64)> = ladder
        .iter()
        .map(|&h| {
            let beta = 6.0 - 2.0 * r1 * h * h + r2 * h.powi(4);
            let gamma = -4.0 + r1 * h * h;
            let scaled: Vec<Complex64> = discrete_char_roots(beta, gamma).iter().map(|q| (q - 1.0) / h).collect();
            let err = mu
                .iter()
                .map(|m| scaled.iter().map(|s| (s - m).norm()).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max);
            (h, err)
        })
        .collect();
    let slope = log_log_slope(&errors);
    RootConvergence { r: [r1, r2], errors, slope }
}

#[cfg(test)]
mod tests;
