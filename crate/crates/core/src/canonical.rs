//! The five canonical forms of the integrable additive family.
//!
//! The polynomial `g(ξ) = A1·ξ² + A2·ξ + A3` of a family equation falls in
//! one of five classes according to its degree and root structure. A linear
//! point transformation `x = a·X + b` moves the roots of `g` to canonical
//! positions, and a reparametrisation leaves three free parameters
//! `α, β, γ`. For each class this module supplies the canonical equation,
//! its Lagrangian, its Poisson brackets and a pair of invariants.
//!
//! Irrational roots are handled exactly by adjoining a symbol `s` with
//! `s² = d`; every expression touched by the transformation is reduced to
//! the form `u + v·s`.

use serde::Serialize;

use crate::expr::algebraic::reduce_sqrt;
use crate::expr::{parse_closed, parse_expr, Bindings, ClosedForm, Context, ExprError, RationalExpr, Scalar, Var};
use crate::family::{build_equation, build_invariant_i, build_invariants, FamilyParams, InvariantPair};
use crate::lagrangian::{place, DiscreteLagrangian, Multiplier, StructuredEquation};
use crate::poisson::{poisson_of, PoissonError, PoissonStructure};
use crate::sample;

/// The five root structures of `g`, numbered 1 to 5.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseTag {
    TwoRealRoots,
    DoubleRoot,
    ComplexPair,
    Linear,
    Constant,
}

impl CaseTag {
    pub const ALL: [CaseTag; 5] =
        [CaseTag::TwoRealRoots, CaseTag::DoubleRoot, CaseTag::ComplexPair, CaseTag::Linear, CaseTag::Constant];

    pub fn number(self) -> u8 {
        match self {
            CaseTag::TwoRealRoots => 1,
            CaseTag::DoubleRoot => 2,
            CaseTag::ComplexPair => 3,
            CaseTag::Linear => 4,
            CaseTag::Constant => 5,
        }
    }

    pub fn from_number(n: u8) -> Option<CaseTag> {
        CaseTag::ALL.get((n as usize).checked_sub(1)?).copied()
    }

    fn index(self) -> usize {
        self.number() as usize - 1
    }

    /// `g` of the canonical form, in `ξ`.
    pub fn template_g(self) -> RationalExpr {
        let x = RationalExpr::var(Var::XI);
        let x2 = &x * &x;
        match self {
            CaseTag::TwoRealRoots => &x2 - &RationalExpr::one(),
            CaseTag::DoubleRoot => x2,
            CaseTag::ComplexPair => &x2 + &RationalExpr::one(),
            CaseTag::Linear => x,
            CaseTag::Constant => RationalExpr::one(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CanonicalError {
    #[error("A1, A2 and A3 are all zero")]
    AllZero,
    #[error("classification needs numeric A1, A2, A3")]
    NotNumeric,
    #[error("the scale a of x = a·X + b must be nonzero")]
    ZeroScale,
    #[error("template match failed: {0}")]
    TemplateMismatch(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Poisson(#[from] PoissonError),
}

/// An adjoined square root: `symbol² = square`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Radical {
    pub name: String,
    pub square: RationalExpr,
}

impl Radical {
    pub fn new(name: &str, square: RationalExpr) -> Self {
        Radical { name: name.to_string(), square }
    }

    pub fn symbol(&self) -> Var {
        Var::param(&self.name)
    }

    pub fn reduce(&self, e: &RationalExpr) -> Result<RationalExpr, ExprError> {
        reduce_sqrt(e, self.symbol(), &self.square)
    }
}

fn reduce_opt(r: Option<&Radical>, e: RationalExpr) -> Result<RationalExpr, ExprError> {
    match r {
        Some(r) => r.reduce(&e),
        None => Ok(e),
    }
}

/// Roots and leading coefficient of `g` in the parametrisation of each case.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RootData {
    /// `g = κ(ξ - r1)(ξ - r2)` with `r1 < r2`.
    TwoReal { kappa: RationalExpr, r1: RationalExpr, r2: RationalExpr },
    /// `g = κ(ξ - r0)²`.
    Double { kappa: RationalExpr, r0: RationalExpr },
    /// `g = κ((ξ - μ)² + ν²)` with `ν > 0`.
    Complex { kappa: RationalExpr, mu: RationalExpr, nu: RationalExpr },
    /// `g = μξ + ν`.
    Linear { mu: RationalExpr, nu: RationalExpr },
    /// `g = κ`.
    Constant { kappa: RationalExpr },
}

impl RootData {
    pub fn tag(&self) -> CaseTag {
        match self {
            RootData::TwoReal { .. } => CaseTag::TwoRealRoots,
            RootData::Double { .. } => CaseTag::DoubleRoot,
            RootData::Complex { .. } => CaseTag::ComplexPair,
            RootData::Linear { .. } => CaseTag::Linear,
            RootData::Constant { .. } => CaseTag::Constant,
        }
    }

    /// The transformation `x = a·X + b` that brings `g` to its canonical form.
    pub fn transform(&self) -> (RationalExpr, RationalExpr) {
        let two = RationalExpr::int(2);
        match self {
            RootData::TwoReal { r1, r2, .. } => (&(r2 - r1) / &two, &(r1 + r2) / &two),
            RootData::Double { r0, .. } => (RationalExpr::one(), r0.clone()),
            RootData::Complex { mu, nu, .. } => (nu.clone(), mu.clone()),
            RootData::Linear { mu, nu } => (mu.inv().expect("μ ≠ 0"), -&(nu / mu)),
            RootData::Constant { .. } => (RationalExpr::one(), RationalExpr::zero()),
        }
    }
}

/// Output of [`classify_g`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub tag: CaseTag,
    pub roots: RootData,
    pub a: RationalExpr,
    pub b: RationalExpr,
    pub radical: Option<Radical>,
    pub note: Option<String>,
}

/// Name of the adjoined square root of the discriminant.
pub const RADICAL_NAME: &str = "s";

/// Classifies `g = A1·ξ² + A2·ξ + A3` with exact rational coefficients.
pub fn classify_g(a1: &Scalar, a2: &Scalar, a3: &Scalar) -> Result<Classification, CanonicalError> {
    let c = |s: &Scalar| RationalExpr::scalar(s.clone());
    let roots = if !a1.is_zero() {
        let disc = &(a2 * a2) - &(&Scalar::from_int(4) * &(a1 * a3));
        let two_a1 = &Scalar::from_int(2) * a1;
        let centre = c(&(&-a2 / &two_a1));
        let half_width = |d: &Scalar| -> (RationalExpr, Option<Radical>) {
            // √d / (2|A1|), exact when d is a square.
            let den = c(&two_a1.abs());
            match d.sqrt_exact() {
                Some(r) => (&c(&r) / &den, None),
                None => {
                    let rad = Radical::new(RADICAL_NAME, c(d));
                    (&RationalExpr::var(rad.symbol()) / &den, Some(rad))
                }
            }
        };
        match disc.signum() {
            1 => {
                let (w, rad) = half_width(&disc);
                let roots = RootData::TwoReal { kappa: c(a1), r1: &centre - &w, r2: &centre + &w };
                (roots, rad)
            }
            0 => (RootData::Double { kappa: c(a1), r0: centre }, None),
            _ => {
                let (nu, rad) = half_width(&-&disc);
                (RootData::Complex { kappa: c(a1), mu: centre, nu }, rad)
            }
        }
    } else if !a2.is_zero() {
        (RootData::Linear { mu: c(a2), nu: c(a3) }, None)
    } else if !a3.is_zero() {
        (RootData::Constant { kappa: c(a3) }, None)
    } else {
        return Err(CanonicalError::AllZero);
    };
    let (roots, radical) = roots;
    let (a, b) = roots.transform();
    let a = reduce_opt(radical.as_ref(), a)?;
    let b = reduce_opt(radical.as_ref(), b)?;
    let note = match roots.tag() {
        CaseTag::TwoRealRoots => Some("roots ordered r1 < r2; swapping them flips X -> -X".to_string()),
        _ => None,
    };
    Ok(Classification { tag: roots.tag(), roots, a, b, radical, note })
}

/// [`classify_g`] on the `g` of a parameter set.
pub fn classify_params(p: &FamilyParams) -> Result<Classification, CanonicalError> {
    let num = |e: &RationalExpr| e.constant_value().ok_or(CanonicalError::NotNumeric);
    classify_g(&num(&p.a1)?, &num(&p.a2)?, &num(&p.a3)?)
}

fn bind_xi_eta(xi: RationalExpr, eta: RationalExpr) -> Bindings {
    let mut b = Bindings::new();
    b.insert(Var::XI, xi);
    b.insert(Var::ETA, eta);
    b
}

/// The equation satisfied by `X` when `x = a·X + b`, divided by `a²`:
///
/// ```text
/// g̃(ξ)   = g(aξ + b) / a
/// M̃(ξ,η) = [b·g(aξ+b) + λ·g'(aη+b)·(abξ + b²/2) + M(aξ+b, aη+b)] / a²
/// Ñ(ξ,η) = [bλ²·g(aη+b) + λ·g'(aξ+b)·(abη + b²/2) + N(aξ+b, aη+b)] / a²
/// ```
pub fn apply_linear_transform(
    eq: &StructuredEquation,
    a: &RationalExpr,
    b: &RationalExpr,
) -> Result<StructuredEquation, CanonicalError> {
    apply_linear_transform_in(eq, a, b, None)
}

/// [`apply_linear_transform`] with `a`, `b` in a quadratic extension.
pub fn apply_linear_transform_in(
    eq: &StructuredEquation,
    a: &RationalExpr,
    b: &RationalExpr,
    radical: Option<&Radical>,
) -> Result<StructuredEquation, CanonicalError> {
    if a.is_zero() {
        return Err(CanonicalError::ZeroScale);
    }
    let red = |e: RationalExpr| reduce_opt(radical, e);
    let xi = RationalExpr::var(Var::XI);
    let eta = RationalExpr::var(Var::ETA);
    let sx = red(&(a * &xi) + b)?;
    let se = red(&(a * &eta) + b)?;
    let both = bind_xi_eta(sx.clone(), se.clone());
    let g_at = |arg: &RationalExpr| eq.g.substitute_one(Var::XI, arg);
    let dg = eq.g.differentiate(Var::XI);
    let dg_at = |arg: &RationalExpr| dg.substitute_one(Var::XI, arg);
    let (l, l2) = (&eq.lambda.value, &eq.lambda.square);
    let half_b2 = &(b * b) / &RationalExpr::int(2);
    let a2 = red(a * a)?;

    let g = red(&g_at(&sx)? / a)?;
    let m = &(b * &g_at(&sx)?) + &(&(l * &dg_at(&se)?) * &(&(&(a * b) * &xi) + &half_b2));
    let m = red(&(&m + &eq.m.substitute(&both)?) / &a2)?;
    let n = &(&(b * l2) * &g_at(&se)?) + &(&(l * &dg_at(&sx)?) * &(&(&(a * b) * &eta) + &half_b2));
    let n = red(&(&n + &eq.n.substitute(&both)?) / &a2)?;
    let mut out = StructuredEquation::new(g, eq.lambda.clone(), eq.lambda.reduce(&m), eq.lambda.reduce(&n));
    out.k = eq.k.clone();
    Ok(out)
}

/// Divides `g`, `M` and `N` by a nonzero constant.
pub fn scale_equation(
    eq: &StructuredEquation,
    c: &RationalExpr,
    radical: Option<&Radical>,
) -> Result<StructuredEquation, CanonicalError> {
    let inv = reduce_opt(radical, c.inv()?)?;
    let f = |e: &RationalExpr| reduce_opt(radical, e * &inv);
    let mut out = StructuredEquation::new(f(&eq.g)?, eq.lambda.clone(), f(&eq.m)?, f(&eq.n)?);
    out.k = eq.k.clone();
    Ok(out)
}

fn ctx() -> Context {
    Context::new(&["alpha", "beta", "gamma", "kappa", "r0", "r1", "r2", "mu", "nu", "A8", "i"])
}

fn parse(s: &str) -> RationalExpr {
    parse_expr(s, &ctx()).expect("built-in formula parses")
}

fn abg_bindings(alpha: &RationalExpr, beta: &RationalExpr, gamma: &RationalExpr) -> Bindings {
    let mut b = Bindings::new();
    b.insert(Var::param("alpha"), alpha.clone());
    b.insert(Var::param("beta"), beta.clone());
    b.insert(Var::param("gamma"), gamma.clone());
    b
}

fn with_abg(s: &str, alpha: &RationalExpr, beta: &RationalExpr, gamma: &RationalExpr) -> RationalExpr {
    parse(s).substitute(&abg_bindings(alpha, beta, gamma)).expect("polynomial in the parameters")
}

/// The canonical equations as printed, in `x[k]` and `alpha, beta, gamma`.
pub const CANONICAL_EQUATIONS: [&str; 5] = [
    "(x[1]^2-1)*x[2] + (x[-1]^2-1)*x[-2] + x[0]*(x[1]+x[-1])^2 + gamma*(x[1]+x[-1]) + (alpha*x[0]+beta)/(x[0]^2-1)",
    "x[1]^2*x[2] + x[-1]^2*x[-2] + x[0]*(x[1]+x[-1])^2 + gamma*(x[1]+x[-1]) + alpha/x[0]^2 + beta/x[0]",
    "(x[1]^2+1)*x[2] + (x[-1]^2+1)*x[-2] + x[0]*(x[1]+x[-1])^2 + gamma*(x[1]+x[-1]) + (alpha+beta*x[0])/(x[0]^2+1)",
    "x[1]*x[2] + x[-1]*x[-2] + x[0]*(x[0]+2*x[1]+2*x[-1]) + (x[1]+x[-1])^2 - x[1]*x[-1] + gamma*(x[0]+x[1]+x[-1]) + alpha/x[0] + beta",
    "x[2] + x[-2] + gamma*(x[1]+x[-1]) + beta*x[0] + alpha",
];

/// The canonical Lagrangians `L(x[0], x[1], x[2])`.
pub const CANONICAL_LAGRANGIANS: [&str; 5] = [
    "(x[1]^2-1)*x[2]*x[0] + x[0]^2*x[1]^2/2 + gamma*x[0]*x[1] + alpha/2*log(x[0]^2-1) + beta/2*log((x[0]-1)/(x[0]+1))",
    "x[1]^2*x[0]*x[2] + x[0]^2*x[1]^2/2 + gamma*x[0]*x[1] - alpha/x[0] + beta*log(x[0])",
    "(x[1]^2+1)*x[0]*x[2] + x[0]^2*x[1]^2/2 + gamma*x[0]*x[1] + alpha*arctan(x[0]) + beta/2*log(x[0]^2+1)",
    "x[0]*x[1]*x[2] + x[0]^2*x[1] + x[0]*x[1]^2 + x[0]^3/3 + alpha*log(x[0]) + beta*x[0] + gamma*x[0]*(x[1]+x[0]/2)",
    "x[0]*x[2] + alpha*x[0] + beta/2*x[0]^2 + gamma*x[0]*x[1]",
];

/// The third Lagrangian with the coefficients of its transcendental terms as
/// printed: its Euler-Lagrange equation is not the third canonical form.
pub const LAGRANGIAN_3_PRINTED: &str =
    "(x[1]^2+1)*x[0]*x[2] + x[0]^2*x[1]^2/2 + gamma*x[0]*x[1] + alpha/2*arctan(x[0]) + beta*log(x[0]^2+1)";

/// Nonzero brackets `{x[1],x[-1]}`, `{x[1],x[-2]}`, `{x[0],x[-2]}`.
pub const BRACKET_TABLES: [[&str; 3]; 5] = [
    [
        "-1/(x[0]^2-1)",
        "(2*x[0]*x[-1]+2*x[0]*x[1]+2*x[-2]*x[-1]+gamma)/(x[0]^2*x[-1]^2-x[0]^2-x[-1]^2+1)",
        "-1/(x[-1]^2-1)",
    ],
    ["-1/x[0]^2", "(2*x[0]*x[-1]+2*x[0]*x[1]+2*x[-2]*x[-1]+gamma)/(x[0]^2*x[-1]^2)", "-1/x[-1]^2"],
    [
        "-1/(x[0]^2+1)",
        "(2*x[0]*x[-1]+2*x[0]*x[1]+2*x[-2]*x[-1]+gamma)/((x[0]^2+1)*(x[-1]^2+1))",
        "-1/(x[-1]^2+1)",
    ],
    ["-1/x[0]", "(2*x[0]+2*x[-1]+x[-2]+x[1]+gamma)/(x[0]*x[-1])", "-1/x[-1]"],
    ["-1", "gamma", "-1"],
];

/// The middle bracket of the third table with its denominator as printed.
pub const BRACKET_3_MIDDLE_PRINTED: &str =
    "(2*x[0]*x[-1]+2*x[0]*x[1]+2*x[-2]*x[-1]+gamma)/(x[0]^2*x[-1]^2+x[0]^2+x[1]^2+1)";

/// Second invariant of the fourth canonical form.
pub const J4: &str = "-alpha*gamma*(x[0]+x[-1]) - beta*gamma*x[0]*x[-1] - gamma^2*x[0]*x[-1]*(x[0]+x[-1]) \
    + alpha*(x[0]^2+2*x[0]*x[-1]+x[0]*x[1]+x[-2]*x[-1]+x[-1]^2) \
    + beta*x[0]*x[-1]*(x[0]+x[-2]+x[-1]+x[1]) \
    + gamma*x[0]*x[-1]*(x[0]*x[-2]+2*x[-2]*x[1]+x[-1]*x[1]) \
    + x[0]*x[-1]*(x[0]+x[-2]+x[-1]+x[1])*(x[0]^2+2*x[0]*x[-1]+x[0]*x[1]+x[-2]*x[-1]+x[-1]^2)";

/// Second invariant of the fifth canonical form.
pub const J5: &str = "alpha*(x[0]+x[-2]+x[-1]+x[1]) - alpha*gamma*(x[0]+x[-1]) - beta*gamma*x[0]*x[-1] \
    + beta*(x[0]*x[-2]+x[-1]*x[1]) + 2*gamma*x[1]*x[-2] - gamma^2*(x[0]^2+x[-1]^2) \
    + x[0]^2+x[-2]^2+x[-1]^2+x[1]^2";

/// Family parameters whose equation is the canonical form itself (`A8 = 0`).
pub fn representative_params(tag: CaseTag, alpha: &RationalExpr, beta: &RationalExpr, gamma: &RationalExpr) -> FamilyParams {
    let i = RationalExpr::int;
    let one = i(1);
    let v = match tag {
        CaseTag::TwoRealRoots => [i(1), i(0), i(-1), beta.clone(), alpha - &one, gamma.clone(), i(0)],
        CaseTag::DoubleRoot => [i(1), i(0), i(0), alpha.clone(), beta.clone(), gamma.clone(), i(0)],
        CaseTag::ComplexPair => [i(1), i(0), i(1), alpha.clone(), beta - &one, gamma.clone(), i(0)],
        CaseTag::Linear => [i(0), i(1), i(0), alpha.clone(), beta.clone(), gamma.clone(), i(0)],
        CaseTag::Constant => [i(0), i(0), i(1), alpha.clone(), beta - &one, gamma.clone(), i(0)],
    };
    FamilyParams::new(v).expect("g is nonzero")
}

/// The canonical equation as printed, as a rational expression.
pub fn canonical_expression(tag: CaseTag, alpha: &RationalExpr, beta: &RationalExpr, gamma: &RationalExpr) -> RationalExpr {
    with_abg(CANONICAL_EQUATIONS[tag.index()], alpha, beta, gamma)
}

/// The canonical Lagrangian as a closed form.
pub fn canonical_lagrangian(tag: CaseTag, alpha: &RationalExpr, beta: &RationalExpr, gamma: &RationalExpr) -> ClosedForm {
    let l = parse_closed(CANONICAL_LAGRANGIANS[tag.index()], &ctx()).expect("built-in Lagrangian parses");
    l.substitute(&abg_bindings(alpha, beta, gamma)).expect("polynomial in the parameters")
}

/// The printed bracket table as a [`PoissonStructure`].
pub fn bracket_table(tag: CaseTag, alpha: &RationalExpr, beta: &RationalExpr, gamma: &RationalExpr) -> PoissonStructure {
    let t = BRACKET_TABLES[tag.index()];
    let e = |s: &str| with_abg(s, alpha, beta, gamma);
    PoissonStructure::from_entries(&[(1, -1, e(t[0])), (1, -2, e(t[1])), (0, -2, e(t[2]))])
}

/// Equation, Lagrangian, brackets and invariants of a canonical form.
#[derive(Clone, Debug, Serialize)]
pub struct CanonicalModel {
    pub tag: CaseTag,
    pub equation: StructuredEquation,
    pub lagrangian: DiscreteLagrangian,
    pub lagrangian_closed: ClosedForm,
    pub poisson: PoissonStructure,
    pub printed_poisson: PoissonStructure,
    pub invariants: InvariantPair,
}

pub fn canonical_model(
    tag: CaseTag,
    alpha: &RationalExpr,
    beta: &RationalExpr,
    gamma: &RationalExpr,
) -> Result<CanonicalModel, CanonicalError> {
    let rep = representative_params(tag, alpha, beta, gamma);
    let equation = build_equation(&rep);
    let closed = canonical_lagrangian(tag, alpha, beta, gamma);
    let g = tag.template_g();
    let core = &(&place(&g, 1, 1) * &RationalExpr::x(0)) * &RationalExpr::x(2);
    let v = closed.sub(&ClosedForm::from(core)).rename(&|v| match v.shift_offset() {
        Some(1) => Var::XI,
        Some(0) => Var::ETA,
        _ => v,
    });
    let lagrangian = DiscreteLagrangian::from_potential(g, Multiplier::one(), v);
    let poisson = poisson_of(&lagrangian)?;
    let invariants = match tag {
        CaseTag::Linear => InvariantPair::new(build_invariant_i(&rep), with_abg(J4, alpha, beta, gamma)),
        CaseTag::Constant => InvariantPair::new(build_invariant_i(&rep), with_abg(J5, alpha, beta, gamma)),
        _ => build_invariants(&rep),
    };
    Ok(CanonicalModel {
        tag,
        equation,
        lagrangian,
        lagrangian_closed: closed,
        poisson,
        printed_poisson: bracket_table(tag, alpha, beta, gamma),
        invariants,
    })
}

/// Forward parameter maps `(α, β, γ, root data, A8) -> A1, ..., A8`.
const PAR_MAPS: [[&str; 6]; 5] = [
    [
        "kappa",
        "-kappa*(r1+r2)",
        "kappa*r1*r2",
        "-kappa*(32*A8*r1*r2 + alpha*kappa*(r1^5 - 3*r1^4*r2 + 2*r1^3*r2^2 + 2*r1^2*r2^3 - 3*r1*r2^4 + r2^5) \
         + beta*kappa*(r1-r2)^5 + 8*gamma*kappa*r1*r2*(r1^3 - r1^2*r2 - r1*r2^2 + r2^3) \
         + 16*kappa*r1*r2*(r1^3 + 5*r1^2*r2 + 5*r1*r2^2 + r2^3))/32",
        "kappa*(16*A8*(r1+r2) + alpha*kappa*(r1-r2)^4 + 4*gamma*kappa*(r1^2-r2^2)^2 \
         + 8*kappa*(r1^4 + 8*r1^3*r2 + 12*r1^2*r2^2 + 8*r1*r2^3 + r2^4))/16",
        "kappa*(gamma*(r1-r2)^2 + 6*(r1+r2)^2)/4",
    ],
    [
        "kappa",
        "-2*kappa*r0",
        "kappa*r0^2",
        "kappa*(alpha*kappa - 6*kappa*r0^5 - 2*gamma*kappa*r0^3 - beta*kappa*r0 - A8*r0^2)",
        "kappa*(15*kappa*r0^4 + 4*gamma*kappa*r0^2 + beta*kappa + 2*A8*r0)",
        "kappa*(6*r0^2 + gamma)",
    ],
    [
        "kappa",
        "-2*kappa*mu",
        "kappa*(mu^2+nu^2)",
        "kappa^2*(alpha*nu^5 - nu^4*(beta*mu + 2*mu + 2*gamma*mu) - 2*mu^3*nu^2*(gamma+4) - 6*mu^5) - kappa*A8*(mu^2+nu^2)",
        "kappa*(beta*kappa*nu^4 + 4*gamma*kappa*mu^2*nu^2 + 15*kappa*mu^4 + 6*kappa*mu^2*nu^2 - kappa*nu^4 + 2*A8*mu)",
        "kappa*(gamma*nu^2 + 6*mu^2)",
    ],
    [
        "0",
        "mu",
        "nu",
        "(nu^3 - (6*nu+gamma)*nu^2 + (4*gamma*nu - A8*mu + 15*nu^2 + beta)*nu + alpha)/mu",
        "4*gamma*nu - A8*mu + 15*nu^2 + beta",
        "6*nu + gamma",
    ],
    ["0", "0", "kappa", "kappa*(alpha*kappa - A8)", "kappa^2*(beta-1)", "kappa*gamma"],
];

/// The first-case map with `A5`, `A6`, `A7` as printed, in `δ = r2 - r1`.
const PAR2_PRINTED: [&str; 3] = [
    "-(((beta+gamma)*(r2-r1)^5/32 + (alpha+beta/4+2)*r2*(r2-r1)^4/4 + (alpha+6)*3*r2^2*(r2-r1)^3/4 \
     + (alpha+26)*r2^3*(r2-r1)^2/2 + 15*r2^4*(r2-r1) + 6*r2^5)*kappa + A8*r2*((r2-r1)+r2))*kappa",
    "2*kappa*(((alpha/8+beta/32+1/4)*(r2-r1)^4 + r2/2*(alpha+6)*(r2-r1)^3 + r2^2/2*(alpha+21)*(r2-r1)^2 \
     + 15*(r2-r1)*r2^3 + 15*r2^4/2)*kappa + A8*(r2+(r2-r1)/2))",
    "kappa/4*(alpha+6)*(r2-r1)^2 + 6*kappa*(r2-r1)*r2 + 6*kappa*r2^2",
];

fn root_bindings(roots: &RootData, a8: &RationalExpr) -> Bindings {
    let mut b = Bindings::new();
    let mut put = |n: &str, e: &RationalExpr| {
        b.insert(Var::param(n), e.clone());
    };
    put("A8", a8);
    match roots {
        RootData::TwoReal { kappa, r1, r2 } => {
            put("kappa", kappa);
            put("r1", r1);
            put("r2", r2);
        }
        RootData::Double { kappa, r0 } => {
            put("kappa", kappa);
            put("r0", r0);
        }
        RootData::Complex { kappa, mu, nu } => {
            put("kappa", kappa);
            put("mu", mu);
            put("nu", nu);
        }
        RootData::Linear { mu, nu } => {
            put("mu", mu);
            put("nu", nu);
        }
        RootData::Constant { kappa } => put("kappa", kappa),
    }
    b
}

fn eval_map(
    formulas: &[&str],
    roots: &RootData,
    alpha: &RationalExpr,
    beta: &RationalExpr,
    gamma: &RationalExpr,
    a8: &RationalExpr,
    radical: Option<&Radical>,
) -> Result<Vec<RationalExpr>, CanonicalError> {
    let mut b = root_bindings(roots, a8);
    b.extend(abg_bindings(alpha, beta, gamma));
    formulas.iter().map(|f| Ok(reduce_opt(radical, parse(f).substitute(&b)?)?)).collect()
}

/// Family parameters generated from canonical ones by the forward maps.
pub fn par_map(
    roots: &RootData,
    alpha: &RationalExpr,
    beta: &RationalExpr,
    gamma: &RationalExpr,
    a8: &RationalExpr,
    radical: Option<&Radical>,
) -> Result<FamilyParams, CanonicalError> {
    let v = eval_map(&PAR_MAPS[roots.tag().index()], roots, alpha, beta, gamma, a8, radical)?;
    let [a1, a2, a3, a5, a6, a7]: [RationalExpr; 6] = v.try_into().expect("six formulas");
    Ok(FamilyParams { a1, a2, a3, a5, a6, a7, a8: a8.clone() })
}

/// `A5, A6, A7` of the first case as printed.
pub fn par2_printed(
    roots: &RootData,
    alpha: &RationalExpr,
    beta: &RationalExpr,
    gamma: &RationalExpr,
    a8: &RationalExpr,
) -> Result<[RationalExpr; 3], CanonicalError> {
    let v = eval_map(&PAR2_PRINTED, roots, alpha, beta, gamma, a8, None)?;
    Ok(v.try_into().expect("three formulas"))
}

/// Result of [`to_canonical`].
#[derive(Clone, Debug, Serialize)]
pub struct CanonicalCase {
    pub tag: CaseTag,
    pub case_number: u8,
    pub roots: RootData,
    pub a: RationalExpr,
    pub b: RationalExpr,
    pub radical: Option<Radical>,
    /// Constant divided out so that `g` takes its canonical form.
    pub scale: RationalExpr,
    pub alpha: RationalExpr,
    pub beta: RationalExpr,
    pub gamma: RationalExpr,
    /// The transformed equation in the variational template.
    pub transformed: StructuredEquation,
    /// The canonical equation with the matched parameters.
    pub equation: String,
    /// Whether the forward parameter map reproduces `A5, A6, A7`.
    pub par_map_consistent: bool,
    pub note: Option<String>,
}

/// Solves `B·c = r` for three unknowns with scalar `B`.
fn solve3(rows: &[[Scalar; 3]; 3], rhs: &[RationalExpr; 3]) -> Option<[RationalExpr; 3]> {
    let m = rows;
    let det = |m: &[[Scalar; 3]; 3]| {
        let t = |a: usize, b: usize, c: usize| &(&m[0][a] * &m[1][b]) * &m[2][c];
        let p = &(&t(0, 1, 2) + &t(1, 2, 0)) + &t(2, 0, 1);
        let n = &(&t(2, 1, 0) + &t(0, 2, 1)) + &t(1, 0, 2);
        &p - &n
    };
    let d = det(m);
    if d.is_zero() {
        return None;
    }
    // Cramer's rule: c_k = Σ_i cof_ik·r_i / d.
    let mut out: [RationalExpr; 3] = std::array::from_fn(|_| RationalExpr::zero());
    for (k, slot) in out.iter_mut().enumerate() {
        for (i, r) in rhs.iter().enumerate() {
            let mut unit = m.clone();
            for (row, line) in unit.iter_mut().enumerate() {
                line[k] = if row == i { Scalar::one() } else { Scalar::zero() };
            }
            let w = &det(&unit) / &d;
            if !w.is_zero() {
                *slot = &*slot + &r.scale(&w);
            }
        }
    }
    Some(out)
}

/// Reads `α, β, γ` by matching `t` against the (affine in `α, β, γ`)
/// canonical template at sampled window points, then verifies the match
/// symbolically.
pub fn match_template(
    tag: CaseTag,
    t: &RationalExpr,
    radical: Option<&Radical>,
) -> Result<[RationalExpr; 3], CanonicalError> {
    let z = RationalExpr::zero();
    let names = ["alpha", "beta", "gamma"];
    let sym = names.map(RationalExpr::param);
    let tmpl = canonical_expression(tag, &sym[0], &sym[1], &sym[2]);
    let e0 = canonical_expression(tag, &z, &z, &z);
    let basis = names.map(|n| tmpl.differentiate(Var::param(n)));
    let r = t - &e0;
    let window: Vec<Var> = (-2..=2).map(Var::shift).collect();
    let mut rows: Vec<([Scalar; 3], RationalExpr)> = Vec::new();
    let mut found = None;
    for k in 0..64u64 {
        let mut rng = sample::stream(sample::DEFAULT_SEED, k);
        let pt = sample::point(&mut rng, &window, 9, 5);
        let f = |v: Var| pt.iter().find(|(w, _)| *w == v).map(|(_, s)| s.clone());
        let Ok(row) = basis.iter().map(|e| e.eval_scalar(&f)).collect::<Result<Vec<_>, _>>() else { continue };
        let Ok(rv) = r.eval_partial(&f) else { continue };
        let Ok(rv) = reduce_opt(radical, rv) else { continue };
        rows.push(([row[0].clone(), row[1].clone(), row[2].clone()], rv));
        let n = rows.len();
        if n < 3 {
            continue;
        }
        for i in 0..n - 2 {
            for j in i + 1..n - 1 {
                let m = [rows[i].0.clone(), rows[j].0.clone(), rows[n - 1].0.clone()];
                let rhs = [rows[i].1.clone(), rows[j].1.clone(), rows[n - 1].1.clone()];
                if let Some(c) = solve3(&m, &rhs) {
                    found = Some(c);
                    break;
                }
            }
            if found.is_some() {
                break;
            }
        }
        if found.is_some() {
            break;
        }
    }
    let c = found.ok_or_else(|| CanonicalError::TemplateMismatch("no independent sample points".into()))?;
    let c: Vec<RationalExpr> = c.into_iter().map(|e| reduce_opt(radical, e)).collect::<Result<_, _>>()?;
    let c: [RationalExpr; 3] = c.try_into().expect("three unknowns");
    let back = canonical_expression(tag, &c[0], &c[1], &c[2]);
    let diff = reduce_opt(radical, &back - t)?;
    if !diff.is_zero() {
        return Err(CanonicalError::TemplateMismatch(format!("residual {}", diff)));
    }
    Ok(c)
}

/// Classifies, transforms and reads off the canonical parameters.
pub fn to_canonical(p: &FamilyParams) -> Result<(CanonicalCase, CanonicalModel), CanonicalError> {
    let cl = classify_params(p)?;
    let rad = cl.radical.as_ref();
    let eq = build_equation(p);
    let moved = apply_linear_transform_in(&eq, &cl.a, &cl.b, rad)?;
    let ratio = reduce_opt(rad, &moved.g / &cl.tag.template_g())?;
    if ratio.contains_var(Var::XI) {
        return Err(CanonicalError::TemplateMismatch(format!("transformed g = {} is not a multiple of the template", moved.g)));
    }
    let transformed = scale_equation(&moved, &ratio, rad)?;
    let t = reduce_opt(rad, transformed.expression())?;
    let [alpha, beta, gamma] = match_template(cl.tag, &t, rad)?;
    let forward = par_map(&cl.roots, &alpha, &beta, &gamma, &p.a8, rad)?;
    let same = |x: &RationalExpr, y: &RationalExpr| reduce_opt(rad, x - y).map(|d| d.is_zero()).unwrap_or(false);
    let par_map_consistent = same(&forward.a1, &p.a1)
        && same(&forward.a2, &p.a2)
        && same(&forward.a3, &p.a3)
        && same(&forward.a5, &p.a5)
        && same(&forward.a6, &p.a6)
        && same(&forward.a7, &p.a7);
    let model = canonical_model(cl.tag, &alpha, &beta, &gamma)?;
    let case = CanonicalCase {
        tag: cl.tag,
        case_number: cl.tag.number(),
        equation: format!("{} = 0", canonical_expression(cl.tag, &alpha, &beta, &gamma)),
        roots: cl.roots,
        a: cl.a,
        b: cl.b,
        radical: cl.radical,
        scale: ratio,
        alpha,
        beta,
        gamma,
        transformed,
        par_map_consistent,
        note: cl.note,
    };
    Ok((case, model))
}

/// Checks that `X -> -iX`, `(α, β, γ) -> (iβ, α, -γ)` carries the first
/// canonical form to `i` times the third, over Gaussian rationals. Returns
/// the residual, which is zero when the identity holds. `gamma_sign` is the
/// sign of `γ` in the parameter map (`-1` for the true identity).
pub fn complex_equivalence_residual(gamma_sign: i64) -> RationalExpr {
    let i = RationalExpr::param("i");
    let rad = Radical::new("i", RationalExpr::int(-1));
    let (a, b, g) = (RationalExpr::param("alpha"), RationalExpr::param("beta"), RationalExpr::param("gamma"));
    let first = canonical_expression(CaseTag::TwoRealRoots, &a, &b, &g);
    let mut sub = Bindings::new();
    for k in -2..=2 {
        sub.insert(Var::shift(k), -&(&i * &RationalExpr::x(k)));
    }
    let lhs = first.substitute(&sub).expect("no poles");
    let third = canonical_expression(CaseTag::ComplexPair, &(&i * &b), &a, &g.scale(&Scalar::from_int(gamma_sign)));
    let rhs = &i * &third;
    rad.reduce(&(&lhs - &rhs)).expect("the Gaussian norm of a nonzero expression is nonzero")
}

pub fn case3_complex_equivalence_check() -> bool {
    complex_equivalence_residual(-1).is_zero()
}
