//! Variational test for additive fourth-order equations.
//!
//! An additive equation `A·x[2] + B·x[-2] + C = 0` (with `A`, `B`, `C`
//! depending on `x[1]`, `x[0]`, `x[-1]`) is variational exactly when it can
//! be written as
//!
//! ```text
//! g(x[1])·x[2] + λ²·g(x[-1])·x[-2] + λ·g'(x[0])·x[1]·x[-1] + M(x[1],x[0]) + N(x[0],x[-1]) = 0
//! ```
//!
//! with `λ·∂M/∂ξ = ∂N/∂η`. The Lagrangian is then
//! `L_n = λ^(-n)·[g(x[1])·x[0]·x[2] + V(x[1],x[0])]` where `∂V/∂η = M` and
//! `λ·∂V/∂ξ = N`. Placeholders: `M(ξ,η)` and `V(ξ,η)` are read at
//! `(x[1], x[0])`, `N(ξ,η)` at `(x[0], x[-1])`.
//!
//! The multiplier `λ` is the parameter named `lambda`. When `λ²` is a
//! positive rational square, both signs of `λ` are substituted and tested;
//! otherwise `lambda` stays symbolic and every identity is reduced modulo
//! `lambda² = λ²`.

mod integrate;

pub use integrate::integrate;

use serde::Serialize;

use crate::expr::algebraic::reduce_sqrt;
use crate::expr::gcd::{div_exact, gcd_many};
use crate::expr::{Bindings, ClosedForm, Poly, RationalExpr, Scalar, Var};

/// The parameter that stands for the multiplier `λ`.
pub fn lambda_var() -> Var {
    Var::param("lambda")
}

/// Errors that stop the test before a verdict on variationality.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EquationError {
    #[error("not additive: {0}")]
    NotAdditive(String),
    #[error("not invertible: {0}")]
    NotInvertible(String),
    #[error("non-normal Lagrangian: {0}")]
    NonNormal(String),
}

/// The multiplier `λ`: either an exact rational, or the symbol `lambda`
/// with the relation `lambda² = square`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Multiplier {
    pub value: RationalExpr,
    pub square: RationalExpr,
}

impl Multiplier {
    pub fn numeric(l: Scalar) -> Self {
        let v = RationalExpr::scalar(l);
        Multiplier { square: &v * &v, value: v }
    }

    pub fn one() -> Self {
        Self::numeric(Scalar::one())
    }

    pub fn symbolic(square: RationalExpr) -> Self {
        Multiplier { value: RationalExpr::var(lambda_var()), square }
    }

    pub fn is_symbolic(&self) -> bool {
        !self.value.is_constant()
    }

    pub fn is_one(&self) -> bool {
        self.value.is_one()
    }

    /// Applies the multiplier: substitutes a numeric value for `lambda`, or
    /// reduces modulo `lambda² = square`.
    pub fn reduce(&self, e: &RationalExpr) -> RationalExpr {
        let l = lambda_var();
        if !e.contains_var(l) {
            return e.clone();
        }
        if self.is_symbolic() {
            reduce_sqrt(e, l, &self.square).expect("lambda² is nonzero")
        } else {
            e.substitute_one(l, &self.value).expect("substituting a constant cannot create a pole")
        }
    }

    pub fn is_zero(&self, e: &RationalExpr) -> bool {
        self.reduce(e).is_zero()
    }
}

/// Cleared form `A·x[2] + B·x[-2] + C = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RawAdditiveEquation {
    pub a: Poly,
    pub b: Poly,
    pub c: Poly,
}

fn window_ok(e: &RationalExpr) -> bool {
    !e.contains_var(Var::shift(2)) && !e.contains_var(Var::shift(-2))
}

impl RawAdditiveEquation {
    /// From `x[2] = f·x[-2] + h`.
    pub fn from_fh(f: &RationalExpr, h: &RationalExpr) -> Result<Self, EquationError> {
        if !window_ok(f) || !window_ok(h) {
            return Err(EquationError::NotAdditive("f and h may only depend on x[1], x[0], x[-1]".into()));
        }
        if f.is_zero() {
            return Err(EquationError::NotInvertible("f is identically zero".into()));
        }
        Self::from_triple(&RationalExpr::one(), &(-f), &(-h))
    }

    /// From `A·x[2] + B·x[-2] + C = 0` with rational `A`, `B`, `C`.
    pub fn from_triple(a: &RationalExpr, b: &RationalExpr, c: &RationalExpr) -> Result<Self, EquationError> {
        if !window_ok(a) || !window_ok(b) || !window_ok(c) {
            return Err(EquationError::NotAdditive("A, B and C may only depend on x[1], x[0], x[-1]".into()));
        }
        if a.is_zero() || b.is_zero() {
            return Err(EquationError::NotInvertible("A and B must both be nonzero".into()));
        }
        let dens = [a.den().clone(), b.den().clone(), c.den().clone()];
        let mut l = Poly::one();
        for d in &dens {
            let g = crate::expr::gcd::gcd(&l, d);
            l = l.mul(&div_exact(d, &g).expect("gcd divides"));
        }
        let clear = |e: &RationalExpr| div_exact(&l.mul(e.num()), e.den()).expect("denominator divides the lcm");
        let (pa, pb, pc) = (clear(a), clear(b), clear(c));
        let mut parts = vec![pa.clone(), pb.clone()];
        if !pc.is_zero() {
            parts.push(pc.clone());
        }
        parts.sort_by_key(|p| p.nterms());
        let g = gcd_many(&parts);
        let g = g.scale(&g.leading_coeff_documented().recip());
        let q = |p: &Poly| div_exact(p, &g).expect("content divides");
        let (pa, pb, pc) = (q(&pa), q(&pb), q(&pc));
        let lc = pa.leading_coeff_documented().recip();
        Ok(RawAdditiveEquation { a: pa.scale(&lc), b: pb.scale(&lc), c: pc.scale(&lc) })
    }

    /// From an equation `E = 0` that must be linear in `x[2]` and `x[-2]`
    /// separately, without an `x[2]·x[-2]` term.
    pub fn from_equation(e: &RationalExpr) -> Result<Self, EquationError> {
        let (top, bot) = (Var::shift(2), Var::shift(-2));
        if e.den().contains_var(top) || e.den().contains_var(bot) {
            return Err(EquationError::NotAdditive("x[2] or x[-2] appears in a denominator".into()));
        }
        let n = e.num();
        let (dt, db) = (n.degree_in(top), n.degree_in(bot));
        if dt != 1 || db != 1 {
            return Err(EquationError::NotAdditive(format!(
                "the equation has degree {} in x[2] and {} in x[-2]; both must be 1",
                dt, db
            )));
        }
        let c_top = n.coeff_of(top, 1);
        if c_top.contains_var(bot) {
            return Err(EquationError::NotAdditive("x[2]·x[-2] cross term".into()));
        }
        let rest = n.coeff_of(top, 0);
        let c_bot = rest.coeff_of(bot, 1);
        let c0 = rest.coeff_of(bot, 0);
        let r = |p: Poly| RationalExpr::from_poly(p);
        Self::from_triple(&r(c_top), &r(c_bot), &r(c0))
    }

    pub fn expression(&self) -> RationalExpr {
        let x2 = Poly::var(Var::shift(2));
        let xm2 = Poly::var(Var::shift(-2));
        RationalExpr::from_poly(self.a.mul(&x2).add(&self.b.mul(&xm2)).add(&self.c))
    }
}

/// Renames the placeholders `(ξ, η)` to the given shift variables.
pub fn place(e: &RationalExpr, xi: i32, eta: i32) -> RationalExpr {
    let (a, b) = (Var::shift(xi), Var::shift(eta));
    e.rename(&|v| {
        if v == Var::XI {
            a
        } else if v == Var::ETA {
            b
        } else {
            v
        }
    })
}

/// Renames two shift variables to the placeholders `(ξ, η)`.
pub fn unplace(e: &RationalExpr, xi: i32, eta: i32) -> RationalExpr {
    let (a, b) = (Var::shift(xi), Var::shift(eta));
    e.rename(&|v| {
        if v == a {
            Var::XI
        } else if v == b {
            Var::ETA
        } else {
            v
        }
    })
}

fn place_closed(e: &ClosedForm, xi: i32, eta: i32) -> ClosedForm {
    let (a, b) = (Var::shift(xi), Var::shift(eta));
    e.rename(&|v| {
        if v == Var::XI {
            a
        } else if v == Var::ETA {
            b
        } else {
            v
        }
    })
}

/// An equation in the variational template.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StructuredEquation {
    /// `g(ξ)`.
    pub g: RationalExpr,
    pub lambda: Multiplier,
    /// `M(ξ, η)`, read at `(x[1], x[0])`.
    pub m: RationalExpr,
    /// `N(ξ, η)`, read at `(x[0], x[-1])`.
    pub n: RationalExpr,
    /// Factor `K` divided out of the cleared equation.
    pub k: RationalExpr,
}

impl StructuredEquation {
    pub fn new(g: RationalExpr, lambda: Multiplier, m: RationalExpr, n: RationalExpr) -> Self {
        StructuredEquation { g, lambda, m, n, k: RationalExpr::one() }
    }

    fn g_at(&self, k: i32) -> RationalExpr {
        place(&self.g, k, k)
    }

    fn dg_at(&self, k: i32) -> RationalExpr {
        place(&self.g.differentiate(Var::XI), k, k)
    }

    /// Everything except the `x[2]` and `x[-2]` terms.
    pub fn middle(&self) -> RationalExpr {
        let l = &self.lambda.value;
        let x1 = RationalExpr::x(1);
        let xm1 = RationalExpr::x(-1);
        let t = &(&(l * &self.dg_at(0)) * &x1) * &xm1;
        self.lambda.reduce(&(&(&t + &place(&self.m, 1, 0)) + &place(&self.n, 0, -1)))
    }

    /// Left-hand side of the template equation.
    pub fn expression(&self) -> RationalExpr {
        let top = &self.g_at(1) * &RationalExpr::x(2);
        let bot = &(&self.lambda.square * &self.g_at(-1)) * &RationalExpr::x(-2);
        &(&top + &bot) + &self.middle()
    }

    /// `x[2]` as a function of the window `x[1], x[0], x[-1], x[-2]`.
    pub fn solved_top(&self) -> RationalExpr {
        let bot = &(&self.lambda.square * &self.g_at(-1)) * &RationalExpr::x(-2);
        -&(&bot + &self.middle()) / &self.g_at(1)
    }

    /// `x[-2]` as a function of the window `x[2], x[1], x[0], x[-1]`.
    pub fn solved_bottom(&self) -> RationalExpr {
        let top = &self.g_at(1) * &RationalExpr::x(2);
        -&(&top + &self.middle()) / &(&self.lambda.square * &self.g_at(-1))
    }

    /// Closure residual `λ·∂M/∂ξ - ∂N/∂η`.
    pub fn closure_residual(&self) -> RationalExpr {
        closure_check(&self.m, &self.n, &self.lambda)
    }

    /// The cleared equation this template stands for.
    pub fn raw(&self) -> Result<RawAdditiveEquation, EquationError> {
        RawAdditiveEquation::from_equation(&self.expression())
    }
}

/// `(g, λ, ∂V/∂η = M, ∂V/∂ξ = N/λ)` with an optional closed form of `V`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiscreteLagrangian {
    pub g: RationalExpr,
    pub lambda: Multiplier,
    pub v_eta: RationalExpr,
    pub v_xi: RationalExpr,
    pub v_closed: Option<ClosedForm>,
    pub autonomous: bool,
}

impl DiscreteLagrangian {
    /// Lagrangian `g(x[1])·x[0]·x[2] + V(x[1], x[0])` with polynomial or
    /// closed-form `V(ξ, η)`.
    pub fn from_potential(g: RationalExpr, lambda: Multiplier, v: ClosedForm) -> Self {
        DiscreteLagrangian {
            v_eta: v.differentiate(Var::ETA),
            v_xi: v.differentiate(Var::XI),
            autonomous: lambda.is_one(),
            g,
            lambda,
            v_closed: Some(v),
        }
    }

    /// `L(x[0], x[1], x[2])` as a closed form, when `V` is known.
    pub fn lagrangian(&self) -> Option<ClosedForm> {
        let v = self.v_closed.as_ref()?;
        let core = &(&place(&self.g, 1, 1) * &RationalExpr::x(0)) * &RationalExpr::x(2);
        Some(ClosedForm::from(core).add(&place_closed(v, 1, 0)))
    }

    /// Human-readable form of `L_n`.
    pub fn display(&self) -> String {
        let v = match &self.v_closed {
            Some(v) => place_closed(v, 1, 0).to_string(),
            None => "V(x[1],x[0])".to_string(),
        };
        let core = format!("({})*x[0]*x[2] + {}", place(&self.g, 1, 1), v);
        if self.autonomous {
            format!("L_n = {}", core)
        } else {
            format!("L_n = ({})^(-n)*[{}]", self.lambda.value, core)
        }
    }

    /// Cross-derivative consistency of the stored gradient.
    pub fn gradient_is_closed(&self) -> bool {
        self.lambda.is_zero(&(&self.v_eta.differentiate(Var::XI) - &self.v_xi.differentiate(Var::ETA)))
    }
}

/// Discrete Euler-Lagrange equation of a Lagrangian in the template form.
pub fn euler_lagrange(l: &DiscreteLagrangian) -> Result<StructuredEquation, EquationError> {
    if l.g.is_zero() {
        return Err(EquationError::NonNormal("g is identically zero".into()));
    }
    let n = l.lambda.reduce(&(&l.lambda.value * &l.v_xi));
    Ok(StructuredEquation::new(l.g.clone(), l.lambda.clone(), l.v_eta.clone(), n))
}

fn rename_shift(e: &RationalExpr, by: i32) -> RationalExpr {
    e.rename(&|v| match v.shift_offset() {
        Some(k) => Var::shift(k + by),
        None => v,
    })
}

/// Euler-Lagrange expression of `λ^(-n)·L(x[0], x[1], x[2])`:
/// `∂₀L(x0,x1,x2) + λ·∂₁L(x-1,x0,x1) + λ²·∂₂L(x-2,x-1,x0)`.
pub fn euler_lagrange_closed(l: &ClosedForm, lambda: &Multiplier) -> Result<RationalExpr, EquationError> {
    for v in l.vars() {
        if let Some(k) = v.shift_offset() {
            if k < 0 {
                return Err(EquationError::NotAdditive("the Lagrangian may only use x[0], x[1], x[2]".into()));
            }
        }
    }
    let d0 = l.differentiate(Var::shift(0));
    let d1 = rename_shift(&l.differentiate(Var::shift(1)), -1);
    let d2 = rename_shift(&l.differentiate(Var::shift(2)), -2);
    let e = &(&d0 + &(&lambda.value * &d1)) + &(&lambda.square * &d2);
    Ok(lambda.reduce(&e))
}

/// Step 2: `B/A = λ²·g(x[-1])/g(x[1])`. Returns `(K, g, λ²)` with `g` monic
/// and `K = A/g(x[1])`, the factor divided out of the equation.
pub fn factor_shift_split(raw: &RawAdditiveEquation) -> Option<(RationalExpr, RationalExpr, RationalExpr)> {
    let (x1, xm1) = (Var::shift(1), Var::shift(-1));
    let a = RationalExpr::from_poly(raw.a.clone());
    let ratio = RationalExpr::from_poly(raw.b.clone()).checked_div(&a).ok()?;
    let (num, den) = ratio.into_parts();
    let state_free = |p: &Poly, allowed: Var| p.vars().iter().all(|v| *v == allowed || (v.is_param() && *v != lambda_var()));
    if !state_free(&num, xm1) || !state_free(&den, x1) {
        return None;
    }
    let c = den.leading_coeff_documented();
    let g = den.scale(&c.recip());
    let gm1 = RationalExpr::from_poly(g.rename(&|v| if v == x1 { xm1 } else { v }));
    let lsq = RationalExpr::from_poly(num.scale(&c.recip())).checked_div(&gm1).ok()?;
    if !lsq.is_param_only() || lsq.contains_var(lambda_var()) {
        return None;
    }
    if let Some(s) = lsq.constant_value() {
        if s.signum() <= 0 {
            return None;
        }
    }
    let k = a.checked_div(&RationalExpr::from_poly(g.clone())).ok()?;
    Some((k, unplace(&RationalExpr::from_poly(g), 1, 1), lsq))
}

/// Step 3: `R = C/K - λ·g'(x[0])·x[1]·x[-1]`.
pub fn residual_r(raw: &RawAdditiveEquation, k: &RationalExpr, g: &RationalExpr, lambda: &Multiplier) -> RationalExpr {
    let cterm = RationalExpr::from_poly(raw.c.clone()).checked_div(k).expect("K is nonzero");
    let dg = place(&g.differentiate(Var::XI), 0, 0);
    let t = &(&(&lambda.value * &dg) * &RationalExpr::x(1)) * &RationalExpr::x(-1);
    lambda.reduce(&(&cterm - &t))
}

/// Step 4: `∂²R/∂x[1]∂x[-1]`.
pub fn mixed_partial_check(r: &RationalExpr) -> RationalExpr {
    r.differentiate(Var::shift(1)).differentiate(Var::shift(-1))
}

/// Anchors tried, in order, by [`split_mn`].
pub const ANCHORS: [(i64, i64); 5] = [(0, 1), (1, 1), (-1, 1), (2, 1), (1, 2)];

/// Step 5: splits `R(x1,x0,x-1)` into `M(x1,x0) + N(x0,x-1)`. The part
/// depending on `x[0]` alone is shared equally. Returns `M(ξ,η)`, `N(ξ,η)`.
pub fn split_mn(r: &RationalExpr) -> Option<(RationalExpr, RationalExpr)> {
    let (x1, xm1) = (Var::shift(1), Var::shift(-1));
    for (p, q) in ANCHORS {
        let c = RationalExpr::ratio(p, q);
        let mut both = Bindings::new();
        both.insert(x1, c.clone());
        both.insert(xm1, c.clone());
        let (top, bot, shared) = match (r.substitute_one(xm1, &c), r.substitute_one(x1, &c), r.substitute(&both)) {
            (Ok(a), Ok(b), Ok(s)) => (a, b, s),
            _ => continue,
        };
        let half = shared.scale(&Scalar::ratio(1, 2));
        let m = &top - &half;
        let n = &bot - &half;
        return Some((unplace(&m, 1, 0), unplace(&n, 0, -1)));
    }
    None
}

/// Step 6: `λ·∂M/∂ξ - ∂N/∂η`.
pub fn closure_check(m: &RationalExpr, n: &RationalExpr, lambda: &Multiplier) -> RationalExpr {
    let r = &(&lambda.value * &m.differentiate(Var::XI)) - &n.differentiate(Var::ETA);
    lambda.reduce(&r)
}

/// Step 7: a closed form `V(ξ, η)` with `∂V/∂η = M` and `λ·∂V/∂ξ = N`.
pub fn potential_closed_form(m: &RationalExpr, n: &RationalExpr, lambda: &Multiplier) -> Option<ClosedForm> {
    let n_over = lambda.reduce(&n.checked_div(&lambda.value).ok()?);
    let v1 = integrate(&n_over, Var::XI)?;
    let rest = lambda.reduce(&(m - &v1.differentiate(Var::ETA)));
    if rest.contains_var(Var::XI) {
        return None;
    }
    let v2 = integrate(&rest, Var::ETA)?;
    let v = v1.add(&v2);
    let ok_eta = lambda.is_zero(&(&v.differentiate(Var::ETA) - m));
    let ok_xi = lambda.is_zero(&(&(&lambda.value * &v.differentiate(Var::XI)) - n));
    (ok_eta && ok_xi).then_some(v)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Variational,
    NotVariational,
    NotAdditive,
}

/// Outcome of steps 3 to 7 for one choice of `λ`.
#[derive(Clone, Debug, Serialize)]
pub struct SignOutcome {
    /// `"+"`, `"-"`, or `"symbolic"`.
    pub sign: String,
    pub lambda: Multiplier,
    pub r: RationalExpr,
    pub mixed_residual: RationalExpr,
    pub closure_residual: Option<RationalExpr>,
    pub m: Option<RationalExpr>,
    pub n: Option<RationalExpr>,
    /// Last step reached (7 when every check passed).
    pub reached: u8,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TestReport {
    pub verdict: Verdict,
    pub failing_step: Option<u8>,
    pub message: Option<String>,
    pub raw: Option<RawAdditiveEquation>,
    pub k: Option<RationalExpr>,
    pub g: Option<RationalExpr>,
    pub lambda_squared: Option<RationalExpr>,
    /// Residuals with `lambda` kept symbolic modulo `lambda² = λ²`.
    pub symbolic: Option<SignOutcome>,
    pub signs: Vec<SignOutcome>,
    pub structured: Option<StructuredEquation>,
    pub lagrangian: Option<DiscreteLagrangian>,
    pub lagrangian_display: Option<String>,
}

impl TestReport {
    fn stopped(verdict: Verdict, step: u8, message: String) -> Self {
        TestReport {
            verdict,
            failing_step: Some(step),
            message: Some(message),
            raw: None,
            k: None,
            g: None,
            lambda_squared: None,
            symbolic: None,
            signs: Vec::new(),
            structured: None,
            lagrangian: None,
            lagrangian_display: None,
        }
    }

    pub fn is_variational(&self) -> bool {
        self.verdict == Verdict::Variational
    }

    /// The passing outcome, preferring `λ > 0`.
    pub fn passing(&self) -> Option<&SignOutcome> {
        self.signs.iter().find(|s| s.passed)
    }
}

fn run_sign(sign: &str, raw: &RawAdditiveEquation, k: &RationalExpr, g: &RationalExpr, lambda: Multiplier) -> SignOutcome {
    let r = residual_r(raw, k, g, &lambda);
    let mixed = lambda.reduce(&mixed_partial_check(&r));
    let mut out = SignOutcome {
        sign: sign.to_string(),
        lambda: lambda.clone(),
        r: r.clone(),
        mixed_residual: mixed.clone(),
        closure_residual: None,
        m: None,
        n: None,
        reached: 4,
        passed: false,
    };
    let split = split_mn(&r);
    let Some((m, n)) = split else {
        return out;
    };
    out.m = Some(m.clone());
    out.n = Some(n.clone());
    out.closure_residual = Some(closure_check(&m, &n, &lambda));
    if !mixed.is_zero() {
        return out;
    }
    out.reached = 6;
    if out.closure_residual.as_ref().map(|e| e.is_zero()).unwrap_or(false) {
        out.reached = 7;
        out.passed = true;
    }
    out
}

/// Full test for `x[2] = f·x[-2] + h`.
pub fn variational_test(f: &RationalExpr, h: &RationalExpr) -> TestReport {
    match RawAdditiveEquation::from_fh(f, h) {
        Ok(raw) => test_raw(raw),
        Err(e) => error_report(e),
    }
}

/// Full test for an equation given as `E = 0`.
pub fn variational_test_equation(e: &RationalExpr) -> TestReport {
    match RawAdditiveEquation::from_equation(e) {
        Ok(raw) => test_raw(raw),
        Err(err) => error_report(err),
    }
}

fn error_report(e: EquationError) -> TestReport {
    let verdict = match e {
        EquationError::NotAdditive(_) => Verdict::NotAdditive,
        _ => Verdict::NotVariational,
    };
    TestReport::stopped(verdict, 1, e.to_string())
}

/// Steps 2 to 7 on a cleared equation.
pub fn test_raw(raw: RawAdditiveEquation) -> TestReport {
    let Some((k, g, lsq)) = factor_shift_split(&raw) else {
        let mut rep = TestReport::stopped(
            Verdict::NotVariational,
            2,
            "B/A is not of the form λ²·g(x[-1])/g(x[1]) with λ² > 0".into(),
        );
        rep.raw = Some(raw);
        return rep;
    };
    let symbolic = run_sign("symbolic", &raw, &k, &g, Multiplier::symbolic(lsq.clone()));
    let root = lsq.constant_value().and_then(|s| s.sqrt_exact());
    let signs: Vec<SignOutcome> = match root {
        Some(r) => vec![
            run_sign("+", &raw, &k, &g, Multiplier::numeric(r.clone())),
            run_sign("-", &raw, &k, &g, Multiplier::numeric(-r)),
        ],
        None => {
            let mut s = symbolic.clone();
            s.sign = "±".into();
            vec![s]
        }
    };
    let mut rep = TestReport {
        verdict: Verdict::NotVariational,
        failing_step: None,
        message: None,
        raw: Some(raw),
        k: Some(k.clone()),
        g: Some(g.clone()),
        lambda_squared: Some(lsq),
        symbolic: Some(symbolic),
        signs,
        structured: None,
        lagrangian: None,
        lagrangian_display: None,
    };
    let Some(pass) = rep.passing().cloned() else {
        let furthest = rep.signs.iter().map(|s| s.reached).max().unwrap_or(4);
        rep.failing_step = Some(furthest);
        rep.message = Some(match furthest {
            4 => "R does not split as M(x[1],x[0]) + N(x[0],x[-1])".into(),
            _ => "the closure relation fails for both signs of λ".into(),
        });
        return rep;
    };
    let (m, n) = (pass.m.clone().unwrap(), pass.n.clone().unwrap());
    let lambda = pass.lambda.clone();
    let mut structured = StructuredEquation::new(g.clone(), lambda.clone(), m.clone(), n.clone());
    structured.k = k;
    let v = potential_closed_form(&m, &n, &lambda);
    let v_xi = lambda.reduce(&n.checked_div(&lambda.value).expect("λ is nonzero"));
    let lag = DiscreteLagrangian { g, autonomous: lambda.is_one(), lambda, v_eta: m, v_xi, v_closed: v };
    rep.verdict = Verdict::Variational;
    rep.lagrangian_display = Some(lag.display());
    rep.structured = Some(structured);
    rep.lagrangian = Some(lag);
    rep
}

/// Normal form of an equation `E = 0`: its numerator scaled to a monic
/// leading coefficient. Two equations with the same solutions in the
/// additive class have the same key.
pub fn equation_key(e: &RationalExpr) -> Poly {
    let n = e.num();
    if n.is_zero() {
        return n.clone();
    }
    n.scale(&n.leading_coeff_documented().recip())
}
