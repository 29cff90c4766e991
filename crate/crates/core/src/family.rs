//! The seven-parameter integrable family: its equation, Lagrangian data and
//! the two invariants `I` and `J`.
//!
//! With `g(ξ) = A1·ξ² + A2·ξ + A3` the equation is
//!
//! ```text
//! g(x[1])·x[2] + g(x[-1])·x[-2] + (A1·x[0] + A2)·(x[1]² + x[-1]²)
//!   + (2·A1·x[0] + A2)·x[1]·x[-1] + (2·A2·x[0] + A7)·(x[1] + x[-1]) + W'(x[0]) = 0
//! ```
//!
//! with `W'(η) = (A2²η³ + (A2·A3 + A2·A7)η² + (A2·A8 + A3² + A6)η + A3·A8 + A5) / g(η)`.
//! Parameters may be exact rationals or symbols, so invariance checks on
//! the symbolic family are proofs for every member.

use rayon::prelude::*;
use serde::Serialize;

use crate::expr::{parse_expr, Bindings, Context, Poly, RationalExpr, Scalar, Var};
use crate::lagrangian::{place, Multiplier, StructuredEquation};
use crate::sample;

/// Names of the seven family parameters.
pub const PARAM_NAMES: [&str; 7] = ["A1", "A2", "A3", "A5", "A6", "A7", "A8"];

/// The coefficients `A1, A2, A3, A5, A6, A7, A8` (`A4` is absent).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyParams {
    pub a1: RationalExpr,
    pub a2: RationalExpr,
    pub a3: RationalExpr,
    pub a5: RationalExpr,
    pub a6: RationalExpr,
    pub a7: RationalExpr,
    pub a8: RationalExpr,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FamilyError {
    #[error("A1, A2 and A3 are all zero, so g vanishes")]
    TrivialG,
    #[error("expected 7 parameters A1 A2 A3 A5 A6 A7 A8, got {0}")]
    Arity(usize),
}

impl FamilyParams {
    /// Every coefficient is its own symbol `A1`, ..., `A8`.
    pub fn symbolic() -> Self {
        let p = |n: &str| RationalExpr::param(n);
        FamilyParams { a1: p("A1"), a2: p("A2"), a3: p("A3"), a5: p("A5"), a6: p("A6"), a7: p("A7"), a8: p("A8") }
    }

    pub fn new(values: [RationalExpr; 7]) -> Result<Self, FamilyError> {
        let [a1, a2, a3, a5, a6, a7, a8] = values;
        let p = FamilyParams { a1, a2, a3, a5, a6, a7, a8 };
        p.validate()?;
        Ok(p)
    }

    pub fn numeric(values: [Scalar; 7]) -> Result<Self, FamilyError> {
        Self::new(values.map(RationalExpr::scalar))
    }

    pub fn from_slice(values: &[Scalar]) -> Result<Self, FamilyError> {
        let arr: [Scalar; 7] = values.to_vec().try_into().map_err(|v: Vec<Scalar>| FamilyError::Arity(v.len()))?;
        Self::numeric(arr)
    }

    pub fn validate(&self) -> Result<(), FamilyError> {
        if self.a1.is_zero() && self.a2.is_zero() && self.a3.is_zero() {
            return Err(FamilyError::TrivialG);
        }
        Ok(())
    }

    pub fn as_array(&self) -> [&RationalExpr; 7] {
        [&self.a1, &self.a2, &self.a3, &self.a5, &self.a6, &self.a7, &self.a8]
    }

    /// Random nonzero rational parameters.
    pub fn random(r: &mut impl rand::Rng) -> Self {
        let v: [Scalar; 7] = std::array::from_fn(|_| sample::nonzero_rational(r, 6, 4));
        Self::numeric(v).expect("nonzero A1")
    }

    /// `g` as a polynomial in the given variable.
    pub fn g_in(&self, v: Var) -> RationalExpr {
        let z = RationalExpr::var(v);
        &(&(&self.a1 * &z) * &z) + &(&(&self.a2 * &z) + &self.a3)
    }

    /// `g(ξ)`.
    pub fn g(&self) -> RationalExpr {
        self.g_in(Var::XI)
    }

    /// `W'(η)`.
    pub fn w_prime(&self) -> RationalExpr {
        let e = RationalExpr::var(Var::ETA);
        let (a2, a3) = (&self.a2, &self.a3);
        let c3 = a2 * a2;
        let c2 = &(a2 * a3) + &(a2 * &self.a7);
        let c1 = &(&(a2 * &self.a8) + &(a3 * a3)) + &self.a6;
        let c0 = &(a3 * &self.a8) + &self.a5;
        let num = &(&(&(&c3 * &e) + &c2) * &e) + &c1;
        let num = &(&num * &e) + &c0;
        num.checked_div(&self.g_in(Var::ETA)).expect("g is nonzero")
    }

    /// `M(ξ, η) = W'(η) + A1·ξ²η + A2·ξ² + 2·A2·ξη + A7·ξ`.
    pub fn m(&self) -> RationalExpr {
        let (x, e) = (RationalExpr::var(Var::XI), RationalExpr::var(Var::ETA));
        let two = RationalExpr::int(2);
        let t = &(&(&self.a1 * &x) * &x) * &e;
        let t = &t + &(&(&self.a2 * &x) * &x);
        let t = &t + &(&(&(&two * &self.a2) * &x) * &e);
        let t = &t + &(&self.a7 * &x);
        &t + &self.w_prime()
    }

    /// `N(ξ, η) = A1·ξη² + 2·A2·ξη + A2·η² + A7·η`.
    pub fn n(&self) -> RationalExpr {
        let (x, e) = (RationalExpr::var(Var::XI), RationalExpr::var(Var::ETA));
        let two = RationalExpr::int(2);
        let t = &(&(&self.a1 * &x) * &e) * &e;
        let t = &t + &(&(&(&two * &self.a2) * &x) * &e);
        let t = &t + &(&(&self.a2 * &e) * &e);
        &t + &(&self.a7 * &e)
    }

    /// The polynomial part of `V`: `A1/2·ξ²η² + A2·ξ²η + A2·ξη² + A7·ξη`.
    /// The full potential adds `W(η)`, which is kept as its derivative.
    pub fn v_polynomial(&self) -> RationalExpr {
        let (x, e) = (RationalExpr::var(Var::XI), RationalExpr::var(Var::ETA));
        let xe = &x * &e;
        let t = &(&self.a1.scale(&Scalar::ratio(1, 2)) * &xe) * &xe;
        let t = &t + &(&(&self.a2 * &xe) * &x);
        let t = &t + &(&(&self.a2 * &xe) * &e);
        &t + &(&self.a7 * &xe)
    }
}

/// The family equation in the variational template (`λ = 1`).
pub fn build_equation(p: &FamilyParams) -> StructuredEquation {
    StructuredEquation::new(p.g(), Multiplier::one(), p.m(), p.n())
}

fn g_at(p: &FamilyParams, k: i32) -> RationalExpr {
    p.g_in(Var::shift(k))
}

/// `P1, P2, P3, P4` of the multi-affine invariant, in `(x[0], x[-1])`.
pub fn invariant_i_parts(p: &FamilyParams) -> [RationalExpr; 4] {
    let (x0, xm1) = (RationalExpr::x(0), RationalExpr::x(-1));
    let gg = &g_at(p, 0) * &g_at(p, -1);
    let p1 = -&(&x0 * &gg);
    let p2 = -&(&xm1 * &gg);
    let p3 = gg.clone();
    let (a, b) = (&x0, &xm1);
    let (a1, a2, a3, a5, a6, a7, a8) = (&p.a1, &p.a2, &p.a3, &p.a5, &p.a6, &p.a7, &p.a8);
    let two = RationalExpr::int(2);
    // -b²·g(a)·((A1·a + A2)·b + 2·A2·a + A7)
    let inner = &(&(&(a1 * a) + a2) * b) + &(&(&(&two * a2) * a) + a7);
    let t1 = -&(&(&(b * b) * &g_at(p, 0)) * &inner);
    // -((A1A3 + A2²)a³ + A2(2A3 + A7)a² + (A2A8 + 2A3² + A6)a + A3A8 + A5)·b
    let c3 = &(a1 * a3) + &(a2 * a2);
    let c2 = a2 * &(&(&two * a3) + a7);
    let c1 = &(&(a2 * a8) + &(&(&two * a3) * a3)) + a6;
    let c0 = &(a3 * a8) + a5;
    let cubic = &(&(&(&(&(&c3 * a) + &c2) * a) + &c1) * a) + &c0;
    let t2 = -&(&cubic * b);
    // -a·(A2A3·a² + A3A7·a + A3A8 + A5)
    let quad = &(&(&(&(a2 * a3) * a) + &(a3 * a7)) * a) + &c0;
    let t3 = -&(a * &quad);
    let p4 = &(&t1 + &t2) + &t3;
    [p1, p2, p3, p4]
}

/// `I = x[1]·P1 + x[-2]·P2 + x[1]·x[-2]·P3 + P4`.
pub fn build_invariant_i(p: &FamilyParams) -> RationalExpr {
    let [p1, p2, p3, p4] = invariant_i_parts(p);
    let (x1, xm2) = (RationalExpr::x(1), RationalExpr::x(-2));
    &(&(&(&x1 * &p1) + &(&xm2 * &p2)) + &(&(&x1 * &xm2) * &p3)) + &p4
}

/// Coefficient table of `Q(ξ, η)`: `(coefficient, power of ξ, power of η)`.
pub const Q_TABLE: [(&str, u32, u32); 12] = [
    ("2*A1^3", 3, 2),
    ("3*A1^2*A2", 3, 1),
    ("A1*A2^2", 3, 0),
    ("4*A1^2*A2", 2, 2),
    ("-A1*(5*A1*A3 - A2^2)", 2, 1),
    ("A1*A2*(A3 + A7)", 2, 0),
    ("2*A1*(A1*A3 + A2^2)", 1, 2),
    ("-2*A2*(A1*A3 + A2^2)", 1, 1),
    ("A1*(A2*A8 + A3^2 + A6)", 1, 0),
    ("2*A1*A2*A3", 0, 2),
    ("-A3*(5*A1*A3 + 2*A2^2)", 0, 1),
    ("A1*(A3*A8 + A5)", 0, 0),
];

/// Coefficient table of `R(ξ, η)`.
pub const R_TABLE: [(&str, u32, u32); 24] = [
    ("-A1^4", 4, 4),
    ("-3*A1^3*A2", 4, 3),
    ("-A1^2*(A1*A3 + 3*A2^2)", 4, 2),
    ("-A1*A2*(2*A1*A3 + A2^2)", 4, 1),
    ("-A1*A2^2*A3", 4, 0),
    ("-3*A1^3*A2", 3, 4),
    ("A1^2*(5*A1*A3 - 4*A2^2)", 3, 3),
    ("A1*A2*(7*A1*A3 + A2^2)", 3, 2),
    ("5*A1^2*A3^2 + 4*A1*A2^2*A3 + 2*A2^4", 3, 1),
    ("A2*A3*(5*A1*A3 + 2*A2^2)", 3, 0),
    ("-A1^2*(A1*A3 + 3*A2^2)", 2, 4),
    ("A1*A2*(7*A1*A3 + A2^2)", 2, 3),
    ("-A1^2*A2*A8 - 3*A1^2*A3^2 + 5*A1^2*A3*A7 - A1^2*A6 + A1^2*A7^2 + 6*A1*A2^2*A3 + 2*A1*A2^2*A7 + 4*A2^4", 2, 2),
    ("-A1^2*A3*A8 - A1^2*A5 - A1*A2^2*A8 + 7*A1*A2*A3^2 + 6*A1*A2*A3*A7 - A1*A2*A6 + A1*A2*A7^2 + 4*A2^3*A3 + 2*A2^3*A7", 2, 1),
    ("-A1*A2*A3*A8 - A1*A2*A5 - A1*A3^3 + 5*A1*A3^2*A7 + A1*A3*A7^2 + 2*A2^2*A3*A7", 2, 0),
    ("-A1*A2*(2*A1*A3 + A2^2)", 1, 4),
    ("5*A1^2*A3^2 + 4*A1*A2^2*A3 + 2*A2^4", 1, 3),
    ("-A1^2*A3*A8 - A1^2*A5 - A1*A2^2*A8 + 7*A1*A2*A3^2 + 6*A1*A2*A3*A7 - A1*A2*A6 + A1*A2*A7^2 + 4*A2^3*A3 + 2*A2^3*A7", 1, 2),
    ("3*A1*A2*A3*A8 - 2*A1*A2*A5 + A1*A2*A7*A8 + 10*A1*A3^3 + A1*A3^2*A7 + 5*A1*A3*A6 + A1*A6*A7 + 2*A2^3*A8 + 4*A2^2*A3^2 + 2*A2^2*A6", 1, 1),
    ("(A3*A8 + A5)*(4*A1*A3 + A1*A7 + 2*A2^2)", 1, 0),
    ("-A1*A2^2*A3", 0, 4),
    ("A2*A3*(5*A1*A3 + 2*A2^2)", 0, 3),
    ("-A1*A2*A3*A8 - A1*A2*A5 - A1*A3^3 + 5*A1*A3^2*A7 + A1*A3*A7^2 + 2*A2^2*A3*A7", 0, 2),
    ("(A3*A8 + A5)*(4*A1*A3 + A1*A7 + 2*A2^2)", 0, 1),
];

fn param_bindings(p: &FamilyParams) -> Bindings {
    PARAM_NAMES.iter().zip(p.as_array()).map(|(n, v)| (Var::param(n), v.clone())).collect()
}

fn from_table(p: &FamilyParams, table: &[(&str, u32, u32)], a: &RationalExpr, b: &RationalExpr) -> RationalExpr {
    let ctx = Context::new(&PARAM_NAMES);
    let binds = param_bindings(p);
    let mut acc = RationalExpr::zero();
    for (c, i, j) in table {
        let c = parse_expr(c, &ctx).expect("coefficient table entries parse");
        let c = c.substitute(&binds).expect("coefficients are polynomial");
        acc = &acc + &(&(&c * &a.pow(*i as i32).unwrap()) * &b.pow(*j as i32).unwrap());
    }
    acc
}

/// `Q(a, b)`.
pub fn q_poly(p: &FamilyParams, a: &RationalExpr, b: &RationalExpr) -> RationalExpr {
    from_table(p, &Q_TABLE, a, b)
}

/// `R(a, b)`.
pub fn r_poly(p: &FamilyParams, a: &RationalExpr, b: &RationalExpr) -> RationalExpr {
    from_table(p, &R_TABLE, a, b)
}

fn j_cross(p: &FamilyParams) -> RationalExpr {
    let (x0, xm1) = (RationalExpr::x(0), RationalExpr::x(-1));
    let (a1, a2) = (&p.a1, &p.a2);
    let t = &(&(&RationalExpr::int(2) * &(a1 * a1)) * &x0) * &xm1;
    let t = &t + &(&(a1 * a2) * &x0);
    let t = &t + &(&(a1 * a2) * &xm1);
    let t = &t + &(&RationalExpr::int(5) * &(a1 * &p.a3));
    let t = &t + &(&RationalExpr::int(2) * &(a1 * &p.a7));
    &t + &(&RationalExpr::int(2) * &(a2 * a2))
}

/// The second invariant, in the form that is conserved for every member of
/// the family.
pub fn build_invariant_j(p: &FamilyParams) -> RationalExpr {
    let (x1, x0, xm1, xm2) = (RationalExpr::x(1), RationalExpr::x(0), RationalExpr::x(-1), RationalExpr::x(-2));
    let (g0, gm1) = (g_at(p, 0), g_at(p, -1));
    let gg = &g0 * &gm1;
    let top = &(&g0 * &(&x1 * &x1)) + &(&gm1 * &(&xm2 * &xm2));
    let t1 = -&(&(&p.a1 * &gg) * &top);
    let t2 = -&(&(&gg * &j_cross(p)) * &(&x1 * &xm2));
    let t3 = -&(&(&g0 * &q_poly(p, &xm1, &x0)) * &x1);
    let t4 = -&(&(&gm1 * &q_poly(p, &x0, &xm1)) * &xm2);
    &(&(&(&t1 + &t2) + &t3) + &t4) + &r_poly(p, &x0, &xm1)
}

/// The second invariant exactly as printed in the source formula, kept to
/// document that it is not conserved.
pub fn build_invariant_j_printed(p: &FamilyParams) -> RationalExpr {
    let (x1, x0, xm1, xm2) = (RationalExpr::x(1), RationalExpr::x(0), RationalExpr::x(-1), RationalExpr::x(-2));
    let (g0, gm1) = (g_at(p, 0), g_at(p, -1));
    let gg = &g0 * &gm1;
    let t1 = -&(&(&p.a1 * &(&gg * &gg)) * &(&(&x1 * &x1) + &(&xm2 * &xm2)));
    let t2 = -&(&(&gg * &j_cross(p)) * &(&x1 * &xm2));
    let t3 = -&(&(&g0 * &q_poly(p, &xm1, &x0)) * &x1);
    let t4 = -&(&(&gm1 * &q_poly(p, &x0, &xm1)) * &x0);
    &(&(&(&t1 + &t2) + &t3) + &t4) + &r_poly(p, &x0, &xm1)
}

/// Degrees of an invariant in `x[1], x[0], x[-1], x[-2]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Degrees {
    pub x1: u32,
    pub x0: u32,
    pub xm1: u32,
    pub xm2: u32,
}

impl Degrees {
    pub fn of(e: &RationalExpr) -> Degrees {
        let d = |k| e.num().degree_in(Var::shift(k));
        Degrees { x1: d(1), x0: d(0), xm1: d(-1), xm2: d(-2) }
    }
}

/// Two invariants of a map on the window `x[1], x[0], x[-1], x[-2]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InvariantPair {
    pub i: RationalExpr,
    pub j: RationalExpr,
    pub i_degrees: Degrees,
    pub j_degrees: Degrees,
}

impl InvariantPair {
    pub fn new(i: RationalExpr, j: RationalExpr) -> Self {
        InvariantPair { i_degrees: Degrees::of(&i), j_degrees: Degrees::of(&j), i, j }
    }
}

pub fn build_invariants(p: &FamilyParams) -> InvariantPair {
    InvariantPair::new(build_invariant_i(p), build_invariant_j(p))
}

/// `F(x[-2], x[-1], x[0], x[1])` read backwards: the reflection
/// `x[k] -> x[-1-k]`.
pub fn reflect(e: &RationalExpr) -> RationalExpr {
    e.rename(&|v| match v.shift_offset() {
        Some(k) => Var::shift(-1 - k),
        None => v,
    })
}

/// Shifts every state variable up by `by`.
pub fn shift(e: &RationalExpr, by: i32) -> RationalExpr {
    e.rename(&|v| match v.shift_offset() {
        Some(k) => Var::shift(k + by),
        None => v,
    })
}

fn shift_poly(p: &Poly, by: i32) -> Poly {
    p.rename(&|v| match v.shift_offset() {
        Some(k) => Var::shift(k + by),
        None => v,
    })
}

/// Default term budget for symbolic identity checks, overridable through
/// the `ADDVAR_TERM_BUDGET` environment variable.
pub const DEFAULT_TERM_BUDGET: usize = 2_000_000;

pub fn term_budget() -> usize {
    std::env::var("ADDVAR_TERM_BUDGET").ok().and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_TERM_BUDGET)
}

/// How an identity is certified.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckMode {
    /// Symbolic when the estimated expansion fits the term budget, sampled
    /// otherwise.
    Auto,
    Symbolic,
    Sampled { points: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "method")]
pub enum Certificate {
    /// Exact expansion. `residual_terms` is the number of terms in the
    /// residual numerator (0 certifies the identity); `expanded_terms`
    /// counts the terms expanded before cancellation.
    Symbolic { residual_terms: usize, expanded_terms: usize },
    /// Exact evaluation at random rational points.
    Sampled { points: usize, failures: usize, seed: u64 },
}

impl Certificate {
    pub fn holds(&self) -> bool {
        match self {
            Certificate::Symbolic { residual_terms, .. } => *residual_terms == 0,
            Certificate::Sampled { points, failures, .. } => *points > 0 && *failures == 0,
        }
    }
}

/// `Σ_k c_k·P^k·Q^(d-k)` where `c_k` are the coefficients of `f` in `v`:
/// the numerator of `f` with `v` replaced by `P/Q`, over `Q^d`.
pub fn compose_in(f: &Poly, v: Var, pn: &Poly, qd: &Poly) -> (Poly, u32) {
    let cs = f.coeffs_in(v);
    let d = cs.len().saturating_sub(1) as u32;
    let mut acc = Poly::zero();
    let mut ppow = Poly::one();
    let qpows: Vec<Poly> = (0..=d).map(|k| qd.pow(k)).collect();
    for (k, c) in cs.iter().enumerate() {
        if !c.is_zero() {
            acc = acc.add(&c.mul(&ppow).mul(&qpows[(d as usize) - k]));
        }
        ppow = ppow.mul(pn);
    }
    (acc, d)
}

fn estimate(f: &Poly, v: Var, pn: &Poly, qd: &Poly) -> usize {
    let cs = f.coeffs_in(v);
    let d = cs.len().saturating_sub(1);
    let (np, nq) = (pn.nterms().max(1), qd.nterms().max(1));
    cs.iter()
        .enumerate()
        .map(|(k, c)| c.nterms().saturating_mul(np.saturating_pow(k as u32)).saturating_mul(nq.saturating_pow((d - k) as u32)))
        .fold(0usize, |a, b| a.saturating_add(b))
}

/// Numerator of `F(x[2] <- top, x[1], x[0], x[-1]) - F(x[1], x[0], x[-1], x[-2])`
/// as an unreduced polynomial.
pub fn invariance_numerator(top: &RationalExpr, f: &RationalExpr) -> Poly {
    let (lhs, rhs) = invariance_sides(top, f);
    lhs.sub(&rhs)
}

fn invariance_sides(top: &RationalExpr, f: &RationalExpr) -> (Poly, Poly) {
    let x2 = Var::shift(2);
    let (pn, qd) = (top.num(), top.den());
    let (fn_s, fd_s) = (shift_poly(f.num(), 1), shift_poly(f.den(), 1));
    let (a, da) = compose_in(&fn_s, x2, pn, qd);
    let (b, db) = compose_in(&fd_s, x2, pn, qd);
    // a/Q^da / (b/Q^db) - Fn/Fd = 0  <=>  a·Q^db·Fd - b·Q^da·Fn = 0
    let lhs = a.mul(&qd.pow(db)).mul(f.den());
    let rhs = b.mul(&qd.pow(da)).mul(f.num());
    (lhs, rhs)
}

/// Reduced residual `F(shifted) - F` on solutions of `eq`.
pub fn invariance_residual(eq: &StructuredEquation, f: &RationalExpr) -> RationalExpr {
    let top = eq.solved_top();
    let mut b = Bindings::new();
    b.insert(Var::shift(2), top);
    let moved = shift(f, 1).substitute(&b).expect("the solved map has g(x[1]) as its only pole");
    &moved - f
}

/// Certifies that `f` is conserved by the map of `eq`.
pub fn check_invariance(eq: &StructuredEquation, f: &RationalExpr, mode: CheckMode) -> Certificate {
    let top = eq.solved_top();
    check_invariance_top(&top, f, mode)
}

/// As [`check_invariance`], with the map given by its solved top value.
pub fn check_invariance_top(top: &RationalExpr, f: &RationalExpr, mode: CheckMode) -> Certificate {
    let mode = match mode {
        CheckMode::Auto => {
            let x2 = Var::shift(2);
            let e = estimate(&shift_poly(f.num(), 1), x2, top.num(), top.den())
                .saturating_add(estimate(&shift_poly(f.den(), 1), x2, top.num(), top.den()));
            if e <= term_budget() {
                CheckMode::Symbolic
            } else {
                CheckMode::Sampled { points: 200, seed: sample::DEFAULT_SEED }
            }
        }
        m => m,
    };
    match mode {
        CheckMode::Sampled { points, seed } => sampled_invariance(top, f, points, seed),
        _ => {
            let (lhs, rhs) = invariance_sides(top, f);
            let expanded_terms = lhs.nterms() + rhs.nterms();
            Certificate::Symbolic { residual_terms: lhs.sub(&rhs).nterms(), expanded_terms }
        }
    }
}

/// Exact evaluation of `F(moved) - F` at `points` random rational points.
pub fn sampled_invariance(top: &RationalExpr, f: &RationalExpr, points: usize, seed: u64) -> Certificate {
    let moved = shift(f, 1);
    let mut vars: Vec<Var> = top.vars();
    vars.extend(f.vars());
    vars.retain(|v| *v != Var::shift(2));
    vars.sort();
    vars.dedup();
    let failures = (0..points)
        .into_par_iter()
        .filter(|k| {
            let mut r = sample::stream(seed, *k as u64);
            for _ in 0..64 {
                let mut pt = sample::point(&mut r, &vars, 9, 7);
                let Some(t) = sample::eval_at(top, &pt) else { continue };
                let Some(before) = sample::eval_at(f, &pt) else { continue };
                pt.push((Var::shift(2), t));
                let Some(after) = sample::eval_at(&moved, &pt) else { continue };
                return after != before;
            }
            true
        })
        .count();
    Certificate::Sampled { points, failures, seed }
}

/// Whether `(I, J)` are functionally independent: some 2×2 minor of their
/// gradient matrix is nonzero at a random rational point.
pub fn functionally_independent(i: &RationalExpr, j: &RationalExpr, seed: u64) -> bool {
    let vars: Vec<Var> = (-2..=1).map(Var::shift).collect();
    let di: Vec<RationalExpr> = vars.iter().map(|v| i.differentiate(*v)).collect();
    let dj: Vec<RationalExpr> = vars.iter().map(|v| j.differentiate(*v)).collect();
    let mut all: Vec<Var> = i.vars();
    all.extend(j.vars());
    all.sort();
    all.dedup();
    let mut r = sample::rng(seed);
    for _ in 0..8 {
        let pt = sample::point(&mut r, &all, 9, 5);
        let ev = |e: &RationalExpr| sample::eval_at(e, &pt);
        let (Some(gi), Some(gj)) = (di.iter().map(ev).collect::<Option<Vec<_>>>(), dj.iter().map(ev).collect::<Option<Vec<_>>>()) else {
            continue;
        };
        for a in 0..4 {
            for b in (a + 1)..4 {
                if !(&(&gi[a] * &gj[b]) - &(&gi[b] * &gj[a])).is_zero() {
                    return true;
                }
            }
        }
    }
    false
}

/// `V(ξ, η)` up to the `W(η)` part, evaluated at `(x[1], x[0])`.
pub fn v_polynomial_at(p: &FamilyParams) -> RationalExpr {
    place(&p.v_polynomial(), 1, 0)
}
