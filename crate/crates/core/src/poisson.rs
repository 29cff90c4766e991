//! Poisson brackets from the discrete Ostrogradsky transformation.
//!
//! For an autonomous Lagrangian `L(x[0], x[1], x[2])` that is linear in
//! `x[2]`, the chart on the window `(x[1], x[0], x[-1], x[-2])` is
//!
//! ```text
//! q1 = x[0],  q2 = x[1],
//! p2 = ∂L/∂a2 (x[-1], x[0], x[1]),
//! p1 = ∂L/∂a1 (x[-1], x[0], x[1]) + ∂L/∂a2 (x[-2], x[-1], x[0]),
//! ```
//!
//! and the bracket matrix on the window is `P = D⁻¹·Ω·D⁻ᵀ` with
//! `D = ∂(q1, q2, p1, p2)/∂(x[1], x[0], x[-1], x[-2])` and
//! `Ω = [[0, -I], [I, 0]]`.

use rayon::prelude::*;
use serde::Serialize;

use crate::expr::{Poly, RationalExpr, Var};
use crate::family::{term_budget, Certificate, CheckMode};
use crate::lagrangian::{place, DiscreteLagrangian, StructuredEquation};
use crate::sample;

/// Window variables in matrix order: `x[1], x[0], x[-1], x[-2]`.
pub const WINDOW: [i32; 4] = [1, 0, -1, -2];

pub fn window_vars() -> [Var; 4] {
    WINDOW.map(Var::shift)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PoissonError {
    #[error("the Ostrogradsky chart needs an autonomous Lagrangian (λ = 1)")]
    NonAutonomous,
    #[error("the Lagrangian is not linear in its top argument")]
    NotLinearInTop,
    #[error("the chart is degenerate: its Jacobian determinant vanishes identically")]
    Degenerate,
}

/// Position and momentum coordinates on the window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OstrogradskyChart {
    pub q1: RationalExpr,
    pub q2: RationalExpr,
    pub p1: RationalExpr,
    pub p2: RationalExpr,
}

fn shift(e: &RationalExpr, by: i32) -> RationalExpr {
    e.rename(&|v| match v.shift_offset() {
        Some(k) => Var::shift(k + by),
        None => v,
    })
}

/// The chart of an autonomous Lagrangian `g(a1)·a0·a2 + V(a1, a0)`.
pub fn ostrogradsky_chart(l: &DiscreteLagrangian) -> Result<OstrogradskyChart, PoissonError> {
    if !l.lambda.is_one() {
        return Err(PoissonError::NonAutonomous);
    }
    // ∂L/∂a2 = g(a1)·a0 and ∂L/∂a1 = g'(a1)·a0·a2 + ∂V/∂ξ(a1, a0), with
    // (a0, a1, a2) = (x[0], x[1], x[2]).
    let g1 = place(&l.g, 1, 1);
    let dg1 = place(&l.g.differentiate(Var::XI), 1, 1);
    let dl2 = &g1 * &RationalExpr::x(0);
    let dl1 = &(&(&dg1 * &RationalExpr::x(0)) * &RationalExpr::x(2)) + &place(&l.v_xi, 1, 0);
    Ok(chart_from_derivatives(&dl1, &dl2))
}

/// The chart of a Lagrangian given as a rational function of
/// `x[0], x[1], x[2]` (derivatives of transcendental parts are rational, so
/// callers may pass `∂L` pieces computed from a closed form).
pub fn ostrogradsky_chart_closed(l: &crate::expr::ClosedForm) -> Result<OstrogradskyChart, PoissonError> {
    let dl2 = l.differentiate(Var::shift(2));
    if !dl2.differentiate(Var::shift(2)).is_zero() {
        return Err(PoissonError::NotLinearInTop);
    }
    let dl1 = l.differentiate(Var::shift(1));
    Ok(chart_from_derivatives(&dl1, &dl2))
}

fn chart_from_derivatives(dl1: &RationalExpr, dl2: &RationalExpr) -> OstrogradskyChart {
    let p2 = shift(dl2, -1);
    let p1 = &shift(dl1, -1) + &shift(dl2, -2);
    OstrogradskyChart { q1: RationalExpr::x(0), q2: RationalExpr::x(1), p1, p2 }
}

/// A 4×4 matrix of rational functions.
pub type Matrix4 = [[RationalExpr; 4]; 4];

fn zero4() -> Matrix4 {
    std::array::from_fn(|_| std::array::from_fn(|_| RationalExpr::zero()))
}

fn minor3(m: &Matrix4, skip_r: usize, skip_c: usize) -> RationalExpr {
    let rows: Vec<usize> = (0..4).filter(|r| *r != skip_r).collect();
    let cols: Vec<usize> = (0..4).filter(|c| *c != skip_c).collect();
    let e = |i: usize, j: usize| &m[rows[i]][cols[j]];
    let t = |a: usize, b: usize, c: usize| &(e(0, a) * e(1, b)) * e(2, c);
    let pos = &(&t(0, 1, 2) + &t(1, 2, 0)) + &t(2, 0, 1);
    let neg = &(&t(2, 1, 0) + &t(0, 2, 1)) + &t(1, 0, 2);
    &pos - &neg
}

/// Determinant by cofactor expansion along the first row.
pub fn det4(m: &Matrix4) -> RationalExpr {
    let mut acc = RationalExpr::zero();
    for c in 0..4 {
        if m[0][c].is_zero() {
            continue;
        }
        let t = &m[0][c] * &minor3(m, 0, c);
        acc = if c % 2 == 0 { &acc + &t } else { &acc - &t };
    }
    acc
}

/// Inverse by the adjugate formula.
pub fn inverse4(m: &Matrix4) -> Option<Matrix4> {
    let d = det4(m);
    if d.is_zero() {
        return None;
    }
    let dinv = d.inv().ok()?;
    let mut out = zero4();
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let c = minor3(m, j, i);
            let c = if (i + j) % 2 == 0 { c } else { -c };
            *cell = &c * &dinv;
        }
    }
    Some(out)
}

fn mat_mul(a: &Matrix4, b: &Matrix4) -> Matrix4 {
    let mut out = zero4();
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = RationalExpr::zero();
            for k in 0..4 {
                if !a[i][k].is_zero() && !b[k][j].is_zero() {
                    acc = &acc + &(&a[i][k] * &b[k][j]);
                }
            }
            out[i][j] = acc;
        }
    }
    out
}

fn transpose(a: &Matrix4) -> Matrix4 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[j][i].clone()))
}

/// `Ω = [[0, -I], [I, 0]]` in the ordering `(q1, q2, p1, p2)`.
pub fn omega() -> Matrix4 {
    let mut o = zero4();
    o[0][2] = RationalExpr::int(-1);
    o[1][3] = RationalExpr::int(-1);
    o[2][0] = RationalExpr::one();
    o[3][1] = RationalExpr::one();
    o
}

/// Brackets `{x[i], x[j]}` on the window `x[1], x[0], x[-1], x[-2]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoissonStructure {
    pub m: Matrix4,
}

impl Serialize for PoissonStructure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = self.m.iter().map(|r| r.iter().map(|e| e.to_string()).collect()).collect();
        rows.serialize(s)
    }
}

fn index_of(k: i32) -> usize {
    WINDOW.iter().position(|w| *w == k).expect("shift inside the window")
}

impl PoissonStructure {
    /// From the upper-triangular entries `(i, j, {x[i], x[j]})`, with shift
    /// offsets `i, j`; the rest follows by skew-symmetry.
    pub fn from_entries(entries: &[(i32, i32, RationalExpr)]) -> Self {
        let mut m = zero4();
        for (i, j, e) in entries {
            let (a, b) = (index_of(*i), index_of(*j));
            m[a][b] = e.clone();
            m[b][a] = -e;
        }
        PoissonStructure { m }
    }

    /// `{x[i], x[j]}` by shift offsets.
    pub fn entry(&self, i: i32, j: i32) -> &RationalExpr {
        &self.m[index_of(i)][index_of(j)]
    }

    pub fn is_skew(&self) -> bool {
        (0..4).all(|i| (0..4).all(|j| (&self.m[i][j] + &self.m[j][i]).is_zero()))
    }

    pub fn determinant(&self) -> RationalExpr {
        det4(&self.m)
    }

    /// Nonzero entries above the diagonal as `({x[i], x[j]}, value)`.
    pub fn table(&self) -> Vec<(String, RationalExpr)> {
        let mut out = Vec::new();
        for a in 0..4 {
            for b in (a + 1)..4 {
                if !self.m[a][b].is_zero() {
                    out.push((format!("{{x[{}],x[{}]}}", WINDOW[a], WINDOW[b]), self.m[a][b].clone()));
                }
            }
        }
        out
    }

    pub fn map(&self, f: impl Fn(&RationalExpr) -> RationalExpr) -> Self {
        PoissonStructure { m: std::array::from_fn(|i| std::array::from_fn(|j| f(&self.m[i][j]))) }
    }
}

/// `P = D⁻¹·Ω·D⁻ᵀ`.
pub fn poisson_from_chart(c: &OstrogradskyChart) -> Result<PoissonStructure, PoissonError> {
    let vars = window_vars();
    let coords = [&c.q1, &c.q2, &c.p1, &c.p2];
    let d: Matrix4 = std::array::from_fn(|i| std::array::from_fn(|j| coords[i].differentiate(vars[j])));
    let di = inverse4(&d).ok_or(PoissonError::Degenerate)?;
    let p = mat_mul(&mat_mul(&di, &omega()), &transpose(&di));
    Ok(PoissonStructure { m: p })
}

/// Brackets of an autonomous Lagrangian.
pub fn poisson_of(l: &DiscreteLagrangian) -> Result<PoissonStructure, PoissonError> {
    poisson_from_chart(&ostrogradsky_chart(l)?)
}

/// `{F, G} = Σ ∂F/∂x_i · ∂G/∂x_j · P_ij`.
pub fn bracket(f: &RationalExpr, g: &RationalExpr, p: &PoissonStructure) -> RationalExpr {
    let vars = window_vars();
    let df: Vec<RationalExpr> = vars.iter().map(|v| f.differentiate(*v)).collect();
    let dg: Vec<RationalExpr> = vars.iter().map(|v| g.differentiate(*v)).collect();
    let mut acc = RationalExpr::zero();
    for i in 0..4 {
        if df[i].is_zero() {
            continue;
        }
        let mut row = RationalExpr::zero();
        for j in 0..4 {
            if !dg[j].is_zero() && !p.m[i][j].is_zero() {
                row = &row + &(&dg[j] * &p.m[i][j]);
            }
        }
        acc = &acc + &(&df[i] * &row);
    }
    acc
}

/// Cyclic sums `{{x_i, x_j}, x_k} + {{x_j, x_k}, x_i} + {{x_k, x_i}, x_j}`
/// for every triple `i < j < k` of window positions.
pub fn check_jacobi(p: &PoissonStructure) -> Vec<((i32, i32, i32), RationalExpr)> {
    let vars = window_vars();
    let mut triples = Vec::new();
    for i in 0..4 {
        for j in (i + 1)..4 {
            for k in (j + 1)..4 {
                triples.push((i, j, k));
            }
        }
    }
    triples
        .par_iter()
        .map(|&(i, j, k)| {
            // {P_ij, x_k} = Σ_l ∂P_ij/∂x_l · P_lk
            let b = |a: usize, c: usize, e: usize| {
                let mut acc = RationalExpr::zero();
                for (l, v) in vars.iter().enumerate() {
                    let d = p.m[a][c].differentiate(*v);
                    if !d.is_zero() && !p.m[l][e].is_zero() {
                        acc = &acc + &(&d * &p.m[l][e]);
                    }
                }
                acc
            };
            let r = &(&b(i, j, k) + &b(j, k, i)) + &b(k, i, j);
            ((WINDOW[i], WINDOW[j], WINDOW[k]), r)
        })
        .collect()
}

/// `{φ_a, φ_b}(x) - P_ab(φ(x))` for the map
/// `φ: (x[1], x[0], x[-1], x[-2]) -> (x[2], x[1], x[0], x[-1])` with
/// `x[2]` solved from `eq`.
pub fn check_preservation(p: &PoissonStructure, eq: &StructuredEquation) -> Vec<((i32, i32), RationalExpr)> {
    let top = eq.solved_top();
    let images = [top.clone(), RationalExpr::x(1), RationalExpr::x(0), RationalExpr::x(-1)];
    let push = |e: &RationalExpr| {
        let up = shift(e, 1);
        let mut b = crate::expr::Bindings::new();
        b.insert(Var::shift(2), top.clone());
        up.substitute(&b).expect("the map has no pole on generic points")
    };
    let mut pairs = Vec::new();
    for a in 0..4 {
        for b in (a + 1)..4 {
            pairs.push((a, b));
        }
    }
    pairs
        .par_iter()
        .map(|&(a, b)| {
            let lhs = bracket(&images[a], &images[b], p);
            let rhs = push(&p.m[a][b]);
            ((WINDOW[a], WINDOW[b]), &lhs - &rhs)
        })
        .collect()
}

/// Common denominator of all entries and the matrix of numerators over it.
fn cleared(p: &PoissonStructure) -> (Poly, [[Poly; 4]; 4]) {
    let mut den = Poly::one();
    for row in &p.m {
        for e in row {
            let g = crate::expr::gcd::gcd(&den, e.den());
            den = den.mul(&crate::expr::gcd::div_exact(e.den(), &g).expect("gcd divides"));
        }
    }
    let nums = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let e = &p.m[i][j];
            let q = crate::expr::gcd::div_exact(&den, e.den()).expect("lcm is a multiple");
            e.num().mul(&q)
        })
    });
    (den, nums)
}

fn grad_numerators(f: &RationalExpr) -> [Poly; 4] {
    // ∂(n/d) = (n'·d - n·d') / d²; only the numerators matter for zero tests.
    window_vars().map(|v| {
        let (n, d) = (f.num(), f.den());
        n.derivative(v).mul(d).sub(&n.mul(&d.derivative(v)))
    })
}

/// Numerator of `{F, G}` over the common denominator, as an unreduced
/// polynomial: zero exactly when the bracket vanishes.
pub fn bracket_numerator(f: &RationalExpr, g: &RationalExpr, p: &PoissonStructure) -> Poly {
    bracket_expansion(f, g, p).0
}

/// The bracket numerator and the number of terms of the products summed
/// into it, before cancellation.
fn bracket_expansion(f: &RationalExpr, g: &RationalExpr, p: &PoissonStructure) -> (Poly, usize) {
    let (_, pn) = cleared(p);
    let df = grad_numerators(f);
    let dg = grad_numerators(g);
    let mut acc = Poly::zero();
    let mut expanded = 0;
    for i in 0..4 {
        if df[i].is_zero() {
            continue;
        }
        let mut row = Poly::zero();
        for j in 0..4 {
            if !dg[j].is_zero() && !pn[i][j].is_zero() {
                row = row.add(&dg[j].mul(&pn[i][j]));
            }
        }
        let term = df[i].mul(&row);
        expanded += term.nterms();
        acc = acc.add(&term);
    }
    (acc, expanded)
}

fn bracket_estimate(f: &RationalExpr, g: &RationalExpr, p: &PoissonStructure) -> usize {
    let (_, pn) = cleared(p);
    let nf = 2 * f.num().nterms() * f.den().nterms();
    let ng = 2 * g.num().nterms() * g.den().nterms();
    let np = pn.iter().flatten().map(|e| e.nterms()).max().unwrap_or(1);
    nf.saturating_mul(ng).saturating_mul(np).saturating_mul(16)
}

/// Certifies `{F, G} = 0`.
pub fn check_involution(f: &RationalExpr, g: &RationalExpr, p: &PoissonStructure, mode: CheckMode) -> Certificate {
    let mode = match mode {
        CheckMode::Auto if bracket_estimate(f, g, p) > term_budget() => {
            CheckMode::Sampled { points: 200, seed: sample::DEFAULT_SEED }
        }
        CheckMode::Auto => CheckMode::Symbolic,
        m => m,
    };
    match mode {
        CheckMode::Sampled { points, seed } => sampled_involution(f, g, p, points, seed),
        _ => {
            let (n, expanded_terms) = bracket_expansion(f, g, p);
            Certificate::Symbolic { residual_terms: n.nterms(), expanded_terms }
        }
    }
}

/// Exact evaluation of `{F, G}` at random rational points.
pub fn sampled_involution(f: &RationalExpr, g: &RationalExpr, p: &PoissonStructure, points: usize, seed: u64) -> Certificate {
    let vars = window_vars();
    let df: Vec<RationalExpr> = vars.iter().map(|v| f.differentiate(*v)).collect();
    let dg: Vec<RationalExpr> = vars.iter().map(|v| g.differentiate(*v)).collect();
    let mut all: Vec<Var> = f.vars();
    all.extend(g.vars());
    for row in &p.m {
        for e in row {
            all.extend(e.vars());
        }
    }
    all.sort();
    all.dedup();
    let failures = (0..points)
        .into_par_iter()
        .filter(|k| {
            let mut r = sample::stream(seed, *k as u64);
            for _ in 0..64 {
                let pt = sample::point(&mut r, &all, 9, 7);
                let ev = |e: &RationalExpr| sample::eval_at(e, &pt);
                let (Some(a), Some(b)) = (df.iter().map(ev).collect::<Option<Vec<_>>>(), dg.iter().map(ev).collect::<Option<Vec<_>>>()) else {
                    continue;
                };
                let Some(pm) = p.m.iter().flatten().map(ev).collect::<Option<Vec<_>>>() else { continue };
                let mut acc = crate::expr::Scalar::zero();
                for i in 0..4 {
                    for j in 0..4 {
                        acc = &acc + &(&(&a[i] * &b[j]) * &pm[4 * i + j]);
                    }
                }
                return !acc.is_zero();
            }
            true
        })
        .count();
    Certificate::Sampled { points, failures, seed }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_closed, parse_expr, Context};
    use crate::lagrangian::Multiplier;

    fn ctx() -> Context {
        Context::new(&["alpha", "beta", "gamma"])
    }

    fn p(s: &str) -> RationalExpr {
        parse_expr(s, &ctx()).unwrap()
    }

    fn structure(l: &str) -> PoissonStructure {
        let l = parse_closed(l, &ctx()).unwrap();
        poisson_from_chart(&ostrogradsky_chart_closed(&l).unwrap()).unwrap()
    }

    #[test]
    fn quadratic_lagrangian_has_constant_brackets() {
        let s = structure("x[0]*x[2] + alpha*x[0] + beta/2*x[0]^2 + gamma*x[0]*x[1]");
        assert_eq!(s.entry(1, -1), &RationalExpr::int(-1));
        assert_eq!(s.entry(0, -2), &RationalExpr::int(-1));
        assert_eq!(s.entry(1, -2), &p("gamma"));
        assert!(s.entry(1, 0).is_zero());
        assert!(s.entry(-1, -2).is_zero());
        assert!(s.is_skew());
        assert!(check_jacobi(&s).iter().all(|(_, r)| r.is_zero()));
        assert_eq!(bracket(&RationalExpr::x(1), &RationalExpr::x(-2), &s), p("gamma"));
    }

    #[test]
    fn first_canonical_lagrangian() {
        let s = structure(
            "(x[1]^2-1)*x[2]*x[0] + x[0]^2*x[1]^2/2 + gamma*x[0]*x[1] + alpha/2*log(x[0]^2-1) + beta/2*log((x[0]-1)/(x[0]+1))",
        );
        assert_eq!(s.entry(1, -1), &p("-1/(x[0]^2-1)"));
        assert_eq!(s.entry(1, -2), &p("(2*x[0]*x[-1] + 2*x[0]*x[1] + 2*x[-2]*x[-1] + gamma)/((x[0]^2-1)*(x[-1]^2-1))"));
        assert_eq!(s.entry(0, -2), &p("-1/(x[-1]^2-1)"));
        assert!(check_jacobi(&s).iter().all(|(_, r)| r.is_zero()));
        assert!(!s.determinant().is_zero());
    }

    #[test]
    fn chart_from_gradient_matches_closed_form() {
        let v = parse_closed("eta^2*xi^2/2 + gamma*eta*xi + alpha/eta", &ctx()).unwrap();
        let l = DiscreteLagrangian::from_potential(p("xi^2"), Multiplier::one(), v);
        let from_grad = poisson_of(&l).unwrap();
        let from_closed = poisson_from_chart(&ostrogradsky_chart_closed(&l.lagrangian().unwrap()).unwrap()).unwrap();
        assert_eq!(from_grad, from_closed);
    }

    #[test]
    fn rejects_non_autonomous_and_nonlinear() {
        let v = parse_closed("eta*xi", &ctx()).unwrap();
        let l = DiscreteLagrangian::from_potential(RationalExpr::one(), Multiplier::numeric(2.into()), v);
        assert_eq!(ostrogradsky_chart(&l), Err(PoissonError::NonAutonomous));
        let l = parse_closed("x[0]*x[2]^2", &ctx()).unwrap();
        assert_eq!(ostrogradsky_chart_closed(&l), Err(PoissonError::NotLinearInTop));
    }

    #[test]
    fn corrupted_entry_breaks_jacobi() {
        let s = structure(
            "(x[1]^2-1)*x[2]*x[0] + x[0]^2*x[1]^2/2 + gamma*x[0]*x[1] + alpha/2*log(x[0]^2-1)",
        );
        let mut bad = s.clone();
        let e = &bad.m[0][3] * &RationalExpr::x(0);
        bad.m[0][3] = e.clone();
        bad.m[3][0] = -e;
        assert!(check_jacobi(&bad).iter().any(|(_, r)| !r.is_zero()));
    }

    #[test]
    fn self_bracket_vanishes() {
        let s = structure("x[1]*x[2]*x[0] + x[0]^2*x[1]^2/2 + alpha*log(x[0])");
        let f = p("x[1]*x[0]^2 + x[-2]*x[-1]");
        assert!(bracket(&f, &f, &s).is_zero());
        assert!(check_involution(&f, &f, &s, CheckMode::Symbolic).holds());
        assert!(sampled_involution(&f, &f, &s, 10, 1).holds());
    }
}
