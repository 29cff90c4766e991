//! Antiderivatives of rational functions in one variable.
//!
//! Coefficients live in the field of rational expressions in every other
//! variable. The rational part comes from Hermite reduction; the remaining
//! squarefree denominator is split into linear factors (by trying candidate
//! roots) and at most one quadratic remainder per step, which produce `log`,
//! `arctan` and `arctanh` atoms. Integration gives up (returns `None`) when a
//! denominator does not split this way or an atom coefficient would depend
//! on a state variable.

use crate::expr::{AtomKind, ClosedForm, Poly, RationalExpr, Var};

/// Dense univariate polynomial, coefficients from low to high degree.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct UPoly(Vec<RationalExpr>);

impl UPoly {
    fn trimmed(mut c: Vec<RationalExpr>) -> UPoly {
        while c.last().map(|x| x.is_zero()).unwrap_or(false) {
            c.pop();
        }
        UPoly(c)
    }

    pub(crate) fn from_poly(p: &Poly, v: Var) -> UPoly {
        Self::trimmed(p.coeffs_in(v).into_iter().map(RationalExpr::from_poly).collect())
    }

    fn constant(c: RationalExpr) -> UPoly {
        Self::trimmed(vec![c])
    }

    fn zero() -> UPoly {
        UPoly(Vec::new())
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree, with -1 for the zero polynomial.
    fn deg(&self) -> isize {
        self.0.len() as isize - 1
    }

    fn lc(&self) -> RationalExpr {
        self.0.last().cloned().unwrap_or_default()
    }

    fn coeff(&self, k: usize) -> RationalExpr {
        self.0.get(k).cloned().unwrap_or_default()
    }

    fn add(&self, o: &UPoly) -> UPoly {
        let n = self.0.len().max(o.0.len());
        Self::trimmed((0..n).map(|k| &self.coeff(k) + &o.coeff(k)).collect())
    }

    fn neg(&self) -> UPoly {
        UPoly(self.0.iter().map(|c| -c).collect())
    }

    fn sub(&self, o: &UPoly) -> UPoly {
        self.add(&o.neg())
    }

    fn scale(&self, s: &RationalExpr) -> UPoly {
        Self::trimmed(self.0.iter().map(|c| c * s).collect())
    }

    fn mul(&self, o: &UPoly) -> UPoly {
        if self.is_zero() || o.is_zero() {
            return UPoly::zero();
        }
        let mut out = vec![RationalExpr::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        Self::trimmed(out)
    }

    fn derivative(&self) -> UPoly {
        Self::trimmed(self.0.iter().enumerate().skip(1).map(|(k, c)| c.scale(&(k as i64).into())).collect())
    }

    fn monic(&self) -> UPoly {
        if self.is_zero() {
            return self.clone();
        }
        let inv = self.lc().inv().expect("nonzero leading coefficient");
        self.scale(&inv)
    }

    fn divrem(&self, b: &UPoly) -> (UPoly, UPoly) {
        let db = b.deg();
        assert!(db >= 0, "division by the zero polynomial");
        let inv = b.lc().inv().expect("nonzero leading coefficient");
        let mut r = self.clone();
        let mut q = vec![RationalExpr::zero(); (self.deg() - db + 1).max(0) as usize];
        while r.deg() >= db {
            let shift = (r.deg() - db) as usize;
            let t = &r.lc() * &inv;
            let mut sub = vec![RationalExpr::zero(); shift];
            sub.extend(b.0.iter().map(|c| c * &t));
            q[shift] = t;
            r = r.sub(&UPoly(sub));
        }
        (Self::trimmed(q), r)
    }

    fn rem(&self, b: &UPoly) -> UPoly {
        self.divrem(b).1
    }

    fn quo(&self, b: &UPoly) -> UPoly {
        self.divrem(b).0
    }

    fn gcd(a: &UPoly, b: &UPoly) -> UPoly {
        let (mut x, mut y) = (a.clone(), b.clone());
        while !y.is_zero() {
            let r = x.rem(&y);
            x = y;
            y = r;
        }
        x.monic()
    }

    fn eval(&self, at: &RationalExpr) -> RationalExpr {
        let mut acc = RationalExpr::zero();
        for c in self.0.iter().rev() {
            acc = &(&acc * at) + c;
        }
        acc
    }

    fn to_expr(&self, v: Var) -> RationalExpr {
        self.eval(&RationalExpr::var(v))
    }

    fn linear(root: &RationalExpr) -> UPoly {
        UPoly(vec![-root, RationalExpr::one()])
    }
}

/// Solves `s·a + t·b = c` with `deg s < deg b`, given `gcd(a, b) | c`.
fn solve_bezout(a: &UPoly, b: &UPoly, c: &UPoly) -> Option<(UPoly, UPoly)> {
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut s0, mut s1) = (UPoly::constant(RationalExpr::one()), UPoly::zero());
    while !r1.is_zero() {
        let (q, r) = r0.divrem(&r1);
        let s = s0.sub(&q.mul(&s1));
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s;
    }
    let (q, r) = c.divrem(&r0);
    if !r.is_zero() {
        return None;
    }
    let mut s = q.mul(&s0);
    if !s.is_zero() && s.deg() >= b.deg() {
        s = s.rem(b);
    }
    let (t, r) = c.sub(&s.mul(a)).divrem(b);
    if !r.is_zero() {
        return None;
    }
    Some((s, t))
}

fn candidate_roots(p: &UPoly) -> Vec<RationalExpr> {
    let mut out: Vec<RationalExpr> = Vec::new();
    for (n, d) in [(0, 1), (1, 1), (-1, 1), (2, 1), (-2, 1), (1, 2), (-1, 2), (3, 1), (-3, 1)] {
        out.push(RationalExpr::ratio(n, d));
    }
    let mut vars: Vec<Var> = p.0.iter().flat_map(|c| c.vars()).filter(|v| !v.is_param()).collect();
    vars.sort();
    vars.dedup();
    for v in vars {
        let x = RationalExpr::var(v);
        for k in [0i64, 1, -1] {
            out.push(&x + &RationalExpr::int(k));
            out.push(&(-&x) + &RationalExpr::int(k));
        }
    }
    out
}

/// Splits a monic squarefree polynomial into linear factors and one
/// remainder of degree at most two.
fn split(p: &UPoly) -> Option<Vec<UPoly>> {
    let mut rest = p.monic();
    let mut out = Vec::new();
    'outer: while rest.deg() > 2 {
        for r in candidate_roots(&rest) {
            if rest.eval(&r).is_zero() {
                let f = UPoly::linear(&r);
                rest = rest.quo(&f);
                out.push(f);
                continue 'outer;
            }
        }
        return None;
    }
    if rest.deg() >= 1 {
        out.push(rest);
    }
    Some(out)
}

fn atom(kind: AtomKind, coeff: RationalExpr, arg: RationalExpr) -> Option<ClosedForm> {
    if coeff.is_zero() {
        return Some(ClosedForm::zero());
    }
    if !coeff.is_param_only() {
        return None;
    }
    ClosedForm::atom(kind, coeff, arg).ok()
}

/// Integral of `a / f` for a monic factor `f` of degree one or two with
/// `deg a < deg f`.
fn integrate_factor(a: &UPoly, f: &UPoly, v: Var) -> Option<ClosedForm> {
    let x = RationalExpr::var(v);
    if f.deg() == 1 {
        return atom(AtomKind::Log, a.coeff(0), f.to_expr(v));
    }
    let b = f.coeff(1);
    let c0 = f.coeff(0);
    let b1 = a.coeff(1);
    let b0 = a.coeff(0);
    let half = RationalExpr::ratio(1, 2);
    let log_part = atom(AtomKind::Log, &b1 * &half, f.to_expr(v))?;
    let rest = &b0 - &(&(&b1 * &b) * &half);
    if rest.is_zero() {
        return Some(log_part);
    }
    let shift = &b * &half;
    let w = &c0 - &(&shift * &shift);
    let u = &x + &shift;
    if let Some(k) = w.sqrt() {
        let arg = u.checked_div(&k).ok()?;
        let coeff = rest.checked_div(&k).ok()?;
        return Some(log_part.add(&atom(AtomKind::Arctan, coeff, arg)?));
    }
    if let Some(k) = (-&w).sqrt() {
        let arg = u.checked_div(&k).ok()?;
        let coeff = -&rest.checked_div(&k).ok()?;
        return Some(log_part.add(&atom(AtomKind::Arctanh, coeff, arg)?));
    }
    None
}

/// Hermite reduction of `a / d` (proper fraction): returns the rational part
/// `g` and the numerator `h` over the squarefree part `d*` such that
/// `∫ a/d = g + ∫ h/d*`.
fn hermite(a: &UPoly, d: &UPoly, v: Var) -> Option<(RationalExpr, UPoly, UPoly)> {
    let mut a = a.clone();
    let mut g = RationalExpr::zero();
    let mut dm = UPoly::gcd(d, &d.derivative());
    let ds = d.quo(&dm);
    while dm.deg() > 0 {
        let dm2 = UPoly::gcd(&dm, &dm.derivative());
        let dms = dm.quo(&dm2);
        let lhs = ds.mul(&dm.derivative()).quo(&dm).neg();
        let (bq, cq) = solve_bezout(&lhs, &dms, &a)?;
        a = cq.sub(&bq.derivative().mul(&ds.quo(&dms)));
        g = &g + &bq.to_expr(v).checked_div(&dm.to_expr(v)).ok()?;
        dm = dm2;
    }
    Some((g, a, ds))
}

/// Antiderivative of `e` with respect to `v` as a closed form.
pub fn integrate(e: &RationalExpr, v: Var) -> Option<ClosedForm> {
    if !e.contains_var(v) {
        return Some(ClosedForm::from(e * &RationalExpr::var(v)));
    }
    let num = UPoly::from_poly(e.num(), v);
    let den = UPoly::from_poly(e.den(), v);
    let (q, r) = num.divrem(&den);
    let mut poly_part = RationalExpr::zero();
    let x = RationalExpr::var(v);
    let mut xp = x.clone();
    for (k, c) in q.0.iter().enumerate() {
        poly_part = &poly_part + &(&(c * &xp) * &RationalExpr::ratio(1, k as i64 + 1));
        xp = &xp * &x;
    }
    let mut total = ClosedForm::from(poly_part);
    if r.is_zero() {
        return Some(total);
    }
    let (g, h, ds) = hermite(&r, &den, v)?;
    total = total.add(&ClosedForm::from(g));
    if h.is_zero() {
        return Some(total);
    }
    let h = h.scale(&ds.lc().inv().ok()?);
    let ds = ds.monic();
    let factors = split(&ds)?;
    for (i, f) in factors.iter().enumerate() {
        let mut cof = UPoly::constant(RationalExpr::one());
        for (j, o) in factors.iter().enumerate() {
            if i != j {
                cof = cof.mul(o);
            }
        }
        let (s, _) = solve_bezout(&cof, f, &UPoly::constant(RationalExpr::one()))?;
        let af = h.mul(&s).rem(f);
        total = total.add(&integrate_factor(&af, f, v)?);
    }
    Some(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_closed, parse_expr, Context};

    fn check(src: &str, ctx: &Context) -> ClosedForm {
        let e = parse_expr(src, ctx).unwrap();
        let v = integrate(&e, Var::XI).unwrap_or_else(|| panic!("no closed form for {}", src));
        assert_eq!(v.differentiate(Var::XI), e, "{} -> {}", src, v);
        v
    }

    #[test]
    fn polynomial_and_rational_parts() {
        let ctx = Context::new(&["a"]);
        check("3*xi^2 + a*xi*eta", &ctx);
        check("1/xi^2", &ctx);
        check("(xi^3 + 1)/(xi - 1)^3", &ctx);
    }

    #[test]
    fn arctanh_for_difference_of_squares() {
        let ctx = Context::new(&["mu"]);
        let v = check("-mu/(2*(xi^2 - 1))", &ctx);
        let expect = parse_closed("mu/2*arctanh(xi)", &ctx).unwrap();
        assert_eq!(v, expect);
    }

    #[test]
    fn arctan_with_placeholder_coefficient() {
        let v = check("eta/(xi^2 + eta^2)", &Context::default());
        assert_eq!(v.to_string(), "arctan(xi/eta)");
    }

    #[test]
    fn logs_with_parameters() {
        let ctx = Context::new(&["alpha", "beta"]);
        check("(alpha*xi + beta)/(xi^2 - 1)", &ctx);
        check("alpha/xi + beta/(xi + 2)", &ctx);
        check("(alpha + beta*xi)/(xi^2 + 1)", &ctx);
        check("1/((xi - 1)*(xi + 1)*(xi - 2))", &ctx);
    }

    #[test]
    fn state_dependent_coefficient_is_refused() {
        let e = parse_expr("1/(xi^2 + eta)", &Context::default()).unwrap();
        assert!(integrate(&e, Var::XI).is_none());
    }
}
