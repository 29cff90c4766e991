//! Arithmetic in a quadratic extension `K(s)` with `s² = d`, where `K` is the
//! field of rational expressions. Elements are stored as `a + b·s`.
//!
//! This is how a symbolic square root such as `λ = √c` enters an identity:
//! the element is zero iff both components vanish, provided `d` is not a
//! square in `K` (callers check that first with [`RationalExpr`] arithmetic).

use super::poly::Poly;
use super::rational::RationalExpr;
use super::symbol::Var;
use super::ExprError;

fn split_poly(p: &Poly, s: Var, d: &RationalExpr) -> (RationalExpr, RationalExpr) {
    let mut even = RationalExpr::zero();
    let mut odd = RationalExpr::zero();
    let mut dpow = RationalExpr::one();
    for (k, c) in p.coeffs_in(s).into_iter().enumerate() {
        if k > 0 && k % 2 == 0 {
            dpow = &dpow * d;
        }
        if c.is_zero() {
            continue;
        }
        let t = &RationalExpr::from_poly(c) * &dpow;
        if k % 2 == 0 {
            even = &even + &t;
        } else {
            odd = &odd + &t;
        }
    }
    (even, odd)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadExt {
    pub a: RationalExpr,
    pub b: RationalExpr,
    pub d: RationalExpr,
}

impl QuadExt {
    pub fn new(a: RationalExpr, b: RationalExpr, d: RationalExpr) -> Self {
        QuadExt { a, b, d }
    }

    pub fn base(a: RationalExpr, d: &RationalExpr) -> Self {
        QuadExt { a, b: RationalExpr::zero(), d: d.clone() }
    }

    /// The generator `s`.
    pub fn root(d: &RationalExpr) -> Self {
        QuadExt { a: RationalExpr::zero(), b: RationalExpr::one(), d: d.clone() }
    }

    /// Reads a rational expression containing the symbol `s` as an element
    /// of `K(s)` with `s² = d`.
    pub fn from_expr(e: &RationalExpr, s: Var, d: &RationalExpr) -> Result<QuadExt, ExprError> {
        let (na, nb) = split_poly(e.num(), s, d);
        let (da, db) = split_poly(e.den(), s, d);
        Ok(QuadExt::new(na, nb, d.clone()).mul(&QuadExt::new(da, db, d.clone()).inv()?))
    }

    /// Writes the element back as `a + b·s`.
    pub fn to_expr(&self, s: Var) -> RationalExpr {
        &self.a + &(&self.b * &RationalExpr::var(s))
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn add(&self, o: &QuadExt) -> QuadExt {
        QuadExt { a: &self.a + &o.a, b: &self.b + &o.b, d: self.d.clone() }
    }

    pub fn sub(&self, o: &QuadExt) -> QuadExt {
        QuadExt { a: &self.a - &o.a, b: &self.b - &o.b, d: self.d.clone() }
    }

    pub fn mul(&self, o: &QuadExt) -> QuadExt {
        let a = &(&self.a * &o.a) + &(&(&self.b * &o.b) * &self.d);
        let b = &(&self.a * &o.b) + &(&self.b * &o.a);
        QuadExt { a, b, d: self.d.clone() }
    }

    pub fn scale(&self, f: &RationalExpr) -> QuadExt {
        QuadExt { a: &self.a * f, b: &self.b * f, d: self.d.clone() }
    }

    /// Inverse through the conjugate `a - b·s`.
    pub fn inv(&self) -> Result<QuadExt, ExprError> {
        let norm = &(&self.a * &self.a) - &(&(&self.b * &self.b) * &self.d);
        let ni = norm.inv()?;
        Ok(QuadExt { a: &self.a * &ni, b: -&(&self.b * &ni), d: self.d.clone() })
    }

    /// Human-readable form `a + (b)*sqrt(d)`.
    pub fn render(&self) -> String {
        if self.b.is_zero() {
            return self.a.to_string();
        }
        let s = format!("({})*sqrt({})", self.b, self.d);
        if self.a.is_zero() {
            s
        } else {
            format!("{} + {}", self.a, s)
        }
    }
}

/// Reduces `e` modulo `s² = d`, giving an expression of degree at most one
/// in `s` with an `s`-free denominator.
pub fn reduce_sqrt(e: &RationalExpr, s: Var, d: &RationalExpr) -> Result<RationalExpr, ExprError> {
    if !e.contains_var(s) {
        return Ok(e.clone());
    }
    Ok(QuadExt::from_expr(e, s, d)?.to_expr(s))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_rationalizes_denominator() {
        let s = Var::param("alg_s");
        let d = RationalExpr::int(3);
        let e = RationalExpr::one().checked_div(&(&RationalExpr::var(s) + &RationalExpr::one())).unwrap();
        let r = reduce_sqrt(&e, s, &d).unwrap();
        let expect = &(&RationalExpr::var(s) - &RationalExpr::one()) * &RationalExpr::ratio(1, 2);
        assert_eq!(r, expect);
    }

    #[test]
    fn root_squares_to_radicand() {
        let d = RationalExpr::param("alg_c");
        let s = QuadExt::root(&d);
        let sq = s.mul(&s);
        assert_eq!(sq.a, d);
        assert!(sq.b.is_zero());
    }

    #[test]
    fn inverse_roundtrip() {
        let d = RationalExpr::int(2);
        let e = QuadExt::new(RationalExpr::x(0), RationalExpr::int(3), d.clone());
        let p = e.mul(&e.inv().unwrap());
        assert!(p.sub(&QuadExt::base(RationalExpr::one(), &d)).is_zero());
    }
}
