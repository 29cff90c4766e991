//! Normalized rational functions and an unreduced fraction type for heavy
//! zero tests.
//!
//! A [`RationalExpr`] always has coprime numerator and denominator and a
//! denominator whose leading coefficient (documented order) is 1, so equal
//! rational functions are represented identically.

use std::collections::HashMap;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rustc_hash::FxHashMap;

use super::gcd::{div_exact, gcd};
use super::poly::{Monomial, Poly};
use super::scalar::Scalar;
use super::symbol::Var;
use super::ExprError;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RationalExpr {
    num: Poly,
    den: Poly,
}

/// Bindings for simultaneous substitution.
pub type Bindings = HashMap<Var, RationalExpr>;

impl RationalExpr {
    pub fn zero() -> Self {
        RationalExpr { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> Self {
        RationalExpr { num: Poly::one(), den: Poly::one() }
    }

    pub fn int(n: i64) -> Self {
        Self::from_poly(Poly::int(n))
    }

    pub fn scalar(s: Scalar) -> Self {
        Self::from_poly(Poly::constant(s))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Self::scalar(Scalar::ratio(n, d))
    }

    pub fn var(v: Var) -> Self {
        Self::from_poly(Poly::var(v))
    }

    pub fn x(k: i32) -> Self {
        Self::var(Var::shift(k))
    }

    pub fn param(name: &str) -> Self {
        Self::var(Var::param(name))
    }

    pub fn from_poly(p: Poly) -> Self {
        RationalExpr { num: p, den: Poly::one() }
    }

    /// Builds and normalizes `num / den`.
    pub fn new(num: Poly, den: Poly) -> Result<Self, ExprError> {
        if den.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        Ok(Self::normalize(num, den))
    }

    fn normalize(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        let (num, den) = if den.is_constant() {
            (num, den)
        } else {
            let g = gcd(&num, &den);
            if g.is_constant() {
                (num, den)
            } else {
                (div_exact(&num, &g).expect("gcd divides numerator"), div_exact(&den, &g).expect("gcd divides denominator"))
            }
        };
        Self::make_monic(num, den)
    }

    fn make_monic(num: Poly, den: Poly) -> Self {
        let lc = den.leading_coeff_documented();
        if lc.is_one() {
            RationalExpr { num, den }
        } else {
            let inv = lc.recip();
            RationalExpr { num: num.scale(&inv), den: den.scale(&inv) }
        }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn into_parts(self) -> (Poly, Poly) {
        (self.num, self.den)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    pub fn constant_value(&self) -> Option<Scalar> {
        if self.is_constant() {
            Some(&self.num.constant_value().unwrap() / &self.den.constant_value().unwrap())
        } else {
            None
        }
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut v = self.num.vars();
        for w in self.den.vars() {
            if !v.contains(&w) {
                v.push(w);
            }
        }
        v.sort();
        v
    }

    pub fn contains_var(&self, v: Var) -> bool {
        self.num.contains_var(v) || self.den.contains_var(v)
    }

    /// True when only parameters occur.
    pub fn is_param_only(&self) -> bool {
        self.vars().iter().all(|v| v.is_param())
    }

    pub fn neg(&self) -> Self {
        RationalExpr { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        RationalExpr { num: self.num.scale(s), den: self.den.clone() }
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            return Self::normalize(self.num.add(&o.num), self.den.clone());
        }
        if self.den.is_constant() && o.den.is_constant() {
            let a = self.num.scale(&o.den.constant_value().unwrap());
            let b = o.num.scale(&self.den.constant_value().unwrap());
            let d = self.den.mul(&o.den);
            return Self::make_monic(a.add(&b), d);
        }
        let g = gcd(&self.den, &o.den);
        if g.is_constant() {
            let n = self.num.mul(&o.den).add(&o.num.mul(&self.den));
            if n.is_zero() {
                return Self::zero();
            }
            return Self::make_monic(n, self.den.mul(&o.den));
        }
        let a1 = div_exact(&self.den, &g).unwrap();
        let b1 = div_exact(&o.den, &g).unwrap();
        let n = self.num.mul(&b1).add(&o.num.mul(&a1));
        if n.is_zero() {
            return Self::zero();
        }
        let h = gcd(&n, &g);
        let (n, g) = if h.is_constant() { (n, g) } else { (div_exact(&n, &h).unwrap(), div_exact(&g, &h).unwrap()) };
        Self::make_monic(n, g.mul(&a1).mul(&b1))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let g1 = gcd(&self.num, &o.den);
        let g2 = gcd(&o.num, &self.den);
        let (an, bd) = if g1.is_constant() { (self.num.clone(), o.den.clone()) } else { (div_exact(&self.num, &g1).unwrap(), div_exact(&o.den, &g1).unwrap()) };
        let (bn, ad) = if g2.is_constant() { (o.num.clone(), self.den.clone()) } else { (div_exact(&o.num, &g2).unwrap(), div_exact(&self.den, &g2).unwrap()) };
        Self::make_monic(an.mul(&bn), ad.mul(&bd))
    }

    pub fn inv(&self) -> Result<Self, ExprError> {
        if self.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        Ok(Self::make_monic(self.den.clone(), self.num.clone()))
    }

    pub fn checked_div(&self, o: &Self) -> Result<Self, ExprError> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn pow(&self, e: i32) -> Result<Self, ExprError> {
        if e >= 0 {
            Ok(RationalExpr { num: self.num.pow(e as u32), den: self.den.pow(e as u32) })
        } else {
            let i = self.inv()?;
            Ok(RationalExpr { num: i.num.pow((-e) as u32), den: i.den.pow((-e) as u32) })
        }
    }

    /// Exact square root in the field of rational expressions, if any.
    pub fn sqrt(&self) -> Option<Self> {
        let n = self.num.sqrt()?;
        let d = self.den.sqrt()?;
        Some(Self::make_monic(n, d))
    }

    /// Quotient-rule derivative.
    pub fn differentiate(&self, v: Var) -> Self {
        if !self.contains_var(v) {
            return Self::zero();
        }
        if self.den.is_constant() {
            return RationalExpr { num: self.num.derivative(v), den: self.den.clone() };
        }
        let n = self.num.derivative(v).mul(&self.den).sub(&self.num.mul(&self.den.derivative(v)));
        Self::normalize(n, self.den.mul(&self.den))
    }

    /// Renames variables (injective on the variables present).
    pub fn rename(&self, f: &dyn Fn(Var) -> Var) -> Self {
        Self::make_monic(self.num.rename(f), self.den.rename(f))
    }

    /// Simultaneous substitution followed by normalization.
    pub fn substitute(&self, b: &Bindings) -> Result<Self, ExprError> {
        let f = Frac::from(self).substitute(b)?;
        f.to_rational()
    }

    pub fn substitute_one(&self, v: Var, e: &RationalExpr) -> Result<Self, ExprError> {
        let mut b = Bindings::new();
        b.insert(v, e.clone());
        self.substitute(&b)
    }

    /// Substitutes exact values for some variables.
    pub fn eval_partial(&self, f: &dyn Fn(Var) -> Option<Scalar>) -> Result<Self, ExprError> {
        Self::new(self.num.eval_partial(f), self.den.eval_partial(f))
    }

    pub fn eval_scalar(&self, f: &dyn Fn(Var) -> Option<Scalar>) -> Result<Scalar, ExprError> {
        let n = self.num.eval_scalar(f).ok_or_else(|| ExprError::Unbound(self.first_unbound(f)))?;
        let d = self.den.eval_scalar(f).ok_or_else(|| ExprError::Unbound(self.first_unbound(f)))?;
        if d.is_zero() {
            return Err(ExprError::Pole("denominator vanishes at the evaluation point".into()));
        }
        Ok(&n / &d)
    }

    fn first_unbound(&self, f: &dyn Fn(Var) -> Option<Scalar>) -> String {
        self.vars().into_iter().find(|v| f(*v).is_none()).map(|v| v.name()).unwrap_or_default()
    }

    pub fn eval_f64(&self, f: &dyn Fn(Var) -> Option<f64>) -> Result<f64, ExprError> {
        let unbound = || {
            let name = self.vars().into_iter().find(|v| f(*v).is_none()).map(|v| v.name()).unwrap_or_default();
            ExprError::Unbound(name)
        };
        let n = self.num.eval_f64(f).ok_or_else(unbound)?;
        let d = self.den.eval_f64(f).ok_or_else(unbound)?;
        if d.abs() < 1e-300 {
            return Err(ExprError::Pole(format!("denominator {} near zero", d)));
        }
        Ok(n / d)
    }

    pub fn eval_map_f64(&self, m: &HashMap<Var, f64>) -> Result<f64, ExprError> {
        self.eval_f64(&|v| m.get(&v).copied())
    }

    /// Degree of the numerator and denominator in `v`.
    pub fn degrees_in(&self, v: Var) -> (u32, u32) {
        (self.num.degree_in(v), self.den.degree_in(v))
    }
}

impl Default for RationalExpr {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<Poly> for RationalExpr {
    fn from(p: Poly) -> Self {
        Self::from_poly(p)
    }
}

impl From<Scalar> for RationalExpr {
    fn from(s: Scalar) -> Self {
        Self::scalar(s)
    }
}

impl From<i64> for RationalExpr {
    fn from(n: i64) -> Self {
        Self::int(n)
    }
}

impl<'a> Add<&'a RationalExpr> for &'a RationalExpr {
    type Output = RationalExpr;
    fn add(self, o: &RationalExpr) -> RationalExpr {
        RationalExpr::add(self, o)
    }
}

impl<'a> Sub<&'a RationalExpr> for &'a RationalExpr {
    type Output = RationalExpr;
    fn sub(self, o: &RationalExpr) -> RationalExpr {
        RationalExpr::sub(self, o)
    }
}

impl<'a> Mul<&'a RationalExpr> for &'a RationalExpr {
    type Output = RationalExpr;
    fn mul(self, o: &RationalExpr) -> RationalExpr {
        RationalExpr::mul(self, o)
    }
}

impl<'a> Div<&'a RationalExpr> for &'a RationalExpr {
    type Output = RationalExpr;
    /// Panics on division by zero; use [`RationalExpr::checked_div`] for a checked form.
    fn div(self, o: &RationalExpr) -> RationalExpr {
        RationalExpr::checked_div(self, o).expect("division by zero expression")
    }
}

impl Neg for &RationalExpr {
    type Output = RationalExpr;
    fn neg(self) -> RationalExpr {
        RationalExpr::neg(self)
    }
}

impl Neg for RationalExpr {
    type Output = RationalExpr;
    fn neg(self) -> RationalExpr {
        RationalExpr::neg(&self)
    }
}

macro_rules! owned_ops {
    ($tr:ident, $m:ident) => {
        impl $tr<RationalExpr> for RationalExpr {
            type Output = RationalExpr;
            fn $m(self, o: RationalExpr) -> RationalExpr {
                $tr::$m(&self, &o)
            }
        }
        impl<'a> $tr<&'a RationalExpr> for RationalExpr {
            type Output = RationalExpr;
            fn $m(self, o: &RationalExpr) -> RationalExpr {
                $tr::$m(&self, o)
            }
        }
        impl<'a> $tr<RationalExpr> for &'a RationalExpr {
            type Output = RationalExpr;
            fn $m(self, o: RationalExpr) -> RationalExpr {
                $tr::$m(self, &o)
            }
        }
    };
}
owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);
owned_ops!(Div, div);

/// An unreduced fraction. Arithmetic never computes a gcd, which makes it
/// the right carrier for large zero tests where only the numerator matters.
#[derive(Clone, Debug)]
pub struct Frac {
    pub num: Poly,
    pub den: Poly,
}

impl From<&RationalExpr> for Frac {
    fn from(r: &RationalExpr) -> Self {
        Frac { num: r.num.clone(), den: r.den.clone() }
    }
}

impl From<Poly> for Frac {
    fn from(p: Poly) -> Self {
        Frac { num: p, den: Poly::one() }
    }
}

impl Frac {
    pub fn add(&self, o: &Frac) -> Frac {
        if self.den == o.den {
            return Frac { num: self.num.add(&o.num), den: self.den.clone() };
        }
        Frac { num: self.num.mul(&o.den).add(&o.num.mul(&self.den)), den: self.den.mul(&o.den) }
    }

    pub fn sub(&self, o: &Frac) -> Frac {
        self.add(&Frac { num: o.num.neg(), den: o.den.clone() })
    }

    pub fn mul(&self, o: &Frac) -> Frac {
        Frac { num: self.num.mul(&o.num), den: self.den.mul(&o.den) }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn to_rational(&self) -> Result<RationalExpr, ExprError> {
        RationalExpr::new(self.num.clone(), self.den.clone())
    }

    /// Simultaneous substitution by homogenization: each mapped variable
    /// `v -> n_v / d_v` contributes `d_v^(deg_v)` to a shared denominator.
    pub fn substitute(&self, b: &Bindings) -> Result<Frac, ExprError> {
        let (nn, nd) = subst_poly(&self.num, b);
        let (dn, dd) = subst_poly(&self.den, b);
        if dn.is_zero() {
            return Err(ExprError::Pole("substitution makes the denominator vanish".into()));
        }
        // (nn / prod d^a) / (dn / prod d^c) = nn * prod d^(c-a) / dn
        let mut num = nn;
        let mut den = dn;
        let mut keys: Vec<&Var> = nd.keys().chain(dd.keys()).collect();
        keys.sort();
        keys.dedup();
        for v in keys {
            let a = nd.get(v).copied().unwrap_or(0);
            let c = dd.get(v).copied().unwrap_or(0);
            let d = b[v].den();
            if c > a {
                num = num.mul(&d.pow(c - a));
            } else if a > c {
                den = den.mul(&d.pow(a - c));
            }
        }
        Ok(Frac { num, den })
    }
}

/// Returns the homogenized numerator and, per substituted variable with a
/// non-trivial denominator, the power of that denominator dividing it.
fn subst_poly(p: &Poly, b: &Bindings) -> (Poly, FxHashMap<Var, u32>) {
    let mut degs: FxHashMap<Var, u32> = FxHashMap::default();
    for v in p.vars() {
        if let Some(e) = b.get(&v) {
            if !e.den().is_one() {
                degs.insert(v, p.degree_in(v));
            }
        }
    }
    let mut npow: FxHashMap<(Var, u32), Poly> = FxHashMap::default();
    let mut dpow: FxHashMap<(Var, u32), Poly> = FxHashMap::default();
    let mut acc = Poly::zero();
    let mut parts: Vec<Poly> = Vec::new();
    for (m, c) in p.terms() {
        let mut kept = Monomial::one();
        let mut prod = Poly::constant(c.clone());
        for &(v, e) in m.pairs() {
            match b.get(&v) {
                Some(r) => {
                    let pe = npow.entry((v, e)).or_insert_with(|| r.num().pow(e)).clone();
                    prod = prod.mul(&pe);
                }
                None => kept = kept.mul(&Monomial::var(v, e)),
            }
        }
        for (&v, &dv) in degs.iter() {
            let e = m.exp(v);
            if dv > e {
                let r = &b[&v];
                let pe = dpow.entry((v, dv - e)).or_insert_with(|| r.den().pow(dv - e)).clone();
                prod = prod.mul(&pe);
            }
        }
        parts.push(prod.mul_monomial(&kept, &Scalar::one()));
        if parts.len() >= 64 {
            let s = sum_balanced(std::mem::take(&mut parts));
            acc = acc.add(&s);
        }
    }
    acc = acc.add(&sum_balanced(parts));
    (acc, degs)
}

fn sum_balanced(mut ps: Vec<Poly>) -> Poly {
    while ps.len() > 1 {
        let mut next = Vec::with_capacity(ps.len() / 2 + 1);
        let mut it = ps.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(a.add(&b)),
                None => next.push(a),
            }
        }
        ps = next;
    }
    ps.pop().unwrap_or_else(Poly::zero)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancels_common_factor() {
        let x = RationalExpr::x(1);
        let r = &x / &x;
        assert!(r.is_one());
    }

    #[test]
    fn monic_denominator() {
        let r = RationalExpr::new(Poly::int(1), Poly::var(Var::shift(0)).scale(&Scalar::from_int(-2))).unwrap();
        assert!(r.den().leading_coeff_documented().is_one());
        assert_eq!(r.num().constant_value().unwrap(), Scalar::ratio(-1, 2));
    }

    #[test]
    fn derivative_of_reciprocal() {
        let x = RationalExpr::x(0);
        let r = RationalExpr::one().checked_div(&x).unwrap();
        let d = r.differentiate(Var::shift(0));
        assert_eq!(d, RationalExpr::int(-1).checked_div(&(&x * &x)).unwrap());
    }

    #[test]
    fn substitution_with_denominators() {
        let x0 = RationalExpr::x(0);
        let e = &(&x0 * &x0) + &RationalExpr::one();
        let mut b = Bindings::new();
        b.insert(Var::shift(0), RationalExpr::one().checked_div(&RationalExpr::x(1)).unwrap());
        let s = e.substitute(&b).unwrap();
        let x1 = RationalExpr::x(1);
        let expect = (&(&x1 * &x1) + &RationalExpr::one()).checked_div(&(&x1 * &x1)).unwrap();
        assert_eq!(s, expect);
    }

    #[test]
    fn addition_with_shared_denominator_factor() {
        let x = RationalExpr::x(0);
        let one = RationalExpr::one();
        let a = one.checked_div(&(&x - &one)).unwrap();
        let b = one.checked_div(&(&(&x - &one) * &(&x + &one))).unwrap();
        let s = &a + &b;
        let expect = (&x + &RationalExpr::int(2)).checked_div(&(&(&x * &x) - &one)).unwrap();
        assert_eq!(s, expect);
    }
}
