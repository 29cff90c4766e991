//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Terms are kept sorted in a fixed graded order on the raw variable codes and
//! never store zero coefficients, so structural equality is semantic equality.
//! The documented graded-lexicographic order (see [`super::symbol`]) is used
//! for printing and for choosing the leading coefficient during normalization.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use super::scalar::{mulmod, Scalar};
use super::symbol::{precedence_cmp, Var};

#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Monomial(pub(crate) SmallVec<[(Var, u32); 4]>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(SmallVec::new())
    }

    pub fn var(v: Var, e: u32) -> Self {
        if e == 0 {
            Monomial::one()
        } else {
            let mut s = SmallVec::new();
            s.push((v, e));
            Monomial(s)
        }
    }

    /// Builds a monomial from arbitrary (variable, exponent) pairs.
    pub fn from_pairs(pairs: &[(Var, u32)]) -> Self {
        let mut m = Monomial::one();
        for &(v, e) in pairs {
            m = m.mul(&Monomial::var(v, e));
        }
        m
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|p| p.1).sum()
    }

    pub fn exp(&self, v: Var) -> u32 {
        self.0.iter().find(|p| p.0 == v).map(|p| p.1).unwrap_or(0)
    }

    pub fn pairs(&self) -> &[(Var, u32)] {
        &self.0
    }

    pub fn mul(&self, o: &Monomial) -> Monomial {
        if self.0.is_empty() {
            return o.clone();
        }
        if o.0.is_empty() {
            return self.clone();
        }
        let mut out: SmallVec<[(Var, u32); 4]> = SmallVec::with_capacity(self.0.len() + o.0.len());
        let (a, b) = (&self.0, &o.0);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// `self / o` when `o` divides `self`.
    pub fn div(&self, o: &Monomial) -> Option<Monomial> {
        let mut out: SmallVec<[(Var, u32); 4]> = SmallVec::new();
        let mut j = 0;
        for &(v, e) in self.0.iter() {
            if j < o.0.len() && o.0[j].0 < v {
                return None;
            }
            if j < o.0.len() && o.0[j].0 == v {
                let f = o.0[j].1;
                if f > e {
                    return None;
                }
                if e > f {
                    out.push((v, e - f));
                }
                j += 1;
            } else {
                out.push((v, e));
            }
        }
        if j < o.0.len() {
            return None;
        }
        Some(Monomial(out))
    }

    /// Componentwise minimum of exponents.
    pub fn gcd(&self, o: &Monomial) -> Monomial {
        let mut out: SmallVec<[(Var, u32); 4]> = SmallVec::new();
        for &(v, e) in self.0.iter() {
            let f = o.exp(v);
            if f > 0 {
                out.push((v, e.min(f)));
            }
        }
        Monomial(out)
    }

    /// Splits off the power of `v`.
    pub fn split(&self, v: Var) -> (u32, Monomial) {
        let mut out = self.0.clone();
        let mut e = 0;
        if let Some(pos) = out.iter().position(|p| p.0 == v) {
            e = out[pos].1;
            out.remove(pos);
        }
        (e, Monomial(out))
    }

    /// Graded order on raw codes: total degree, then the exponent of the
    /// lowest code present decides.
    pub fn cmp_internal(&self, o: &Monomial) -> Ordering {
        let d = self.degree().cmp(&o.degree());
        if d != Ordering::Equal {
            return d;
        }
        let (a, b) = (&self.0, &o.0);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            if a[i].0 < b[j].0 {
                return Ordering::Greater;
            }
            if a[i].0 > b[j].0 {
                return Ordering::Less;
            }
            if a[i].1 != b[j].1 {
                return a[i].1.cmp(&b[j].1);
            }
            i += 1;
            j += 1;
        }
        (a.len() - i).cmp(&(b.len() - j))
    }

    /// Documented graded-lexicographic order: total degree, then exponents
    /// compared from the highest-precedence variable down.
    pub fn cmp_documented(&self, o: &Monomial) -> Ordering {
        let d = self.degree().cmp(&o.degree());
        if d != Ordering::Equal {
            return d;
        }
        let mut vars: Vec<Var> = self.0.iter().chain(o.0.iter()).map(|p| p.0).collect();
        vars.sort_by(|a, b| precedence_cmp(*b, *a));
        vars.dedup();
        for v in vars {
            let c = self.exp(v).cmp(&o.exp(v));
            if c != Ordering::Equal {
                return c;
            }
        }
        Ordering::Equal
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Poly {
    terms: Vec<(Monomial, Scalar)>,
}

fn sort_terms(v: &mut [(Monomial, Scalar)]) {
    v.sort_unstable_by(|a, b| b.0.cmp_internal(&a.0));
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(Scalar::one())
    }

    pub fn constant(c: Scalar) -> Self {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { terms: vec![(Monomial::one(), c)] }
        }
    }

    pub fn int(n: i64) -> Self {
        Poly::constant(Scalar::from_int(n))
    }

    pub fn var(v: Var) -> Self {
        Poly { terms: vec![(Monomial::var(v, 1), Scalar::one())] }
    }

    pub fn term(m: Monomial, c: Scalar) -> Self {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { terms: vec![(m, c)] }
        }
    }

    /// Collects arbitrary terms, merging duplicates.
    pub fn from_terms(ts: Vec<(Monomial, Scalar)>) -> Self {
        let mut map: FxHashMap<Monomial, Scalar> = FxHashMap::default();
        for (m, c) in ts {
            accumulate(&mut map, m, c);
        }
        Self::from_map(map)
    }

    fn from_map(map: FxHashMap<Monomial, Scalar>) -> Self {
        let mut terms: Vec<(Monomial, Scalar)> = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        sort_terms(&mut terms);
        Poly { terms }
    }

    /// Terms in internal order (descending).
    pub fn terms(&self) -> &[(Monomial, Scalar)] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<(Monomial, Scalar)> {
        self.terms
    }

    pub fn nterms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_one() && self.terms[0].1.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0.is_one())
    }

    pub fn constant_value(&self) -> Option<Scalar> {
        if self.terms.is_empty() {
            Some(Scalar::zero())
        } else if self.is_constant() {
            Some(self.terms[0].1.clone())
        } else {
            None
        }
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    /// Variables present, sorted by raw code.
    pub fn vars(&self) -> Vec<Var> {
        let mut s = BTreeSet::new();
        for (m, _) in &self.terms {
            for p in m.0.iter() {
                s.insert(p.0);
            }
        }
        s.into_iter().collect()
    }

    pub fn contains_var(&self, v: Var) -> bool {
        self.terms.iter().any(|(m, _)| m.exp(v) > 0)
    }

    pub fn degree_in(&self, v: Var) -> u32 {
        self.terms.iter().map(|(m, _)| m.exp(v)).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(|(m, _)| m.degree()).max().unwrap_or(0)
    }

    /// Leading term under the documented order.
    pub fn leading_term_documented(&self) -> Option<&(Monomial, Scalar)> {
        self.terms.iter().max_by(|a, b| a.0.cmp_documented(&b.0))
    }

    pub fn leading_coeff_documented(&self) -> Scalar {
        self.leading_term_documented().map(|t| t.1.clone()).unwrap_or_else(Scalar::zero)
    }

    /// Leading term under the internal order (the first stored term).
    pub fn leading_term(&self) -> Option<&(Monomial, Scalar)> {
        self.terms.first()
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn scale(&self, s: &Scalar) -> Poly {
        if s.is_zero() {
            return Poly::zero();
        }
        if s.is_one() {
            return self.clone();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect() }
    }

    pub fn mul_monomial(&self, m: &Monomial, s: &Scalar) -> Poly {
        if s.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(n, c)| (n.mul(m), c * s)).collect() }
    }

    fn merge(&self, o: &Poly, sign: bool) -> Poly {
        let (a, b) = (&self.terms, &o.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp_internal(&b[j].0) {
                Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    out.push((b[j].0.clone(), if sign { b[j].1.clone() } else { -&b[j].1 }));
                    j += 1;
                }
                Ordering::Equal => {
                    let c = if sign { &a[i].1 + &b[j].1 } else { &a[i].1 - &b[j].1 };
                    if !c.is_zero() {
                        out.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        for t in &b[j..] {
            out.push((t.0.clone(), if sign { t.1.clone() } else { -&t.1 }));
        }
        Poly { terms: out }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        self.merge(o, true)
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.merge(o, false)
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        if self.terms.len() == 1 {
            return o.mul_monomial(&self.terms[0].0, &self.terms[0].1);
        }
        if o.terms.len() == 1 {
            return self.mul_monomial(&o.terms[0].0, &o.terms[0].1);
        }
        let (small, large) = if self.terms.len() <= o.terms.len() { (self, o) } else { (o, self) };
        let work = small.terms.len() * large.terms.len();
        if work > 400_000 {
            let chunk = (small.terms.len() / rayon::current_num_threads().max(1)).max(1);
            let maps: Vec<FxHashMap<Monomial, Scalar>> = small
                .terms
                .par_chunks(chunk)
                .map(|ch| {
                    let mut map: FxHashMap<Monomial, Scalar> = FxHashMap::default();
                    for (m1, c1) in ch {
                        for (m2, c2) in &large.terms {
                            accumulate(&mut map, m1.mul(m2), c1 * c2);
                        }
                    }
                    map
                })
                .collect();
            let mut it = maps.into_iter();
            let mut acc = it.next().unwrap_or_default();
            for m in it {
                for (k, c) in m {
                    accumulate(&mut acc, k, c);
                }
            }
            return Self::from_map(acc);
        }
        let mut map: FxHashMap<Monomial, Scalar> = FxHashMap::default();
        map.reserve(work.min(1 << 16));
        for (m1, c1) in &small.terms {
            for (m2, c2) in &large.terms {
                accumulate(&mut map, m1.mul(m2), c1 * c2);
            }
        }
        Self::from_map(map)
    }

    pub fn pow(&self, e: u32) -> Poly {
        if e == 0 {
            return Poly::one();
        }
        if self.terms.len() == 1 {
            let (m, c) = &self.terms[0];
            let mm = Monomial(m.0.iter().map(|&(v, k)| (v, k * e)).collect());
            return Poly::term(mm, c.pow(e));
        }
        let mut acc = self.clone();
        for _ in 1..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Coefficients with respect to `v`: `self = sum_i out[i] * v^i`.
    pub fn coeffs_in(&self, v: Var) -> Vec<Poly> {
        let d = self.degree_in(v) as usize;
        let mut buckets: Vec<Vec<(Monomial, Scalar)>> = vec![Vec::new(); d + 1];
        for (m, c) in &self.terms {
            let (e, rest) = m.split(v);
            buckets[e as usize].push((rest, c.clone()));
        }
        buckets
            .into_iter()
            .map(|mut ts| {
                sort_terms(&mut ts);
                Poly { terms: ts }
            })
            .collect()
    }

    pub fn from_coeffs_in(v: Var, cs: &[Poly]) -> Poly {
        let mut terms = Vec::new();
        for (i, c) in cs.iter().enumerate() {
            let vm = Monomial::var(v, i as u32);
            for (m, s) in &c.terms {
                terms.push((m.mul(&vm), s.clone()));
            }
        }
        sort_terms(&mut terms);
        Poly { terms }
    }

    pub fn coeff_of(&self, v: Var, k: u32) -> Poly {
        let mut ts: Vec<(Monomial, Scalar)> = Vec::new();
        for (m, c) in &self.terms {
            let (e, rest) = m.split(v);
            if e == k {
                ts.push((rest, c.clone()));
            }
        }
        sort_terms(&mut ts);
        Poly { terms: ts }
    }

    pub fn derivative(&self, v: Var) -> Poly {
        let mut ts = Vec::new();
        for (m, c) in &self.terms {
            let (e, rest) = m.split(v);
            if e > 0 {
                ts.push((rest.mul(&Monomial::var(v, e - 1)), c * &Scalar::from_int(e as i64)));
            }
        }
        sort_terms(&mut ts);
        Poly { terms: ts }
    }

    /// Renames variables; the map must be injective on the variables present.
    pub fn rename(&self, f: &dyn Fn(Var) -> Var) -> Poly {
        let ts = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut out = Monomial::one();
                for &(v, e) in m.0.iter() {
                    out = out.mul(&Monomial::var(f(v), e));
                }
                (out, c.clone())
            })
            .collect();
        Poly::from_terms(ts)
    }

    /// Simultaneous polynomial substitution; variables mapped to `None` stay.
    pub fn compose(&self, f: &dyn Fn(Var) -> Option<Poly>) -> Poly {
        let mut cache: FxHashMap<(Var, u32), Poly> = FxHashMap::default();
        let mut acc: FxHashMap<Monomial, Scalar> = FxHashMap::default();
        for (m, c) in &self.terms {
            let mut kept = Monomial::one();
            let mut prod = Poly::constant(c.clone());
            for &(v, e) in m.0.iter() {
                match f(v) {
                    Some(p) => {
                        let pe = cache.entry((v, e)).or_insert_with(|| p.pow(e)).clone();
                        prod = prod.mul(&pe);
                    }
                    None => kept = kept.mul(&Monomial::var(v, e)),
                }
            }
            for (mm, cc) in prod.terms {
                accumulate(&mut acc, mm.mul(&kept), cc);
            }
        }
        Self::from_map(acc)
    }

    pub fn substitute_var(&self, v: Var, p: &Poly) -> Poly {
        if !self.contains_var(v) {
            return self.clone();
        }
        let cs = self.coeffs_in(v);
        let mut acc = Poly::zero();
        for c in cs.iter().rev() {
            acc = acc.mul(p).add(c);
        }
        acc
    }

    /// Substitutes exact values for some variables.
    pub fn eval_partial(&self, f: &dyn Fn(Var) -> Option<Scalar>) -> Poly {
        let mut acc: FxHashMap<Monomial, Scalar> = FxHashMap::default();
        let mut cache: FxHashMap<(Var, u32), Scalar> = FxHashMap::default();
        for (m, c) in &self.terms {
            let mut kept = Monomial::one();
            let mut coef = c.clone();
            for &(v, e) in m.0.iter() {
                match f(v) {
                    Some(s) => {
                        let se = cache.entry((v, e)).or_insert_with(|| s.pow(e)).clone();
                        coef = &coef * &se;
                    }
                    None => kept = kept.mul(&Monomial::var(v, e)),
                }
            }
            accumulate(&mut acc, kept, coef);
        }
        Self::from_map(acc)
    }

    /// Exact evaluation; `None` when a variable is unbound.
    pub fn eval_scalar(&self, f: &dyn Fn(Var) -> Option<Scalar>) -> Option<Scalar> {
        let mut cache: FxHashMap<(Var, u32), Scalar> = FxHashMap::default();
        let mut total = Scalar::zero();
        for (m, c) in &self.terms {
            let mut coef = c.clone();
            for &(v, e) in m.0.iter() {
                let s = f(v)?;
                let se = cache.entry((v, e)).or_insert_with(|| s.pow(e)).clone();
                coef = &coef * &se;
            }
            total = &total + &coef;
        }
        Some(total)
    }

    pub fn eval_f64(&self, f: &dyn Fn(Var) -> Option<f64>) -> Option<f64> {
        let mut total = 0.0;
        for (m, c) in &self.terms {
            let mut t = c.to_f64();
            for &(v, e) in m.0.iter() {
                t *= f(v)?.powi(e as i32);
            }
            total += t;
        }
        Some(total)
    }

    /// Residue of the polynomial at a point modulo `p`.
    pub fn eval_mod(&self, p: u64, f: &dyn Fn(Var) -> u64) -> Option<u64> {
        let mut total = 0u64;
        for (m, c) in &self.terms {
            let mut t = c.mod_p(p)?;
            for &(v, e) in m.0.iter() {
                t = mulmod(t, super::scalar::powmod(f(v), e as u64, p), p);
            }
            total = (total + t) % p;
        }
        Some(total)
    }

    /// Positive rational `c` such that `self / c` has coprime integer
    /// coefficients.
    pub fn integer_content(&self) -> Scalar {
        let mut num = Scalar::zero();
        let mut den = Scalar::one();
        for (_, c) in &self.terms {
            num = num.gcd_int(&Scalar::from_bigint(c.numer()));
            den = den.lcm_int(&Scalar::from_bigint(c.denom()));
        }
        if num.is_zero() {
            return Scalar::one();
        }
        &num / &den
    }

    /// Componentwise minimum monomial dividing every term.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.iter();
        let mut g = match it.next() {
            Some(t) => t.0.clone(),
            None => return Monomial::one(),
        };
        for (m, _) in it {
            if g.is_one() {
                break;
            }
            g = g.gcd(m);
        }
        g
    }

    pub fn div_monomial(&self, m: &Monomial) -> Option<Poly> {
        let mut ts = Vec::with_capacity(self.terms.len());
        for (n, c) in &self.terms {
            ts.push((n.div(m)?, c.clone()));
        }
        Some(Poly { terms: ts })
    }

    /// Exact square root, when the polynomial is the square of one with
    /// rational coefficients. The root has a positive leading coefficient.
    pub fn sqrt(&self) -> Option<Poly> {
        if self.is_zero() {
            return Some(Poly::zero());
        }
        let (lm, lc) = self.leading_term()?.clone();
        let mut pairs = Vec::with_capacity(lm.pairs().len());
        for &(v, e) in lm.pairs() {
            if e % 2 != 0 {
                return None;
            }
            pairs.push((v, e / 2));
        }
        let head_m = Monomial::from_pairs(&pairs);
        let head_c = lc.sqrt_exact()?;
        let two_head = (head_m.clone(), &head_c + &head_c);
        let mut root = Poly::term(head_m, head_c);
        for _ in 0..=self.nterms() + 1 {
            let rest = self.sub(&root.mul(&root));
            let (rm, rc) = match rest.leading_term() {
                None => return Some(root),
                Some(t) => t.clone(),
            };
            let m = rm.div(&two_head.0)?;
            if m.cmp_internal(&root.terms.last()?.0) != Ordering::Less {
                return None;
            }
            root = root.add(&Poly::term(m, &rc / &two_head.1));
        }
        None
    }

    /// Largest coefficient bit length, used by size guards.
    pub fn max_bits(&self) -> u64 {
        self.terms.iter().map(|t| t.1.bits()).max().unwrap_or(0)
    }
}

fn accumulate(map: &mut FxHashMap<Monomial, Scalar>, m: Monomial, c: Scalar) {
    use std::collections::hash_map::Entry;
    match map.entry(m) {
        Entry::Occupied(mut o) => {
            let s = o.get() + &c;
            *o.get_mut() = s;
        }
        Entry::Vacant(v) => {
            v.insert(c);
        }
    }
}

impl From<Scalar> for Poly {
    fn from(s: Scalar) -> Self {
        Poly::constant(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(k: i32) -> Poly {
        Poly::var(Var::shift(k))
    }

    #[test]
    fn cancellation_gives_zero() {
        let p = x(0).add(&Poly::one()).sub(&x(0)).sub(&Poly::one());
        assert!(p.is_zero());
    }

    #[test]
    fn product_and_coefficients() {
        let p = x(1).add(&x(0)).pow(3);
        assert_eq!(p.nterms(), 4);
        let cs = p.coeffs_in(Var::shift(1));
        assert_eq!(cs.len(), 4);
        assert_eq!(cs[1], x(0).pow(2).scale(&Scalar::from_int(3)));
        assert_eq!(Poly::from_coeffs_in(Var::shift(1), &cs), p);
    }

    #[test]
    fn derivative_of_power() {
        let p = x(0).pow(3);
        assert_eq!(p.derivative(Var::shift(0)), x(0).pow(2).scale(&Scalar::from_int(3)));
    }

    #[test]
    fn monomial_division() {
        let a = Monomial::from_pairs(&[(Var::shift(0), 2), (Var::shift(1), 1)]);
        let b = Monomial::var(Var::shift(0), 1);
        assert_eq!(a.div(&b).unwrap(), Monomial::from_pairs(&[(Var::shift(0), 1), (Var::shift(1), 1)]));
        assert!(b.div(&a).is_none());
    }

    #[test]
    fn internal_order_is_multiplicative() {
        let a = Monomial::from_pairs(&[(Var::shift(0), 2)]);
        let b = Monomial::from_pairs(&[(Var::shift(0), 1), (Var::shift(1), 1)]);
        let c = Monomial::from_pairs(&[(Var::shift(-1), 1)]);
        assert_eq!(a.cmp_internal(&b), b.mul(&c).cmp_internal(&a.mul(&c)).reverse());
    }

    #[test]
    fn compose_substitutes_simultaneously() {
        let p = x(0).mul(&x(1));
        let q = p.compose(&|v| match v.shift_offset() {
            Some(0) => Some(x(1)),
            Some(1) => Some(x(0)),
            _ => None,
        });
        assert_eq!(q, p);
    }
}
