//! Multivariate gcd and exact division over the rationals.
//!
//! The gcd first strips monomial content, then runs a cheap modular
//! coprimality test (univariate images over a large prime): if every shared
//! variable has coprime images whose leading coefficients survive, the
//! polynomials are coprime. Otherwise it tries the heuristic gcd (evaluate
//! one variable at a large integer, recurse, rebuild by symmetric base-x
//! expansion, verify by division), and falls back to the recursive primitive
//! polynomial remainder sequence, which is always correct but slow.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::poly::{Monomial, Poly};
use super::scalar::{mulmod, powmod, Scalar};
use super::symbol::Var;

const PRIME: u64 = (1u64 << 61) - 1;

/// Exact quotient `a / b`, or `None` when `b` does not divide `a`.
pub fn div_exact(a: &Poly, b: &Poly) -> Option<Poly> {
    if b.is_zero() {
        return None;
    }
    if a.is_zero() {
        return Some(Poly::zero());
    }
    if let Some(c) = b.constant_value() {
        return Some(a.scale(&c.recip()));
    }
    if b.is_monomial() {
        let (m, c) = &b.terms()[0];
        return a.div_monomial(m).map(|p| p.scale(&c.recip()));
    }
    for v in b.vars() {
        if b.degree_in(v) > a.degree_in(v) {
            return None;
        }
    }
    if b.total_degree() > a.total_degree() {
        return None;
    }
    let (bm, bc) = b.leading_term().unwrap().clone();
    let binv = bc.recip();
    let mut r = a.clone();
    let mut q: Vec<(Monomial, Scalar)> = Vec::new();
    while let Some((lm, lc)) = r.leading_term() {
        let t = lm.div(&bm)?;
        let c = lc * &binv;
        r = r.sub(&b.mul_monomial(&t, &c));
        q.push((t, c));
    }
    Some(Poly::from_terms(q))
}

/// A greatest common divisor, defined up to a nonzero rational factor.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.clone();
    }
    if b.is_zero() {
        return a.clone();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    let ma = a.monomial_content();
    let mb = b.monomial_content();
    let gm = ma.gcd(&mb);
    let a1 = a.div_monomial(&ma).unwrap();
    let b1 = b.div_monomial(&mb).unwrap();
    let g = gcd_rec(&a1, &b1);
    g.mul_monomial(&gm, &Scalar::one())
}

/// Gcd of a list of polynomials.
pub fn gcd_many(ps: &[Poly]) -> Poly {
    let mut it = ps.iter().filter(|p| !p.is_zero());
    let mut g = match it.next() {
        Some(p) => p.clone(),
        None => return Poly::zero(),
    };
    for p in it {
        if g.is_constant() {
            return Poly::one();
        }
        g = gcd(&g, p);
    }
    g
}

/// Content of `a` viewed as a polynomial in `v`.
pub fn content_in(a: &Poly, v: Var) -> Poly {
    let cs: Vec<Poly> = a.coeffs_in(v).into_iter().filter(|c| !c.is_zero()).collect();
    let mut sorted = cs;
    sorted.sort_by_key(|c| c.nterms());
    gcd_many(&sorted)
}

fn primitive_integer(p: &Poly) -> Poly {
    let c = p.integer_content();
    p.scale(&c.recip())
}

fn gcd_rec(a: &Poly, b: &Poly) -> Poly {
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    let va = a.vars();
    let vb = b.vars();
    let shared: Vec<Var> = va.iter().copied().filter(|v| vb.contains(v)).collect();
    if shared.is_empty() {
        return Poly::one();
    }
    if coprime_by_images(a, b, &shared) {
        return Poly::one();
    }
    if b.nterms() <= a.nterms() {
        if div_exact(a, b).is_some() {
            return b.clone();
        }
    } else if div_exact(b, a).is_some() {
        return a.clone();
    }
    if let Some(h) = heu_gcd(a, b) {
        return h;
    }
    if let Some(&v) = va.iter().find(|v| !vb.contains(v)) {
        return gcd(&content_in(a, v), b);
    }
    if let Some(&v) = vb.iter().find(|v| !va.contains(v)) {
        return gcd(a, &content_in(b, v));
    }
    let v = *shared.iter().min_by_key(|&&v| a.degree_in(v).max(b.degree_in(v))).unwrap();
    let ca = content_in(a, v);
    let cb = content_in(b, v);
    let c = gcd(&ca, &cb);
    let pa = primitive_integer(&div_exact(a, &ca).expect("content divides"));
    let pb = primitive_integer(&div_exact(b, &cb).expect("content divides"));
    let g = prs_gcd(pa.coeffs_in(v), pb.coeffs_in(v));
    let gp = Poly::from_coeffs_in(v, &g);
    gp.mul(&c)
}

fn deg(p: &[Poly]) -> usize {
    p.len() - 1
}

fn trim(mut p: Vec<Poly>) -> Vec<Poly> {
    while p.len() > 1 && p.last().unwrap().is_zero() {
        p.pop();
    }
    p
}

fn prem(f: &[Poly], g: &[Poly]) -> Vec<Poly> {
    let n = deg(g);
    let lc = &g[n];
    let mut r: Vec<Poly> = f.to_vec();
    let mut steps = deg(f) as i64 - n as i64 + 1;
    while r.len() > n && !(r.len() == 1 && r[0].is_zero()) {
        let dr = deg(&r);
        if dr < n {
            break;
        }
        let lr = r[dr].clone();
        let shift = dr - n;
        let mut next: Vec<Poly> = r.iter().map(|c| c.mul(lc)).collect();
        for (i, gc) in g.iter().enumerate() {
            next[i + shift] = next[i + shift].sub(&gc.mul(&lr));
        }
        next.pop();
        r = trim(next);
        steps -= 1;
        if r.len() == 1 && r[0].is_zero() {
            break;
        }
    }
    if steps > 0 {
        let f = lc.pow(steps as u32);
        r = r.iter().map(|c| c.mul(&f)).collect();
    }
    r
}

fn primitive_coeffs(p: Vec<Poly>) -> Vec<Poly> {
    let mut sorted: Vec<Poly> = p.iter().filter(|c| !c.is_zero()).cloned().collect();
    sorted.sort_by_key(|c| c.nterms());
    let cont = gcd_many(&sorted);
    let mut out: Vec<Poly> = if cont.is_constant() {
        p
    } else {
        p.iter().map(|c| div_exact(c, &cont).expect("content divides")).collect()
    };
    let mut num = Scalar::zero();
    let mut den = Scalar::one();
    for c in &out {
        for (_, s) in c.terms() {
            num = num.gcd_int(&Scalar::from_bigint(s.numer()));
            den = den.lcm_int(&Scalar::from_bigint(s.denom()));
        }
    }
    let ic = if num.is_zero() { Scalar::one() } else { &num / &den };
    if !ic.is_one() {
        let inv = ic.recip();
        out = out.iter().map(|c| c.scale(&inv)).collect();
    }
    out
}

fn prs_gcd(a: Vec<Poly>, b: Vec<Poly>) -> Vec<Poly> {
    let (mut f, mut g) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    loop {
        if g.len() == 1 {
            if g[0].is_zero() {
                return primitive_coeffs(f);
            }
            return vec![Poly::one()];
        }
        let r = prem(&f, &g);
        if r.len() == 1 && r[0].is_zero() {
            return primitive_coeffs(g);
        }
        if r.len() == 1 {
            return vec![Poly::one()];
        }
        f = g;
        g = primitive_coeffs(r);
    }
}

const HEU_TRIES: usize = 6;

fn is_integral(p: &Poly) -> bool {
    p.terms().iter().all(|(_, c)| c.is_integer())
}

fn max_norm(p: &Poly) -> BigInt {
    p.terms().iter().map(|(_, c)| c.numer().abs()).max().unwrap_or_default()
}

/// Symmetric residue of every coefficient modulo `x`, in `(-x/2, x/2]`.
fn sym_trunc(p: &Poly, x: &BigInt) -> Poly {
    let half = x / 2;
    Poly::from_terms(
        p.terms()
            .iter()
            .map(|(m, c)| {
                let mut r = c.numer().mod_floor(x);
                if r > half {
                    r -= x;
                }
                (m.clone(), Scalar::from_bigint(r))
            })
            .collect(),
    )
}

/// Rebuilds a polynomial in `v` from its image at `v = x`.
fn interpolate(h: &Poly, x: &BigInt, v: Var) -> Poly {
    let xinv = Scalar::from_bigint(x.clone()).recip();
    let mut rest = h.clone();
    let mut coeffs = Vec::new();
    while !rest.is_zero() {
        let g = sym_trunc(&rest, x);
        rest = rest.sub(&g).scale(&xinv);
        coeffs.push(g);
    }
    let p = Poly::from_coeffs_in(v, &coeffs);
    match p.leading_term() {
        Some((_, c)) if c.is_negative() => p.neg(),
        _ => p,
    }
}

fn integral_quotient(a: &Poly, b: &Poly) -> Option<Poly> {
    div_exact(a, b).filter(is_integral)
}

fn heu_gcd(a: &Poly, b: &Poly) -> Option<Poly> {
    let mut vars = a.vars();
    for v in b.vars() {
        if !vars.contains(&v) {
            vars.push(v);
        }
    }
    heu_rec(&primitive_integer(a), &primitive_integer(b), &vars).map(|t| t.0)
}

fn heu_rec(f: &Poly, g: &Poly, vars: &[Var]) -> Option<(Poly, Poly, Poly)> {
    if vars.is_empty() {
        let a = f.constant_value()?.numer();
        let b = g.constant_value()?.numer();
        let h = a.gcd(&b);
        if h.is_zero() {
            return None;
        }
        let cf = Poly::constant(Scalar::from_bigint(&a / &h));
        let cg = Poly::constant(Scalar::from_bigint(&b / &h));
        return Some((Poly::constant(Scalar::from_bigint(h)), cf, cg));
    }
    let (v, rest) = (vars[0], &vars[1..]);
    let c = f.integer_content().gcd_int(&g.integer_content());
    let cinv = c.recip();
    let f = f.scale(&cinv);
    let g = g.scale(&cinv);
    let cpoly = Poly::constant(c);
    let (fnorm, gnorm) = (max_norm(&f), max_norm(&g));
    let lcf = f.leading_term()?.1.numer().abs();
    let lcg = g.leading_term()?.1.numer().abs();
    let bound: BigInt = 2 * fnorm.clone().min(gnorm.clone()) + 29;
    let mut x: BigInt = (bound.clone().min(99 * bound.sqrt())).max(2 * (&fnorm / lcf).min(&gnorm / lcg) + 4);
    for _ in 0..HEU_TRIES {
        let xs = Scalar::from_bigint(x.clone());
        let at = |w: Var| if w == v { Some(xs.clone()) } else { None };
        let ff = f.eval_partial(&at);
        let gg = g.eval_partial(&at);
        if !ff.is_zero() && !gg.is_zero() {
            if let Some((h, cff, cfg)) = heu_rec(&ff, &gg, rest) {
                let h = primitive_integer(&interpolate(&h, &x, v));
                if let Some(qf) = integral_quotient(&f, &h) {
                    if let Some(qg) = integral_quotient(&g, &h) {
                        return Some((h.mul(&cpoly), qf, qg));
                    }
                }
                let cff = interpolate(&cff, &x, v);
                if let Some(h) = integral_quotient(&f, &cff) {
                    if let Some(qg) = integral_quotient(&g, &h) {
                        return Some((h.mul(&cpoly), cff, qg));
                    }
                }
                let cfg = interpolate(&cfg, &x, v);
                if let Some(h) = integral_quotient(&g, &cfg) {
                    if let Some(qf) = integral_quotient(&f, &h) {
                        return Some((h.mul(&cpoly), qf, cfg));
                    }
                }
            }
        }
        x = 73794 * &x * x.sqrt().sqrt() / 27011;
    }
    None
}

struct SplitMix(u64);

impl SplitMix {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

fn image_in(p: &Poly, v: Var, point: &dyn Fn(Var) -> u64) -> Option<Vec<u64>> {
    let d = p.degree_in(v) as usize;
    let mut out = vec![0u64; d + 1];
    for (m, c) in p.terms() {
        let (e, rest) = m.split(v);
        let mut t = c.mod_p(PRIME)?;
        for &(w, k) in rest.pairs() {
            t = mulmod(t, powmod(point(w), k as u64, PRIME), PRIME);
        }
        out[e as usize] = (out[e as usize] + t) % PRIME;
    }
    Some(out)
}

fn uni_gcd_degree(mut a: Vec<u64>, mut b: Vec<u64>) -> usize {
    fn strip(v: &mut Vec<u64>) {
        while v.len() > 1 && *v.last().unwrap() == 0 {
            v.pop();
        }
    }
    strip(&mut a);
    strip(&mut b);
    loop {
        if b.len() == 1 && b[0] == 0 {
            return a.len() - 1;
        }
        if b.len() == 1 {
            return 0;
        }
        while a.len() >= b.len() && !(a.len() == 1 && a[0] == 0) {
            let lb = *b.last().unwrap();
            let la = *a.last().unwrap();
            let f = mulmod(la, powmod(lb, PRIME - 2, PRIME), PRIME);
            let shift = a.len() - b.len();
            for (i, bc) in b.iter().enumerate() {
                let s = mulmod(f, *bc, PRIME);
                a[i + shift] = (a[i + shift] + PRIME - s) % PRIME;
            }
            a.pop();
            strip(&mut a);
            if a.len() < b.len() {
                break;
            }
        }
        std::mem::swap(&mut a, &mut b);
    }
}

fn coprime_by_images(a: &Poly, b: &Poly, shared: &[Var]) -> bool {
    let mut rng = SplitMix(0x5EED_u64 ^ (a.nterms() as u64) << 20 ^ b.nterms() as u64);
    let mut vals: Vec<(Var, u64)> = Vec::new();
    for v in a.vars().into_iter().chain(b.vars()) {
        if !vals.iter().any(|p| p.0 == v) {
            vals.push((v, rng.next() % PRIME));
        }
    }
    let point = |w: Var| vals.iter().find(|p| p.0 == w).map(|p| p.1).unwrap_or(0);
    for &v in shared {
        let ia = match image_in(a, v, &point) {
            Some(x) => x,
            None => return false,
        };
        let ib = match image_in(b, v, &point) {
            Some(x) => x,
            None => return false,
        };
        if *ia.last().unwrap() == 0 || *ib.last().unwrap() == 0 {
            return false;
        }
        if uni_gcd_degree(ia, ib) > 0 {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(k: i32) -> Poly {
        Poly::var(Var::shift(k))
    }

    fn c(n: i64) -> Poly {
        Poly::int(n)
    }

    #[test]
    fn exact_division_of_product() {
        let a = x(0).add(&c(1));
        let b = x(1).sub(&x(0)).add(&c(3));
        let p = a.mul(&b);
        assert_eq!(div_exact(&p, &a).unwrap(), b);
        assert!(div_exact(&p, &x(-1).add(&c(1))).is_none());
    }

    #[test]
    fn gcd_recovers_common_factor() {
        let f = x(0).pow(2).sub(&c(1));
        let a = f.mul(&x(1).add(&x(0)));
        let b = f.mul(&x(1).sub(&c(2)));
        let g = gcd(&a, &b);
        assert!(div_exact(&g, &f).map(|q| q.is_constant()).unwrap_or(false));
    }

    #[test]
    fn gcd_multivariate_shared_variables() {
        let p = Poly::var(Var::param("gcd_t_a"));
        let f = x(0).mul(&p).add(&x(1)).add(&c(1));
        let a = f.mul(&f).mul(&x(0).sub(&p));
        let b = f.mul(&x(1).add(&p).add(&c(2)));
        let g = gcd(&a, &b);
        assert!(div_exact(&g, &f).map(|q| q.is_constant()).unwrap_or(false));
    }

    #[test]
    fn coprime_inputs_have_unit_gcd() {
        let a = x(0).pow(2).add(&c(1));
        let b = x(0).add(&x(1));
        assert!(gcd(&a, &b).is_constant());
    }

    #[test]
    fn monomial_content_is_kept() {
        let a = x(0).pow(3).mul(&x(1));
        let b = x(0).pow(2).mul(&x(1).add(&c(1)));
        assert_eq!(gcd(&a, &b), x(0).pow(2));
    }

    #[test]
    fn content_in_variable() {
        let a = x(0).pow(2).sub(&c(1)).mul(&x(1).pow(3));
        let k = content_in(&a, Var::shift(1));
        assert!(div_exact(&k, &x(0).pow(2).sub(&c(1))).map(|q| q.is_constant()).unwrap_or(false));
    }
}
