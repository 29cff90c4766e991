//! Exact rational numbers with a machine-word fast path.
//!
//! Values that fit in `i64 / i64` are stored inline; everything else falls
//! back to `BigRational`. Every constructor normalizes, so two equal values
//! always have the same representation and `==` is structural.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    /// numerator, denominator; denominator > 0 and coprime to the numerator.
    Small(i64, i64),
    Big(Box<BigRational>),
}

fn gcd_i128(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Small(0, 1)
    }

    pub fn one() -> Self {
        Scalar::Small(1, 1)
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::Small(n, 1)
    }

    /// `n / d`; panics when `d == 0`.
    pub fn ratio(n: i64, d: i64) -> Self {
        assert!(d != 0, "zero denominator");
        Self::from_i128(n as i128, d as i128)
    }

    fn from_i128(n: i128, d: i128) -> Self {
        let g = gcd_i128(n, d);
        let (mut n, mut d) = if g > 1 { (n / g, d / g) } else { (n, d) };
        if d < 0 {
            n = -n;
            d = -d;
        }
        if n == 0 {
            return Scalar::Small(0, 1);
        }
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(a), Ok(b)) => Scalar::Small(a, b),
            _ => Scalar::Big(Box::new(BigRational::new_raw(BigInt::from(n), BigInt::from(d)))),
        }
    }

    pub fn from_big(r: BigRational) -> Self {
        if let (Some(n), Some(d)) = (r.numer().to_i64(), r.denom().to_i64()) {
            return Scalar::Small(n, d);
        }
        Scalar::Big(Box::new(r))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Self::from_big(BigRational::from_integer(n))
    }

    pub fn to_big(&self) -> BigRational {
        match self {
            Scalar::Small(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Scalar::Big(b) => (**b).clone(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match self {
            Scalar::Small(n, _) => BigInt::from(*n),
            Scalar::Big(b) => b.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match self {
            Scalar::Small(_, d) => BigInt::from(*d),
            Scalar::Big(b) => b.denom().clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Scalar::Small(0, _))
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Scalar::Small(1, 1))
    }

    pub fn is_integer(&self) -> bool {
        match self {
            Scalar::Small(_, d) => *d == 1,
            Scalar::Big(b) => b.is_integer(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Scalar::Small(n, _) => *n < 0,
            Scalar::Big(b) => b.is_negative(),
        }
    }

    pub fn signum(&self) -> i32 {
        match self {
            Scalar::Small(n, _) => n.signum() as i32,
            Scalar::Big(b) => {
                if b.is_negative() {
                    -1
                } else {
                    1
                }
            }
        }
    }

    pub fn abs(&self) -> Scalar {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn recip(&self) -> Scalar {
        match self {
            Scalar::Small(n, d) => {
                assert!(*n != 0, "reciprocal of zero");
                Self::from_i128(*d as i128, *n as i128)
            }
            Scalar::Big(b) => Self::from_big(b.recip()),
        }
    }

    pub fn pow(&self, e: u32) -> Scalar {
        let mut base = self.clone();
        let mut acc = Scalar::one();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn powi(&self, e: i32) -> Scalar {
        if e >= 0 {
            self.pow(e as u32)
        } else {
            self.recip().pow((-e) as u32)
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Small(n, d) => *n as f64 / *d as f64,
            Scalar::Big(b) => big_to_f64(b),
        }
    }

    /// The exact binary value of a finite float.
    pub fn from_f64_exact(x: f64) -> Option<Scalar> {
        BigRational::from_float(x).map(Scalar::from_big)
    }

    /// Exact rational square root when one exists.
    pub fn sqrt_exact(&self) -> Option<Scalar> {
        if self.is_negative() {
            return None;
        }
        let n = self.numer();
        let d = self.denom();
        let sn = n.sqrt();
        let sd = d.sqrt();
        if &sn * &sn == n && &sd * &sd == d {
            Some(Self::from_big(BigRational::new(sn, sd)))
        } else {
            None
        }
    }

    /// Bit length of numerator plus denominator, used as a size guard.
    pub fn bits(&self) -> u64 {
        match self {
            Scalar::Small(n, d) => (64 - n.unsigned_abs().leading_zeros() + 64 - d.leading_zeros()) as u64,
            Scalar::Big(b) => b.numer().bits() + b.denom().bits(),
        }
    }

    /// Integer gcd of two integer scalars (non-negative result).
    pub fn gcd_int(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Small(a, 1), Scalar::Small(b, 1)) => Self::from_i128(gcd_i128(*a as i128, *b as i128), 1),
            _ => Self::from_bigint(self.numer().gcd(&other.numer())),
        }
    }

    /// Integer lcm of two integer scalars (non-negative result).
    pub fn lcm_int(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Small(a, 1), Scalar::Small(b, 1)) if *a != 0 && *b != 0 => {
                let g = gcd_i128(*a as i128, *b as i128);
                Self::from_i128((*a as i128 / g * *b as i128).abs(), 1)
            }
            _ => Self::from_bigint(self.numer().lcm(&other.numer())),
        }
    }

    /// Residue modulo a prime `p < 2^62`, `None` if the denominator vanishes mod p.
    pub fn mod_p(&self, p: u64) -> Option<u64> {
        let (n, d) = match self {
            Scalar::Small(n, d) => {
                let pi = p as i128;
                (((*n as i128 % pi) + pi) as u64 % p, (*d as i128 % pi) as u64)
            }
            Scalar::Big(b) => {
                let pb = BigInt::from(p);
                let n = ((b.numer() % &pb) + &pb) % &pb;
                let d = b.denom() % &pb;
                (n.to_u64().unwrap(), d.to_u64().unwrap())
            }
        };
        if d == 0 {
            return None;
        }
        Some(mulmod(n, powmod(d, p - 2, p), p))
    }
}

pub(crate) fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub(crate) fn powmod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, b, p);
        }
        b = mulmod(b, b, p);
        e >>= 1;
    }
    acc
}

fn big_to_f64(b: &BigRational) -> f64 {
    let n = b.numer();
    let d = b.denom();
    let nb = n.bits() as i64;
    let db = d.bits() as i64;
    let shift = nb - db - 60;
    // Scale both sides into the f64 range before dividing.
    let (ns, ds) = if shift > 0 {
        (n.clone(), d.clone() << (shift as usize))
    } else {
        (n.clone() << ((-shift) as usize), d.clone())
    };
    let q = ns / ds;
    let qf = q.to_f64().unwrap_or(f64::NAN);
    qf * 2f64.powi(shift as i32)
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::zero()
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_int(n)
    }
}

impl From<i32> for Scalar {
    fn from(n: i32) -> Self {
        Scalar::from_int(n as i64)
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scalar {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Scalar::Small(a, b), Scalar::Small(c, d)) => (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128)),
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Small(a, b), Scalar::Small(c, d)) => {
                if *b == 1 && *d == 1 {
                    return match a.checked_add(*c) {
                        Some(s) => Scalar::Small(s, 1),
                        None => Scalar::from_i128(*a as i128 + *c as i128, 1),
                    };
                }
                let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
                match (a.checked_mul(d), c.checked_mul(b), b.checked_mul(d)) {
                    (Some(x), Some(y), Some(z)) => match x.checked_add(y) {
                        Some(s) => Scalar::from_i128(s, z),
                        None => Scalar::from_big(self.to_big() + o.to_big()),
                    },
                    _ => Scalar::from_big(self.to_big() + o.to_big()),
                }
            }
            _ => Scalar::from_big(self.to_big() + o.to_big()),
        }
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, o: &Scalar) -> Scalar {
        self + &(-o)
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Small(a, b), Scalar::Small(c, d)) => {
                if *b == 1 && *d == 1 {
                    return match a.checked_mul(*c) {
                        Some(s) => Scalar::Small(s, 1),
                        None => Scalar::from_i128(*a as i128 * *c as i128, 1),
                    };
                }
                let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
                Scalar::from_i128(a * c, b * d)
            }
            _ => Scalar::from_big(self.to_big() * o.to_big()),
        }
    }
}

impl<'a> Div<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn div(self, o: &Scalar) -> Scalar {
        self * &o.recip()
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Small(n, d) => match n.checked_neg() {
                Some(m) => Scalar::Small(m, *d),
                None => Scalar::from_i128(-(*n as i128), *d as i128),
            },
            Scalar::Big(b) => Scalar::from_big(-(**b).clone()),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

macro_rules! owned_ops {
    ($tr:ident, $m:ident) => {
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: Scalar) -> Scalar {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: &Scalar) -> Scalar {
                (&self).$m(o)
            }
        }
    };
}
owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);
owned_ops!(Div, div);

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Small(n, 1) => write!(f, "{}", n),
            Scalar::Small(n, d) => write!(f, "{}/{}", n, d),
            Scalar::Big(b) => {
                if b.is_integer() {
                    write!(f, "{}", b.numer())
                } else {
                    write!(f, "{}/{}", b.numer(), b.denom())
                }
            }
        }
    }
}

impl FromStr for Scalar {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if let Some((a, b)) = s.split_once('/') {
            let n = BigInt::from_str(a.trim()).map_err(|e| format!("bad numerator '{}': {}", a, e))?;
            let d = BigInt::from_str(b.trim()).map_err(|e| format!("bad denominator '{}': {}", b, e))?;
            if d.is_zero() {
                return Err("zero denominator".into());
            }
            Ok(Scalar::from_big(BigRational::new(n, d)))
        } else if let Some((ip, fp)) = s.split_once('.') {
            let digits = fp.len() as u32;
            let whole = format!("{}{}", ip, fp);
            let n = BigInt::from_str(&whole).map_err(|e| format!("bad decimal '{}': {}", s, e))?;
            Ok(Scalar::from_big(BigRational::new(n, BigInt::from(10u32).pow(digits))))
        } else {
            let n = BigInt::from_str(s).map_err(|e| format!("bad integer '{}': {}", s, e))?;
            Ok(Scalar::from_bigint(n))
        }
    }
}

impl serde::Serialize for Scalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl One for Scalar {
    fn one() -> Self {
        Scalar::one()
    }
}

impl Zero for Scalar {
    fn zero() -> Self {
        Scalar::zero()
    }
    fn is_zero(&self) -> bool {
        Scalar::is_zero(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_sign_and_gcd() {
        assert_eq!(Scalar::ratio(2, -4), Scalar::Small(-1, 2));
        assert_eq!(Scalar::ratio(0, -7), Scalar::zero());
    }

    #[test]
    fn overflow_promotes_and_demotes() {
        let big = Scalar::from_int(i64::MAX);
        let s = &big + &big;
        assert!(matches!(s, Scalar::Big(_)));
        let back = &s - &big;
        assert_eq!(back, big);
    }

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!("3/6".parse::<Scalar>().unwrap(), Scalar::ratio(1, 2));
        assert_eq!("0.25".parse::<Scalar>().unwrap(), Scalar::ratio(1, 4));
        assert_eq!("-12".parse::<Scalar>().unwrap(), Scalar::from_int(-12));
    }

    #[test]
    fn mod_p_inverts_denominator() {
        let p = 1_000_000_007u64;
        let h = Scalar::ratio(1, 2).mod_p(p).unwrap();
        assert_eq!(mulmod(h, 2, p), 1);
    }

    #[test]
    fn exact_square_roots() {
        assert_eq!(Scalar::ratio(9, 4).sqrt_exact(), Some(Scalar::ratio(3, 2)));
        assert_eq!(Scalar::from_int(2).sqrt_exact(), None);
    }

    #[test]
    fn big_to_float() {
        let x = Scalar::from_big(BigRational::new(BigInt::from(10).pow(40) + 1, BigInt::from(10).pow(39)));
        assert!((x.to_f64() - 10.0).abs() < 1e-12);
    }
}
