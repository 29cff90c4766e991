//! Printing in the input grammar. Terms follow the documented
//! graded-lexicographic order (largest first), so printing is deterministic
//! and `parse(print(e)) == e`.

use std::cmp::Ordering;
use std::fmt;

use super::closed::ClosedForm;
use super::poly::{Monomial, Poly};
use super::rational::RationalExpr;
use super::symbol::precedence_cmp;

fn write_monomial(f: &mut fmt::Formatter<'_>, m: &Monomial) -> fmt::Result {
    let mut pairs: Vec<_> = m.pairs().to_vec();
    pairs.sort_by(|a, b| precedence_cmp(b.0, a.0));
    for (i, (v, e)) in pairs.iter().enumerate() {
        if i > 0 {
            f.write_str("*")?;
        }
        if *e == 1 {
            write!(f, "{}", v)?;
        } else {
            write!(f, "{}^{}", v, e)?;
        }
    }
    Ok(())
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut ts: Vec<_> = self.terms().iter().collect();
        ts.sort_by(|a, b| match b.0.cmp_documented(&a.0) {
            Ordering::Equal => Ordering::Equal,
            o => o,
        });
        for (i, (m, c)) in ts.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            if m.is_one() {
                write!(f, "{}", mag)?;
            } else {
                if !mag.is_one() {
                    write!(f, "{}*", mag)?;
                }
                write_monomial(f, m)?;
            }
        }
        Ok(())
    }
}

fn bare_denominator(p: &Poly) -> bool {
    if p.nterms() != 1 {
        return false;
    }
    let (m, c) = &p.terms()[0];
    c.is_one() && m.pairs().len() == 1
}

impl fmt::Display for RationalExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den().is_one() {
            return write!(f, "{}", self.num());
        }
        if self.num().nterms() > 1 {
            write!(f, "({})", self.num())?;
        } else {
            write!(f, "{}", self.num())?;
        }
        if bare_denominator(self.den()) {
            write!(f, "/{}", self.den())
        } else {
            write!(f, "/({})", self.den())
        }
    }
}

impl serde::Serialize for Poly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl serde::Serialize for RationalExpr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl serde::Serialize for ClosedForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
