//! Closed-form potentials: a rational part plus `c·log(p)`, `c·arctan(p)`
//! and `c·arctanh(p)` atoms.
//!
//! Atom coefficients may depend on parameters but never on state variables,
//! which keeps every derivative rational.

use std::fmt;

use serde::Serialize;

use super::rational::{Bindings, RationalExpr};
use super::symbol::Var;
use super::ExprError;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord, Serialize)]
pub enum AtomKind {
    Log,
    Arctan,
    Arctanh,
}

impl AtomKind {
    pub fn name(self) -> &'static str {
        match self {
            AtomKind::Log => "log",
            AtomKind::Arctan => "arctan",
            AtomKind::Arctanh => "arctanh",
        }
    }

    pub fn from_name(s: &str) -> Option<AtomKind> {
        match s {
            "log" => Some(AtomKind::Log),
            "arctan" => Some(AtomKind::Arctan),
            "arctanh" => Some(AtomKind::Arctanh),
            _ => None,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Atom {
    pub kind: AtomKind,
    pub coeff: RationalExpr,
    pub arg: RationalExpr,
}

impl Atom {
    /// Derivative of the atom with respect to `v`.
    pub fn differentiate(&self, v: Var) -> RationalExpr {
        let dp = self.arg.differentiate(v);
        if dp.is_zero() {
            return RationalExpr::zero();
        }
        let one = RationalExpr::one();
        let den = match self.kind {
            AtomKind::Log => self.arg.clone(),
            AtomKind::Arctan => &one + &(&self.arg * &self.arg),
            AtomKind::Arctanh => &one - &(&self.arg * &self.arg),
        };
        &self.coeff * &(&dp / &den)
    }

    pub fn eval_f64(&self, f: &dyn Fn(Var) -> Option<f64>) -> Result<f64, ExprError> {
        let p = self.arg.eval_f64(f)?;
        let c = self.coeff.eval_f64(f)?;
        let v = match self.kind {
            AtomKind::Log => {
                if p == 0.0 {
                    return Err(ExprError::Pole("log of zero".into()));
                }
                p.abs().ln()
            }
            AtomKind::Arctan => p.atan(),
            AtomKind::Arctanh => {
                if (p.abs() - 1.0).abs() < 1e-300 {
                    return Err(ExprError::Pole("arctanh at ±1".into()));
                }
                0.5 * ((1.0 + p) / (1.0 - p)).abs().ln()
            }
        };
        Ok(c * v)
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ClosedForm {
    pub rational: RationalExpr,
    pub atoms: Vec<Atom>,
}

impl From<RationalExpr> for ClosedForm {
    fn from(r: RationalExpr) -> Self {
        ClosedForm { rational: r, atoms: Vec::new() }
    }
}

impl ClosedForm {
    pub fn zero() -> Self {
        ClosedForm::default()
    }

    /// A single atom `coeff · kind(arg)`.
    pub fn atom(kind: AtomKind, coeff: RationalExpr, arg: RationalExpr) -> Result<Self, ExprError> {
        if !coeff.is_param_only() {
            return Err(ExprError::NonRational(format!("atom coefficient {} depends on a state variable", coeff)));
        }
        Ok(ClosedForm { rational: RationalExpr::zero(), atoms: vec![Atom { kind, coeff, arg }] }.normalized())
    }

    pub fn is_rational(&self) -> bool {
        self.atoms.is_empty()
    }

    fn normalized(mut self) -> Self {
        let mut out: Vec<Atom> = Vec::new();
        for a in self.atoms.drain(..) {
            if a.coeff.is_zero() || (a.kind != AtomKind::Log && a.arg.is_zero()) {
                continue;
            }
            if let Some(b) = out.iter_mut().find(|b| b.kind == a.kind && b.arg == a.arg) {
                b.coeff = &b.coeff + &a.coeff;
            } else {
                out.push(a);
            }
        }
        out.retain(|a| !a.coeff.is_zero());
        out.sort_by(|a, b| (a.kind, a.arg.to_string()).cmp(&(b.kind, b.arg.to_string())));
        self.atoms = out;
        self
    }

    pub fn add(&self, o: &ClosedForm) -> ClosedForm {
        let mut atoms = self.atoms.clone();
        atoms.extend(o.atoms.iter().cloned());
        ClosedForm { rational: &self.rational + &o.rational, atoms }.normalized()
    }

    pub fn neg(&self) -> ClosedForm {
        ClosedForm {
            rational: -&self.rational,
            atoms: self.atoms.iter().map(|a| Atom { kind: a.kind, coeff: -&a.coeff, arg: a.arg.clone() }).collect(),
        }
    }

    pub fn sub(&self, o: &ClosedForm) -> ClosedForm {
        self.add(&o.neg())
    }

    /// Multiplies by a parameter-only factor.
    pub fn scale(&self, f: &RationalExpr) -> Result<ClosedForm, ExprError> {
        if self.atoms.is_empty() {
            return Ok(ClosedForm::from(&self.rational * f));
        }
        if !f.is_param_only() {
            return Err(ExprError::NonRational("transcendental atom multiplied by a state-dependent factor".into()));
        }
        Ok(ClosedForm {
            rational: &self.rational * f,
            atoms: self.atoms.iter().map(|a| Atom { kind: a.kind, coeff: &a.coeff * f, arg: a.arg.clone() }).collect(),
        }
        .normalized())
    }

    pub fn differentiate(&self, v: Var) -> RationalExpr {
        let mut acc = self.rational.differentiate(v);
        for a in &self.atoms {
            acc = &acc + &a.differentiate(v);
        }
        acc
    }

    pub fn substitute(&self, b: &Bindings) -> Result<ClosedForm, ExprError> {
        let mut atoms = Vec::with_capacity(self.atoms.len());
        for a in &self.atoms {
            let coeff = a.coeff.substitute(b)?;
            if !coeff.is_param_only() {
                return Err(ExprError::NonRational("substitution makes an atom coefficient state-dependent".into()));
            }
            atoms.push(Atom { kind: a.kind, coeff, arg: a.arg.substitute(b)? });
        }
        Ok(ClosedForm { rational: self.rational.substitute(b)?, atoms }.normalized())
    }

    pub fn rename(&self, f: &dyn Fn(Var) -> Var) -> ClosedForm {
        ClosedForm {
            rational: self.rational.rename(f),
            atoms: self.atoms.iter().map(|a| Atom { kind: a.kind, coeff: a.coeff.rename(f), arg: a.arg.rename(f) }).collect(),
        }
        .normalized()
    }

    pub fn eval_f64(&self, f: &dyn Fn(Var) -> Option<f64>) -> Result<f64, ExprError> {
        let mut acc = self.rational.eval_f64(f)?;
        for a in &self.atoms {
            acc += a.eval_f64(f)?;
        }
        Ok(acc)
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut v = self.rational.vars();
        for a in &self.atoms {
            v.extend(a.arg.vars());
            v.extend(a.coeff.vars());
        }
        v.sort();
        v.dedup();
        v
    }
}

impl fmt::Display for ClosedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        if !self.rational.is_zero() || self.atoms.is_empty() {
            write!(f, "{}", self.rational)?;
            first = false;
        }
        for a in &self.atoms {
            let (neg, mag) = match a.coeff.constant_value() {
                Some(c) if c.is_negative() => (true, RationalExpr::scalar(-c)),
                _ => (false, a.coeff.clone()),
            };
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            first = false;
            if !mag.is_one() {
                if mag.is_constant() {
                    write!(f, "{}*", mag)?;
                } else {
                    write!(f, "({})*", mag)?;
                }
            }
            write!(f, "{}({})", a.kind.name(), a.arg)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_derivative_is_rational() {
        let x = RationalExpr::x(0);
        let arg = &(&x * &x) - &RationalExpr::one();
        let c = ClosedForm::atom(AtomKind::Log, RationalExpr::one(), arg.clone()).unwrap();
        let d = c.differentiate(Var::shift(0));
        assert_eq!(d, (&x * &RationalExpr::int(2)).checked_div(&arg).unwrap());
    }

    #[test]
    fn merges_equal_atoms() {
        let x = RationalExpr::x(1);
        let a = ClosedForm::atom(AtomKind::Arctan, RationalExpr::one(), x.clone()).unwrap();
        let b = a.add(&a);
        assert_eq!(b.atoms.len(), 1);
        assert_eq!(b.atoms[0].coeff, RationalExpr::int(2));
        assert!(b.sub(&b).atoms.is_empty());
    }

    #[test]
    fn rejects_state_coefficient() {
        assert!(ClosedForm::atom(AtomKind::Log, RationalExpr::x(0), RationalExpr::x(1)).is_err());
    }

    #[test]
    fn arctanh_numeric() {
        let a = ClosedForm::atom(AtomKind::Arctanh, RationalExpr::one(), RationalExpr::x(0)).unwrap();
        let v = a.eval_f64(&|_| Some(0.5)).unwrap();
        assert!((v - 0.5f64.atanh()).abs() < 1e-14);
    }
}
