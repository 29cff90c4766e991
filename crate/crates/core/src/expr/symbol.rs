//! Variables: shift variables `x[k]`, placeholders, continuum derivatives,
//! time, and named parameters.
//!
//! A `Var` is a small integer code. Non-parameter variables have fixed codes;
//! parameters are interned by name in a process-wide table. Storage order of
//! monomials uses the raw code, while the documented precedence used for
//! printing and monic normalization is given by [`precedence_cmp`]:
//!
//! `x[-2] < x[-1] < x[0] < x[1] < x[2] < xi < eta < zeta < x < x' < ... < t <
//! parameters (alphabetical)`.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Var(pub u32);

const SHIFT_BASE: u32 = 0;
const PLACEHOLDER_BASE: u32 = 8;
const DERIV_BASE: u32 = 16;
const MAX_DERIV: u32 = 24;
const TIME: u32 = 48;
const PARAM_BASE: u32 = 1000;

/// Classification of a variable.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum VarKind {
    Shift(i32),
    Placeholder(u8),
    Deriv(u32),
    Time,
    Param(u32),
}

#[derive(Default)]
struct Interner {
    names: Vec<Arc<str>>,
    ids: HashMap<Arc<str>, u32>,
}

fn interner() -> &'static RwLock<Interner> {
    static I: OnceLock<RwLock<Interner>> = OnceLock::new();
    I.get_or_init(|| RwLock::new(Interner::default()))
}

/// Identifiers that can never name a parameter.
pub const RESERVED: &[&str] = &[
    "x", "t", "xi", "eta", "zeta", "x2", "x1", "x0", "xm1", "xm2", "log", "arctan", "arctanh",
];

impl Var {
    /// The shift variable `x[k]`, `k` in `-2..=2`.
    pub fn shift(k: i32) -> Var {
        assert!((-2..=2).contains(&k), "shift offset {} outside -2..=2", k);
        Var(SHIFT_BASE + (k + 2) as u32)
    }

    pub const XI: Var = Var(PLACEHOLDER_BASE);
    pub const ETA: Var = Var(PLACEHOLDER_BASE + 1);
    pub const ZETA: Var = Var(PLACEHOLDER_BASE + 2);
    pub const T: Var = Var(TIME);

    /// The `k`-th derivative of the continuum variable, `x^(k)`.
    pub fn deriv(k: u32) -> Var {
        assert!(k <= MAX_DERIV, "derivative order {} too large", k);
        Var(DERIV_BASE + k)
    }

    /// Interns a parameter by name.
    pub fn param(name: &str) -> Var {
        {
            let r = interner().read().unwrap();
            if let Some(&i) = r.ids.get(name) {
                return Var(PARAM_BASE + i);
            }
        }
        let mut w = interner().write().unwrap();
        if let Some(&i) = w.ids.get(name) {
            return Var(PARAM_BASE + i);
        }
        let i = w.names.len() as u32;
        let a: Arc<str> = Arc::from(name);
        w.names.push(a.clone());
        w.ids.insert(a, i);
        Var(PARAM_BASE + i)
    }

    pub fn kind(self) -> VarKind {
        let c = self.0;
        if c >= PARAM_BASE {
            VarKind::Param(c - PARAM_BASE)
        } else if c == TIME {
            VarKind::Time
        } else if c >= DERIV_BASE {
            VarKind::Deriv(c - DERIV_BASE)
        } else if c >= PLACEHOLDER_BASE {
            VarKind::Placeholder((c - PLACEHOLDER_BASE) as u8)
        } else {
            VarKind::Shift(c as i32 - 2)
        }
    }

    pub fn is_shift(self) -> bool {
        matches!(self.kind(), VarKind::Shift(_))
    }

    pub fn is_param(self) -> bool {
        matches!(self.kind(), VarKind::Param(_))
    }

    /// True for every variable that is not a parameter.
    pub fn is_state(self) -> bool {
        !self.is_param()
    }

    pub fn shift_offset(self) -> Option<i32> {
        match self.kind() {
            VarKind::Shift(k) => Some(k),
            _ => None,
        }
    }

    pub fn deriv_order(self) -> Option<u32> {
        match self.kind() {
            VarKind::Deriv(k) => Some(k),
            _ => None,
        }
    }

    pub fn name(self) -> String {
        match self.kind() {
            VarKind::Shift(k) => format!("x[{}]", k),
            VarKind::Placeholder(0) => "xi".into(),
            VarKind::Placeholder(1) => "eta".into(),
            VarKind::Placeholder(_) => "zeta".into(),
            VarKind::Deriv(k) => format!("x{}", "'".repeat(k as usize)),
            VarKind::Time => "t".into(),
            VarKind::Param(i) => interner().read().unwrap().names[i as usize].to_string(),
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

fn class_rank(v: Var) -> (u8, u32) {
    match v.kind() {
        VarKind::Shift(k) => (0, (k + 2) as u32),
        VarKind::Placeholder(i) => (1, i as u32),
        VarKind::Deriv(k) => (2, k),
        VarKind::Time => (3, 0),
        VarKind::Param(_) => (4, 0),
    }
}

/// Documented variable precedence (ascending).
pub fn precedence_cmp(a: Var, b: Var) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    let (ca, ra) = class_rank(a);
    let (cb, rb) = class_rank(b);
    match ca.cmp(&cb) {
        Ordering::Equal if ca == 4 => a.name().cmp(&b.name()),
        Ordering::Equal => ra.cmp(&rb),
        o => o,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_round_trip() {
        for k in -2..=2 {
            assert_eq!(Var::shift(k).shift_offset(), Some(k));
        }
        assert_eq!(Var::deriv(3).name(), "x'''");
        assert_eq!(Var::param("alpha").name(), "alpha");
        assert_eq!(Var::param("alpha"), Var::param("alpha"));
    }

    #[test]
    fn precedence_is_documented_order() {
        let b = Var::param("zz_b");
        let a = Var::param("zz_a");
        assert_eq!(precedence_cmp(a, b), Ordering::Less);
        assert_eq!(precedence_cmp(Var::shift(2), Var::XI), Ordering::Less);
        assert_eq!(precedence_cmp(Var::shift(-2), Var::shift(-1)), Ordering::Less);
        assert_eq!(precedence_cmp(Var::T, a), Ordering::Less);
    }
}
