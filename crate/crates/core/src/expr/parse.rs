//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('+' | '-') unary | power
//! power   := atom ('^' INT)?
//! atom    := INT | 'x[' INT ']' | x0 | x1 | x2 | xm1 | xm2 | 'x' "'"* | t
//!          | xi | eta | zeta | IDENT | FUNC '(' expr ')' | '(' expr ')'
//! FUNC    := log | arctan | arctanh
//! ```
//!
//! Identifiers other than the reserved ones are parameters and must be
//! declared in the [`Context`] unless it declares on use.

use std::collections::BTreeSet;

use super::closed::{AtomKind, ClosedForm};
use super::rational::RationalExpr;
use super::scalar::Scalar;
use super::symbol::{Var, RESERVED};
use super::ExprError;

/// Declared parameter names.
#[derive(Clone, Debug, Default)]
pub struct Context {
    params: BTreeSet<String>,
    declare_on_use: bool,
}

impl Context {
    pub fn new<S: AsRef<str>>(params: &[S]) -> Self {
        Context { params: params.iter().map(|s| s.as_ref().to_string()).collect(), declare_on_use: false }
    }

    /// A context that accepts any non-reserved identifier as a parameter.
    pub fn open() -> Self {
        Context { params: BTreeSet::new(), declare_on_use: true }
    }

    pub fn declare(&mut self, name: &str) {
        self.params.insert(name.to_string());
    }

    pub fn is_declared(&self, name: &str) -> bool {
        self.declare_on_use || self.params.contains(name)
    }
}

#[derive(Clone, Debug)]
enum Value {
    Rat(RationalExpr),
    Closed(ClosedForm),
}

impl Value {
    fn into_closed(self) -> ClosedForm {
        match self {
            Value::Rat(r) => ClosedForm::from(r),
            Value::Closed(c) => c,
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    ctx: &'a Context,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: impl Into<String>) -> ExprError {
        ExprError::Parse { pos: self.pos, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && (self.src[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ExprError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected '{}'", c as char)))
        }
    }

    fn integer(&mut self) -> Result<String, ExprError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected integer"));
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn expr(&mut self) -> Result<Value, ExprError> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                let r = self.term()?;
                acc = add(acc, r);
            } else if self.eat(b'-') {
                let r = self.term()?;
                acc = add(acc, neg(r));
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Value, ExprError> {
        let mut acc = self.unary()?;
        loop {
            let at = self.pos;
            if self.eat(b'*') {
                let r = self.unary()?;
                acc = mul(acc, r).map_err(|e| relocate(e, at))?;
            } else if self.eat(b'/') {
                let r = self.unary()?;
                acc = div(acc, r).map_err(|e| relocate(e, at))?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Value, ExprError> {
        if self.eat(b'-') {
            Ok(neg(self.unary()?))
        } else if self.eat(b'+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Value, ExprError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let e: u32 = self.integer()?.parse().map_err(|_| self.err("exponent too large"))?;
            return match base {
                Value::Rat(r) => Ok(Value::Rat(r.pow(e as i32)?)),
                Value::Closed(_) => Err(self.err("cannot raise a transcendental term to a power")),
            };
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Value, ExprError> {
        match self.peek() {
            None => Err(self.err("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                self.expect(b')')?;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() => {
                let s = self.integer()?;
                let n: Scalar = s.parse().map_err(|e: String| self.err(e))?;
                Ok(Value::Rat(RationalExpr::scalar(n)))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                let name = self.ident();
                self.named(&name, start)
            }
            Some(c) => Err(self.err(format!("unexpected character '{}'", c as char))),
        }
    }

    fn named(&mut self, name: &str, start: usize) -> Result<Value, ExprError> {
        let var = |v: Var| Ok(Value::Rat(RationalExpr::var(v)));
        match name {
            "x" => {
                if self.src.get(self.pos) == Some(&b'[') {
                    self.pos += 1;
                    let neg = self.eat(b'-');
                    let k: i32 = self.integer()?.parse().map_err(|_| self.err("bad shift"))?;
                    let k = if neg { -k } else { k };
                    self.expect(b']')?;
                    if !(-2..=2).contains(&k) {
                        return Err(ExprError::Parse { pos: start, msg: format!("shift x[{}] outside the window -2..2", k) });
                    }
                    return var(Var::shift(k));
                }
                let mut k = 0;
                while self.src.get(self.pos) == Some(&b'\'') {
                    self.pos += 1;
                    k += 1;
                }
                var(Var::deriv(k))
            }
            "x2" => var(Var::shift(2)),
            "x1" => var(Var::shift(1)),
            "x0" => var(Var::shift(0)),
            "xm1" => var(Var::shift(-1)),
            "xm2" => var(Var::shift(-2)),
            "t" => var(Var::T),
            "xi" => var(Var::XI),
            "eta" => var(Var::ETA),
            "zeta" => var(Var::ZETA),
            _ => {
                if let Some(kind) = AtomKind::from_name(name) {
                    self.expect(b'(')?;
                    let inner = self.expr()?;
                    self.expect(b')')?;
                    let arg = match inner {
                        Value::Rat(r) => r,
                        Value::Closed(_) => return Err(self.err("nested transcendental functions are not supported")),
                    };
                    return Ok(Value::Closed(ClosedForm::atom(kind, RationalExpr::one(), arg)?));
                }
                if RESERVED.contains(&name) {
                    return Err(ExprError::Parse { pos: start, msg: format!("reserved name '{}'", name) });
                }
                if !self.ctx.is_declared(name) {
                    return Err(ExprError::Undeclared(name.to_string()));
                }
                var(Var::param(name))
            }
        }
    }
}

fn relocate(e: ExprError, pos: usize) -> ExprError {
    match e {
        ExprError::DivisionByZero => ExprError::Parse { pos, msg: "division by a zero polynomial".into() },
        other => other,
    }
}

fn add(a: Value, b: Value) -> Value {
    match (a, b) {
        (Value::Rat(x), Value::Rat(y)) => Value::Rat(&x + &y),
        (a, b) => Value::Closed(a.into_closed().add(&b.into_closed())),
    }
}

fn neg(a: Value) -> Value {
    match a {
        Value::Rat(x) => Value::Rat(-x),
        Value::Closed(c) => Value::Closed(c.neg()),
    }
}

fn mul(a: Value, b: Value) -> Result<Value, ExprError> {
    Ok(match (a, b) {
        (Value::Rat(x), Value::Rat(y)) => Value::Rat(&x * &y),
        (Value::Rat(x), Value::Closed(c)) | (Value::Closed(c), Value::Rat(x)) => Value::Closed(c.scale(&x)?),
        _ => return Err(ExprError::NonRational("product of two transcendental terms".into())),
    })
}

fn div(a: Value, b: Value) -> Result<Value, ExprError> {
    match b {
        Value::Rat(y) => {
            let inv = y.inv()?;
            mul(a, Value::Rat(inv))
        }
        Value::Closed(_) => Err(ExprError::NonRational("division by a transcendental term".into())),
    }
}

fn run(text: &str, ctx: &Context) -> Result<Value, ExprError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, ctx };
    let v = p.expr()?;
    if p.peek().is_some() {
        return Err(p.err("trailing input"));
    }
    Ok(v)
}

/// Parses a rational expression.
pub fn parse_expr(text: &str, ctx: &Context) -> Result<RationalExpr, ExprError> {
    match run(text, ctx)? {
        Value::Rat(r) => Ok(r),
        Value::Closed(c) if c.is_rational() => Ok(c.rational),
        Value::Closed(_) => Err(ExprError::NonRational(format!("'{}' contains transcendental functions", text))),
    }
}

/// Parses an expression that may contain `log`, `arctan`, `arctanh` atoms.
pub fn parse_closed(text: &str, ctx: &Context) -> Result<ClosedForm, ExprError> {
    Ok(run(text, ctx)?.into_closed())
}
