//! A small arithmetic expression language for user-supplied kernels and
//! data functions.
//!
//! Grammar, loosest to tightest binding:
//!
//! ```text
//!     expr    := term  (('+' | '-') term)*
//!     term    := factor (('*' | '/') factor)*
//!     factor  := '-' factor | power
//!     power   := primary ('^' factor)?          // right associative
//!     primary := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'
//! ```
//!
//! so `-x^2` is `-(x^2)` and `2^3^2` is `2^(3^2)`. Known functions are
//! `exp`, `ln`, `sqrt`, `abs`; known constants are `e` and `pi`; variables
//! are `t`, `s`, `x`. Evaluation follows IEEE semantics (`ln(-1)` is a NaN,
//! not an error); only an unbound variable is an evaluation error.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    T,
    S,
    X,
}

impl Var {
    fn name(self) -> &'static str {
        match self {
            Var::T => "t",
            Var::S => "s",
            Var::X => "x",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Ln,
    Sqrt,
    Abs,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Values for the variables an expression may mention.
#[derive(Debug, Clone, Copy, Default)]
pub struct Bindings {
    pub t: Option<f64>,
    pub s: Option<f64>,
    pub x: Option<f64>,
}

impl Bindings {
    pub fn t(t: f64) -> Self {
        Bindings {
            t: Some(t),
            ..Default::default()
        }
    }

    pub fn ts(t: f64, s: f64) -> Self {
        Bindings {
            t: Some(t),
            s: Some(s),
            ..Default::default()
        }
    }

    pub fn sx(s: f64, x: f64) -> Self {
        Bindings {
            s: Some(s),
            x: Some(x),
            ..Default::default()
        }
    }
}

impl Expr {
    pub fn eval(&self, env: &Bindings) -> Result<f64> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Var(v) => {
                let slot = match v {
                    Var::T => env.t,
                    Var::S => env.s,
                    Var::X => env.x,
                };
                slot.ok_or_else(|| {
                    Error::Domain(format!("variable '{}' is not bound here", v.name()))
                })?
            }
            Expr::Neg(e) => -e.eval(env)?,
            Expr::Add(a, b) => a.eval(env)? + b.eval(env)?,
            Expr::Sub(a, b) => a.eval(env)? - b.eval(env)?,
            Expr::Mul(a, b) => a.eval(env)? * b.eval(env)?,
            Expr::Div(a, b) => a.eval(env)? / b.eval(env)?,
            Expr::Pow(a, b) => a.eval(env)?.powf(b.eval(env)?),
            Expr::Call(f, e) => {
                let v = e.eval(env)?;
                match f {
                    Func::Exp => v.exp(),
                    Func::Ln => v.ln(),
                    Func::Sqrt => v.sqrt(),
                    Func::Abs => v.abs(),
                }
            }
        })
    }

    /// Whether the expression mentions the given variable.
    pub fn uses(&self, var: Var) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(v) => *v == var,
            Expr::Neg(e) | Expr::Call(_, e) => e.uses(var),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => a.uses(var) || b.uses(var),
        }
    }
}

pub fn parse(src: &str) -> Result<Expr> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    if p.pos == p.src.len() {
        return Err(p.fail("empty expression"));
    }
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.fail("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn fail(&self, msg: &str) -> Error {
        Error::Config(format!("expression parse error at byte {}: {msg}", self.pos))
    }

    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(|b| b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            self.skip_ws();
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            self.skip_ws();
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        self.skip_ws();
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.primary()?;
        self.skip_ws();
        if self.eat(b'^') {
            return Ok(Expr::Pow(Box::new(base), Box::new(self.factor()?)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.skip_ws();
                if !self.eat(b')') {
                    return Err(self.fail("expected ')'"));
                }
                Ok(e)
            }
            Some(b) if b.is_ascii_digit() || b == b'.' => self.number(),
            Some(b) if b.is_ascii_alphabetic() || b == b'_' => self.name(),
            Some(b) => Err(self.fail(&format!("unexpected character '{}'", b as char))),
            None => Err(self.fail("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.peek().is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.eat(b'.') {
            while self.peek().is_some_and(|b| b.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        // Exponent only counts if at least one digit follows; otherwise the
        // 'e' is the constant and belongs to the next token.
        if matches!(self.peek(), Some(b'e') | Some(b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if self.peek().is_some_and(|b| b.is_ascii_digit()) {
                while self.peek().is_some_and(|b| b.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
        text.parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| self.fail(&format!("invalid number '{text}'")))
    }

    fn name(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|b| b.is_ascii_alphanumeric() || b == b'_')
        {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
        self.skip_ws();
        if self.eat(b'(') {
            let func = match text {
                "exp" => Func::Exp,
                "ln" => Func::Ln,
                "sqrt" => Func::Sqrt,
                "abs" => Func::Abs,
                _ => {
                    return Err(self.fail(&format!(
                        "unknown function '{text}' (known: exp, ln, sqrt, abs)"
                    )))
                }
            };
            let arg = self.expr()?;
            self.skip_ws();
            if !self.eat(b')') {
                return Err(self.fail("expected ')'"));
            }
            return Ok(Expr::Call(func, Box::new(arg)));
        }
        match text {
            "t" => Ok(Expr::Var(Var::T)),
            "s" => Ok(Expr::Var(Var::S)),
            "x" => Ok(Expr::Var(Var::X)),
            "e" => Ok(Expr::Num(std::f64::consts::E)),
            "pi" => Ok(Expr::Num(std::f64::consts::PI)),
            _ => Err(self.fail(&format!(
                "unknown name '{text}' (variables: t, s, x; constants: e, pi)"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn eval(src: &str, env: Bindings) -> f64 {
        parse(src).unwrap().eval(&env).unwrap()
    }

    #[test]
    fn literals_and_arithmetic() {
        assert_eq!(eval("1.5", Bindings::default()), 1.5);
        assert_eq!(eval(".5", Bindings::default()), 0.5);
        assert_eq!(eval("1e-3", Bindings::default()), 1e-3);
        assert_eq!(eval("2E+2", Bindings::default()), 200.0);
        assert_eq!(eval("1 + 2 * 3", Bindings::default()), 7.0);
        assert_eq!(eval("(1 + 2) * 3", Bindings::default()), 9.0);
        assert_eq!(eval("1 - 2 - 3", Bindings::default()), -4.0);
        assert_eq!(eval("6 / 3 / 2", Bindings::default()), 1.0);
    }

    #[test]
    fn power_is_right_associative_and_binds_over_minus() {
        assert_eq!(eval("2^3^2", Bindings::default()), 512.0);
        assert_eq!(eval("-2^2", Bindings::default()), -4.0);
        assert_eq!(eval("2^-2", Bindings::default()), 0.25);
        assert_eq!(eval("(-2)^2", Bindings::default()), 4.0);
        assert_eq!(eval("--2", Bindings::default()), 2.0);
    }

    #[test]
    fn functions_and_constants() {
        assert_relative_eq!(
            eval("exp(1)", Bindings::default()),
            std::f64::consts::E,
            max_relative = 1e-15
        );
        assert_eq!(eval("ln(e)", Bindings::default()), 1.0);
        assert_eq!(eval("sqrt(abs(-4))", Bindings::default()), 2.0);
        assert_relative_eq!(
            eval("pi / 2", Bindings::default()),
            std::f64::consts::FRAC_PI_2,
            max_relative = 1e-15
        );
    }

    #[test]
    fn variables_read_their_bindings() {
        let env = Bindings {
            t: Some(2.0),
            s: Some(3.0),
            x: Some(4.0),
        };
        assert_eq!(eval("t * s + x^2", env), 22.0);
        assert_eq!(eval("1 - exp(-(t - s))", Bindings::ts(1.0, 1.0)), 0.0);
    }

    #[test]
    fn constant_e_is_distinct_from_an_exponent_suffix() {
        assert_relative_eq!(
            eval("2*e", Bindings::default()),
            2.0 * std::f64::consts::E,
            max_relative = 1e-15
        );
        // "2e" alone is a dangling literal: the 'e' has no digits, so it
        // re-reads as the constant, which cannot follow a number.
        assert!(parse("2e").is_err());
    }

    #[test]
    fn unbound_variables_are_evaluation_errors() {
        let expr = parse("t + x").unwrap();
        assert!(expr.eval(&Bindings::t(1.0)).is_err());
        assert!(expr.eval(&Bindings::sx(1.0, 2.0)).is_err());
    }

    #[test]
    fn evaluation_keeps_ieee_semantics() {
        assert!(eval("ln(-1)", Bindings::default()).is_nan());
        assert!(eval("1/0", Bindings::default()).is_infinite());
        assert_eq!(eval("exp(-1/0)", Bindings::default()), 0.0);
    }

    #[test]
    fn parse_errors_carry_a_position_and_reason() {
        for bad in ["", "1 +", "(1", "1)", "sin(1)", "foo", "2 @ 2", "1..2"] {
            let err = parse(bad).unwrap_err();
            let msg = err.to_string();
            assert!(
                msg.contains("parse error"),
                "'{bad}' gave unexpected message: {msg}"
            );
        }
    }

    #[test]
    fn uses_reports_mentioned_variables() {
        let expr = parse("exp(t) - s^2").unwrap();
        assert!(expr.uses(Var::T));
        assert!(expr.uses(Var::S));
        assert!(!expr.uses(Var::X));
    }
}
