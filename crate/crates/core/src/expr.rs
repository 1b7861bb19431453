//! The closed arithmetic expression language used for initial data and forcing.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := factor (('*' | '/') factor)*
//! factor  := unary ('^' integer)?
//! unary   := '-' unary | primary
//! primary := number | ident | func '(' expr ')' | '(' expr ')'
//! func    := sin | cos | exp | sinh | cosh | sqrt | abs
//! ```
//!
//! Identifiers are the coordinates `x1..xn`, the time `t` (where allowed) and
//! the constants `pi` and `i`. A number with an `i` suffix (`2.5i`) is
//! imaginary, so complex constants read `a+bi`. Exponents are integer
//! literals, optionally signed, and chain to the right (`x1^2^3 = x1^8`).

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sinh,
    Cosh,
    Sqrt,
    Abs,
}

impl Func {
    const ALL: [Func; 7] = [
        Func::Sin,
        Func::Cos,
        Func::Exp,
        Func::Sinh,
        Func::Cosh,
        Func::Sqrt,
        Func::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    fn apply(self, z: C) -> C {
        match self {
            Func::Sin => z.sin(),
            Func::Cos => z.cos(),
            Func::Exp => z.exp(),
            Func::Sinh => z.sinh(),
            Func::Cosh => z.cosh(),
            Func::Sqrt => z.sqrt(),
            Func::Abs => C::new(z.norm(), 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    /// Zero-based coordinate index (`x1` is `X(0)`).
    X(usize),
    T,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(C),
    Var(Var),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
}

impl Expr {
    pub fn eval(&self, x: &[f64], t: f64) -> C {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(Var::X(d)) => C::new(x[*d], 0.0),
            Expr::Var(Var::T) => C::new(t, 0.0),
            Expr::Neg(e) => C::new(0.0, 0.0) - e.eval(x, t),
            Expr::Call(f, e) => f.apply(e.eval(x, t)),
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.eval(x, t), b.eval(x, t));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                }
            }
            Expr::Pow(base, n) => base.eval(x, t).powi(*n),
        }
    }

    /// Whether the expression mentions `t`.
    pub fn uses_time(&self) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(v) => *v == Var::T,
            Expr::Neg(e) | Expr::Call(_, e) | Expr::Pow(e, _) => e.uses_time(),
            Expr::Binary(_, a, b) => a.uses_time() || b.uses_time(),
        }
    }
}

fn fmt_const(c: C, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if c.im == 0.0 {
        write!(f, "{:?}", c.re)
    } else if c.re == 0.0 {
        write!(f, "{:?}i", c.im)
    } else {
        write!(f, "({:?}+{:?}i)", c.re, c.im)
    }
}

/// Fully parenthesized rendering that parses back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => fmt_const(*c, f),
            Expr::Var(Var::X(d)) => write!(f, "x{}", d + 1),
            Expr::Var(Var::T) => write!(f, "t"),
            // `-a^n` reads as `(-a)^n`, so the operand is always wrapped.
            Expr::Neg(e) => write!(f, "(-({e}))"),
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
            Expr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Pow(base, n) => write!(f, "({base})^{n}"),
        }
    }
}

/// Parses `src` for a problem in `dim` space dimensions.
pub fn parse(src: &str, dim: usize, allow_t: bool) -> Result<Expr> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
        dim,
        allow_t,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
    allow_t: bool,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
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

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.unary()?;
        if self.eat(b'^') {
            let n = self.exponent()?;
            return Ok(Expr::Pow(Box::new(base), n));
        }
        Ok(base)
    }

    /// `['-'] integer ('^' exponent)?`, folded right to left.
    fn exponent(&mut self) -> Result<i32> {
        let start = {
            self.skip_ws();
            self.pos
        };
        let negative = self.eat(b'-');
        self.skip_ws();
        let digits_start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let digits = &self.src[digits_start..self.pos];
        let next = self.src.get(self.pos).copied();
        let fractional = matches!(next, Some(b'.') | Some(b'e') | Some(b'E') | Some(b'i'))
            || next.is_some_and(|c| c.is_ascii_alphabetic());
        if digits.is_empty() || fractional {
            return Err(Error::NonIntegerExponent(start));
        }
        let text = std::str::from_utf8(digits).map_err(|_| self.error("invalid exponent"))?;
        let mut n: i32 = text
            .parse()
            .map_err(|_| Error::NonIntegerExponent(start))?;
        if negative {
            n = -n;
        }
        if self.eat(b'^') {
            let inner = self.exponent()?;
            if inner < 0 {
                return Err(Error::NonIntegerExponent(start));
            }
            n = n
                .checked_pow(inner as u32)
                .ok_or(Error::NonIntegerExponent(start))?;
        }
        Ok(n)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            let inner = self.unary()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let s = self.src;
        let mut end = start;
        while end < s.len() && (s[end].is_ascii_digit() || s[end] == b'.') {
            end += 1;
        }
        if end < s.len() && (s[end] == b'e' || s[end] == b'E') {
            let mut k = end + 1;
            if k < s.len() && (s[k] == b'+' || s[k] == b'-') {
                k += 1;
            }
            if k < s.len() && s[k].is_ascii_digit() {
                while k < s.len() && s[k].is_ascii_digit() {
                    k += 1;
                }
                end = k;
            }
        }
        let text = std::str::from_utf8(&s[start..end]).map_err(|_| self.error("invalid number"))?;
        let value: f64 = text.parse().map_err(|_| self.error("invalid number"))?;
        self.pos = end;
        let imaginary = s.get(end) == Some(&b'i')
            && !s
                .get(end + 1)
                .is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_');
        if imaginary {
            self.pos += 1;
            return Ok(Expr::Const(C::new(0.0, value)));
        }
        Ok(Expr::Const(C::new(value, 0.0)))
    }

    fn ident(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos])
            .map_err(|_| self.error("invalid identifier"))?
            .to_string();
        if self.peek() == Some(b'(') {
            let func = Func::from_name(&name).ok_or_else(|| Error::Syntax {
                offset: start,
                message: format!("unknown function `{name}`"),
            })?;
            self.pos += 1;
            let arg = self.expr()?;
            if !self.eat(b')') {
                return Err(self.error("expected `)`"));
            }
            return Ok(Expr::Call(func, Box::new(arg)));
        }
        match name.as_str() {
            "pi" => return Ok(Expr::Const(C::new(std::f64::consts::PI, 0.0))),
            "i" => return Ok(Expr::Const(C::new(0.0, 1.0))),
            "t" if self.allow_t => return Ok(Expr::Var(Var::T)),
            _ => {}
        }
        if let Some(idx) = name.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
            if (1..=self.dim).contains(&idx) && !name[1..].starts_with('0') {
                return Ok(Expr::Var(Var::X(idx - 1)));
            }
        }
        Err(Error::UnknownVariable(name))
    }
}
