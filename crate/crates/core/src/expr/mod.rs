//! Meromorphic expressions of one complex variable `z`.
//!
//! Grammar (whitespace insensitive):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' unary)?
//! atom   := number | ident | ident '(' expr ')' | '(' expr ')'
//! number := digits ['.' digits] [('e' | 'E') ['+' | '-'] digits]
//! ident  := [a-zA-Z_][a-zA-Z0-9_]*
//! ```
//!
//! `z` is the variable, `i`, `pi` and `e` are constants, `exp log sqrt sin cos
//! sinh cosh erf` are functions; every other identifier is a named parameter.
//! Constant subtrees are folded while the tree is built.

mod deriv;
mod parse;
mod simplify;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::specfun::{self, SpecfunError};

pub use parse::{parse, parse_with_params};
pub use simplify::{as_polynomial, from_polynomial, simplify};

/// Named parameter bindings.
pub type Params = BTreeMap<String, C64>;

/// Magnitude above which an evaluation is reported as a pole.
pub const DEFAULT_BLOWUP: f64 = 1e12;

const ERF_TOL: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    SyntaxError { offset: usize, message: String },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("pole or overflow at z = {z} (|value| = {magnitude:.3e})")]
    PoleOrOverflow { z: C64, magnitude: f64 },
    #[error("parameter `{0}` is not bound")]
    UnboundParameter(String),
    #[error("special function failed: {0}")]
    Special(#[from] SpecfunError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Erf,
}

impl Func {
    pub const ALL: [Func; 8] = [
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Sin,
        Func::Cos,
        Func::Sinh,
        Func::Cosh,
        Func::Erf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Erf => "erf",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    fn apply(self, w: C64) -> Result<C64, ExprError> {
        Ok(match self {
            Func::Exp => w.exp(),
            Func::Log => w.ln(),
            Func::Sqrt => w.sqrt(),
            Func::Sin => w.sin(),
            Func::Cos => w.cos(),
            Func::Sinh => w.sinh(),
            Func::Cosh => w.cosh(),
            Func::Erf => specfun::erf_c(w, ERF_TOL)?,
        })
    }
}

/// Expression tree. Build it through [`parse`] or the folding constructors
/// ([`Expr::add`], [`Expr::mul`], ...) so that constant subtrees stay folded.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(C64),
    Var,
    Param(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

fn folded(v: C64) -> Option<Expr> {
    v.is_finite().then_some(Expr::Const(unsigned_zero(v)))
}

impl Expr {
    pub fn constant(v: impl Into<C64>) -> Expr {
        Expr::Const(unsigned_zero(v.into()))
    }

    pub fn real(v: f64) -> Expr {
        Expr::Const(C64::new(v, 0.0))
    }

    pub fn param(name: &str) -> Expr {
        Expr::Param(name.to_string())
    }

    pub fn as_const(&self) -> Option<C64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    fn is_zero(&self) -> bool {
        self.as_const() == Some(C64::new(0.0, 0.0))
    }

    fn is_one(&self) -> bool {
        self.as_const() == Some(C64::new(1.0, 0.0))
    }

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Const(c) => Expr::Const(unsigned_zero(-c)),
            a => Expr::Neg(Box::new(a)),
        }
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            if let Some(e) = folded(x + y) {
                return e;
            }
        }
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            if let Some(e) = folded(x - y) {
                return e;
            }
        }
        if b.is_zero() {
            return a;
        }
        if a.is_zero() {
            return Expr::neg(b);
        }
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            if let Some(e) = folded(x * y) {
                return e;
            }
        }
        if a.is_zero() || b.is_zero() {
            return Expr::real(0.0);
        }
        if a.is_one() {
            return b;
        }
        if b.is_one() {
            return a;
        }
        Expr::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            if let Some(e) = folded(x / y) {
                return e;
            }
        }
        if b.is_one() {
            return a;
        }
        if a.is_zero() && !b.is_zero() {
            return a;
        }
        Expr::Div(Box::new(a), Box::new(b))
    }

    pub fn pow(a: Expr, b: Expr) -> Expr {
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            if let Ok(v) = pow_value(x, y) {
                if let Some(e) = folded(v) {
                    return e;
                }
            }
        }
        if b.is_one() {
            return a;
        }
        if b.is_zero() {
            return Expr::real(1.0);
        }
        Expr::Pow(Box::new(a), Box::new(b))
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        if let Some(x) = a.as_const() {
            if let Ok(v) = f.apply(x) {
                if let Some(e) = folded(v) {
                    return e;
                }
            }
        }
        Expr::Call(f, Box::new(a))
    }

    /// True when the tree does not involve `z` (parameters count as constants).
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Param(_) => true,
            Expr::Var => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.is_constant(),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => a.is_constant() && b.is_constant(),
        }
    }

    /// Names of the parameters referenced by the tree, sorted.
    pub fn parameters(&self) -> Vec<String> {
        fn walk(e: &Expr, out: &mut Vec<String>) {
            match e {
                Expr::Param(p) => {
                    if !out.contains(p) {
                        out.push(p.clone());
                    }
                }
                Expr::Const(_) | Expr::Var => {}
                Expr::Neg(a) | Expr::Call(_, a) => walk(a, out),
                Expr::Add(a, b)
                | Expr::Sub(a, b)
                | Expr::Mul(a, b)
                | Expr::Div(a, b)
                | Expr::Pow(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out.sort();
        out
    }

    /// Replaces parameters by their bound values and folds the result.
    pub fn bind(&self, params: &Params) -> Expr {
        match self {
            Expr::Param(p) => match params.get(p) {
                Some(v) => Expr::Const(*v),
                None => self.clone(),
            },
            Expr::Const(_) | Expr::Var => self.clone(),
            Expr::Neg(a) => Expr::neg(a.bind(params)),
            Expr::Call(f, a) => Expr::call(*f, a.bind(params)),
            Expr::Add(a, b) => Expr::add(a.bind(params), b.bind(params)),
            Expr::Sub(a, b) => Expr::sub(a.bind(params), b.bind(params)),
            Expr::Mul(a, b) => Expr::mul(a.bind(params), b.bind(params)),
            Expr::Div(a, b) => Expr::div(a.bind(params), b.bind(params)),
            Expr::Pow(a, b) => Expr::pow(a.bind(params), b.bind(params)),
        }
    }

    pub fn eval(&self, z: C64, params: &Params) -> Result<C64, ExprError> {
        self.eval_with(z, params, DEFAULT_BLOWUP)
    }

    /// Evaluates with principal branches for `log`, `sqrt` and non-integer powers.
    /// Any intermediate value that is non-finite or larger than `blowup` in
    /// modulus is reported as [`ExprError::PoleOrOverflow`].
    pub fn eval_with(&self, z: C64, params: &Params, blowup: f64) -> Result<C64, ExprError> {
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Var => z,
            Expr::Param(p) => *params
                .get(p)
                .ok_or_else(|| ExprError::UnboundParameter(p.clone()))?,
            Expr::Neg(a) => -a.eval_with(z, params, blowup)?,
            Expr::Add(a, b) => a.eval_with(z, params, blowup)? + b.eval_with(z, params, blowup)?,
            Expr::Sub(a, b) => a.eval_with(z, params, blowup)? - b.eval_with(z, params, blowup)?,
            Expr::Mul(a, b) => a.eval_with(z, params, blowup)? * b.eval_with(z, params, blowup)?,
            Expr::Div(a, b) => {
                let num = a.eval_with(z, params, blowup)?;
                let den = b.eval_with(z, params, blowup)?;
                if den.norm() == 0.0 {
                    return Err(ExprError::PoleOrOverflow {
                        z,
                        magnitude: f64::INFINITY,
                    });
                }
                num / den
            }
            Expr::Pow(a, b) => {
                let base = a.eval_with(z, params, blowup)?;
                let exponent = b.eval_with(z, params, blowup)?;
                pow_value(base, exponent).map_err(|_| ExprError::PoleOrOverflow {
                    z,
                    magnitude: f64::INFINITY,
                })?
            }
            Expr::Call(f, a) => f.apply(a.eval_with(z, params, blowup)?)?,
        };
        let magnitude = v.norm();
        if !magnitude.is_finite() || magnitude > blowup {
            return Err(ExprError::PoleOrOverflow { z, magnitude });
        }
        Ok(v)
    }

    /// Exact symbolic derivative with respect to `z`.
    pub fn derivative(&self) -> Expr {
        deriv::derivative(self)
    }

    /// Symbolic logarithmic derivative `f′/f`, exact for products, quotients,
    /// constant powers and exponentials (so that `exp(g)` yields `g′`).
    pub fn log_derivative(&self) -> Expr {
        deriv::log_derivative(self)
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Const(c) => {
                if c.im == 0.0 {
                    if c.re.is_sign_negative() {
                        3
                    } else {
                        5
                    }
                } else if c.re == 0.0 {
                    2
                } else {
                    1
                }
            }
            Expr::Var | Expr::Param(_) | Expr::Call(..) => 5,
        }
    }

    fn write_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let paren = self.precedence() < min;
        if paren {
            write!(f, "(")?;
        }
        match self {
            Expr::Const(c) => write_const(f, *c)?,
            Expr::Var => write!(f, "z")?,
            Expr::Param(p) => write!(f, "{p}")?,
            Expr::Neg(a) => {
                write!(f, "-")?;
                a.write_prec(f, 3)?;
            }
            Expr::Add(a, b) => {
                a.write_prec(f, 1)?;
                write!(f, " + ")?;
                b.write_prec(f, 2)?;
            }
            Expr::Sub(a, b) => {
                a.write_prec(f, 1)?;
                write!(f, " - ")?;
                b.write_prec(f, 2)?;
            }
            Expr::Mul(a, b) => {
                a.write_prec(f, 2)?;
                write!(f, "*")?;
                b.write_prec(f, 3)?;
            }
            Expr::Div(a, b) => {
                a.write_prec(f, 2)?;
                write!(f, "/")?;
                b.write_prec(f, 3)?;
            }
            Expr::Pow(a, b) => {
                a.write_prec(f, 5)?;
                write!(f, "^")?;
                b.write_prec(f, 3)?;
            }
            Expr::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.write_prec(f, 0)?;
                write!(f, ")")?;
            }
        }
        if paren {
            write!(f, ")")?;
        }
        Ok(())
    }
}

fn fmt_real(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x)
    } else {
        format!("{:?}", x)
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, c: C64) -> fmt::Result {
    if c.im == 0.0 {
        return write!(f, "{}", fmt_real(c.re));
    }
    let im = if c.im.abs() == 1.0 {
        "i".to_string()
    } else {
        format!("{}*i", fmt_real(c.im.abs()))
    };
    if c.re == 0.0 {
        let sign = if c.im < 0.0 { "-" } else { "" };
        write!(f, "{sign}{im}")
    } else {
        let sign = if c.im < 0.0 { "-" } else { "+" };
        write!(f, "{} {sign} {im}", fmt_real(c.re))
    }
}

/// Complex power with exact repeated multiplication for small integer exponents.
/// Replaces `−0` parts by `+0` so folded constants sit on the principal branch
/// cut the same way their printed form does.
fn unsigned_zero(c: C64) -> C64 {
    C64::new(c.re + 0.0, c.im + 0.0)
}

pub(crate) fn pow_value(base: C64, exponent: C64) -> Result<C64, ()> {
    if exponent.im == 0.0 && exponent.re == exponent.re.trunc() && exponent.re.abs() <= 64.0 {
        let n = exponent.re as i32;
        if n < 0 && base.norm() == 0.0 {
            return Err(());
        }
        return Ok(base.powi(n));
    }
    if base.norm() == 0.0 {
        return if exponent.re > 0.0 {
            Ok(C64::new(0.0, 0.0))
        } else {
            Err(())
        };
    }
    Ok(base.powc(exponent))
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_prec(f, 0)
    }
}

impl FromStr for Expr {
    type Err = ExprError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn ev(text: &str, z: C64) -> C64 {
        parse(text).unwrap().eval(z, &Params::new()).unwrap()
    }

    #[test]
    fn evaluation_examples() {
        assert_eq!(ev("z^2/2", c(2.0, 0.0)), c(2.0, 0.0));
        let v = ev("exp(z)", c(0.0, PI));
        assert!((v - c(-1.0, 0.0)).norm() < 1e-15);
        let v = ev("erf(z)", c(1.0, 0.0));
        assert!((v.re - 0.842700792949715).abs() < 1e-12);
    }

    #[test]
    fn principal_branches() {
        let v = ev("sqrt(z)", c(-4.0, 0.0));
        assert!((v - c(0.0, 2.0)).norm() < 1e-15);
        let v = ev("log(z)", c(-1.0, 0.0));
        assert!((v - c(0.0, PI)).norm() < 1e-15);
        let v = ev("z^0.5", c(0.0, 2.0));
        assert!((v - c(1.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn pole_detection() {
        let e = parse("1/(z - 1)").unwrap();
        assert!(matches!(
            e.eval(c(1.0, 0.0), &Params::new()),
            Err(ExprError::PoleOrOverflow { .. })
        ));
        assert!(matches!(
            e.eval(c(1.0 + 1e-13, 0.0), &Params::new()),
            Err(ExprError::PoleOrOverflow { .. })
        ));
        assert!(e
            .eval_with(c(1.0 + 1e-13, 0.0), &Params::new(), 1e15)
            .is_ok());
    }

    #[test]
    fn parameters_must_be_bound() {
        let e = parse("c*exp(z^2/2)").unwrap();
        assert_eq!(e.parameters(), vec!["c".to_string()]);
        assert_eq!(
            e.eval(c(0.0, 0.0), &Params::new()),
            Err(ExprError::UnboundParameter("c".into()))
        );
        let mut p = Params::new();
        p.insert("c".into(), c(2.0, 0.0));
        assert_eq!(e.eval(c(0.0, 0.0), &p).unwrap(), c(2.0, 0.0));
        assert_eq!(
            e.bind(&p).eval(c(0.0, 0.0), &Params::new()).unwrap(),
            c(2.0, 0.0)
        );
    }

    #[test]
    fn printing_is_readable() {
        assert_eq!(parse("z^2/2").unwrap().to_string(), "z^2/2");
        assert_eq!(parse("-z^2").unwrap().to_string(), "-z^2");
        assert_eq!(
            parse("(z - 1) - (z - 2)").unwrap().to_string(),
            "z - 1 - (z - 2)"
        );
        assert_eq!(parse("2 - 3*i + z").unwrap().to_string(), "2 - 3*i + z");
        assert_eq!(parse("a^b^c").unwrap().to_string(), "a^b^c");
        assert_eq!(parse("(a^b)^c").unwrap().to_string(), "(a^b)^c");
    }

    #[test]
    fn constant_folding() {
        assert_eq!(parse("2*3 + 1").unwrap(), Expr::real(7.0));
        assert_eq!(parse("2 + 3*i").unwrap(), Expr::constant(c(2.0, 3.0)));
        assert_eq!(parse("exp(0)").unwrap(), Expr::real(1.0));
        // non-finite folds are left symbolic
        assert!(matches!(parse("1/0").unwrap(), Expr::Div(..)));
    }
}
