//! Light algebraic normalization: polynomial normal form in `z` and merging of
//! exponential factors (`exp(a)^k·exp(b)/exp(c) → exp(k·a + b − c)`).
//! Only identities valid for every branch choice are used.

use num_complex::Complex64 as C64;

use super::{Expr, Func};

const MAX_DEGREE: usize = 64;
/// Constants within this many ulps of an integer are snapped to it, so that
/// cancelling products such as `λc²·n/(λc²)` print as the integer they are.
const SNAP_ULPS: f64 = 8.0;

fn snap_part(x: f64) -> f64 {
    let r = x.round();
    if r != 0.0 && (x - r).abs() <= SNAP_ULPS * f64::EPSILON * r.abs() {
        r
    } else {
        x
    }
}

fn snap(c: C64) -> C64 {
    C64::new(snap_part(c.re), snap_part(c.im))
}

fn trim(mut c: Vec<C64>) -> Vec<C64> {
    while c.len() > 1 && *c.last().unwrap() == C64::new(0.0, 0.0) {
        c.pop();
    }
    c
}

fn poly_add(a: &[C64], b: &[C64], sign: f64) -> Vec<C64> {
    let n = a.len().max(b.len());
    trim(
        (0..n)
            .map(|k| {
                a.get(k).copied().unwrap_or_default() + b.get(k).copied().unwrap_or_default() * sign
            })
            .collect(),
    )
}

fn poly_mul(a: &[C64], b: &[C64]) -> Option<Vec<C64>> {
    if a.len() + b.len() - 1 > MAX_DEGREE + 1 {
        return None;
    }
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    Some(trim(out))
}

fn small_natural(e: &Expr) -> Option<u32> {
    let c = e.as_const()?;
    (c.im == 0.0 && c.re >= 0.0 && c.re.fract() == 0.0 && c.re <= MAX_DEGREE as f64)
        .then_some(c.re as u32)
}

/// Coefficients `[c₀, c₁, …]` when `e` is a polynomial in `z` with numeric coefficients.
pub fn as_polynomial(e: &Expr) -> Option<Vec<C64>> {
    match e {
        Expr::Const(c) => Some(vec![*c]),
        Expr::Var => Some(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]),
        Expr::Param(_) | Expr::Call(..) => None,
        Expr::Neg(a) => Some(as_polynomial(a)?.into_iter().map(|c| -c).collect()),
        Expr::Add(a, b) => Some(poly_add(&as_polynomial(a)?, &as_polynomial(b)?, 1.0)),
        Expr::Sub(a, b) => Some(poly_add(&as_polynomial(a)?, &as_polynomial(b)?, -1.0)),
        Expr::Mul(a, b) => poly_mul(&as_polynomial(a)?, &as_polynomial(b)?),
        Expr::Div(a, b) => {
            let d = b.as_const()?;
            if d == C64::new(0.0, 0.0) {
                return None;
            }
            Some(as_polynomial(a)?.into_iter().map(|c| c / d).collect())
        }
        Expr::Pow(a, b) => {
            let k = small_natural(b)?;
            let base = as_polynomial(a)?;
            let mut acc = vec![C64::new(1.0, 0.0)];
            for _ in 0..k {
                acc = poly_mul(&acc, &base)?;
            }
            Some(acc)
        }
    }
}

fn monomial_of(k: usize) -> Option<Expr> {
    match k {
        0 => None,
        1 => Some(Expr::Var),
        _ => Some(Expr::pow(Expr::Var, Expr::real(k as f64))),
    }
}

/// Expression for the polynomial `Σ cₖ zᵏ`, constant term first.
pub fn from_polynomial(coeffs: &[C64]) -> Expr {
    let mut out: Option<Expr> = None;
    for (k, c) in coeffs.iter().map(|c| snap(*c)).enumerate() {
        if c == C64::new(0.0, 0.0) {
            continue;
        }
        let monomial = monomial_of(k);
        let negative = c.im == 0.0 && c.re < 0.0;
        let magnitude = if negative { -c } else { c };
        let term = match monomial {
            None => Expr::constant(magnitude),
            Some(m) => Expr::mul(Expr::constant(magnitude), m),
        };
        out = Some(match (out, negative) {
            (None, false) => term,
            (None, true) => match monomial_of(k) {
                None => Expr::constant(c),
                Some(m) if c == C64::new(-1.0, 0.0) => Expr::neg(m),
                Some(m) => Expr::mul(Expr::constant(c), m),
            },
            (Some(acc), false) => Expr::add(acc, term),
            (Some(acc), true) => Expr::sub(acc, term),
        });
    }
    out.unwrap_or_else(|| Expr::real(0.0))
}

/// Multiplicative decomposition `coef · Π others · exp(Σ exp_args)`.
#[derive(Default)]
struct Product {
    coef: Option<C64>,
    exp_args: Vec<Expr>,
    others: Vec<(Expr, i32)>,
}

impl Product {
    fn scale(&mut self, c: C64) {
        self.coef = Some(self.coef.unwrap_or(C64::new(1.0, 0.0)) * c);
    }

    fn absorb(&mut self, e: Expr, power: i32) {
        match e {
            Expr::Const(c) => self.scale(c.powi(power)),
            Expr::Neg(a) => {
                self.scale(C64::new(-1.0, 0.0).powi(power));
                self.absorb(*a, power);
            }
            Expr::Mul(a, b) => {
                self.absorb(*a, power);
                self.absorb(*b, power);
            }
            Expr::Div(a, b) => {
                self.absorb(*a, power);
                self.absorb(*b, -power);
            }
            Expr::Call(Func::Exp, a) => self.exp_args.push(Expr::mul(Expr::real(power as f64), *a)),
            // integer powers distribute over products for every branch
            Expr::Pow(a, b) if small_natural(&b).is_some() => {
                let k = small_natural(&b).unwrap() as i32;
                self.absorb(*a, power * k);
            }
            other => self.others.push((other, power)),
        }
    }

    fn rebuild(self) -> Expr {
        let mut num: Vec<Expr> = Vec::new();
        let mut den: Vec<Expr> = Vec::new();
        for (e, p) in self.others {
            let base = if p.abs() == 1 {
                e
            } else {
                Expr::pow(e, Expr::real(p.abs() as f64))
            };
            if p > 0 {
                num.push(base);
            } else {
                den.push(base);
            }
        }
        if !self.exp_args.is_empty() {
            let arg = self.exp_args.into_iter().reduce(Expr::add).unwrap();
            let arg = simplify(&arg);
            if !arg.is_zero() {
                num.push(Expr::call(Func::Exp, arg));
            }
        }
        let mut out = num
            .into_iter()
            .reduce(Expr::mul)
            .unwrap_or_else(|| Expr::real(1.0));
        if let Some(d) = den.into_iter().reduce(Expr::mul) {
            out = Expr::div(out, d);
        }
        match self.coef {
            Some(c) => Expr::mul(Expr::constant(snap(c)), out),
            None => out,
        }
    }
}

/// Normalizes `e`: polynomials are expanded and exponential factors merged.
pub fn simplify(e: &Expr) -> Expr {
    if let Some(p) = as_polynomial(e) {
        return from_polynomial(&p);
    }
    let rebuilt = match e {
        Expr::Const(_) | Expr::Var | Expr::Param(_) => return e.clone(),
        Expr::Neg(a) => Expr::neg(simplify(a)),
        Expr::Add(a, b) => Expr::add(simplify(a), simplify(b)),
        Expr::Sub(a, b) => Expr::sub(simplify(a), simplify(b)),
        Expr::Mul(a, b) => Expr::mul(simplify(a), simplify(b)),
        Expr::Div(a, b) => Expr::div(simplify(a), simplify(b)),
        Expr::Pow(a, b) => Expr::pow(simplify(a), simplify(b)),
        Expr::Call(f, a) => Expr::call(*f, simplify(a)),
    };
    match rebuilt {
        Expr::Mul(..) | Expr::Div(..) | Expr::Neg(_) | Expr::Pow(..) => {
            let mut p = Product::default();
            p.absorb(rebuilt, 1);
            let out = p.rebuild();
            match as_polynomial(&out) {
                Some(poly) => from_polynomial(&poly),
                None => out,
            }
        }
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse, Params};
    use super::*;

    fn same_values(a: &Expr, b: &Expr) {
        let params = Params::new();
        for z in [C64::new(0.3, 0.2), C64::new(-1.1, 0.7), C64::new(0.9, -1.3)] {
            let (u, v) = (a.eval(z, &params).unwrap(), b.eval(z, &params).unwrap());
            assert!(
                (u - v).norm() <= 1e-12 * u.norm().max(1.0),
                "{a} vs {b} at {z}"
            );
        }
    }

    #[test]
    fn polynomial_normal_form() {
        let e = parse("(z+1)^2 - z*(z+2)").unwrap();
        assert_eq!(simplify(&e), Expr::real(1.0));
        let e = parse("-2*(2*z^1/2)").unwrap();
        assert_eq!(simplify(&e).to_string(), "-2*z");
        let e = parse("1 - z^2 - 2").unwrap();
        assert_eq!(simplify(&e).to_string(), "-1 - z^2");
    }

    #[test]
    fn exponentials_merge() {
        let e = parse("-(exp(z^2/2))^2*(2*exp(-z^2))").unwrap();
        assert_eq!(simplify(&e), Expr::real(-2.0));
        let e = parse("exp(z)*sin(z)/exp(2*z)").unwrap();
        let s = simplify(&e);
        same_values(&e, &s);
        assert_eq!(s.to_string(), "sin(z)*exp(-z)");
    }

    #[test]
    fn near_integers_are_snapped() {
        let k = 3.0 * std::f64::consts::PI.sqrt() / 0.7;
        let e = Expr::mul(
            Expr::real(0.7 / std::f64::consts::PI.sqrt()),
            Expr::mul(Expr::real(k), Expr::Var),
        );
        assert_eq!(simplify(&e).to_string(), "3*z");
        let e = parse("0.1*z + 0.2*z").unwrap();
        assert_eq!(
            as_polynomial(&simplify(&e)).unwrap()[1],
            C64::new(0.1 + 0.2, 0.0)
        );
    }

    #[test]
    fn values_are_preserved() {
        for text in [
            "z*exp(z)/(1+z)",
            "sqrt(z+2)*exp(z)^3",
            "-(z-1)/(2*exp(z))",
            "log(2+z)^2*z",
        ] {
            let e = parse(text).unwrap();
            same_values(&e, &simplify(&e));
        }
    }
}
