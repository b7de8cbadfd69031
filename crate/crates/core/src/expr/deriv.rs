use std::f64::consts::PI;

use super::{Expr, Func};

pub(super) fn derivative(e: &Expr) -> Expr {
    match e {
        Expr::Const(_) | Expr::Param(_) => Expr::real(0.0),
        Expr::Var => Expr::real(1.0),
        Expr::Neg(a) => Expr::neg(derivative(a)),
        Expr::Add(a, b) => Expr::add(derivative(a), derivative(b)),
        Expr::Sub(a, b) => Expr::sub(derivative(a), derivative(b)),
        Expr::Mul(a, b) => Expr::add(
            Expr::mul(derivative(a), (**b).clone()),
            Expr::mul((**a).clone(), derivative(b)),
        ),
        Expr::Div(a, b) => {
            if b.is_constant() {
                return Expr::div(derivative(a), (**b).clone());
            }
            let num = Expr::sub(
                Expr::mul(derivative(a), (**b).clone()),
                Expr::mul((**a).clone(), derivative(b)),
            );
            Expr::div(num, Expr::pow((**b).clone(), Expr::real(2.0)))
        }
        Expr::Pow(a, b) => {
            if b.is_constant() {
                // b·a^(b−1)·a′
                let lowered = Expr::pow((**a).clone(), Expr::sub((**b).clone(), Expr::real(1.0)));
                return Expr::mul(Expr::mul((**b).clone(), lowered), derivative(a));
            }
            let log_a = Expr::call(Func::Log, (**a).clone());
            if a.is_constant() {
                return Expr::mul(Expr::mul(e.clone(), log_a), derivative(b));
            }
            // a^b·(b′·ln a + b·a′/a)
            let inner = Expr::add(
                Expr::mul(derivative(b), log_a),
                Expr::div(Expr::mul((**b).clone(), derivative(a)), (**a).clone()),
            );
            Expr::mul(e.clone(), inner)
        }
        Expr::Call(f, a) => {
            let arg = (**a).clone();
            let outer = match f {
                Func::Exp => e.clone(),
                Func::Log => return Expr::div(derivative(a), arg),
                Func::Sqrt => {
                    return Expr::div(derivative(a), Expr::mul(Expr::real(2.0), e.clone()));
                }
                Func::Sin => Expr::call(Func::Cos, arg),
                Func::Cos => Expr::neg(Expr::call(Func::Sin, arg)),
                Func::Sinh => Expr::call(Func::Cosh, arg),
                Func::Cosh => Expr::call(Func::Sinh, arg),
                Func::Erf => Expr::mul(
                    Expr::real(2.0 / PI.sqrt()),
                    Expr::call(Func::Exp, Expr::neg(Expr::pow(arg, Expr::real(2.0)))),
                ),
            };
            Expr::mul(outer, derivative(a))
        }
    }
}

pub(super) fn log_derivative(e: &Expr) -> Expr {
    if e.is_constant() {
        return Expr::real(0.0);
    }
    match e {
        Expr::Neg(a) => log_derivative(a),
        Expr::Mul(a, b) => Expr::add(log_derivative(a), log_derivative(b)),
        Expr::Div(a, b) => Expr::sub(log_derivative(a), log_derivative(b)),
        Expr::Pow(a, b) if b.is_constant() => Expr::mul((**b).clone(), log_derivative(a)),
        Expr::Call(Func::Exp, a) => derivative(a),
        Expr::Call(Func::Sqrt, a) => Expr::div(log_derivative(a), Expr::real(2.0)),
        _ => Expr::div(derivative(e), e.clone()),
    }
}
