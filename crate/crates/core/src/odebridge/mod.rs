//! Bridge between the holomorphic spectral problem and scalar second-order
//! linear ODEs.
//!
//! Eliminating `β` from a column `(α, β)` of `Ψ′ = λη²[[ψ, −1], [ψ², −ψ]]Ψ`
//! gives `β = ψα − α′/(λη²)` and
//!
//! ```text
//! α″ + p α′ + q α = 0,   p = −2η′/η,   q = −λη²ψ′,
//! ```
//!
//! whose standard form `y″ + Q y = 0` (with `y = α/η`) has potential
//! `Q = ∂²ln η − (∂ln η)² − λη²ψ′`. Conversely `(p, q)` determine the data up to
//! the constants `c` (scale of η) and `c₁` (shift of ψ).

mod erf;

use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::data::{domain_err, HoloFn, WeierstrassData};
use crate::error::{Error, Result};
use crate::expr::{as_polynomial, from_polynomial, simplify, Expr, Func, Params};
use crate::lsp::{propagate, IntegrateOptions, PathSpec, System, Wavefunction};
use crate::mcore::Mat2C;
use crate::quadrature::{gl32, gl32_integration_matrix};
use crate::specfun::{erf_c, ERF_MAX_MODULUS};

pub use erf::{
    erf_constancy_residual, erf_example_data, erf_example_surface, kummer_crosscheck, KummerReport,
    ERF_BASE, KUMMER_THRESHOLD,
};

/// `w″ + p w′ + q w = 0` together with the spectral parameter it belongs to.
#[derive(Debug, Clone)]
pub struct OdeSpec {
    pub p: Expr,
    pub q: Expr,
    pub lambda: f64,
    pub params: Params,
}

impl OdeSpec {
    pub fn new(p: Expr, q: Expr, lambda: f64) -> Self {
        Self {
            p,
            q,
            lambda,
            params: Params::new(),
        }
    }

    pub fn parse(p: &str, q: &str, lambda: f64) -> Result<Self> {
        Ok(Self::new(
            crate::expr::parse(p)?,
            crate::expr::parse(q)?,
            lambda,
        ))
    }

    pub fn with_params(mut self, params: Params) -> Self {
        self.params = params;
        self
    }

    /// `(p, q)` at one point.
    pub fn at(&self, z: C64) -> Result<(C64, C64)> {
        let p = self.p.eval(z, &self.params).map_err(|e| domain_err(z, e))?;
        let q = self.q.eval(z, &self.params).map_err(|e| domain_err(z, e))?;
        Ok((p, q))
    }
}

fn symbolic_parts(data: &WeierstrassData) -> Result<(Expr, Expr)> {
    match (data.eta.expr(), data.psi.derivative_expr()) {
        (Some(eta), Some(dpsi)) => Ok((eta.bind(&data.params), dpsi.bind(&data.params))),
        _ => Err(Error::NotSymbolic("ODE coefficients need symbolic data")),
    }
}

fn q_expr(eta: &Expr, dpsi: &Expr, lambda: f64) -> Expr {
    simplify(&Expr::neg(Expr::mul(
        Expr::real(lambda),
        Expr::mul(Expr::pow(eta.clone(), Expr::real(2.0)), dpsi.clone()),
    )))
}

/// `p = −2η′/η`, `q = −λη²ψ′` as simplified expression trees.
pub fn ode_coefficients(data: &WeierstrassData) -> Result<OdeSpec> {
    let (eta, dpsi) = symbolic_parts(data)?;
    let p = simplify(&Expr::mul(Expr::real(-2.0), eta.log_derivative()));
    let q = q_expr(&eta, &dpsi, data.lambda);
    Ok(OdeSpec::new(p, q, data.lambda))
}

/// `(p, q)` at `z`; works for numeric data as well.
pub fn ode_coefficients_at(data: &WeierstrassData, z: C64) -> Result<(C64, C64)> {
    let s = data.sample(z)?;
    Ok((-2.0 * s.deta / s.eta, -data.lambda * s.eta * s.eta * s.dpsi))
}

/// Potential `Q = ∂²ln η − (∂ln η)² − λη²ψ′` of the standard form `y″ + Q y = 0`.
pub fn standard_potential(data: &WeierstrassData) -> Result<Expr> {
    let (eta, dpsi) = symbolic_parts(data)?;
    let l = simplify(&eta.log_derivative());
    let q = q_expr(&eta, &dpsi, data.lambda);
    Ok(simplify(&Expr::add(
        Expr::sub(l.derivative(), Expr::pow(l, Expr::real(2.0))),
        q,
    )))
}

pub fn standard_potential_at(data: &WeierstrassData, z: C64) -> Result<C64> {
    let [eta, deta, d2eta] = data.eta.jet(z, &data.params)?;
    let [_, dpsi] = data.psi.value_d1(z, &data.params)?;
    if eta.norm() == 0.0 {
        return Err(Error::DomainError {
            z,
            reason: "eta vanishes".into(),
        });
    }
    let l = deta / eta;
    Ok(d2eta / eta - 2.0 * l * l - data.lambda * eta * eta * dpsi)
}

// ---------------------------------------------------------------------------
// ODE → Weierstrass data

fn poly_eval(c: &[C64], z: C64) -> C64 {
    c.iter()
        .rev()
        .fold(C64::new(0.0, 0.0), |acc, a| acc * z + a)
}

/// Coefficients of `∫_{z0}^{z} P`.
fn poly_integral(c: &[C64], z0: C64) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0)];
    out.extend(c.iter().enumerate().map(|(k, a)| a / (k as f64 + 1.0)));
    out[0] = -poly_eval(&out, z0);
    out
}

fn degree(c: &[C64]) -> usize {
    c.iter()
        .rposition(|a| *a != C64::new(0.0, 0.0))
        .unwrap_or(0)
}

/// `∫_{z0}^{z} q e^{P(t)} dt` in closed form for the recognized shapes, where
/// `P(z0) = 0`.
fn closed_form_primitive(big_p: &[C64], q: &[C64], z0: C64) -> Option<Expr> {
    let zero = C64::new(0.0, 0.0);
    let dp = if big_p.iter().all(|a| *a == zero) {
        0
    } else {
        degree(big_p).max(1)
    };
    let q_const = degree(q) == 0;
    match dp {
        0 => Some(from_polynomial(&poly_integral(q, z0))),
        1 if q_const => {
            // q/a (e^{P} − 1)
            let a = big_p[1];
            let e = Expr::call(Func::Exp, from_polynomial(big_p));
            Some(Expr::mul(
                Expr::constant(q[0] / a),
                Expr::sub(e, Expr::real(1.0)),
            ))
        }
        2 if q_const => {
            // P = a(t + b)² + d, s = √(−a):
            // ∫ e^{P} = e^{d} √π/(2s) [erf(s(z + b)) − erf(s(z0 + b))]
            let a = big_p[2];
            let b = big_p[1] / (2.0 * a);
            let d = big_p[0] - big_p[1] * big_p[1] / (4.0 * a);
            let s = (-a).sqrt();
            let start = s * (z0 + b);
            if start.norm() > ERF_MAX_MODULUS {
                return None;
            }
            let erf0 = erf_c(start, 1e-15).ok()?;
            let k = q[0] * d.exp() * std::f64::consts::PI.sqrt() / (2.0 * s);
            let arg = from_polynomial(&[s * b, s]);
            let erf = Expr::call(Func::Erf, arg);
            Some(simplify(&Expr::sub(
                Expr::mul(Expr::constant(k), erf),
                Expr::constant(k * erf0),
            )))
        }
        _ => None,
    }
}

/// Integrals `I = ∫p` and `J = ∫q e^{I}` from a fixed base point, evaluated by
/// composite Gauss–Legendre panels along the straight segment.
struct NumericPrimitives {
    p: Expr,
    q: Expr,
    dp: Expr,
    dq: Expr,
    params: Params,
    z0: C64,
}

const PANEL_TOL: f64 = 1e-13;
const MAX_PANELS: usize = 512;

impl NumericPrimitives {
    fn eval(&self, e: &Expr, z: C64) -> Result<C64> {
        e.eval(z, &self.params).map_err(|err| {
            Error::NonIntegrableForm(format!("coefficient cannot be evaluated at {z}: {err}"))
        })
    }

    fn sweep(&self, z: C64, panels: usize) -> Result<(C64, C64)> {
        let rule = gl32();
        let s = gl32_integration_matrix();
        let n = rule.nodes.len();
        let step = (z - self.z0) / panels as f64;
        let (mut i_a, mut j_a) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        let mut pv = vec![C64::new(0.0, 0.0); n];
        let mut gv = vec![C64::new(0.0, 0.0); n];
        for k in 0..panels {
            let a = self.z0 + step * k as f64;
            let half = 0.5 * step;
            let mid = a + half;
            let mut qv = vec![C64::new(0.0, 0.0); n];
            for (m, x) in rule.nodes.iter().enumerate() {
                let t = mid + half * *x;
                pv[m] = self.eval(&self.p, t)?;
                qv[m] = self.eval(&self.q, t)?;
            }
            for m in 0..n {
                let i_m = i_a + half * (0..n).map(|j| pv[j] * s[m][j]).sum::<C64>();
                gv[m] = qv[m] * i_m.exp();
            }
            let mut j_next = j_a;
            let mut i_next = i_a;
            for m in 0..n {
                i_next += half * pv[m] * rule.weights[m];
                j_next += half * gv[m] * rule.weights[m];
            }
            i_a = i_next;
            j_a = j_next;
        }
        Ok((i_a, j_a))
    }

    /// `(I(z), J(z))`.
    fn at(&self, z: C64) -> Result<(C64, C64)> {
        if z == self.z0 {
            return Ok((C64::new(0.0, 0.0), C64::new(0.0, 0.0)));
        }
        let mut panels = 1;
        let mut prev = self.sweep(z, panels)?;
        while panels < MAX_PANELS {
            panels *= 2;
            let cur = self.sweep(z, panels)?;
            let di = (cur.0 - prev.0).norm() / cur.0.norm().max(1.0);
            let dj = (cur.1 - prev.1).norm() / cur.1.norm().max(1.0);
            if di.max(dj) <= PANEL_TOL {
                return Ok(cur);
            }
            prev = cur;
        }
        Err(Error::NonIntegrableForm(format!(
            "primitive did not converge at {z}"
        )))
    }
}

/// Weierstrass data realizing `spec`: `η = c·exp(−½∫_{z0}^{z} p)` and
/// `ψ = −(1/λ)∫_{z0}^{z} q/η² − c₁`. Polynomial `p` of degree ≤ 1 with a
/// constant (or, for `p ≡ 0`, polynomial) `q` is integrated symbolically;
/// everything else falls back to numerical primitives along straight segments.
pub fn weierstrass_from_ode(spec: &OdeSpec, c: C64, c1: C64, z0: C64) -> Result<WeierstrassData> {
    if spec.lambda == 0.0 {
        return Err(Error::LambdaZero);
    }
    if c == C64::new(0.0, 0.0) {
        return Err(Error::InvalidArgument("scale c must be nonzero".into()));
    }
    let p = simplify(&spec.p.bind(&spec.params));
    let q = simplify(&spec.q.bind(&spec.params));
    for e in [&p, &q] {
        if let Some(name) = e.parameters().first() {
            return Err(Error::NonIntegrableForm(format!(
                "unbound parameter {name}"
            )));
        }
    }
    let scale = -1.0 / (spec.lambda * c * c);
    if let (Some(pp), Some(qp)) = (as_polynomial(&p), as_polynomial(&q)) {
        let big_p = poly_integral(&pp, z0);
        if let Some(prim) = closed_form_primitive(&big_p, &qp, z0) {
            let half_p: Vec<C64> = big_p.iter().map(|a| -0.5 * a).collect();
            let eta = simplify(&Expr::mul(
                Expr::constant(c),
                Expr::call(Func::Exp, from_polynomial(&half_p)),
            ));
            let psi = simplify(&Expr::sub(
                Expr::mul(Expr::constant(scale), prim),
                Expr::constant(c1),
            ));
            return Ok(WeierstrassData::new(eta, psi)
                .with_lambda(spec.lambda)
                .with_base(z0));
        }
    }
    numeric_data(p, q, spec.lambda, c, c1, z0)
}

fn numeric_data(
    p: Expr,
    q: Expr,
    lambda: f64,
    c: C64,
    c1: C64,
    z0: C64,
) -> Result<WeierstrassData> {
    let prims = Arc::new(NumericPrimitives {
        dp: p.derivative(),
        dq: q.derivative(),
        p,
        q,
        params: Params::new(),
        z0,
    });
    prims.eval(&prims.p, z0)?;
    prims.eval(&prims.q, z0)?;
    let label_p = prims.p.to_string();
    let label_q = prims.q.to_string();

    let pe = prims.clone();
    let eta = HoloFn::numeric(format!("eta from p = {label_p}"), move |z| {
        let (i, _) = pe.at(z)?;
        let p = pe.eval(&pe.p, z)?;
        let dp = pe.eval(&pe.dp, z)?;
        let eta = c * (-0.5 * i).exp();
        Ok([eta, -0.5 * p * eta, (0.25 * p * p - 0.5 * dp) * eta])
    });
    let ps = prims;
    let psi = HoloFn::numeric(format!("psi from p = {label_p}, q = {label_q}"), move |z| {
        let (i, j) = ps.at(z)?;
        let p = ps.eval(&ps.p, z)?;
        let q = ps.eval(&ps.q, z)?;
        let dq = ps.eval(&ps.dq, z)?;
        // 1/(λη²) = e^{I}/(λc²)
        let inv = i.exp() / (lambda * c * c);
        Ok([-j / (lambda * c * c) - c1, -q * inv, -(dq + p * q) * inv])
    });
    Ok(WeierstrassData {
        eta,
        psi,
        z0,
        lambda,
        params: Params::new(),
    })
}

// ---------------------------------------------------------------------------
// Residuals of integrated solutions

/// Settings for residuals that difference propagated wavefunctions.
pub const BRIDGE_STEP: f64 = 1e-2;
pub const BRIDGE_TOL: f64 = 1e-12;

/// `(Ψ, Ψ′, Ψ″)` at `phi.at` by a five-point stencil along the real direction,
/// each stencil value obtained by continuing `phi` along a short segment.
pub fn solution_jet(data: &WeierstrassData, phi: &Wavefunction, h: f64) -> Result<[Mat2C; 3]> {
    let opts = IntegrateOptions::with_tol(BRIDGE_TOL);
    let z = phi.at;
    let at = |k: f64| -> Result<Mat2C> {
        if k == 0.0 {
            return Ok(phi.value);
        }
        let w = z + C64::new(k * h, 0.0);
        Ok(propagate(
            System::Reduced(data),
            &PathSpec::straight(z, w),
            phi.value,
            &opts,
        )?
        .value)
    };
    let (m2, m1, c0, p1, p2) = (at(-2.0)?, at(-1.0)?, at(0.0)?, at(1.0)?, at(2.0)?);
    let d1 = (m2 - p2 + (p1 - m1) * 8.0) * (1.0 / (12.0 * h));
    let d2 = (-(m2 + p2) + (p1 + m1) * 16.0 - c0 * 30.0) * (1.0 / (12.0 * h * h));
    Ok([c0, d1, d2])
}

/// Largest column residual of `β = ψα − α′/(λη²)`, relative to the column size.
pub fn elimination_residual(data: &WeierstrassData, phi: &Wavefunction, h: f64) -> Result<f64> {
    let [v, d1, _] = solution_jet(data, phi, h)?;
    let s = data.sample(phi.at)?;
    let k = data.lambda * s.eta * s.eta;
    let mut worst = 0.0f64;
    for col in 0..2 {
        let [a, b] = v.column(col);
        let da = d1.column(col)[0];
        let r = (b - (s.psi * a - da / k)).norm() / a.norm().max(b.norm()).max(1.0);
        worst = worst.max(r);
    }
    Ok(worst)
}

/// Largest residual of `α″ + pα′ + qα` over both columns, relative to the
/// size of the individual terms.
pub fn ode_residual(data: &WeierstrassData, phi: &Wavefunction, h: f64) -> Result<f64> {
    let [v, d1, d2] = solution_jet(data, phi, h)?;
    let (p, q) = ode_coefficients_at(data, phi.at)?;
    let mut worst = 0.0f64;
    for col in 0..2 {
        let (a, da, d2a) = (v.column(col)[0], d1.column(col)[0], d2.column(col)[0]);
        let scale = d2a.norm().max((p * da).norm()).max((q * a).norm()).max(1.0);
        worst = worst.max((d2a + p * da + q * a).norm() / scale);
    }
    Ok(worst)
}

/// Largest residual of `y″ + Q y` for `y = α/η`, relative to the term sizes.
pub fn standard_form_residual(data: &WeierstrassData, phi: &Wavefunction, h: f64) -> Result<f64> {
    let [v, d1, d2] = solution_jet(data, phi, h)?;
    let [eta, deta, d2eta] = data.eta.jet(phi.at, &data.params)?;
    let big_q = standard_potential_at(data, phi.at)?;
    let mut worst = 0.0f64;
    for col in 0..2 {
        let (a, da, d2a) = (v.column(col)[0], d1.column(col)[0], d2.column(col)[0]);
        // y = α/η: y′ = (α′ − Lα)/η, y″ = (α″ − 2Lα′ + (2L² − η″/η)α)/η
        let l = deta / eta;
        let y = a / eta;
        let d2y = (d2a - 2.0 * l * da + (2.0 * l * l - d2eta / eta) * a) / eta;
        let scale = d2y.norm().max((big_q * y).norm()).max(y.norm()).max(1e-300);
        worst = worst.max((d2y + big_q * y).norm() / scale);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lsp::integrate_reduced;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn enneper_coefficients() {
        let d = WeierstrassData::parse("1", "z").unwrap();
        let s = ode_coefficients(&d).unwrap();
        assert_eq!(s.p, Expr::real(0.0));
        assert_eq!(s.q, Expr::real(-1.0));
        assert_eq!(standard_potential(&d).unwrap(), Expr::real(-1.0));
    }

    #[test]
    fn numeric_data_is_not_symbolic() {
        let d = WeierstrassData {
            eta: HoloFn::numeric("one", |_| Ok([c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])),
            psi: HoloFn::numeric("id", |z| Ok([z, c(1.0, 0.0), c(0.0, 0.0)])),
            z0: c(0.0, 0.0),
            lambda: 1.0,
            params: Params::new(),
        };
        assert!(matches!(ode_coefficients(&d), Err(Error::NotSymbolic(_))));
        let (p, q) = ode_coefficients_at(&d, c(0.3, 0.1)).unwrap();
        assert_eq!((p, q), (c(0.0, 0.0), c(-1.0, 0.0)));
    }

    #[test]
    fn pointwise_matches_symbolic() {
        let d = WeierstrassData::parse("exp(z/3)*(1+z^2)", "sin(z) + z^2")
            .unwrap()
            .with_lambda(0.7);
        let s = ode_coefficients(&d).unwrap();
        let big_q = standard_potential(&d).unwrap();
        for z in [c(0.2, 0.1), c(-0.5, 0.4), c(0.9, -0.3)] {
            let (p, q) = ode_coefficients_at(&d, z).unwrap();
            let (sp, sq) = s.at(z).unwrap();
            assert!((p - sp).norm() < 1e-12 && (q - sq).norm() < 1e-12);
            let qz = standard_potential_at(&d, z).unwrap();
            assert!((big_q.eval(z, &Params::new()).unwrap() - qz).norm() < 1e-11);
        }
    }

    #[test]
    fn trivial_inverse() {
        let spec = OdeSpec::parse("0", "-0.5", 0.5).unwrap();
        let d = weierstrass_from_ode(&spec, c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)).unwrap();
        assert_eq!(d.eta.expr().unwrap(), &Expr::real(1.0));
        assert_eq!(d.psi.expr().unwrap().to_string(), "z");
    }

    #[test]
    fn error_function_inverse() {
        let spec = OdeSpec::parse("-2*z", "-2", 1.0).unwrap();
        let d = weierstrass_from_ode(&spec, c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)).unwrap();
        assert_eq!(d.eta.expr().unwrap().to_string(), "exp(0.5*z^2)");
        let k = std::f64::consts::PI.sqrt();
        for z in [c(0.3, 0.2), c(-0.7, 0.5)] {
            let want = k * erf_c(z, 1e-15).unwrap();
            assert!((d.psi_at(z).unwrap() - want).norm() < 1e-13);
        }
        let back = ode_coefficients(&d).unwrap();
        assert_eq!(back.p.to_string(), "-2*z");
        assert!((back.q.as_const().unwrap() - c(-2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn linear_exponent_inverse_round_trips() {
        let spec = OdeSpec::parse("0.6", "-1.5", 0.8).unwrap();
        let z0 = c(0.2, -0.1);
        let d = weierstrass_from_ode(&spec, c(0.7, 0.2), c(0.3, 0.0), z0).unwrap();
        assert!(d.eta.expr().is_some() && d.psi.expr().is_some());
        assert!((d.psi_at(z0).unwrap() + c(0.3, 0.0)).norm() < 1e-15);
        for k in 0..10 {
            let z = c(-0.8 + 0.17 * k as f64, 0.5 - 0.09 * k as f64);
            let (p, q) = ode_coefficients_at(&d, z).unwrap();
            assert!((p - c(0.6, 0.0)).norm() < 1e-12 && (q - c(-1.5, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn numeric_fallback_round_trips() {
        let spec = OdeSpec::parse("sin(z)", "z/(2+z)", 1.3).unwrap();
        let z0 = c(0.1, 0.0);
        let d = weierstrass_from_ode(&spec, c(1.2, -0.4), c(0.5, 0.5), z0).unwrap();
        assert!(d.eta.expr().is_none());
        assert!((d.psi_at(z0).unwrap() + c(0.5, 0.5)).norm() < 1e-15);
        for k in 0..10 {
            let z = c(-0.6 + 0.13 * k as f64, -0.4 + 0.1 * k as f64);
            let (p, q) = ode_coefficients_at(&d, z).unwrap();
            let (sp, sq) = spec.at(z).unwrap();
            assert!((p - sp).norm() < 1e-10 && (q - sq).norm() < 1e-10, "at {z}");
        }
        // ψ′ from the jet agrees with a difference quotient of ψ
        let z = c(0.4, 0.3);
        let h = 1e-4;
        let fd = (d.psi_at(z + h).unwrap() - d.psi_at(z - h).unwrap()) / (2.0 * h);
        let jet = d.psi.jet(z, &d.params).unwrap();
        assert!((fd - jet[1]).norm() < 1e-7 * jet[1].norm().max(1.0));
    }

    #[test]
    fn unevaluable_coefficients_are_rejected() {
        let spec = OdeSpec::parse("1/z", "1", 1.0).unwrap();
        let r = weierstrass_from_ode(&spec, c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        assert!(matches!(r, Err(Error::NonIntegrableForm(_))));
        let spec = OdeSpec::parse("a*z", "1", 1.0).unwrap();
        let r = weierstrass_from_ode(&spec, c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        assert!(matches!(r, Err(Error::NonIntegrableForm(_))));
    }

    #[test]
    fn integrated_columns_satisfy_the_ode() {
        let d = WeierstrassData::parse("exp(z/2)", "z^2 + z")
            .unwrap()
            .with_lambda(0.8);
        let phi =
            integrate_reduced(&d, &PathSpec::straight(c(0.0, 0.0), c(0.6, 0.4)), 1e-12).unwrap();
        assert!(elimination_residual(&d, &phi, BRIDGE_STEP).unwrap() < 1e-6);
        assert!(ode_residual(&d, &phi, BRIDGE_STEP).unwrap() < 1e-6);
        assert!(standard_form_residual(&d, &phi, BRIDGE_STEP).unwrap() < 1e-5);
    }
}
