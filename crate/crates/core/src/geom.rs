//! Gauss–Weingarten / Gauss–Mainardi–Codazzi layer.
//!
//! A conformal surface in H³(λ) is described by the conformal factor `u`
//! (metric `e^u|dz|²`), the Hopf differential coefficient `Q` and the mean
//! curvature `H`. They are compatible when
//!
//! ```text
//! u_{zz̄} + ½(H² − λ²)e^u − 2|Q|²e^{−u} = 0,     Q_{z̄} = ½H_z e^u,
//! ```
//!
//! which is equivalent to the zero-curvature condition `U_{z̄} − (V†)_z + [U, V†] = 0`
//! for the Lax matrices built by [`build_uv`]. For `H = λ` every pair of
//! holomorphic functions (η, ψ) gives a solution through
//! `e^{u/2} = |η|²(1 + |ψ|²)`, `Q = −η²ψ′` ([`weierstrass_solution`]).

use num_complex::Complex64 as C64;

use crate::data::{domain_err, WeierstrassData};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::expr::Params;
use crate::fd;
use crate::mcore::Mat2C;

/// Point values of the surface fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldValues {
    pub u: f64,
    pub q: C64,
    pub h: f64,
}

/// A source of `(u, Q, H)` over the plane together with the ambient λ.
pub trait SurfaceFields: Sync {
    fn lambda(&self) -> f64;

    fn at(&self, z: C64) -> Result<FieldValues>;

    /// Analytic `∂u/∂z` when the source knows it.
    fn u_z(&self, _z: C64) -> Result<Option<C64>> {
        Ok(None)
    }
}

/// `(u, Q)` of the general solution of the reduced GMC system.
pub fn weierstrass_solution(data: &WeierstrassData, z: C64) -> Result<(f64, C64)> {
    let s = data.sample(z)?;
    let e_half = s.eta.norm_sqr() * (1.0 + s.psi.norm_sqr());
    if !(e_half > 0.0 && e_half.is_finite()) {
        return Err(Error::DomainError {
            z,
            reason: "conformal factor degenerates".into(),
        });
    }
    Ok((2.0 * e_half.ln(), -s.eta * s.eta * s.dpsi))
}

/// Fields of the `H = λ` surface generated by Weierstrass data, with analytic `u_z`.
#[derive(Debug, Clone, Copy)]
pub struct WeierstrassFields<'a>(pub &'a WeierstrassData);

impl SurfaceFields for WeierstrassFields<'_> {
    fn lambda(&self) -> f64 {
        self.0.lambda
    }

    fn at(&self, z: C64) -> Result<FieldValues> {
        let (u, q) = weierstrass_solution(self.0, z)?;
        Ok(FieldValues {
            u,
            q,
            h: self.0.lambda,
        })
    }

    fn u_z(&self, z: C64) -> Result<Option<C64>> {
        let s = self.0.sample(z)?;
        Ok(Some(analytic_u_z(s.eta, s.deta, s.psi, s.dpsi)))
    }
}

/// `u_z = 2η′/η + 2ψ′ψ̄/(1 + ψψ̄)` for `e^{u/2} = ηη̄(1 + ψψ̄)`.
pub fn analytic_u_z(eta: C64, deta: C64, psi: C64, dpsi: C64) -> C64 {
    2.0 * deta / eta + 2.0 * dpsi * psi.conj() / (1.0 + psi.norm_sqr())
}

/// Liouville case `Q ≡ 1`, `e^u = |ψ′|^{−2}(1 + |ψ|²)²` (with `H = λ`).
#[derive(Debug, Clone)]
pub struct LiouvilleFields {
    pub psi: Expr,
    pub dpsi: Expr,
    pub lambda: f64,
    pub params: Params,
}

impl LiouvilleFields {
    pub fn new(psi: Expr, lambda: f64) -> Self {
        let dpsi = psi.derivative();
        Self {
            psi,
            dpsi,
            lambda,
            params: Params::new(),
        }
    }
}

impl SurfaceFields for LiouvilleFields {
    fn lambda(&self) -> f64 {
        self.lambda
    }

    fn at(&self, z: C64) -> Result<FieldValues> {
        let psi = self
            .psi
            .eval(z, &self.params)
            .map_err(|e| domain_err(z, e))?;
        let dpsi = self
            .dpsi
            .eval(z, &self.params)
            .map_err(|e| domain_err(z, e))?;
        let e_u = (1.0 + psi.norm_sqr()).powi(2) / dpsi.norm_sqr();
        if !(e_u > 0.0 && e_u.is_finite()) {
            return Err(Error::DomainError {
                z,
                reason: "psi' vanishes".into(),
            });
        }
        Ok(FieldValues {
            u: e_u.ln(),
            q: C64::new(1.0, 0.0),
            h: self.lambda,
        })
    }
}

/// Deliberate violations of compatibility, for negative tests and reports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Perturbation {
    /// `u → u + s`.
    ShiftU(f64),
    /// `u → u + s·Re(z²)·Im(z)`.
    CubicU(f64),
    /// `Q → k·Q`.
    ScaleQ(C64),
    /// `Q → Q + c·z̄` (no longer holomorphic).
    ConjugateQ(C64),
    /// `H → H + s` with `u, Q` unchanged.
    ShiftH(f64),
}

/// A field source with a [`Perturbation`] applied on top.
pub struct Perturbed<'a, S: SurfaceFields + ?Sized> {
    pub base: &'a S,
    pub kind: Perturbation,
}

impl<'a, S: SurfaceFields + ?Sized> Perturbed<'a, S> {
    pub fn new(base: &'a S, kind: Perturbation) -> Self {
        Self { base, kind }
    }
}

impl<S: SurfaceFields + ?Sized> SurfaceFields for Perturbed<'_, S> {
    fn lambda(&self) -> f64 {
        self.base.lambda()
    }

    fn at(&self, z: C64) -> Result<FieldValues> {
        let mut f = self.base.at(z)?;
        match self.kind {
            Perturbation::ShiftU(s) => f.u += s,
            Perturbation::CubicU(s) => f.u += s * (z * z).re * z.im,
            Perturbation::ScaleQ(k) => f.q *= k,
            Perturbation::ConjugateQ(c) => f.q += c * z.conj(),
            Perturbation::ShiftH(s) => f.h += s,
        }
        Ok(f)
    }

    fn u_z(&self, z: C64) -> Result<Option<C64>> {
        let base = self.base.u_z(z)?;
        Ok(match self.kind {
            Perturbation::CubicU(s) => base.map(|uz| {
                // f = x²y − y³: ∂f = ½(f_x − i f_y)
                let (x, y) = (z.re, z.im);
                uz + s * 0.5 * C64::new(2.0 * x * y, -(x * x - 3.0 * y * y))
            }),
            _ => base,
        })
    }
}

const INNER_STEP: f64 = 1e-3;

fn u_z_of<S: SurfaceFields + ?Sized>(fields: &S, z: C64) -> Result<C64> {
    if let Some(uz) = fields.u_z(z)? {
        return Ok(uz);
    }
    let u = |w: C64| fields.at(w).map(|f| C64::new(f.u, 0.0));
    fd::d_z(&u, z, INNER_STEP)
}

/// Residuals `(r1, r2)` of the GMC equations at `z`, derivatives by finite differences.
pub fn gmc_residual<S: SurfaceFields + ?Sized>(fields: &S, z: C64, h: f64) -> Result<(C64, C64)> {
    let lambda = fields.lambda();
    let here = fields.at(z)?;
    let u = |w: C64| fields.at(w).map(|f| C64::new(f.u, 0.0));
    let q = |w: C64| fields.at(w).map(|f| f.q);
    let hm = |w: C64| fields.at(w).map(|f| C64::new(f.h, 0.0));
    let u_zzbar = fd::d_zzbar(&u, z, h)?;
    let e_u = here.u.exp();
    let r1 =
        u_zzbar + 0.5 * (here.h * here.h - lambda * lambda) * e_u - 2.0 * here.q.norm_sqr() / e_u;
    let q_zbar = fd::d_zbar(&q, z, h)?;
    let h_z = fd::d_z(&hm, z, h)?;
    let r2 = q_zbar - 0.5 * h_z * e_u;
    Ok((r1, r2))
}

/// Magnitudes of the terms entering `r1`, used to judge residuals relative to the data.
pub fn gmc_scale<S: SurfaceFields + ?Sized>(fields: &S, z: C64) -> Result<f64> {
    let f = fields.at(z)?;
    let lambda = fields.lambda();
    let e_u = f.u.exp();
    Ok(0.5 * (f.h * f.h + lambda * lambda) * e_u + 2.0 * f.q.norm_sqr() / e_u)
}

/// Lax matrices `U`, `V` with `Φ_z = UΦ`, `Φ_{z̄} = V†Φ`.
pub fn build_uv(fields: &FieldValues, lambda: f64, u_z: C64) -> (Mat2C, Mat2C) {
    let e_half = (0.5 * fields.u).exp();
    let a = 0.25 * u_z;
    let qe = fields.q / e_half;
    let u = Mat2C::new(
        a,
        -qe,
        C64::new(0.5 * e_half * (lambda + fields.h), 0.0),
        -a,
    );
    let v = Mat2C::new(-a, qe, C64::new(0.5 * e_half * (lambda - fields.h), 0.0), a);
    (u, v)
}

/// `(U, V†)` at `z`.
pub fn lax_pair_at<S: SurfaceFields + ?Sized>(fields: &S, z: C64) -> Result<(Mat2C, Mat2C)> {
    let f = fields.at(z)?;
    let uz = u_z_of(fields, z)?;
    let (u, v) = build_uv(&f, fields.lambda(), uz);
    Ok((u, v.adjoint()))
}

/// `U_{z̄} − (V†)_z + [U, V†]` at `z`.
pub fn zero_curvature_residual<S: SurfaceFields + ?Sized>(
    fields: &S,
    z: C64,
    h: f64,
) -> Result<Mat2C> {
    let (u, w) = lax_pair_at(fields, z)?;
    let u_of = |p: C64| lax_pair_at(fields, p).map(|x| x.0);
    let w_of = |p: C64| lax_pair_at(fields, p).map(|x| x.1);
    let u_zbar = fd::d_zbar(&u_of, z, h)?;
    let w_z = fd::d_z(&w_of, z, h)?;
    Ok(u_zbar - w_z + u.commutator(&w))
}

/// GMC residual relative to the size of the terms involved (floored at 1).
pub fn gmc_relative_residual<S: SurfaceFields + ?Sized>(fields: &S, z: C64, h: f64) -> Result<f64> {
    let (r1, r2) = gmc_residual(fields, z, h)?;
    Ok(r1.norm().max(r2.norm()) / gmc_scale(fields, z)?.max(1.0))
}

/// Zero-curvature residual relative to `|U|·|V†|` (floored at 1).
pub fn zero_curvature_relative_residual<S: SurfaceFields + ?Sized>(
    fields: &S,
    z: C64,
    h: f64,
) -> Result<f64> {
    let r = zero_curvature_residual(fields, z, h)?;
    let (u, w) = lax_pair_at(fields, z)?;
    Ok(r.max_norm() / (u.max_norm() * w.max_norm()).max(1.0))
}

/// Zero-curvature residual of the `H = λ` surface generated by `data`.
pub fn zero_curvature_residual_data(data: &WeierstrassData, z: C64, h: f64) -> Result<Mat2C> {
    zero_curvature_residual(&WeierstrassFields(data), z, h)
}
