//! Immersion formulas and surface sampling.
//!
//! * Sym-type formula into H³(λ): `F^σ = Φ†Φ/λ`;
//! * origin-shifted variant `(Φ†Φ − I)/λ`, whose λ→0 limit is a minimal surface;
//! * direct Enneper–Weierstrass integration
//!   `F = Re ∫ (½(1 − ψ²), (i/2)(1 + ψ²), ψ) η² dz`.
//!
//! The limit of the shifted formula and the Enneper–Weierstrass vector differ
//! by the fixed similarity `X = (−2F₁, −2F₂, 2F₃)`; Enneper–Weierstrass
//! coordinates are the canonical E³ output.

mod frame;
mod patch;

use num_complex::Complex64 as C64;

use crate::data::WeierstrassData;
use crate::error::{Error, Result};
use crate::lsp::{PathSpec, Wavefunction};
use crate::mcore::{lorentz_from_hermitian, LorentzVec, Mat2C};
use crate::quadrature::integrate_segment;

pub use frame::{frame_and_curvature, patch_curvature, FrameSample, Geometry};
pub use patch::{
    sample_surface, sample_surface_with, Domain, SampleOptions, SampleTarget, SurfacePatch,
};

/// Unimodularity required of a wavefunction before applying an immersion formula.
pub const DET_GATE: f64 = 1e-6;
const QUADRATURE_TOL: f64 = 1e-13;

fn gram(phi: &Wavefunction) -> Mat2C {
    phi.value.adjoint() * phi.value
}

fn hermitian_tol(m: &Mat2C) -> f64 {
    1e-12 * m.max_norm().max(1.0)
}

/// Point of H³(λ): the Lorentz vector of `Φ†Φ/λ`.
pub fn sym_immersion(phi: &Wavefunction, lambda: f64) -> Result<LorentzVec> {
    if lambda == 0.0 {
        return Err(Error::LambdaZero);
    }
    let drift = phi.det_drift();
    if !(drift < DET_GATE) {
        return Err(Error::NotUnimodular(drift));
    }
    let m = gram(phi) * (1.0 / lambda);
    lorentz_from_hermitian(&m, hermitian_tol(&m))
}

/// Lorentz vector of `(Φ†Φ − I)/λ`.
pub fn shifted_immersion(phi: &Wavefunction, lambda: f64) -> Result<LorentzVec> {
    if lambda == 0.0 {
        return Err(Error::LambdaZero);
    }
    let m = (gram(phi) - Mat2C::identity()) * (1.0 / lambda);
    lorentz_from_hermitian(&m, hermitian_tol(&m))
}

/// Integrand `(½(1 − ψ²), (i/2)(1 + ψ²), ψ)η²`.
pub fn weierstrass_form(data: &WeierstrassData, z: C64) -> Result<[C64; 3]> {
    let eta = data.eta_at(z)?;
    let psi = data.psi_at(z)?;
    let e2 = eta * eta;
    let p2 = psi * psi;
    Ok([
        0.5 * (1.0 - p2) * e2,
        C64::new(0.0, 0.5) * (1.0 + p2) * e2,
        psi * e2,
    ])
}

/// Complex integral `∫_path (½(1 − ψ²), (i/2)(1 + ψ²), ψ)η² dz`.
pub fn weierstrass_integral(data: &WeierstrassData, path: &PathSpec) -> Result<[C64; 3]> {
    path.validate()?;
    let f = |z: C64| weierstrass_form(data, z);
    let mut acc = [C64::new(0.0, 0.0); 3];
    for (a, b) in path.segments() {
        let v = integrate_segment(&f, a, b, QUADRATURE_TOL)?;
        for k in 0..3 {
            acc[k] += v[k];
        }
    }
    Ok(acc)
}

/// Minimal surface point from direct Enneper–Weierstrass integration.
pub fn enneper_weierstrass(data: &WeierstrassData, path: &PathSpec) -> Result<[f64; 3]> {
    Ok(weierstrass_integral(data, path)?.map(|c| c.re))
}

/// Real periods of the Enneper–Weierstrass form around a closed loop; a
/// surface closes up along the loop exactly when they vanish.
pub fn loop_period(data: &WeierstrassData, loop_path: &PathSpec) -> Result<[f64; 3]> {
    if (loop_path.start() - loop_path.end()).norm() > 1e-14 {
        return Err(Error::InvalidArgument("loop must end at its start".into()));
    }
    enneper_weierstrass(data, loop_path)
}

/// Lorentz vector `(0, −2F₁, −2F₂, 2F₃)` of an Enneper–Weierstrass point in
/// the coordinates of the shifted formula's limit.
pub fn enneper_to_limit(f: [f64; 3]) -> LorentzVec {
    LorentzVec::new(0.0, -2.0 * f[0], -2.0 * f[1], 2.0 * f[2])
}

/// Inverse of [`enneper_to_limit`] on the spatial part.
pub fn limit_to_enneper(x: &LorentzVec) -> [f64; 3] {
    [-0.5 * x.0[1], -0.5 * x.0[2], 0.5 * x.0[3]]
}

/// The λ→0 limit of the shifted formula, `Ψ₁ + Ψ₁†` with
/// `Ψ₁ = [[C, −A], [B, −C]]`, `A = ∫η²`, `B = ∫η²ψ²`, `C = ∫η²ψ`.
pub fn limit_value(data: &WeierstrassData, path: &PathSpec) -> Result<LorentzVec> {
    path.validate()?;
    let f = |z: C64| -> Result<[C64; 3]> {
        let eta = data.eta_at(z)?;
        let psi = data.psi_at(z)?;
        let e2 = eta * eta;
        Ok([e2, e2 * psi * psi, e2 * psi])
    };
    let mut acc = [C64::new(0.0, 0.0); 3];
    for (a, b) in path.segments() {
        let v = integrate_segment(&f, a, b, QUADRATURE_TOL)?;
        for k in 0..3 {
            acc[k] += v[k];
        }
    }
    let [a, b, c] = acc;
    let first = Mat2C::new(c, -a, b, -c);
    let m = first + first.adjoint();
    lorentz_from_hermitian(&m, hermitian_tol(&m))
}
