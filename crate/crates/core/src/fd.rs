//! Central finite differences in the complex plane with one level of
//! Richardson extrapolation.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub const DEFAULT_STEP: f64 = 1e-4;

/// Values that can be differenced: complex scalars and 2×2 matrices.
pub trait FdValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Mul<C64, Output = Self>
{
}

impl<T> FdValue for T where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T> + Mul<C64, Output = T>
{
}

fn eval_stencil<T>(f: &impl Fn(C64) -> Result<T>, center: C64, z: C64) -> Result<T> {
    f(z).map_err(|e| match e {
        Error::DomainError { .. } | Error::StencilOutOfDomain(_) => {
            Error::StencilOutOfDomain(center)
        }
        other => other,
    })
}

fn central<T: FdValue>(f: &impl Fn(C64) -> Result<T>, z: C64, dir: C64, h: f64) -> Result<T> {
    let fp = eval_stencil(f, z, z + dir * h)?;
    let fm = eval_stencil(f, z, z - dir * h)?;
    Ok((fp - fm) * (0.5 / h))
}

fn richardson_first<T: FdValue>(
    f: &impl Fn(C64) -> Result<T>,
    z: C64,
    dir: C64,
    h: f64,
) -> Result<T> {
    let coarse = central(f, z, dir, h)?;
    let fine = central(f, z, dir, 0.5 * h)?;
    Ok(fine * (4.0 / 3.0) - coarse * (1.0 / 3.0))
}

/// `(∂f/∂x, ∂f/∂y)`.
pub fn partials<T: FdValue>(f: &impl Fn(C64) -> Result<T>, z: C64, h: f64) -> Result<(T, T)> {
    let fx = richardson_first(f, z, C64::new(1.0, 0.0), h)?;
    let fy = richardson_first(f, z, C64::new(0.0, 1.0), h)?;
    Ok((fx, fy))
}

/// Wirtinger derivatives `(∂f, ∂̄f)` with `∂ = ½(∂x − i∂y)`, `∂̄ = ½(∂x + i∂y)`.
pub fn wirtinger<T: FdValue>(f: &impl Fn(C64) -> Result<T>, z: C64, h: f64) -> Result<(T, T)> {
    let (fx, fy) = partials(f, z, h)?;
    let i = C64::new(0.0, 1.0);
    Ok(((fx - fy * i) * 0.5, (fx + fy * i) * 0.5))
}

/// `∂f` only.
pub fn d_z<T: FdValue>(f: &impl Fn(C64) -> Result<T>, z: C64, h: f64) -> Result<T> {
    wirtinger(f, z, h).map(|w| w.0)
}

/// `∂̄f` only.
pub fn d_zbar<T: FdValue>(f: &impl Fn(C64) -> Result<T>, z: C64, h: f64) -> Result<T> {
    wirtinger(f, z, h).map(|w| w.1)
}

fn laplacian_5pt<T: FdValue>(f: &impl Fn(C64) -> Result<T>, z: C64, h: f64) -> Result<T> {
    let c = eval_stencil(f, z, z)?;
    let mut sum = c * -4.0;
    for d in [
        C64::new(h, 0.0),
        C64::new(-h, 0.0),
        C64::new(0.0, h),
        C64::new(0.0, -h),
    ] {
        sum = sum + eval_stencil(f, z, z + d)?;
    }
    Ok(sum * (1.0 / (h * h)))
}

/// `∂∂̄f = ¼Δf`.
pub fn d_zzbar<T: FdValue>(f: &impl Fn(C64) -> Result<T>, z: C64, h: f64) -> Result<T> {
    let coarse = laplacian_5pt(f, z, h)?;
    let fine = laplacian_5pt(f, z, 0.5 * h)?;
    Ok((fine * (4.0 / 3.0) - coarse * (1.0 / 3.0)) * 0.25)
}

/// Derivative of a holomorphic function along the real axis (equal to `f′`).
pub fn holomorphic_derivative<T: FdValue>(
    f: &impl Fn(C64) -> Result<T>,
    z: C64,
    h: f64,
) -> Result<T> {
    richardson_first(f, z, C64::new(1.0, 0.0), h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wirtinger_of_simple_functions() {
        let z = C64::new(0.3, -0.7);
        // f = z² z̄
        let f = |w: C64| -> Result<C64> { Ok(w * w * w.conj()) };
        let (dz, dzb) = wirtinger(&f, z, 1e-3).unwrap();
        assert!((dz - 2.0 * z * z.conj()).norm() < 1e-10);
        assert!((dzb - z * z).norm() < 1e-10);
        // ∂∂̄ |z|⁴ = 4|z|²
        let g = |w: C64| -> Result<C64> { Ok(C64::new(w.norm_sqr().powi(2), 0.0)) };
        let l = d_zzbar(&g, z, 1e-3).unwrap();
        assert!((l.re - 4.0 * z.norm_sqr()).abs() < 1e-9);
    }

    #[test]
    fn failing_stencil_is_reported() {
        let f = |w: C64| -> Result<C64> {
            if w.re > 1.0 {
                Err(Error::DomainError {
                    z: w,
                    reason: "outside".into(),
                })
            } else {
                Ok(w)
            }
        };
        assert!(matches!(
            d_z(&f, C64::new(1.0, 0.0), 1e-3),
            Err(Error::StencilOutOfDomain(_))
        ));
    }
}
