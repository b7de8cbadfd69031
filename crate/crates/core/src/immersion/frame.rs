//! Moving frame and curvature estimates from a sampled patch.
//!
//! With `F_z = ½(F_x − iF_y)` and `F_{zz̄} = ¼ΔF`, the conformal factor, mean
//! curvature and Hopf coefficient are read off from
//! `(F_z|F_z̄) = ½e^u`, `(F_{zz̄}|N) = ½He^u`, `(F_{zz}|N) = Q`.
//! Derivatives use fourth-order central stencils, so a sample needs two valid
//! neighbours on each side.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::patch::SurfacePatch;
use crate::error::{Error, Result};
use crate::mcore::{lorentz_inner, lorentz_inner_c, LorentzVec};

/// First-derivative weights at offsets −2..=2.
const D1: [f64; 5] = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
/// Second-derivative weights at offsets −2..=2.
const D2: [f64; 5] = [
    -1.0 / 12.0,
    16.0 / 12.0,
    -30.0 / 12.0,
    16.0 / 12.0,
    -1.0 / 12.0,
];
const MARGIN: usize = 2;

/// Ambient geometry of a patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    /// H³(λ) inside Lorentz space; normals orthogonal to the position too.
    Hyperbolic,
    /// E³, with points stored as `(0, x, y, z)`.
    Euclidean,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameSample {
    pub row: usize,
    pub col: usize,
    pub z: C64,
    pub f: LorentzVec,
    pub f_z: [C64; 4],
    pub f_zbar: [C64; 4],
    pub n: LorentzVec,
    pub u: f64,
    pub h_est: f64,
    pub q_est: C64,
    /// `|(F_z|F_z)| / e^u`; zero for a conformal immersion.
    pub conformality: f64,
    /// Largest violation among `(N|N) = 1`, `(F|N) = 0` (hyperbolic only), `(F_z|N) = 0`.
    pub frame_residual: f64,
}

struct Jet {
    f: [f64; 4],
    fx: [f64; 4],
    fy: [f64; 4],
    fxx: [f64; 4],
    fyy: [f64; 4],
    fxy: [f64; 4],
}

fn add_scaled(acc: &mut [f64; 4], v: &LorentzVec, s: f64) {
    for k in 0..4 {
        acc[k] += s * v.0[k];
    }
}

fn jet(patch: &SurfacePatch, row: usize, col: usize) -> Result<Jet> {
    let z = patch.z(row, col);
    if row < MARGIN || col < MARGIN || row + MARGIN >= patch.rows() || col + MARGIN >= patch.cols()
    {
        return Err(Error::StencilOutOfDomain(z));
    }
    let at = |dr: isize, dc: isize| -> Result<LorentzVec> {
        let r = (row as isize + dr) as usize;
        let c = (col as isize + dc) as usize;
        patch.point(r, c).ok_or(Error::StencilOutOfDomain(z))
    };
    let (hx, hy) = (patch.domain.dx(), patch.domain.dy());
    let mut j = Jet {
        f: at(0, 0)?.0,
        fx: [0.0; 4],
        fy: [0.0; 4],
        fxx: [0.0; 4],
        fyy: [0.0; 4],
        fxy: [0.0; 4],
    };
    for (a, off) in (-2isize..=2).enumerate() {
        let px = at(0, off)?;
        let py = at(off, 0)?;
        add_scaled(&mut j.fx, &px, D1[a] / hx);
        add_scaled(&mut j.fxx, &px, D2[a] / (hx * hx));
        add_scaled(&mut j.fy, &py, D1[a] / hy);
        add_scaled(&mut j.fyy, &py, D2[a] / (hy * hy));
        for (b, offy) in (-2isize..=2).enumerate() {
            let w = D1[a] * D1[b];
            if w != 0.0 {
                add_scaled(&mut j.fxy, &at(offy, off)?, w / (hx * hy));
            }
        }
    }
    Ok(j)
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Euclidean vector orthogonal to `a, b, c` in R⁴ (generalized cross product).
fn cross4(a: &[f64; 4], b: &[f64; 4], c: &[f64; 4]) -> [f64; 4] {
    let mut w = [0.0; 4];
    for (i, slot) in w.iter_mut().enumerate() {
        let cols: Vec<usize> = (0..4).filter(|&k| k != i).collect();
        let minor = [
            [a[cols[0]], a[cols[1]], a[cols[2]]],
            [b[cols[0]], b[cols[1]], b[cols[2]]],
            [c[cols[0]], c[cols[1]], c[cols[2]]],
        ];
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        *slot = sign * det3(minor);
    }
    w
}

fn norm4(v: &[f64; 4]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Unit normal before orientation is fixed.
fn raw_normal(patch: &SurfacePatch, row: usize, col: usize, j: &Jet) -> Result<LorentzVec> {
    let degenerate = || Error::DegenerateFrame { row, col };
    let scale = norm4(&j.fx) * norm4(&j.fy);
    match geometry(patch) {
        Geometry::Euclidean => {
            let (a, b) = (&j.fx, &j.fy);
            let n = [
                0.0,
                a[2] * b[3] - a[3] * b[2],
                a[3] * b[1] - a[1] * b[3],
                a[1] * b[2] - a[2] * b[1],
            ];
            let len = norm4(&n);
            if !(len > 1e-12 * scale) {
                return Err(degenerate());
            }
            Ok(LorentzVec(n.map(|x| x / len)))
        }
        Geometry::Hyperbolic => {
            let w = cross4(&j.f, &j.fx, &j.fy);
            // flip the time component so that (N|v) equals the Euclidean w·v
            let n = LorentzVec([-w[0], w[1], w[2], w[3]]);
            let nn = lorentz_inner(&n, &n);
            if !(nn > 1e-24 * (scale * norm4(&j.f)).powi(2)) {
                return Err(degenerate());
            }
            Ok(n.scale(1.0 / nn.sqrt()))
        }
    }
}

pub fn geometry(patch: &SurfacePatch) -> Geometry {
    if patch.target.is_hyperbolic() {
        Geometry::Hyperbolic
    } else {
        Geometry::Euclidean
    }
}

fn f_zzbar(j: &Jet) -> LorentzVec {
    LorentzVec(std::array::from_fn(|k| 0.25 * (j.fxx[k] + j.fyy[k])))
}

/// Orientation sign making `(F_{zz̄}|N) > 0` at the first usable interior point
/// (in row-major order); the normal field is continuous, so one sign serves the patch.
fn orientation(patch: &SurfacePatch) -> Result<f64> {
    for row in MARGIN..patch.rows().saturating_sub(MARGIN) {
        for col in MARGIN..patch.cols().saturating_sub(MARGIN) {
            let Ok(j) = jet(patch, row, col) else {
                continue;
            };
            let Ok(n) = raw_normal(patch, row, col, &j) else {
                continue;
            };
            let s = lorentz_inner(&f_zzbar(&j), &n);
            if s != 0.0 {
                return Ok(s.signum());
            }
        }
    }
    Err(Error::DegenerateFrame { row: 0, col: 0 })
}

fn sample_with_sign(
    patch: &SurfacePatch,
    row: usize,
    col: usize,
    sign: f64,
) -> Result<FrameSample> {
    let j = jet(patch, row, col)?;
    let n = raw_normal(patch, row, col, &j)?.scale(sign);
    let i = C64::new(0.0, 1.0);
    let fz: [C64; 4] = std::array::from_fn(|k| 0.5 * (j.fx[k] - i * j.fy[k]));
    let fzb: [C64; 4] = std::array::from_fn(|k| 0.5 * (j.fx[k] + i * j.fy[k]));
    let fzz: [C64; 4] = std::array::from_fn(|k| 0.25 * (j.fxx[k] - j.fyy[k] - 2.0 * i * j.fxy[k]));
    let f = LorentzVec(j.f);
    let (fx, fy) = (LorentzVec(j.fx), LorentzVec(j.fy));
    let e_u = 0.5 * (lorentz_inner(&fx, &fx) + lorentz_inner(&fy, &fy));
    if !(e_u > 0.0) {
        return Err(Error::DegenerateFrame { row, col });
    }
    let nc = n.0.map(|x| C64::new(x, 0.0));
    let h_est = 2.0 * lorentz_inner(&f_zzbar(&j), &n) / e_u;
    let q_est = lorentz_inner_c(&fzz, &nc);
    let conformality = lorentz_inner_c(&fz, &fz).norm() / e_u;
    let mut frame_residual = (lorentz_inner(&n, &n) - 1.0)
        .abs()
        .max(lorentz_inner_c(&fz, &nc).norm() / e_u.sqrt());
    if geometry(patch) == Geometry::Hyperbolic {
        let scale = lorentz_inner(&f, &f).abs().sqrt().max(1.0);
        frame_residual = frame_residual.max(lorentz_inner(&f, &n).abs() / scale);
    }
    Ok(FrameSample {
        row,
        col,
        z: patch.z(row, col),
        f,
        f_z: fz,
        f_zbar: fzb,
        n,
        u: e_u.ln(),
        h_est,
        q_est,
        conformality,
        frame_residual,
    })
}

/// Frame and curvature estimates at an interior grid point.
pub fn frame_and_curvature(patch: &SurfacePatch, row: usize, col: usize) -> Result<FrameSample> {
    let sign = orientation(patch)?;
    sample_with_sign(patch, row, col, sign)
}

/// Frame samples at every interior point, row-major; failures are returned in place.
pub fn patch_curvature(patch: &SurfacePatch) -> Vec<Result<FrameSample>> {
    let sign = match orientation(patch) {
        Ok(s) => s,
        Err(e) => return vec![Err(e)],
    };
    let (rows, cols) = (patch.rows(), patch.cols());
    if rows <= 2 * MARGIN || cols <= 2 * MARGIN {
        return Vec::new();
    }
    let cells: Vec<(usize, usize)> = (MARGIN..rows - MARGIN)
        .flat_map(|r| (MARGIN..cols - MARGIN).map(move |c| (r, c)))
        .collect();
    cells
        .into_par_iter()
        .map(|(r, c)| sample_with_sign(patch, r, c, sign))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::{sample_surface_with, Domain, SampleOptions, SampleTarget};
    use super::*;
    use crate::data::WeierstrassData;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn minimal_patch_has_zero_mean_curvature() {
        let d = WeierstrassData::parse("1", "z").unwrap();
        let dom = Domain::square(c(0.2, 0.1), 0.05, 11).unwrap();
        let p = sample_surface_with(&d, &dom, SampleTarget::E3Direct, &SampleOptions::default())
            .unwrap();
        for s in patch_curvature(&p) {
            let s = s.unwrap();
            assert!(s.h_est.abs() < 5e-3, "{}", s.h_est);
            assert!(s.conformality < 1e-5);
            // Enneper metric: e^u = ¼(1 + |z|²)²
            let want = 0.25 * (1.0 + s.z.norm_sqr()).powi(2);
            assert!(
                (s.u.exp() - want).abs() < 1e-6 * want,
                "{} vs {want}",
                s.u.exp()
            );
            // Hopf coefficient: (F_zz|N) = ±½ for ψ = z, η = 1
            assert!((s.q_est.norm() - 0.5).abs() < 1e-5);
        }
    }

    #[test]
    fn cmc_patch_recovers_lambda() {
        let lambda = 0.5;
        let d = WeierstrassData::parse("1", "z")
            .unwrap()
            .with_lambda(lambda);
        let dom = Domain::square(c(0.3, -0.2), 0.05, 11).unwrap();
        let p = sample_surface_with(&d, &dom, SampleTarget::H3, &SampleOptions::with_tol(1e-12))
            .unwrap();
        for s in patch_curvature(&p) {
            let s = s.unwrap();
            assert!((s.h_est - lambda).abs() < 5e-3, "{}", s.h_est);
            assert!(s.conformality < 1e-5);
            assert!(s.frame_residual < 1e-6, "{}", s.frame_residual);
        }
    }

    #[test]
    fn boundary_points_are_rejected() {
        let d = WeierstrassData::parse("1", "z").unwrap();
        let dom = Domain::square(c(0.0, 0.0), 0.1, 6).unwrap();
        let p = sample_surface_with(&d, &dom, SampleTarget::E3Direct, &SampleOptions::default())
            .unwrap();
        assert!(matches!(
            frame_and_curvature(&p, 1, 3),
            Err(Error::StencilOutOfDomain(_))
        ));
        assert!(frame_and_curvature(&p, 2, 3).is_ok());
    }
}
