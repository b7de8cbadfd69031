//! Complex 2×2 matrices and the Hermitian-matrix model of Lorentz space R^{3,1}.
//!
//! A Lorentz vector `X = (X0, X1, X2, X3)` is identified with the Hermitian
//! matrix `X0·I + X1·σ1 + X2·σ2 + X3·σ3`; the Minkowski product is
//! `(X|Y) = X1Y1 + X2Y2 + X3Y3 − X0Y0`, so that `(X|X) = −det X^σ`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const DEFAULT_TOL: f64 = 1e-10;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Dense 2×2 complex matrix, row-major.
#[derive(Clone, Copy, PartialEq, Default)]
pub struct Mat2C {
    pub a11: C64,
    pub a12: C64,
    pub a21: C64,
    pub a22: C64,
}

impl Mat2C {
    pub const fn new(a11: C64, a12: C64, a21: C64, a22: C64) -> Self {
        Self { a11, a12, a21, a22 }
    }

    pub fn from_real(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Self::new(a11.into(), a12.into(), a21.into(), a22.into())
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub fn diag(a: C64, d: C64) -> Self {
        Self::new(a, ZERO, ZERO, d)
    }

    pub const fn sigma1() -> Self {
        Self::new(ZERO, ONE, ONE, ZERO)
    }

    pub fn sigma2() -> Self {
        Self::new(ZERO, -I, I, ZERO)
    }

    pub fn sigma3() -> Self {
        Self::new(ONE, ZERO, ZERO, -ONE)
    }

    /// Outer product `col · rowᵀ`.
    pub fn outer(col: [C64; 2], row: [C64; 2]) -> Self {
        Self::new(
            col[0] * row[0],
            col[0] * row[1],
            col[1] * row[0],
            col[1] * row[1],
        )
    }

    pub fn det(&self) -> C64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> C64 {
        self.a11 + self.a22
    }

    /// Hermitian conjugate.
    pub fn adjoint(&self) -> Self {
        Self::new(
            self.a11.conj(),
            self.a21.conj(),
            self.a12.conj(),
            self.a22.conj(),
        )
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.a11, self.a21, self.a12, self.a22)
    }

    pub fn conj(&self) -> Self {
        Self::new(
            self.a11.conj(),
            self.a12.conj(),
            self.a21.conj(),
            self.a22.conj(),
        )
    }

    /// Inverse via the adjugate. Returns `None` for a singular matrix.
    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d.norm() == 0.0 || !d.is_finite() {
            return None;
        }
        let r = d.inv();
        Some(Self::new(
            self.a22 * r,
            -self.a12 * r,
            -self.a21 * r,
            self.a11 * r,
        ))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    pub fn column(&self, j: usize) -> [C64; 2] {
        match j {
            0 => [self.a11, self.a21],
            _ => [self.a12, self.a22],
        }
    }

    pub fn from_columns(c0: [C64; 2], c1: [C64; 2]) -> Self {
        Self::new(c0[0], c1[0], c0[1], c1[1])
    }

    pub fn entries(&self) -> [C64; 4] {
        [self.a11, self.a12, self.a21, self.a22]
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self::new(f(self.a11), f(self.a12), f(self.a21), f(self.a22))
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> f64 {
        self.entries().iter().fold(0.0, |m, e| m.max(e.norm()))
    }

    pub fn frobenius(&self) -> f64 {
        self.entries()
            .iter()
            .map(|e| e.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|e| e.is_finite())
    }

    /// Frobenius norm of the anti-Hermitian part `(M − M†)/2`.
    pub fn anti_hermitian_norm(&self) -> f64 {
        ((*self - self.adjoint()) * C64::new(0.5, 0.0)).frobenius()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.anti_hermitian_norm() <= tol
    }

    /// `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        (*self + self.adjoint()) * C64::new(0.5, 0.0)
    }
}

impl fmt::Debug for Mat2C {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            self.a11, self.a12, self.a21, self.a22
        )
    }
}

impl Add for Mat2C {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(
            self.a11 + o.a11,
            self.a12 + o.a12,
            self.a21 + o.a21,
            self.a22 + o.a22,
        )
    }
}

impl AddAssign for Mat2C {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sub for Mat2C {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(
            self.a11 - o.a11,
            self.a12 - o.a12,
            self.a21 - o.a21,
            self.a22 - o.a22,
        )
    }
}

impl Neg for Mat2C {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.a11, -self.a12, -self.a21, -self.a22)
    }
}

impl Mul for Mat2C {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.a11 * o.a11 + self.a12 * o.a21,
            self.a11 * o.a12 + self.a12 * o.a22,
            self.a21 * o.a11 + self.a22 * o.a21,
            self.a21 * o.a12 + self.a22 * o.a22,
        )
    }
}

impl Mul<C64> for Mat2C {
    type Output = Self;
    fn mul(self, s: C64) -> Self {
        self.map(|e| e * s)
    }
}

impl Mul<f64> for Mat2C {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        self.map(|e| e * s)
    }
}

impl Mul<[C64; 2]> for Mat2C {
    type Output = [C64; 2];
    fn mul(self, v: [C64; 2]) -> [C64; 2] {
        [
            self.a11 * v[0] + self.a12 * v[1],
            self.a21 * v[0] + self.a22 * v[1],
        ]
    }
}

/// Point of Lorentz space R^{3,1}; `x[0]` is the timelike component.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct LorentzVec(pub [f64; 4]);

impl LorentzVec {
    pub const fn new(x0: f64, x1: f64, x2: f64, x3: f64) -> Self {
        Self([x0, x1, x2, x3])
    }

    /// Embeds a Euclidean 3-vector as `(0, x1, x2, x3)`.
    pub fn from_spatial(v: [f64; 3]) -> Self {
        Self([0.0, v[0], v[1], v[2]])
    }

    pub fn x0(&self) -> f64 {
        self.0[0]
    }

    pub fn spatial(&self) -> [f64; 3] {
        [self.0[1], self.0[2], self.0[3]]
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.map(|x| x * s))
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self(std::array::from_fn(|k| self.0[k] - o.0[k]))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

/// `X0·I + X1σ1 + X2σ2 + X3σ3`.
pub fn hermitian_from_lorentz(x: &LorentzVec) -> Mat2C {
    let [x0, x1, x2, x3] = x.0;
    Mat2C::new(
        C64::new(x0 + x3, 0.0),
        C64::new(x1, -x2),
        C64::new(x1, x2),
        C64::new(x0 - x3, 0.0),
    )
}

/// Reads the Lorentz components of a Hermitian matrix, after symmetrizing it.
pub fn lorentz_from_hermitian(m: &Mat2C, hermiticity_tol: f64) -> Result<LorentzVec> {
    let skew = m.anti_hermitian_norm();
    if !(skew <= hermiticity_tol) {
        return Err(Error::NotHermitian(skew));
    }
    let h = m.hermitian_part();
    Ok(LorentzVec::new(
        0.5 * (h.a11.re + h.a22.re),
        h.a21.re,
        h.a21.im,
        0.5 * (h.a11.re - h.a22.re),
    ))
}

/// Minkowski product `X1Y1 + X2Y2 + X3Y3 − X0Y0`.
pub fn lorentz_inner(x: &LorentzVec, y: &LorentzVec) -> f64 {
    x.0[1] * y.0[1] + x.0[2] * y.0[2] + x.0[3] * y.0[3] - x.0[0] * y.0[0]
}

/// Complex-bilinear extension of the Minkowski product, used for `F_z`-type vectors.
pub fn lorentz_inner_c(x: &[C64; 4], y: &[C64; 4]) -> C64 {
    x[1] * y[1] + x[2] * y[2] + x[3] * y[3] - x[0] * y[0]
}

/// Action of `SL(2,C)` on Lorentz space: `(ρ(a)X)^σ = a† X^σ a`.
pub fn rho_action(a: &Mat2C, x: &LorentzVec, tol: f64) -> Result<LorentzVec> {
    let dev = (a.det() - 1.0).norm();
    if !(dev < tol) {
        return Err(Error::NotUnimodular(dev));
    }
    let m = a.adjoint() * hermitian_from_lorentz(x) * *a;
    let scale = m.max_norm().max(1.0);
    lorentz_from_hermitian(&m, tol * scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn pauli_images() {
        assert_eq!(
            hermitian_from_lorentz(&LorentzVec::new(1.0, 0.0, 0.0, 0.0)),
            Mat2C::identity()
        );
        assert_eq!(
            hermitian_from_lorentz(&LorentzVec::new(0.0, 1.0, 0.0, 0.0)),
            Mat2C::sigma1()
        );
        assert_eq!(
            hermitian_from_lorentz(&LorentzVec::new(0.0, 0.0, 1.0, 0.0)),
            Mat2C::sigma2()
        );
        assert_eq!(
            hermitian_from_lorentz(&LorentzVec::new(0.0, 0.0, 0.0, 1.0)),
            Mat2C::sigma3()
        );
    }

    #[test]
    fn read_back_components() {
        let x = lorentz_from_hermitian(&Mat2C::identity(), DEFAULT_TOL).unwrap();
        assert_eq!(x, LorentzVec::new(1.0, 0.0, 0.0, 0.0));
        let x = lorentz_from_hermitian(&Mat2C::from_real(2.0, 0.0, 0.0, 0.0), DEFAULT_TOL).unwrap();
        assert_eq!(x, LorentzVec::new(1.0, 0.0, 0.0, 1.0));
        let m = Mat2C::new(c(0.0, 0.0), c(1.0, -1.0), c(1.0, 1.0), c(0.0, 0.0));
        assert_eq!(
            lorentz_from_hermitian(&m, DEFAULT_TOL).unwrap(),
            LorentzVec::new(0.0, 1.0, 1.0, 0.0)
        );
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = Mat2C::new(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0));
        assert!(matches!(
            lorentz_from_hermitian(&m, 1e-10),
            Err(Error::NotHermitian(_))
        ));
        // slightly off input is symmetrized
        let m = Mat2C::new(c(1.0, 1e-13), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0));
        assert_eq!(
            lorentz_from_hermitian(&m, 1e-10).unwrap(),
            LorentzVec::new(1.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn inner_examples() {
        let t = LorentzVec::new(1.0, 0.0, 0.0, 0.0);
        assert_eq!(lorentz_inner(&t, &t), -1.0);
        assert_eq!(-hermitian_from_lorentz(&t).det().re, -1.0);
        let s = LorentzVec::new(0.0, 1.0, 0.0, 0.0);
        assert_eq!(lorentz_inner(&s, &s), 1.0);
        let n = LorentzVec::new(1.0, 1.0, 0.0, 0.0);
        assert_eq!(lorentz_inner(&n, &n), 0.0);
    }

    #[test]
    fn rho_examples() {
        let x = LorentzVec::new(0.3, -1.2, 0.7, 2.0);
        let o = rho_action(&Mat2C::identity(), &x, 1e-10).unwrap();
        assert!(o.0.iter().zip(x.0).all(|(a, b)| (a - b).abs() < 1e-15));

        let th = 0.7_f64;
        let a = Mat2C::diag(C64::from_polar(1.0, th), C64::from_polar(1.0, -th));
        let o = rho_action(&a, &LorentzVec::new(1.0, 0.0, 0.0, 0.0), 1e-10).unwrap();
        assert!((o.0[0] - 1.0).abs() < 1e-15 && o.0[1..].iter().all(|v| v.abs() < 1e-15));

        let s = 1.7;
        let a = Mat2C::diag(s.into(), (1.0 / s).into());
        let o = rho_action(&a, &LorentzVec::new(1.0, 0.0, 0.0, 1.0), 1e-10).unwrap();
        assert!((o.0[0] - s * s).abs() < 1e-14 && (o.0[3] - s * s).abs() < 1e-14);
        assert!(lorentz_inner(&o, &o).abs() < 1e-13);

        let bad = Mat2C::diag(2.0.into(), 2.0.into());
        assert!(matches!(
            rho_action(&bad, &x, 1e-10),
            Err(Error::NotUnimodular(_))
        ));
    }

    #[test]
    fn inverse_and_det() {
        let m = Mat2C::new(c(1.0, 2.0), c(0.5, 0.0), c(-1.0, 1.0), c(3.0, -0.5));
        let p = m * m.inverse().unwrap();
        assert!((p - Mat2C::identity()).max_norm() < 1e-15);
        assert!(Mat2C::from_real(1.0, 2.0, 2.0, 4.0).inverse().is_none());
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn vec4() -> impl Strategy<Value = LorentzVec> {
            prop::array::uniform4(-5.0..5.0f64).prop_map(LorentzVec)
        }

        fn unimodular() -> impl Strategy<Value = Mat2C> {
            prop::array::uniform6(-1.5..1.5f64).prop_filter_map("singular", |v| {
                let a = C64::new(v[0], v[1]);
                let b = C64::new(v[2], v[3]);
                let c = C64::new(v[4], v[5]);
                // pick d so that ad − bc = 1
                if a.norm() < 0.2 {
                    return None;
                }
                let d = (C64::new(1.0, 0.0) + b * c) / a;
                Some(Mat2C::new(a, b, c, d))
            })
        }

        proptest! {
            #[test]
            fn inner_matches_trace_formula(x in vec4(), y in vec4()) {
                let eps = Mat2C::from_real(0.0, 1.0, -1.0, 0.0);
                let t = hermitian_from_lorentz(&x) * eps * hermitian_from_lorentz(&y).transpose() * eps;
                let via_trace = 0.5 * t.trace().re;
                prop_assert!((lorentz_inner(&x, &y) - via_trace).abs() < 1e-12);
                prop_assert!((lorentz_inner(&x, &x) + hermitian_from_lorentz(&x).det().re).abs() < 1e-12);
            }

            #[test]
            fn round_trip(x in vec4()) {
                let back = lorentz_from_hermitian(&hermitian_from_lorentz(&x), DEFAULT_TOL).unwrap();
                for k in 0..4 {
                    prop_assert!((back.0[k] - x.0[k]).abs() <= 1e-15 * x.0[k].abs().max(1.0));
                }
            }

            #[test]
            fn linear_map(x in vec4(), y in vec4(), a in -3.0..3.0f64, b in -3.0..3.0f64) {
                let z = LorentzVec(std::array::from_fn(|k| a * x.0[k] + b * y.0[k]));
                let lhs = hermitian_from_lorentz(&z);
                let rhs = hermitian_from_lorentz(&x) * a + hermitian_from_lorentz(&y) * b;
                prop_assert!((lhs - rhs).max_norm() < 1e-13);
            }

            #[test]
            fn rho_is_isometry(a in unimodular(), x in vec4(), y in vec4()) {
                let ax = rho_action(&a, &x, 1e-10).unwrap();
                let ay = rho_action(&a, &y, 1e-10).unwrap();
                let before = lorentz_inner(&x, &y);
                let after = lorentz_inner(&ax, &ay);
                let scale = 1.0 + ax.0.iter().chain(ay.0.iter()).fold(0.0f64, |m, v| m.max(v.abs())).powi(2);
                prop_assert!((before - after).abs() < 1e-10 * scale);
            }
        }
    }
}
