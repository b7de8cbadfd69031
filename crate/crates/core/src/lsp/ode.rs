//! Adaptive Dormand–Prince 5(4) stepping for `Y′ = A(t)Y` on `t ∈ [0, 1]`.

use crate::error::{Error, Result};
use crate::mcore::Mat2C;

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// fifth-order weights are the last row of A (FSAL)
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Step-control settings for one integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub tol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub max_steps: usize,
    pub renormalize: bool,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            h_init: 0.05,
            h_min: 1e-12,
            max_steps: 200_000,
            renormalize: false,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
}

fn unimodular(y: Mat2C) -> Mat2C {
    let d = y.det().sqrt();
    if d.norm() > 0.0 {
        y * (1.0 / d)
    } else {
        y
    }
}

/// Integrates `Y′ = A(t)Y` from `Y(0) = y0` to `t = 1`.
///
/// A failing coefficient evaluation rejects the step and shrinks it; the
/// integration fails with `StepUnderflow` once the step drops below `h_min`.
pub fn integrate_unit(
    coef: &impl Fn(f64) -> Result<Mat2C>,
    y0: Mat2C,
    ctl: &StepControl,
    stats: &mut StepStats,
) -> Result<Mat2C> {
    let mut t = 0.0;
    let mut y = y0;
    let mut h = ctl.h_init.min(1.0);
    let mut k1: Option<Mat2C> = None;
    let mut steps = 0;
    while t < 1.0 {
        if steps >= ctl.max_steps {
            return Err(Error::StepUnderflow { t, h });
        }
        steps += 1;
        h = h.min(1.0 - t);
        if h < ctl.h_min {
            return Err(Error::StepUnderflow { t, h });
        }
        let first = match k1 {
            Some(k) => Ok(k),
            None => coef(t).map(|a| a * y),
        };
        let attempt = first.and_then(|k0| try_step(coef, t, h, y, k0));
        match attempt {
            Ok((y5, err_mat, k7)) => {
                let scale = 1.0 + y.max_norm().max(y5.max_norm());
                let err = err_mat.max_norm() / (ctl.tol * scale);
                if err <= 1.0 && y5.is_finite() {
                    t = if 1.0 - (t + h) < 1e-15 { 1.0 } else { t + h };
                    y = if ctl.renormalize { unimodular(y5) } else { y5 };
                    k1 = if ctl.renormalize { None } else { Some(k7) };
                    stats.accepted += 1;
                    let factor = if err == 0.0 {
                        5.0
                    } else {
                        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                    };
                    h *= factor;
                } else {
                    stats.rejected += 1;
                    let factor = if err.is_finite() {
                        (0.9 * err.powf(-0.2)).clamp(0.1, 0.9)
                    } else {
                        0.25
                    };
                    h *= factor;
                }
            }
            Err(_) => {
                stats.rejected += 1;
                h *= 0.25;
            }
        }
    }
    Ok(y)
}

/// One Dormand–Prince step; returns `(y5, y5 − y4, k7)`.
fn try_step(
    coef: &impl Fn(f64) -> Result<Mat2C>,
    t: f64,
    h: f64,
    y: Mat2C,
    k1: Mat2C,
) -> Result<(Mat2C, Mat2C, Mat2C)> {
    let mut k = [Mat2C::zero(); 7];
    k[0] = k1;
    for s in 1..7 {
        let mut ys = y;
        for j in 0..s {
            if A[s][j] != 0.0 {
                ys += k[j] * (h * A[s][j]);
            }
        }
        let ks = coef(t + C[s] * h)? * ys;
        if !ks.is_finite() {
            return Err(Error::StepUnderflow { t, h });
        }
        k[s] = ks;
    }
    let mut y5 = y;
    let mut diff = Mat2C::zero();
    for s in 0..7 {
        if B5[s] != 0.0 {
            y5 += k[s] * (h * B5[s]);
        }
        diff += k[s] * (h * (B5[s] - B4[s]));
    }
    Ok((y5, diff, k[6]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C64;

    #[test]
    fn constant_generator_gives_exponential() {
        // Y′ = [[0,1],[−1,0]]·θ·Y → rotation by θ
        let th = 2.3;
        let gen = Mat2C::from_real(0.0, th, -th, 0.0);
        let mut st = StepStats::default();
        let ctl = StepControl {
            tol: 1e-12,
            ..Default::default()
        };
        let y = integrate_unit(&|_| Ok(gen), Mat2C::identity(), &ctl, &mut st).unwrap();
        let want = Mat2C::from_real(th.cos(), th.sin(), -th.sin(), th.cos());
        assert!((y - want).max_norm() < 1e-11, "{y:?}");
        assert!(st.accepted > 0);
    }

    #[test]
    fn nilpotent_time_dependent() {
        // Y′ = [[0, 2t],[0, 0]]Y → Y(1) = [[1, 1],[0, 1]]
        let mut st = StepStats::default();
        let y = integrate_unit(
            &|t| {
                Ok(Mat2C::new(
                    C64::new(0.0, 0.0),
                    C64::new(2.0 * t, 0.0),
                    C64::new(0.0, 0.0),
                    C64::new(0.0, 0.0),
                ))
            },
            Mat2C::identity(),
            &StepControl::default(),
            &mut st,
        )
        .unwrap();
        assert!((y - Mat2C::from_real(1.0, 1.0, 0.0, 1.0)).max_norm() < 1e-12);
    }

    #[test]
    fn singular_coefficient_underflows() {
        let coef = |t: f64| {
            if t > 0.5 {
                Err(Error::DomainError {
                    z: C64::new(t, 0.0),
                    reason: "pole".into(),
                })
            } else {
                Ok(Mat2C::identity())
            }
        };
        let mut st = StepStats::default();
        let r = integrate_unit(&coef, Mat2C::identity(), &StepControl::default(), &mut st);
        assert!(matches!(r, Err(Error::StepUnderflow { .. })));
    }
}
