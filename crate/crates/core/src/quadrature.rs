//! Gauss–Legendre rules, the matching spectral integration matrix, and adaptive
//! quadrature along straight segments of the complex plane.

use std::sync::OnceLock;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub const NODES: usize = 32;
const MAX_DEPTH: usize = 24;

/// Gauss–Legendre rule on `[−1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// `(P_n(x), P_n′(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            // ascending order
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        Self { nodes, weights }
    }

    /// Matrix `S` with `S[i][j] = ∫_{−1}^{x_i} ℓ_j(t) dt` for the Lagrange basis `ℓ_j`
    /// on the nodes; `Σ_j S[i][j] f(x_j)` integrates the interpolant of `f`.
    pub fn integration_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.nodes.len();
        // ℓ_j(t) = w_j Σ_m (2m+1)/2 P_m(x_j) P_m(t), exact for m < n
        let legendre_all = |x: f64| {
            let mut p = vec![0.0; n + 1];
            p[0] = 1.0;
            if n > 0 {
                p[1] = x;
            }
            for k in 2..=n {
                let kf = k as f64;
                p[k] = ((2.0 * kf - 1.0) * x * p[k - 1] - (kf - 1.0) * p[k - 2]) / kf;
            }
            p
        };
        // ∫_{−1}^{x} P_m = (P_{m+1}(x) − P_{m−1}(x))/(2m+1), and x + 1 for m = 0
        let primitives = |x: f64| {
            let p = legendre_all(x);
            let mut out = vec![0.0; n];
            out[0] = x + 1.0;
            for m in 1..n {
                out[m] = (p[m + 1] - p[m - 1]) / (2 * m + 1) as f64;
            }
            out
        };
        let basis: Vec<Vec<f64>> = self.nodes.iter().map(|&x| legendre_all(x)).collect();
        self.nodes
            .iter()
            .map(|&xi| {
                let prim = primitives(xi);
                (0..n)
                    .map(|j| {
                        let s: f64 = (0..n)
                            .map(|m| (2 * m + 1) as f64 / 2.0 * basis[j][m] * prim[m])
                            .sum();
                        self.weights[j] * s
                    })
                    .collect()
            })
            .collect()
    }
}

pub fn gl32() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(NODES))
}

pub fn gl32_integration_matrix() -> &'static Vec<Vec<f64>> {
    static MAT: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    MAT.get_or_init(|| gl32().integration_matrix())
}

fn panel<const N: usize>(f: &impl Fn(C64) -> Result<[C64; N]>, a: C64, b: C64) -> Result<[C64; N]> {
    let rule = gl32();
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = [C64::new(0.0, 0.0); N];
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        let v = f(mid + half * *x)?;
        for k in 0..N {
            acc[k] += v[k] * *w;
        }
    }
    Ok(acc.map(|v| v * half))
}

fn norm<const N: usize>(v: &[C64; N]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.norm()))
}

/// `∫_a^b f(z) dz` along the straight segment, by adaptive bisection with the
/// 32-point rule. Converged when a panel and its two halves agree to
/// `tol·max(1, |result|)`.
pub fn integrate_segment<const N: usize>(
    f: &impl Fn(C64) -> Result<[C64; N]>,
    a: C64,
    b: C64,
    tol: f64,
) -> Result<[C64; N]> {
    if a == b {
        return Ok([C64::new(0.0, 0.0); N]);
    }
    let whole = panel(f, a, b)?;
    adapt(f, a, b, whole, tol, 0)
}

fn adapt<const N: usize>(
    f: &impl Fn(C64) -> Result<[C64; N]>,
    a: C64,
    b: C64,
    whole: [C64; N],
    tol: f64,
    depth: usize,
) -> Result<[C64; N]> {
    let m = 0.5 * (a + b);
    let left = panel(f, a, m)?;
    let right = panel(f, m, b)?;
    let mut sum = [C64::new(0.0, 0.0); N];
    let mut diff = [C64::new(0.0, 0.0); N];
    for k in 0..N {
        sum[k] = left[k] + right[k];
        diff[k] = sum[k] - whole[k];
    }
    if norm(&diff) <= tol * norm(&sum).max(1.0) {
        return Ok(sum);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::QuadratureFailure(format!(
            "no convergence on [{a}, {b}] (difference {:.3e})",
            norm(&diff)
        )));
    }
    let l = adapt(f, a, m, left, tol, depth + 1)?;
    let r = adapt(f, m, b, right, tol, depth + 1)?;
    let mut out = [C64::new(0.0, 0.0); N];
    for k in 0..N {
        out[k] = l[k] + r[k];
    }
    Ok(out)
}
