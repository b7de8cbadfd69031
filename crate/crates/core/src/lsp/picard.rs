//! Successive approximations for the holomorphic system:
//! `Ψ = I + Σ_j λ^j Θ_j` with `Θ_0 = I` and `Θ_j(z) = ∫_{z0}^{z} A(ζ)Θ_{j−1}(ζ) dζ`,
//! `A = η²[[ψ, −1], [ψ², −ψ]]`. Each level is computed on composite
//! Gauss–Legendre panels with the spectral integration matrix, refining the
//! panel count until two successive refinements agree.

use num_complex::Complex64 as C64;

use super::rank_one;
use crate::data::WeierstrassData;
use crate::error::{Error, Result};
use crate::mcore::Mat2C;
use crate::quadrature::{gl32, gl32_integration_matrix, NODES};

pub const MAX_ORDER: usize = 8;
const MAX_PANELS: usize = 1024;
const AGREEMENT: f64 = 1e-14;

/// `[Θ_1(z), …, Θ_order(z)]` along the straight path from `data.z0`.
pub fn picard_terms(data: &WeierstrassData, z: C64, order: usize) -> Result<Vec<Mat2C>> {
    if order > MAX_ORDER {
        return Err(Error::InvalidArgument(format!(
            "series order {order} exceeds {MAX_ORDER}"
        )));
    }
    if order == 0 {
        return Ok(Vec::new());
    }
    let mut panels = 1;
    let mut previous = terms_on_panels(data, z, order, panels)?;
    loop {
        panels *= 2;
        let current = terms_on_panels(data, z, order, panels)?;
        let diff = previous
            .iter()
            .zip(&current)
            .map(|(a, b)| (*a - *b).max_norm() / b.max_norm().max(1.0))
            .fold(0.0, f64::max);
        if diff <= AGREEMENT {
            return Ok(current);
        }
        if panels >= MAX_PANELS {
            return Err(Error::QuadratureFailure(format!(
                "iterated integrals did not settle with {panels} panels (change {diff:.3e})"
            )));
        }
        previous = current;
    }
}

/// `I + Σ_{j=1}^{order} λ^j Θ_j(z)`.
pub fn picard_series(data: &WeierstrassData, z: C64, order: usize) -> Result<Mat2C> {
    let terms = picard_terms(data, z, order)?;
    let mut sum = Mat2C::identity();
    let mut lp = 1.0;
    for t in terms {
        lp *= data.lambda;
        sum += t * lp;
    }
    Ok(sum)
}

fn terms_on_panels(
    data: &WeierstrassData,
    z: C64,
    order: usize,
    panels: usize,
) -> Result<Vec<Mat2C>> {
    let rule = gl32();
    let smat = gl32_integration_matrix();
    let z0 = data.z0;
    let dz = z - z0;
    let width = 1.0 / panels as f64;
    // generator at all nodes, already multiplied by the path tangent
    let mut gen = Vec::with_capacity(panels * NODES);
    for p in 0..panels {
        let a = p as f64 * width;
        for x in &rule.nodes {
            let t = a + 0.5 * width * (x + 1.0);
            let zeta = z0 + dz * t;
            gen.push(rank_one(data.eta_at(zeta)?, data.psi_at(zeta)?) * dz);
        }
    }
    let half = 0.5 * width;
    let mut level = vec![Mat2C::identity(); panels * NODES];
    let mut out = Vec::with_capacity(order);
    for _ in 0..order {
        let integrand: Vec<Mat2C> = gen.iter().zip(&level).map(|(a, th)| *a * *th).collect();
        let mut next = vec![Mat2C::zero(); panels * NODES];
        let mut start = Mat2C::zero();
        for p in 0..panels {
            let base = p * NODES;
            for i in 0..NODES {
                let mut acc = Mat2C::zero();
                for k in 0..NODES {
                    acc += integrand[base + k] * smat[i][k];
                }
                next[base + i] = start + acc * half;
            }
            let mut total = Mat2C::zero();
            for k in 0..NODES {
                total += integrand[base + k] * rule.weights[k];
            }
            start += total * half;
        }
        out.push(start);
        level = next;
    }
    Ok(out)
}
