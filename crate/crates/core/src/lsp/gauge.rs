//! Unitary gauge between the full and the holomorphic spectral problems.
//!
//! `M = (1 + |ψ|²)^{−1/2} [[sψ, −s], [s̄, s̄ψ̄]]` with `s = (η/η̄)^{1/2}`. The
//! square root is `±η/|η|`; the sign is carried by continuity from a seed at
//! the base point. If `Φ` solves the full system with `Φ(z0) = I`, then
//! `Ψ̃ = M(z)⁻¹ Φ(z) M(z0)` solves the holomorphic system with `Ψ̃(z0) = I`.

use num_complex::Complex64 as C64;

use super::{
    propagate, reduced_coefficient, IntegrateOptions, PathSpec, System, SystemKind, Wavefunction,
};
use crate::data::WeierstrassData;
use crate::error::{Error, Result};
use crate::fd;
use crate::mcore::Mat2C;

/// Below this modulus η counts as vanishing for branch tracking.
const ETA_FLOOR: f64 = 1e-12;
const MAX_BISECTIONS: usize = 40;

/// Principal value of `(η/η̄)^{1/2}` at `z`.
pub fn principal_branch(data: &WeierstrassData, z: C64) -> Result<C64> {
    let eta = data.eta_at(z)?;
    if eta.norm() < ETA_FLOOR {
        return Err(Error::BranchAmbiguity(z));
    }
    Ok((eta / eta.conj()).sqrt())
}

fn nearest_root(eta: C64, reference: C64) -> C64 {
    let s = eta / eta.norm();
    if (s * reference.conj()).re >= 0.0 {
        s
    } else {
        -s
    }
}

/// Follows the branch of `(η/η̄)^{1/2}` along straight moves.
#[derive(Debug, Clone)]
pub struct BranchTracker<'a> {
    data: &'a WeierstrassData,
    at: C64,
    root: C64,
}

impl<'a> BranchTracker<'a> {
    /// Starts at `data.z0` with the root nearest to `seed`.
    pub fn new(data: &'a WeierstrassData, seed: C64) -> Result<Self> {
        let z0 = data.z0;
        let eta = data.eta_at(z0)?;
        if eta.norm() < ETA_FLOOR {
            return Err(Error::BranchAmbiguity(z0));
        }
        let root = nearest_root(eta, seed);
        if (root * seed.conj()).re.abs() < 1e-8 * seed.norm() {
            return Err(Error::BranchAmbiguity(z0));
        }
        Ok(Self { data, at: z0, root })
    }

    pub fn at(&self) -> C64 {
        self.at
    }

    pub fn root(&self) -> C64 {
        self.root
    }

    /// Moves to `z` along the straight segment and returns the continued root.
    pub fn advance_to(&mut self, z: C64) -> Result<C64> {
        let (root, _) = self.follow(self.at, self.root, self.unit_eta()?, z, 0)?;
        self.root = root;
        self.at = z;
        Ok(root)
    }

    fn unit_eta(&self) -> Result<C64> {
        let eta = self.data.eta_at(self.at)?;
        Ok(eta / eta.norm())
    }

    /// The phase of η itself is followed (not only the root), so a zero of η
    /// crossed by the path shows up as a phase jump that bisection cannot resolve.
    fn follow(
        &self,
        from: C64,
        root: C64,
        phase: C64,
        to: C64,
        depth: usize,
    ) -> Result<(C64, C64)> {
        let eta = self.data.eta_at(to)?;
        if eta.norm() < ETA_FLOOR {
            return Err(Error::BranchAmbiguity(to));
        }
        let unit = eta / eta.norm();
        // accept moves that turn the phase of η by less than 45°
        if (unit * phase.conj()).re > std::f64::consts::FRAC_1_SQRT_2 {
            return Ok((nearest_root(eta, root), unit));
        }
        if depth >= MAX_BISECTIONS {
            return Err(Error::BranchAmbiguity(to));
        }
        let mid = 0.5 * (from + to);
        let (r_mid, p_mid) = self.follow(from, root, phase, mid, depth + 1)?;
        self.follow(mid, r_mid, p_mid, to, depth + 1)
    }
}

fn matrix_from_root(root: C64, psi: C64) -> Mat2C {
    let d = 1.0 / (1.0 + psi.norm_sqr()).sqrt();
    let sb = root.conj();
    Mat2C::new(root * psi, -root, sb, sb * psi.conj()) * d
}

/// Gauge matrix at `z`, with the root continued along the straight path from
/// `data.z0`, starting from the root nearest to `branch_seed` there.
pub fn gauge_matrix(data: &WeierstrassData, z: C64, branch_seed: C64) -> Result<Mat2C> {
    let mut tracker = BranchTracker::new(data, branch_seed)?;
    let root = tracker.advance_to(z)?;
    Ok(matrix_from_root(root, data.psi_at(z)?))
}

/// Gauge matrix at the tracker's current position.
pub fn gauge_matrix_at(tracker: &BranchTracker<'_>) -> Result<Mat2C> {
    Ok(matrix_from_root(
        tracker.root(),
        tracker.data.psi_at(tracker.at())?,
    ))
}

/// `M(z)⁻¹ Φ(z) M(z0)` for a full-system solution `phi` normalized at `data.z0`.
pub fn gauge_transform(
    data: &WeierstrassData,
    phi: &Wavefunction,
    branch_seed: C64,
) -> Result<Wavefunction> {
    let mut tracker = BranchTracker::new(data, branch_seed)?;
    let m0 = gauge_matrix_at(&tracker)?;
    tracker.advance_to(phi.at)?;
    let m = gauge_matrix_at(&tracker)?;
    Ok(Wavefunction {
        value: m.adjoint() * phi.value * m0,
        at: phi.at,
        lambda: phi.lambda,
        kind: SystemKind::Reduced,
    })
}

/// Residuals of the gauge-transformed full solution against the holomorphic
/// system at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeResidual {
    /// `‖∂Ψ̃·Ψ̃⁻¹ − λη²A‖`.
    pub holomorphic: f64,
    /// `‖∂̄Ψ̃‖ / ‖Ψ̃‖`.
    pub antiholomorphic: f64,
    /// Transformed value at the point.
    pub value: Mat2C,
}

/// Evaluates [`GaugeResidual`] at `z` by finite differences of step `h`;
/// `phi` must be the full solution at `z`.
pub fn gauge_residual(
    data: &WeierstrassData,
    phi: &Wavefunction,
    branch_seed: C64,
    h: f64,
    opts: &IntegrateOptions,
) -> Result<GaugeResidual> {
    let z = phi.at;
    let mut tracker = BranchTracker::new(data, branch_seed)?;
    let m0 = gauge_matrix_at(&tracker)?;
    tracker.advance_to(z)?;
    let mut local = *opts;
    local.check_compatibility = false;
    let transformed = |w: C64| -> Result<Mat2C> {
        let phi_w = if w == z {
            phi.value
        } else {
            propagate(
                System::Full(data),
                &PathSpec::straight(z, w),
                phi.value,
                &local,
            )?
            .value
        };
        let mut t = tracker.clone();
        t.advance_to(w)?;
        Ok(gauge_matrix_at(&t)?.adjoint() * phi_w * m0)
    };
    let value = transformed(z)?;
    let (d, dbar) = fd::wirtinger(&transformed, z, h)?;
    let inv = value
        .inverse()
        .ok_or(Error::NotUnimodular((value.det() - 1.0).norm()))?;
    let holomorphic = (d * inv - reduced_coefficient(data, z)?).max_norm();
    let antiholomorphic = dbar.max_norm() / value.max_norm().max(1.0);
    Ok(GaugeResidual {
        holomorphic,
        antiholomorphic,
        value,
    })
}
