//! Linear spectral problems along paths in the complex plane.
//!
//! * full system: `Φ_z = UΦ`, `Φ_{z̄} = V†Φ`, integrated along a real path
//!   parameter as `Φ′ = (U·γ′ + V†·conj γ′)Φ`;
//! * reduced (holomorphic) system: `Ψ_z = λη²[[ψ, −1], [ψ², −ψ]]Ψ`.
//!
//! Both start from the identity at the first waypoint of the path.

mod gauge;
pub mod ode;
mod picard;

use num_complex::Complex64 as C64;

use crate::data::WeierstrassData;
use crate::error::{Error, Result};
use crate::geom::{self, analytic_u_z, build_uv, SurfaceFields, WeierstrassFields};
use crate::mcore::Mat2C;

pub use gauge::{
    gauge_matrix, gauge_residual, gauge_transform, principal_branch, BranchTracker, GaugeResidual,
};
pub use ode::{StepControl, StepStats};
pub use picard::{picard_series, picard_terms};

pub const DEFAULT_CLEARANCE: f64 = 1e-2;
pub const COMPATIBILITY_THRESHOLD: f64 = 1e-4;

/// Polygonal integration path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSpec {
    /// Vertices; the first one is the base point.
    pub waypoints: Vec<C64>,
    /// Points the path must keep away from.
    pub poles: Vec<C64>,
    pub clearance: f64,
}

impl PathSpec {
    pub fn through(waypoints: impl IntoIterator<Item = C64>) -> Self {
        Self {
            waypoints: waypoints.into_iter().collect(),
            poles: Vec::new(),
            clearance: DEFAULT_CLEARANCE,
        }
    }

    pub fn straight(from: C64, to: C64) -> Self {
        Self::through([from, to])
    }

    /// Straight path from the base point of `data` to `z`.
    pub fn from_base(data: &WeierstrassData, z: C64) -> Self {
        Self::straight(data.z0, z)
    }

    pub fn with_poles(mut self, poles: impl IntoIterator<Item = C64>) -> Self {
        self.poles = poles.into_iter().collect();
        self
    }

    pub fn with_clearance(mut self, clearance: f64) -> Self {
        self.clearance = clearance;
        self
    }

    pub fn start(&self) -> C64 {
        self.waypoints[0]
    }

    pub fn end(&self) -> C64 {
        *self.waypoints.last().expect("non-empty path")
    }

    pub fn segments(&self) -> impl Iterator<Item = (C64, C64)> + '_ {
        self.waypoints.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|(a, b)| (b - a).norm()).sum()
    }

    /// The path followed backwards.
    pub fn reversed(&self) -> Self {
        let mut p = self.clone();
        p.waypoints.reverse();
        p
    }

    pub fn validate(&self) -> Result<()> {
        if self.waypoints.is_empty() {
            return Err(Error::InvalidArgument(
                "path needs at least one waypoint".into(),
            ));
        }
        for (a, b) in self.segments() {
            for &pole in &self.poles {
                let d = segment_distance(pole, a, b);
                if d < self.clearance {
                    return Err(Error::PoleClearanceViolated {
                        pole,
                        distance: d,
                        clearance: self.clearance,
                    });
                }
            }
        }
        if self.waypoints.len() == 1 {
            for &pole in &self.poles {
                let d = (pole - self.waypoints[0]).norm();
                if d < self.clearance {
                    return Err(Error::PoleClearanceViolated {
                        pole,
                        distance: d,
                        clearance: self.clearance,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Distance from `p` to the segment `[a, b]`.
pub fn segment_distance(p: C64, a: C64, b: C64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * d.conj()).re / len2).clamp(0.0, 1.0);
    (p - (a + d * t)).norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemKind {
    Full,
    Reduced,
}

/// Solution value of a spectral problem at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wavefunction {
    pub value: Mat2C,
    pub at: C64,
    pub lambda: f64,
    pub kind: SystemKind,
}

impl Wavefunction {
    pub fn identity(at: C64, lambda: f64, kind: SystemKind) -> Self {
        Self {
            value: Mat2C::identity(),
            at,
            lambda,
            kind,
        }
    }

    pub fn det_drift(&self) -> f64 {
        (self.value.det() - 1.0).norm()
    }
}

/// Integration settings shared by both systems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    pub step: StepControl,
    /// Run the GMC compatibility pre-check before integrating the full system.
    pub check_compatibility: bool,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            step: StepControl::default(),
            check_compatibility: true,
        }
    }
}

impl IntegrateOptions {
    pub fn with_tol(tol: f64) -> Self {
        let mut o = Self::default();
        o.step.tol = tol;
        o
    }
}

/// Local error control runs tighter than the requested tolerance so that the
/// accumulated error over a path stays within a small multiple of it.
const LOCAL_TOL_FACTOR: f64 = 0.1;

/// `λη²[[ψ, −1], [ψ², −ψ]]`, the generator of the holomorphic system.
pub fn reduced_coefficient(data: &WeierstrassData, z: C64) -> Result<Mat2C> {
    let eta = data.eta_at(z)?;
    let psi = data.psi_at(z)?;
    Ok(rank_one(eta, psi) * data.lambda)
}

/// `η²(1, ψ)ᵀ(ψ, −1)`.
pub(crate) fn rank_one(eta: C64, psi: C64) -> Mat2C {
    let e2 = eta * eta;
    Mat2C::outer([e2, e2 * psi], [psi, -C64::new(1.0, 0.0)])
}

/// `(U, V†)` for the `H = λ` surface of `data`, from one evaluation of the data.
pub fn full_coefficients(data: &WeierstrassData, z: C64) -> Result<(Mat2C, Mat2C)> {
    let s = data.sample(z)?;
    let e_half = s.eta.norm_sqr() * (1.0 + s.psi.norm_sqr());
    let fields = geom::FieldValues {
        u: 2.0 * e_half.ln(),
        q: -s.eta * s.eta * s.dpsi,
        h: data.lambda,
    };
    let (u, v) = build_uv(
        &fields,
        data.lambda,
        analytic_u_z(s.eta, s.deta, s.psi, s.dpsi),
    );
    Ok((u, v.adjoint()))
}

/// Which generator drives an integration.
#[derive(Clone, Copy)]
pub enum System<'a> {
    Reduced(&'a WeierstrassData),
    Full(&'a WeierstrassData),
    Fields(&'a dyn SurfaceFields),
}

impl System<'_> {
    pub fn kind(&self) -> SystemKind {
        match self {
            System::Reduced(_) => SystemKind::Reduced,
            _ => SystemKind::Full,
        }
    }

    pub fn lambda(&self) -> f64 {
        match self {
            System::Reduced(d) | System::Full(d) => d.lambda,
            System::Fields(f) => f.lambda(),
        }
    }

    /// Generator along a segment with tangent `dz`.
    pub fn generator(&self, z: C64, dz: C64) -> Result<Mat2C> {
        match self {
            System::Reduced(d) => Ok(reduced_coefficient(d, z)? * dz),
            System::Full(d) => {
                let (u, w) = full_coefficients(d, z)?;
                Ok(u * dz + w * dz.conj())
            }
            System::Fields(f) => {
                let (u, w) = geom::lax_pair_at(*f, z)?;
                Ok(u * dz + w * dz.conj())
            }
        }
    }
}

/// Continues a solution along `path` from the value `start` at `path.start()`.
pub fn propagate(
    system: System<'_>,
    path: &PathSpec,
    start: Mat2C,
    opts: &IntegrateOptions,
) -> Result<Wavefunction> {
    let (value, _) = propagate_with_stats(system, path, start, opts)?;
    Ok(value)
}

pub fn propagate_with_stats(
    system: System<'_>,
    path: &PathSpec,
    start: Mat2C,
    opts: &IntegrateOptions,
) -> Result<(Wavefunction, StepStats)> {
    path.validate()?;
    let mut ctl = opts.step;
    ctl.tol *= LOCAL_TOL_FACTOR;
    let mut stats = StepStats::default();
    let mut y = start;
    for (a, b) in path.segments() {
        let dz = b - a;
        if dz == C64::new(0.0, 0.0) {
            continue;
        }
        // step sizes are in units of the segment parameter; keep them comparable
        // across segments of different length
        let len = dz.norm();
        let mut seg = ctl;
        seg.h_init = (ctl.h_init / len).min(1.0);
        seg.h_min = ctl.h_min / len.max(1.0);
        y = ode::integrate_unit(&|t| system.generator(a + dz * t, dz), y, &seg, &mut stats)?;
    }
    Ok((
        Wavefunction {
            value: y,
            at: path.end(),
            lambda: system.lambda(),
            kind: system.kind(),
        },
        stats,
    ))
}

/// `Ψ` at the end of `path` with `Ψ = I` at its start.
pub fn integrate_reduced(
    data: &WeierstrassData,
    path: &PathSpec,
    tol: f64,
) -> Result<Wavefunction> {
    integrate_reduced_with(data, path, &IntegrateOptions::with_tol(tol))
}

pub fn integrate_reduced_with(
    data: &WeierstrassData,
    path: &PathSpec,
    opts: &IntegrateOptions,
) -> Result<Wavefunction> {
    propagate(System::Reduced(data), path, Mat2C::identity(), opts)
}

/// `Φ` at the end of `path` with `Φ = I` at its start.
pub fn integrate_full(data: &WeierstrassData, path: &PathSpec, tol: f64) -> Result<Wavefunction> {
    integrate_full_with(data, path, &IntegrateOptions::with_tol(tol))
}

pub fn integrate_full_with(
    data: &WeierstrassData,
    path: &PathSpec,
    opts: &IntegrateOptions,
) -> Result<Wavefunction> {
    if opts.check_compatibility {
        check_compatibility(&WeierstrassFields(data), path)?;
    }
    propagate(System::Full(data), path, Mat2C::identity(), opts)
}

/// Full system for an arbitrary field source.
pub fn integrate_fields(
    fields: &dyn SurfaceFields,
    path: &PathSpec,
    opts: &IntegrateOptions,
) -> Result<Wavefunction> {
    if opts.check_compatibility {
        check_compatibility(fields, path)?;
    }
    propagate(System::Fields(fields), path, Mat2C::identity(), opts)
}

/// Largest relative GMC residual over the waypoints and segment midpoints.
pub fn compatibility_residual(
    fields: &(impl SurfaceFields + ?Sized),
    path: &PathSpec,
) -> Result<f64> {
    let mut probes: Vec<C64> = path.waypoints.clone();
    probes.extend(path.segments().map(|(a, b)| 0.5 * (a + b)));
    let mut worst = 0.0f64;
    for z in probes {
        let (r1, r2) = geom::gmc_residual(fields, z, 1e-3)?;
        let scale = geom::gmc_scale(fields, z)?.max(1.0);
        worst = worst.max(r1.norm() / scale).max(r2.norm() / scale);
    }
    Ok(worst)
}

fn check_compatibility(fields: &(impl SurfaceFields + ?Sized), path: &PathSpec) -> Result<()> {
    let r = compatibility_residual(fields, path)?;
    if r >= COMPATIBILITY_THRESHOLD {
        return Err(Error::IncompatibleSystem(r));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Perturbation, Perturbed};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn enneper(lambda: f64) -> WeierstrassData {
        WeierstrassData::parse("1", "z")
            .unwrap()
            .with_lambda(lambda)
    }

    #[test]
    fn reduced_coefficient_examples() {
        let d = enneper(1.0);
        assert_eq!(
            reduced_coefficient(&d, c(0.0, 0.0)).unwrap(),
            Mat2C::from_real(0.0, -1.0, 0.0, 0.0)
        );
        let d2 = WeierstrassData::parse("exp(z/2)+1", "z^2-3*z")
            .unwrap()
            .with_lambda(0.7);
        for z in [c(0.3, 0.2), c(-1.0, 2.0), c(3.0, -1.0)] {
            let a = reduced_coefficient(&d2, z).unwrap();
            assert!(a.det().norm() < 1e-14 * a.max_norm().powi(2).max(1.0));
            assert!(a.trace().norm() < 1e-14 * a.max_norm().max(1.0));
        }
        assert_eq!(
            reduced_coefficient(&enneper(0.0), c(0.4, 0.1)).unwrap(),
            Mat2C::zero()
        );
    }

    #[test]
    fn lambda_zero_reduced_is_identity() {
        let p = PathSpec::through([c(0.0, 0.0), c(1.0, 0.5), c(-0.3, 2.0)]);
        let w = integrate_reduced(&enneper(0.0), &p, 1e-10).unwrap();
        assert_eq!(w.value, Mat2C::identity());
    }

    #[test]
    fn first_order_in_lambda() {
        let z = c(1.0, 0.0);
        let first = Mat2C::new(z * z / 2.0, -z, z * z * z / 3.0, -z * z / 2.0);
        let mut ratios = Vec::new();
        for lambda in [1e-2, 1e-3, 1e-4] {
            let w = integrate_reduced(&enneper(lambda), &PathSpec::straight(c(0.0, 0.0), z), 1e-13)
                .unwrap();
            let rest = w.value - Mat2C::identity() - first * lambda;
            ratios.push(rest.max_norm() / (lambda * lambda));
        }
        for r in &ratios {
            assert!(*r < 1.0, "{ratios:?}");
        }
    }

    #[test]
    fn closed_loops_return_to_identity() {
        let tol = 1e-10;
        let loop_path = PathSpec::through([
            c(0.0, 0.0),
            c(1.0, 0.0),
            c(1.0, 1.0),
            c(0.0, 1.0),
            c(0.0, 0.0),
        ]);
        let w = integrate_reduced(&enneper(1.0), &loop_path, tol).unwrap();
        assert!(
            (w.value - Mat2C::identity()).max_norm() < 10.0 * tol,
            "{:?}",
            w.value
        );
        let w = integrate_full(&enneper(1.0), &loop_path, tol).unwrap();
        assert!(
            (w.value - Mat2C::identity()).max_norm() < 10.0 * tol,
            "{:?}",
            w.value
        );
    }

    #[test]
    fn full_system_minimal_branch_is_unitary() {
        let tol = 1e-10;
        let p = PathSpec::through([c(0.0, 0.0), c(0.8, -0.3), c(0.2, 1.1)]);
        let w = integrate_full(&enneper(0.0), &p, tol).unwrap();
        assert!((w.value.adjoint() * w.value - Mat2C::identity()).max_norm() < 10.0 * tol);
        let w = integrate_full(
            &enneper(1.0),
            &PathSpec::straight(c(0.0, 0.0), c(1.0, 0.0)),
            tol,
        )
        .unwrap();
        assert!(w.det_drift() < 10.0 * tol);
    }

    #[test]
    fn path_independence() {
        let tol = 1e-10;
        let d = WeierstrassData::parse("exp(z/2)", "z^2 + 0.3*z").unwrap();
        let a = integrate_reduced(
            &d,
            &PathSpec::through([c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0)]),
            tol,
        )
        .unwrap();
        let b = integrate_reduced(
            &d,
            &PathSpec::through([c(0.0, 0.0), c(0.0, 1.0), c(1.0, 1.0)]),
            tol,
        )
        .unwrap();
        assert!((a.value - b.value).max_norm() < 10.0 * tol * a.value.max_norm().max(1.0));
    }

    #[test]
    fn det_drift_grows_slowly_with_length() {
        let tol = 1e-9;
        let d = enneper(1.0);
        let mut drifts = Vec::new();
        for len in [1.0, 2.0, 4.0] {
            let p = PathSpec::through([c(0.0, 0.0), c(0.5 * len, 0.0), c(0.5 * len, 0.5 * len)]);
            drifts.push(integrate_reduced(&d, &p, tol).unwrap().det_drift());
        }
        for dr in &drifts {
            assert!(*dr < 10.0 * tol * 4.0, "{drifts:?}");
        }
    }

    #[test]
    fn pole_clearance_and_underflow() {
        let d = WeierstrassData::parse("1", "1/(z-0.5)").unwrap();
        let p = PathSpec::straight(c(0.0, 0.0), c(1.0, 0.0)).with_poles([c(0.5, 0.005)]);
        assert!(matches!(
            integrate_reduced(&d, &p, 1e-8),
            Err(Error::PoleClearanceViolated { .. })
        ));
        let p = PathSpec::straight(c(0.0, 0.0), c(1.0, 0.0));
        assert!(matches!(
            integrate_reduced(&d, &p, 1e-8),
            Err(Error::StepUnderflow { .. })
        ));
    }

    #[test]
    fn incompatible_fields_are_rejected() {
        let d = enneper(1.0);
        let base = WeierstrassFields(&d);
        let bad = Perturbed::new(&base, Perturbation::ScaleQ(c(1.5, 0.0)));
        let p = PathSpec::straight(c(0.0, 0.0), c(0.5, 0.5));
        assert!(matches!(
            integrate_fields(&bad, &p, &IntegrateOptions::default()),
            Err(Error::IncompatibleSystem(_))
        ));
        let ok = integrate_fields(&base, &p, &IntegrateOptions::default()).unwrap();
        let direct = integrate_full(&d, &p, 1e-10).unwrap();
        assert!((ok.value - direct.value).max_norm() < 1e-8);
    }

    #[test]
    fn renormalization_flag() {
        let d = enneper(2.0);
        let mut o = IntegrateOptions::with_tol(1e-6);
        o.step.renormalize = true;
        let w =
            integrate_reduced_with(&d, &PathSpec::straight(c(0.0, 0.0), c(1.5, 1.0)), &o).unwrap();
        assert!(w.det_drift() < 1e-13);
    }
}
