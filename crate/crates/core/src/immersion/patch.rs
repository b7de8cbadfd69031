//! Rectangular surface patches sampled by row-reusing path integration.
//!
//! The sweep walks from the base point to the lower-left corner, up the first
//! column (the seed column), and then along every row, each grid point
//! starting from the value at its left neighbour. Rows are independent once
//! the seed column is known and run in parallel.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::{limit_to_enneper, shifted_immersion, sym_immersion, weierstrass_form};
use crate::data::WeierstrassData;
use crate::error::{Error, Result};
use crate::lsp::{propagate, IntegrateOptions, PathSpec, System, SystemKind, Wavefunction};
use crate::mcore::{lorentz_inner, LorentzVec, Mat2C};
use crate::quadrature::integrate_segment;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "SOLSURF_THREADS";

/// `[re_min, re_max] × [im_min, im_max]` sampled on `nx × ny` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Domain {
    pub fn new(
        re_min: f64,
        re_max: f64,
        im_min: f64,
        im_max: f64,
        nx: usize,
        ny: usize,
    ) -> Result<Self> {
        let d = Self {
            re_min,
            re_max,
            im_min,
            im_max,
            nx,
            ny,
        };
        d.validate()?;
        Ok(d)
    }

    /// Square of half-width `half` around `center` with `n × n` points.
    pub fn square(center: C64, half: f64, n: usize) -> Result<Self> {
        Self::new(
            center.re - half,
            center.re + half,
            center.im - half,
            center.im + half,
            n,
            n,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.re_min, self.re_max, self.im_min, self.im_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.re_min >= self.re_max || self.im_min >= self.im_max {
            return Err(Error::InvalidArgument(format!(
                "empty or non-finite domain {self:?}"
            )));
        }
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::InvalidArgument(
                "resolution must be at least 2 per axis".into(),
            ));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.re_max - self.re_min) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.im_max - self.im_min) / (self.ny - 1) as f64
    }

    /// Grid point in row `row` (imaginary index) and column `col` (real index).
    pub fn z(&self, row: usize, col: usize) -> C64 {
        C64::new(
            self.re_min + col as f64 * self.dx(),
            self.im_min + row as f64 * self.dy(),
        )
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major index.
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.nx + col
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SampleTarget {
    /// Sym-type formula in H³(λ) from the full system.
    H3,
    /// Sym-type formula in H³(λ) from the holomorphic system; an isometric copy
    /// of the `H3` surface (the two wavefunctions differ by a unitary gauge).
    H3Holomorphic,
    /// Shifted formula at the data's λ, converted to Enneper–Weierstrass coordinates.
    E3Limit,
    /// Direct Enneper–Weierstrass integration.
    E3Direct,
}

impl SampleTarget {
    pub fn is_hyperbolic(&self) -> bool {
        matches!(self, SampleTarget::H3 | SampleTarget::H3Holomorphic)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleOptions {
    pub integrate: IntegrateOptions,
    /// Worker threads; `None` reads `SOLSURF_THREADS` or uses all cores.
    pub threads: Option<usize>,
}

impl Default for SampleOptions {
    fn default() -> Self {
        Self::with_tol(1e-8)
    }
}

impl SampleOptions {
    pub fn with_tol(tol: f64) -> Self {
        let mut integrate = IntegrateOptions::with_tol(tol);
        integrate.check_compatibility = false;
        Self {
            integrate,
            threads: None,
        }
    }
}

/// Sampled surface with per-sample records.
#[derive(Debug, Clone)]
pub struct SurfacePatch {
    pub domain: Domain,
    pub lambda: f64,
    pub target: SampleTarget,
    pub base: C64,
    /// Immersion points, row-major; `None` marks an invalid sample. E³ points
    /// are stored as `(0, F₁, F₂, F₃)`.
    pub points: Vec<Option<LorentzVec>>,
    /// Wavefunction behind each sample (absent for direct integration).
    pub waves: Vec<Option<Mat2C>>,
    /// `|(F|F) + 1/λ²|` for H³ samples, `|det − 1|` of the wavefunction for E³-limit
    /// samples, zero for direct integration.
    pub hyperboloid: Vec<Option<f64>>,
    /// Why samples were rejected.
    pub failures: Vec<(usize, usize, Error)>,
}

impl SurfacePatch {
    pub fn rows(&self) -> usize {
        self.domain.ny
    }

    pub fn cols(&self) -> usize {
        self.domain.nx
    }

    pub fn point(&self, row: usize, col: usize) -> Option<LorentzVec> {
        self.points[self.domain.index(row, col)]
    }

    pub fn z(&self, row: usize, col: usize) -> C64 {
        self.domain.z(row, col)
    }

    pub fn valid_count(&self) -> usize {
        self.points.iter().filter(|p| p.is_some()).count()
    }

    pub fn max_hyperboloid(&self) -> f64 {
        self.hyperboloid
            .iter()
            .flatten()
            .fold(0.0, |m, v| m.max(*v))
    }

    pub fn mean_hyperboloid(&self) -> f64 {
        let v: Vec<f64> = self.hyperboloid.iter().flatten().copied().collect();
        if v.is_empty() {
            0.0
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Carried {
    Wave(Mat2C),
    Form([C64; 3]),
}

struct Stepper<'a> {
    data: &'a WeierstrassData,
    target: SampleTarget,
    opts: IntegrateOptions,
}

impl Stepper<'_> {
    fn initial(&self) -> Carried {
        match self.target {
            SampleTarget::E3Direct => Carried::Form([C64::new(0.0, 0.0); 3]),
            _ => Carried::Wave(Mat2C::identity()),
        }
    }

    fn advance(&self, from: C64, state: Carried, to: C64) -> Result<Carried> {
        match state {
            Carried::Wave(m) => {
                let system = match self.target {
                    SampleTarget::H3 => System::Full(self.data),
                    _ => System::Reduced(self.data),
                };
                Ok(Carried::Wave(
                    propagate(system, &PathSpec::straight(from, to), m, &self.opts)?.value,
                ))
            }
            Carried::Form(acc) => {
                let v = integrate_segment(&|z| weierstrass_form(self.data, z), from, to, 1e-13)?;
                Ok(Carried::Form(std::array::from_fn(|k| acc[k] + v[k])))
            }
        }
    }
}

/// Samples the surface of `data` over `domain` with default options.
pub fn sample_surface(
    data: &WeierstrassData,
    domain: &Domain,
    target: SampleTarget,
) -> Result<SurfacePatch> {
    sample_surface_with(data, domain, target, &SampleOptions::default())
}

fn thread_count(opts: &SampleOptions) -> Option<usize> {
    opts.threads
        .or_else(|| {
            std::env::var(THREADS_ENV)
                .ok()
                .and_then(|v| v.trim().parse().ok())
        })
        .filter(|&n| n > 0)
}

pub fn sample_surface_with(
    data: &WeierstrassData,
    domain: &Domain,
    target: SampleTarget,
    opts: &SampleOptions,
) -> Result<SurfacePatch> {
    domain.validate()?;
    let lambda = data.lambda;
    if target != SampleTarget::E3Direct && lambda == 0.0 {
        return Err(Error::LambdaZero);
    }
    let run = || sweep(data, domain, target, opts);
    match thread_count(opts) {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidArgument(e.to_string()))?;
            pool.install(run)
        }
        None => run(),
    }
}

type Cell = std::result::Result<Carried, Error>;

fn sweep(
    data: &WeierstrassData,
    domain: &Domain,
    target: SampleTarget,
    opts: &SampleOptions,
) -> Result<SurfacePatch> {
    let stepper = Stepper {
        data,
        target,
        opts: opts.integrate,
    };
    // probe the data on the grid first: points where it cannot be evaluated are
    // never used as starting values
    let probe = |z: C64| -> Result<()> { data.sample(z).map(|_| ()) };

    let mut anchor = (data.z0, stepper.initial());
    let mut seed: Vec<(C64, Carried, Option<Cell>)> = Vec::with_capacity(domain.ny);
    for row in 0..domain.ny {
        let z = domain.z(row, 0);
        let cell = probe(z).and_then(|_| stepper.advance(anchor.0, anchor.1, z));
        if let Ok(s) = &cell {
            anchor = (z, *s);
        }
        seed.push((anchor.0, anchor.1, Some(cell)));
    }

    let rows: Vec<Vec<Cell>> = seed
        .into_par_iter()
        .enumerate()
        .map(|(row, (az, astate, first))| {
            let mut out = Vec::with_capacity(domain.nx);
            out.push(first.expect("seed cell"));
            let mut last = (az, astate);
            for col in 1..domain.nx {
                let z = domain.z(row, col);
                let cell = probe(z).and_then(|_| stepper.advance(last.0, last.1, z));
                if let Ok(s) = &cell {
                    last = (z, *s);
                }
                out.push(cell);
            }
            out
        })
        .collect();

    let lambda = data.lambda;
    let n = domain.len();
    let mut patch = SurfacePatch {
        domain: *domain,
        lambda,
        target,
        base: data.z0,
        points: Vec::with_capacity(n),
        waves: Vec::with_capacity(n),
        hyperboloid: Vec::with_capacity(n),
        failures: Vec::new(),
    };
    for (row, cells) in rows.into_iter().enumerate() {
        for (col, cell) in cells.into_iter().enumerate() {
            let z = domain.z(row, col);
            let sample = cell.and_then(|state| immerse(state, z, lambda, target));
            match sample {
                Ok((p, w, r)) => {
                    patch.points.push(Some(p));
                    patch.waves.push(w);
                    patch.hyperboloid.push(Some(r));
                }
                Err(e) => {
                    patch.points.push(None);
                    patch.waves.push(None);
                    patch.hyperboloid.push(None);
                    patch.failures.push((row, col, e));
                }
            }
        }
    }
    Ok(patch)
}

fn immerse(
    state: Carried,
    z: C64,
    lambda: f64,
    target: SampleTarget,
) -> Result<(LorentzVec, Option<Mat2C>, f64)> {
    match (state, target) {
        (Carried::Wave(m), SampleTarget::H3 | SampleTarget::H3Holomorphic) => {
            let kind = if target == SampleTarget::H3 {
                SystemKind::Full
            } else {
                SystemKind::Reduced
            };
            let w = Wavefunction {
                value: m,
                at: z,
                lambda,
                kind,
            };
            let f = sym_immersion(&w, lambda)?;
            let r = (lorentz_inner(&f, &f) + 1.0 / (lambda * lambda)).abs();
            Ok((f, Some(m), r))
        }
        (Carried::Wave(m), _) => {
            let w = Wavefunction {
                value: m,
                at: z,
                lambda,
                kind: SystemKind::Reduced,
            };
            let x = shifted_immersion(&w, lambda)?;
            Ok((
                LorentzVec::from_spatial(limit_to_enneper(&x)),
                Some(m),
                w.det_drift(),
            ))
        }
        (Carried::Form(acc), _) => Ok((LorentzVec::from_spatial(acc.map(|c| c.re)), None, 0.0)),
    }
}
