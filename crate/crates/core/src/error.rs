use thiserror::Error;

use crate::expr::ExprError;
use crate::specfun::SpecfunError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (anti-Hermitian part {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not unimodular (|det - 1| = {0:.3e})")]
    NotUnimodular(f64),
    #[error("domain error at z = {z}: {reason}")]
    DomainError {
        z: num_complex::Complex64,
        reason: String,
    },
    #[error("finite-difference stencil leaves the domain at z = {0}")]
    StencilOutOfDomain(num_complex::Complex64),
    #[error("step size underflow at path parameter {t:.6} (h = {h:.3e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("path passes within {distance:.3e} of pole {pole} (clearance {clearance:.3e})")]
    PoleClearanceViolated {
        pole: num_complex::Complex64,
        distance: f64,
        clearance: f64,
    },
    #[error("spectral problem is incompatible: GMC residual {0:.3e}")]
    IncompatibleSystem(f64),
    #[error("quadrature failed to converge: {0}")]
    QuadratureFailure(String),
    #[error("square-root branch is ambiguous at z = {0} (eta vanishes)")]
    BranchAmbiguity(num_complex::Complex64),
    #[error("spectral parameter lambda must be nonzero")]
    LambdaZero,
    #[error("degenerate frame at grid point ({row}, {col})")]
    DegenerateFrame { row: usize, col: usize },
    #[error("cannot integrate ODE coefficients: {0}")]
    NonIntegrableForm(String),
    #[error("operation needs symbolic data: {0}")]
    NotSymbolic(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
}
