//! Constant-mean-curvature surfaces in hyperbolic space H³(λ) and their
//! minimal-surface limits in E³, generated from Weierstrass data (η, ψ)
//! through a 2×2 linear spectral problem.

pub mod data;
pub mod error;
pub mod expr;
pub mod fd;
pub mod geom;
pub mod immersion;
pub mod lsp;
pub mod mcore;
pub mod odebridge;
pub mod quadrature;
pub mod specfun;

pub use data::{DataSample, HoloFn, WeierstrassData};
pub use error::{Error, Result};
pub use expr::{Expr, ExprError, Params};
pub use mcore::{LorentzVec, Mat2C, C64};
