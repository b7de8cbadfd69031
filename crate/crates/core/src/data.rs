//! Weierstrass data: the pair (η, ψ) of holomorphic functions, a base point and
//! the spectral parameter λ.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::expr::{self, Expr, ExprError, Params};

type Jet = [C64; 3];
type JetFn = dyn Fn(C64) -> Result<Jet> + Send + Sync;

/// A holomorphic function known either symbolically or only through a
/// numerical evaluator returning `(f, f′, f″)`.
#[derive(Clone)]
pub enum HoloFn {
    Symbolic { f: Expr, df: Expr, d2f: Expr },
    Numeric { label: String, jet: Arc<JetFn> },
}

impl fmt::Debug for HoloFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HoloFn::Symbolic { f: e, .. } => write!(f, "Symbolic({e})"),
            HoloFn::Numeric { label, .. } => write!(f, "Numeric({label})"),
        }
    }
}

impl fmt::Display for HoloFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HoloFn::Symbolic { f: e, .. } => write!(f, "{e}"),
            HoloFn::Numeric { label, .. } => write!(f, "<{label}>"),
        }
    }
}

pub(crate) fn domain_err(z: C64, e: ExprError) -> Error {
    match e {
        ExprError::PoleOrOverflow { .. } => Error::DomainError {
            z,
            reason: e.to_string(),
        },
        ExprError::Special(s) => Error::DomainError {
            z,
            reason: s.to_string(),
        },
        other => Error::Expr(other),
    }
}

impl HoloFn {
    pub fn from_expr(f: Expr) -> Self {
        let df = f.derivative();
        let d2f = df.derivative();
        HoloFn::Symbolic { f, df, d2f }
    }

    pub fn numeric(
        label: impl Into<String>,
        jet: impl Fn(C64) -> Result<Jet> + Send + Sync + 'static,
    ) -> Self {
        HoloFn::Numeric {
            label: label.into(),
            jet: Arc::new(jet),
        }
    }

    pub fn expr(&self) -> Option<&Expr> {
        match self {
            HoloFn::Symbolic { f, .. } => Some(f),
            HoloFn::Numeric { .. } => None,
        }
    }

    pub fn derivative_expr(&self) -> Option<&Expr> {
        match self {
            HoloFn::Symbolic { df, .. } => Some(df),
            HoloFn::Numeric { .. } => None,
        }
    }

    pub fn value(&self, z: C64, params: &Params) -> Result<C64> {
        match self {
            HoloFn::Symbolic { f, .. } => f.eval(z, params).map_err(|e| domain_err(z, e)),
            HoloFn::Numeric { jet, .. } => Ok(jet(z)?[0]),
        }
    }

    /// `(f, f′)`.
    pub fn value_d1(&self, z: C64, params: &Params) -> Result<[C64; 2]> {
        match self {
            HoloFn::Symbolic { f, df, .. } => Ok([
                f.eval(z, params).map_err(|e| domain_err(z, e))?,
                df.eval(z, params).map_err(|e| domain_err(z, e))?,
            ]),
            HoloFn::Numeric { jet, .. } => {
                let j = jet(z)?;
                Ok([j[0], j[1]])
            }
        }
    }

    /// `(f, f′, f″)`.
    pub fn jet(&self, z: C64, params: &Params) -> Result<Jet> {
        match self {
            HoloFn::Symbolic { f, df, d2f } => Ok([
                f.eval(z, params).map_err(|e| domain_err(z, e))?,
                df.eval(z, params).map_err(|e| domain_err(z, e))?,
                d2f.eval(z, params).map_err(|e| domain_err(z, e))?,
            ]),
            HoloFn::Numeric { jet, .. } => jet(z),
        }
    }
}

/// Values of η, η′, ψ, ψ′ at one point.
#[derive(Debug, Clone, Copy)]
pub struct DataSample {
    pub z: C64,
    pub eta: C64,
    pub deta: C64,
    pub psi: C64,
    pub dpsi: C64,
}

/// Complete surface specification.
#[derive(Debug, Clone)]
pub struct WeierstrassData {
    pub eta: HoloFn,
    pub psi: HoloFn,
    pub z0: C64,
    pub lambda: f64,
    pub params: Params,
}

impl WeierstrassData {
    pub fn new(eta: Expr, psi: Expr) -> Self {
        Self {
            eta: HoloFn::from_expr(eta),
            psi: HoloFn::from_expr(psi),
            z0: C64::new(0.0, 0.0),
            lambda: 1.0,
            params: Params::new(),
        }
    }

    pub fn parse(eta: &str, psi: &str) -> Result<Self> {
        Ok(Self::new(expr::parse(eta)?, expr::parse(psi)?))
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_base(mut self, z0: C64) -> Self {
        self.z0 = z0;
        self
    }

    pub fn with_params(mut self, params: Params) -> Self {
        self.params = params;
        self
    }

    pub fn with_param(mut self, name: &str, value: C64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn eta_at(&self, z: C64) -> Result<C64> {
        self.eta.value(z, &self.params)
    }

    pub fn psi_at(&self, z: C64) -> Result<C64> {
        self.psi.value(z, &self.params)
    }

    /// Evaluates η, η′, ψ, ψ′; a zero of η is a domain error.
    pub fn sample(&self, z: C64) -> Result<DataSample> {
        let [eta, deta] = self.eta.value_d1(z, &self.params)?;
        let [psi, dpsi] = self.psi.value_d1(z, &self.params)?;
        if eta.norm() == 0.0 {
            return Err(Error::DomainError {
                z,
                reason: "eta vanishes".into(),
            });
        }
        Ok(DataSample {
            z,
            eta,
            deta,
            psi,
            dpsi,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_enneper() {
        let d = WeierstrassData::parse("1", "z").unwrap();
        let s = d.sample(C64::new(0.5, 0.5)).unwrap();
        assert_eq!(s.eta, C64::new(1.0, 0.0));
        assert_eq!(s.deta, C64::new(0.0, 0.0));
        assert_eq!(s.psi, C64::new(0.5, 0.5));
        assert_eq!(s.dpsi, C64::new(1.0, 0.0));
    }

    #[test]
    fn zero_of_eta_is_domain_error() {
        let d = WeierstrassData::parse("z", "z").unwrap();
        assert!(matches!(
            d.sample(C64::new(0.0, 0.0)),
            Err(Error::DomainError { .. })
        ));
        let d = WeierstrassData::parse("1/z", "z").unwrap();
        assert!(matches!(
            d.sample(C64::new(0.0, 0.0)),
            Err(Error::DomainError { .. })
        ));
    }

    #[test]
    fn unbound_parameter_is_reported() {
        let d = WeierstrassData::parse("c", "z").unwrap();
        assert!(matches!(
            d.sample(C64::new(0.0, 0.0)),
            Err(Error::Expr(ExprError::UnboundParameter(_)))
        ));
        let d = d.with_param("c", C64::new(2.0, 0.0));
        assert_eq!(d.eta_at(C64::new(0.3, 0.0)).unwrap(), C64::new(2.0, 0.0));
    }
}
