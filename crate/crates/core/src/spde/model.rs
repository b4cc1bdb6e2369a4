use crate::analysis::stability_check;
use crate::error::{Error, Result};

/// Drift, correlation, horizon and starting point of the filtering SPDE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub mu: f64,
    pub rho: f64,
    pub t: f64,
    pub x0: f64,
}

impl ModelParams {
    pub fn new(mu: f64, rho: f64, t: f64, x0: f64) -> Result<Self> {
        if !(mu.is_finite() && x0.is_finite()) {
            return Err(Error::InvalidModel("mu and x0 must be finite"));
        }
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::InvalidModel("rho must lie in [0, 1)"));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidModel("T must be positive"));
        }
        Ok(Self { mu, rho, t, x0 })
    }

    /// The credit-portfolio calibration used throughout the experiments.
    pub fn baseline() -> Self {
        Self { mu: 0.081, rho: 0.2, t: 5.0, x0: 5.0 }
    }

    /// Whether the implicit schemes are mean-square stable for this correlation.
    pub fn is_stable(&self) -> bool {
        stability_check(self.rho)
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        Self::baseline()
    }
}

/// Which implicit Milstein discretisation to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// Space first, then Milstein: the correction uses the squared central difference
    /// (wide stencil `V[j+2] - 2V[j] + V[j-2]`).
    A,
    /// Milstein first, then space: the correction uses the narrow second difference.
    B,
}

/// Quadrature used for the loss mass on `(-inf, 0]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Functional {
    /// Trapezoidal rule, the node at zero carries half weight.
    Trapezoidal,
    /// Rectangle rule, the node at zero carries full weight.
    Rectangle,
}
