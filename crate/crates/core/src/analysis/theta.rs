use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};

use super::quadrature::adaptive_simpson;
use super::symbols::{f_of_xi, stability_check};

/// Parameters of the high-wave decay computation.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaSettings {
    /// Mesh ratio `k / h^2`, at least 1.
    pub lambda: f64,
    /// Exponent of the low/high wave split `min(h^(-2p), k^(-p))`, in `(0, 1/4)`.
    pub p: f64,
    /// Step counts tried in order.
    pub steps: Vec<usize>,
    /// Successive estimates closer than this count as converged.
    pub tolerance: f64,
    /// Relative tolerance of the quadrature.
    pub quadrature_tolerance: f64,
}

impl Default for ThetaSettings {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            p: 0.125,
            steps: (6..=14).map(|e| 1usize << e).collect(),
            tolerance: 1e-3,
            quadrature_tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaResult {
    pub theta: f64,
    pub n_used: usize,
    pub converged: bool,
}

/// `theta_N = (h * integral over the high waves of f^N)^(1/N)` with `k = T/N`, `h = sqrt(k / lambda)`.
pub fn theta_for_steps(rho: f64, t: f64, lambda: f64, p: f64, n: usize, quadrature_tolerance: f64) -> f64 {
    let nf = n as f64;
    let k = t / nf;
    let h = libm::sqrt(k / lambda);
    let edge = libm::fmin(libm::pow(h, -2.0 * p), libm::pow(k, -p));
    let lo = h * edge;
    if lo >= PI {
        return 0.0;
    }
    // Integrate in xi = gamma h; the region is symmetric about zero.
    let log_f = |xi: f64| libm::log(f_of_xi(xi, lambda, rho));
    const PROBES: usize = 4096;
    let peak = (0..=PROBES).map(|i| log_f(lo + (PI - lo) * i as f64 / PROBES as f64)).fold(f64::NEG_INFINITY, f64::max);
    let scaled = |xi: f64| libm::exp(nf * (log_f(xi) - peak));
    let integral = adaptive_simpson(&scaled, lo, PI, quadrature_tolerance);
    libm::exp(peak + libm::log(2.0 * integral) / nf)
}

/// Iterates over `settings.steps` until successive estimates agree.
pub fn compute_theta(rho: f64, t: f64, settings: &ThetaSettings) -> Result<ThetaResult> {
    if !stability_check(rho) {
        return Err(Error::StabilityViolation { rho });
    }
    if settings.lambda.is_nan() || settings.lambda < 1.0 {
        return Err(Error::InvalidArgument("lambda must be at least 1"));
    }
    if !(settings.p > 0.0 && settings.p < 0.25) {
        return Err(Error::InvalidArgument("p must lie in (0, 1/4)"));
    }
    if t.is_nan() || t <= 0.0 {
        return Err(Error::InvalidArgument("T must be positive"));
    }
    let mut previous: Option<f64> = None;
    let mut last = (f64::NAN, 0);
    for &n in &settings.steps {
        let theta = theta_for_steps(rho, t, settings.lambda, settings.p, n, settings.quadrature_tolerance);
        if let Some(prev) = previous {
            if libm::fabs(theta - prev) < settings.tolerance {
                return Ok(ThetaResult { theta, n_used: n, converged: true });
            }
        }
        previous = Some(theta);
        last = (theta, n);
    }
    Err(Error::NoConvergence { last: last.0, n: last.1 })
}

/// Largest `k0` allowed by the error-expansion condition at spatial level `l1_star`.
pub fn k0_bound(h0: f64, l1_star: u32, theta: f64, c0: f64, beta: f64, t: f64) -> f64 {
    t * libm::log2(1.0 / theta) / (c0 + (3.0 + beta) * (l1_star as f64 + libm::log2(1.0 / h0)))
}

pub fn verify_k0_condition(h0: f64, k0: f64, l1_star: u32, theta: f64, c0: f64, beta: f64, t: f64) -> bool {
    k0 <= k0_bound(h0, l1_star, theta, c0, beta, t) * (1.0 + 1e-12)
}
