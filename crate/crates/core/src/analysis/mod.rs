//! Fourier analysis of the implicit schemes: symbols, stability and the high-wave decay constant.

mod profit;
mod quadrature;
mod symbols;
mod theta;

pub use profit::profit_surface;
pub use quadrature::adaptive_simpson;
pub use symbols::{
    amplification_factor, amplification_mean_square, bound_g, mean_square_factor, q, stability_check,
    theta_bound_moderate, theta_bound_nyquist, theta_bound_strong, FourierSymbols,
};
pub use theta::{compute_theta, k0_bound, theta_for_steps, verify_k0_condition, ThetaResult, ThetaSettings};
