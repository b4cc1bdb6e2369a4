use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::normal_cdf;

use super::{DensityState, Functional, GridSpec, ModelParams};

/// Mass on `(-inf, 0]` by the trapezoidal rule, truncated at `x_max`.
pub fn loss_trapezoidal(state: &DensityState, grid: &GridSpec) -> Result<f64> {
    loss(Functional::Trapezoidal, state, grid)
}

/// Mass on `(-inf, 0]` by the rectangle rule, truncated at `x_max`.
pub fn loss_rectangle(state: &DensityState, grid: &GridSpec) -> Result<f64> {
    loss(Functional::Rectangle, state, grid)
}

pub fn loss(functional: Functional, state: &DensityState, grid: &GridSpec) -> Result<f64> {
    if state.values.len() != grid.interior() {
        return Err(Error::InvalidArgument("state does not match the grid"));
    }
    let rows: Vec<[f64; 1]> = state.values.iter().map(|&v| [v]).collect();
    Ok(loss_rows(functional, grid, &rows)?[0])
}

/// Loss of `L` interleaved paths; `rows` holds the interior nodes.
pub(crate) fn loss_rows<const L: usize>(
    functional: Functional,
    grid: &GridSpec,
    rows: &[[f64; L]],
) -> Result<[f64; L]> {
    let zero = grid.zero_node().ok_or(Error::DomainMisaligned("no node at x = 0"))?;
    if zero >= grid.cells() {
        return Ok([1.0; L]);
    }
    let (at_zero, right) = if zero == 0 { ([0.0; L], 0) } else { (rows[zero - 1], zero) };
    let mut tail = [0.0; L];
    for row in &rows[right..] {
        for l in 0..L {
            tail[l] += row[l];
        }
    }
    let h = grid.h();
    let weight = match functional {
        Functional::Trapezoidal => 0.5 * h,
        Functional::Rectangle => h,
    };
    let mut out = [0.0; L];
    for l in 0..L {
        out[l] = 1.0 - h * tail[l] - weight * at_zero[l];
    }
    Ok(out)
}

/// Exact loss given the terminal value `m_t` of the common driving noise.
pub fn exact_loss_sample(params: &ModelParams, m_t: f64) -> f64 {
    let spread = libm::sqrt((1.0 - params.rho) * params.t);
    normal_cdf((-params.x0 - params.mu * params.t - libm::sqrt(params.rho) * m_t) / spread)
}

/// Expected exact loss, `Phi((-x0 - mu T) / sqrt(T))`.
pub fn exact_expected_loss(params: &ModelParams) -> f64 {
    normal_cdf((-params.x0 - params.mu * params.t) / libm::sqrt(params.t))
}

/// Exact density at time `T` for a given terminal noise value.
pub fn exact_density(params: &ModelParams, m_t: f64, x: f64) -> f64 {
    let var = (1.0 - params.rho) * params.t;
    let centre = params.x0 + params.mu * params.t + libm::sqrt(params.rho) * m_t;
    let d = x - centre;
    libm::exp(-d * d / (2.0 * var)) / libm::sqrt(2.0 * core::f64::consts::PI * var)
}
