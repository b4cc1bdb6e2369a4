use core::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::spde::Scheme;

/// Fourier symbols of the difference operators at wave number `gamma` and mesh `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierSymbols {
    /// Symbol of the squared central difference, `-sin^2(gamma h) / (2 h^2)`.
    pub a: f64,
    /// Symbol of the second difference, `-2 sin^2(gamma h / 2) / h^2`.
    pub a_hat: f64,
    /// Imaginary part of the central difference symbol, `sin(gamma h) / h`.
    pub c: f64,
    /// `sin^2(gamma h / 2) / (gamma h / 2)^2`, in `[4/pi^2, 1]` for `|gamma h| <= pi`.
    pub u: f64,
}

impl FourierSymbols {
    pub fn at(gamma: f64, h: f64) -> Self {
        let s = libm::sin(gamma * h);
        let half = 0.5 * gamma * h;
        let sh = libm::sin(half);
        let u = if half == 0.0 { 1.0 } else { (sh * sh) / (half * half) };
        Self { a: -s * s / (2.0 * h * h), a_hat: -2.0 * sh * sh / (h * h), c: s / h, u }
    }

    /// Symbol multiplying the Milstein correction for the given scheme.
    pub fn milstein(&self, scheme: Scheme) -> f64 {
        match scheme {
            Scheme::A => self.a,
            Scheme::B => self.a_hat,
        }
    }
}

/// Complex one-step amplification `(re, im)` of a plane wave, drift included:
/// `(1 - i c sqrt(rho k) z + m rho k (z^2 - 1)) / (1 - a_hat k + i mu k c)`.
pub fn amplification_factor(scheme: Scheme, gamma: f64, h: f64, k: f64, mu: f64, rho: f64, z: f64) -> (f64, f64) {
    let s = FourierSymbols::at(gamma, h);
    let nr = 1.0 + s.milstein(scheme) * rho * k * (z * z - 1.0);
    let ni = -s.c * libm::sqrt(rho * k) * z;
    let dr = 1.0 - s.a_hat * k;
    let di = mu * k * s.c;
    let den = dr * dr + di * di;
    ((nr * dr + ni * di) / den, (ni * dr - nr * di) / den)
}

/// Mean-square amplification `E|factor|^2` over `z ~ N(0,1)` for zero drift,
/// `(1 + c^2 rho k + 2 m^2 rho^2 k^2) / (1 - a_hat k)^2`.
pub fn mean_square_factor(scheme: Scheme, gamma: f64, h: f64, k: f64, rho: f64) -> f64 {
    let s = FourierSymbols::at(gamma, h);
    let m = s.milstein(scheme);
    let den = 1.0 - s.a_hat * k;
    (1.0 + s.c * s.c * rho * k + 2.0 * m * m * rho * rho * k * k) / (den * den)
}

/// The high-wave mean-square factor `f` of the space-first scheme, written with `lambda = k / h^2`.
pub fn amplification_mean_square(gamma: f64, h: f64, k: f64, rho: f64) -> f64 {
    f_of_xi(gamma * h, k / (h * h), rho)
}

pub(crate) fn f_of_xi(xi: f64, lambda: f64, rho: f64) -> f64 {
    let s2 = libm::sin(xi) * libm::sin(xi);
    let d = libm::sin(0.5 * xi) * libm::sin(0.5 * xi);
    let num = 1.0 + rho * lambda * s2 + 0.5 * rho * rho * lambda * lambda * s2 * s2;
    let den = 1.0 + 4.0 * lambda * d + 4.0 * lambda * lambda * d * d;
    num / den
}

/// Upper envelope `g >= f` obtained by dropping the cosine factors.
pub fn bound_g(gamma: f64, h: f64, k: f64, rho: f64) -> f64 {
    let lambda = k / (h * h);
    let d = libm::sin(0.5 * gamma * h) * libm::sin(0.5 * gamma * h);
    (1.0 + 4.0 * rho * lambda * d + 8.0 * rho * rho * lambda * lambda * d * d)
        / (1.0 + 4.0 * lambda * d + 4.0 * lambda * lambda * d * d)
}

/// `q(rho, u) = (1 + rho u + rho^2 u^2 / 2) / (1 + u + u^2 / 4)`.
pub fn q(rho: f64, u: f64) -> f64 {
    (1.0 + rho * u + 0.5 * rho * rho * u * u) / (1.0 + u + 0.25 * u * u)
}

/// Envelope bound at `gamma = k^(-1/2)` for `rho <= 1/2`.
pub fn theta_bound_moderate() -> f64 {
    q(0.5, 4.0 / (PI * PI))
}

/// Envelope bound at `gamma = k^(-1/2)` for `rho <= 1/sqrt(2)`.
pub fn theta_bound_strong() -> f64 {
    q(FRAC_1_SQRT_2, 4.0 / (PI * PI))
}

/// Envelope value at `gamma = pi / h` with `lambda = 1`, `rho = 1/sqrt(2)`.
pub fn theta_bound_nyquist() -> f64 {
    let rho = FRAC_1_SQRT_2;
    (1.0 + 4.0 * rho + 8.0 * rho * rho) / 9.0
}

/// Mean-square stability of both implicit schemes.
pub fn stability_check(rho: f64) -> bool {
    rho <= FRAC_1_SQRT_2 + 1e-15
}
