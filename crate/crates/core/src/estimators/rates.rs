use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::coupling::LevelPair;
use crate::error::{Error, Result};
use crate::math::fit_plane;
use crate::spde::{Functional, Scheme};

use super::LevelStats;

/// `log2 y ≈ intercept - rate1 * l1 - rate2 * l2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneFit {
    pub intercept: f64,
    pub rate1: f64,
    pub rate2: f64,
}

impl PlaneFit {
    pub fn log2_at(&self, pair: LevelPair) -> f64 {
        self.intercept - self.rate1 * pair.l1 as f64 - self.rate2 * pair.l2 as f64
    }

    /// Least squares over `(pair, log2 value)` points; `None` if the points are degenerate.
    pub fn fit(points: &[(LevelPair, f64)]) -> Option<Self> {
        let rows: Vec<(f64, f64, f64)> = points.iter().map(|(p, y)| (p.l1 as f64, p.l2 as f64, *y)).collect();
        fit_plane(&rows).map(|c| Self { intercept: c[0], rate1: -c[1], rate2: -c[2] })
    }
}

/// A fit that may differ on the two sides of the diagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Piecewise {
    Single(PlaneFit),
    /// `lower` for `l1 <= l2`, `upper` for `l1 > l2`.
    Split {
        lower: PlaneFit,
        upper: PlaneFit,
    },
}

impl Piecewise {
    pub fn plane(&self, pair: LevelPair) -> &PlaneFit {
        match self {
            Piecewise::Single(p) => p,
            Piecewise::Split { lower, upper } => {
                if pair.l1 <= pair.l2 {
                    lower
                } else {
                    upper
                }
            }
        }
    }

    pub fn log2_at(&self, pair: LevelPair) -> f64 {
        self.plane(pair).log2_at(pair)
    }
}

/// Constants of the bounds `|E| <= C1 h^2 k`, `V <= C2 h^4 k^2`, `W <= C3 / (h k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

/// Rate model calibrated on pilot statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct RateModel {
    pub mean: Piecewise,
    pub variance: Piecewise,
    pub work: PlaneFit,
    pub constants: RateConstants,
}

fn usable(s: &LevelStats) -> bool {
    s.count >= 2 && s.mean != 0.0 && s.variance() > 0.0 && s.avg_cost() > 0.0
}

fn half_fit(points: &[(LevelPair, f64)], pick: impl Fn(LevelPair) -> bool) -> Result<PlaneFit> {
    let chosen: Vec<(LevelPair, f64)> = points.iter().copied().filter(|(p, _)| pick(*p)).collect();
    PlaneFit::fit(&chosen).ok_or(Error::InvalidArgument("pilot levels do not span both directions"))
}

fn piecewise(points: &[(LevelPair, f64)], split: bool) -> Result<Piecewise> {
    if split {
        Ok(Piecewise::Split { lower: half_fit(points, |p| p.l1 <= p.l2)?, upper: half_fit(points, |p| p.l1 > p.l2)? })
    } else {
        Ok(Piecewise::Single(half_fit(points, |_| true)?))
    }
}

/// Mean of `log2 y + rate . l` over the points: the log2 constant of a fixed-rate model.
fn fixed_rate_constant(points: &[(LevelPair, f64)], rate1: f64, rate2: f64) -> f64 {
    let sum: f64 = points.iter().map(|(p, y)| y + rate1 * p.l1 as f64 + rate2 * p.l2 as f64).sum();
    sum / points.len() as f64
}

impl RateModel {
    /// Least-squares calibration on every usable level except `(0, 0)`.
    ///
    /// With `split` the mean and variance planes are fitted separately on `l1 <= l2` and `l1 > l2`.
    pub fn calibrate(stats: &BTreeMap<LevelPair, LevelStats>, split: bool, h0: f64, k0: f64) -> Result<Self> {
        let use_: Vec<&LevelStats> = stats.values().filter(|s| s.pair != LevelPair::new(0, 0) && usable(s)).collect();
        let means: Vec<_> = use_.iter().map(|s| (s.pair, libm::log2(libm::fabs(s.mean)))).collect();
        let vars: Vec<_> = use_.iter().map(|s| (s.pair, libm::log2(s.variance()))).collect();
        let works: Vec<_> = use_.iter().map(|s| (s.pair, libm::log2(s.avg_cost()))).collect();
        let mean = piecewise(&means, split)?;
        let variance = piecewise(&vars, split)?;
        let work = half_fit(&works, |_| true)?;
        let (lh0, lk0) = (libm::log2(h0), libm::log2(k0));
        let constants = RateConstants {
            c1: libm::exp2(fixed_rate_constant(&means, 2.0, 2.0) - 2.0 * lh0 - lk0),
            c2: libm::exp2(fixed_rate_constant(&vars, 4.0, 4.0) - 4.0 * lh0 - 2.0 * lk0),
            c3: libm::exp2(fixed_rate_constant(&works, -1.0, -2.0) + lh0 + lk0),
        };
        Ok(Self { mean, variance, work, constants })
    }

    pub fn mean_at(&self, pair: LevelPair) -> f64 {
        libm::exp2(self.mean.log2_at(pair))
    }

    pub fn variance_at(&self, pair: LevelPair) -> f64 {
        libm::exp2(self.variance.log2_at(pair))
    }

    pub fn work_at(&self, pair: LevelPair) -> f64 {
        libm::exp2(self.work.log2_at(pair))
    }

    /// Modeled `log2 (E / sqrt(V W))`.
    pub fn log2_profit(&self, pair: LevelPair) -> f64 {
        self.mean.log2_at(pair) - 0.5 * (self.variance.log2_at(pair) + self.work.log2_at(pair))
    }

    /// Fitted profit weights `(w1, w2)` of the plane governing `pair`.
    pub fn profit_weights(&self, pair: LevelPair) -> (f64, f64) {
        let (m, v) = (self.mean.plane(pair), self.variance.plane(pair));
        (m.rate1 - 0.5 * (v.rate1 + self.work.rate1), m.rate2 - 0.5 * (v.rate2 + self.work.rate2))
    }
}

/// Profit weights implied by the proven rates.
///
/// For the rectangle functional the pair is `(l1 <= l2 half, l1 > l2 half)`.
pub fn theory_weights(scheme: Scheme, functional: Functional) -> ((f64, f64), (f64, f64)) {
    // E ~ 2^-(e . l), V ~ 2^-(v . l), W ~ 2^(l1 + 2 l2): w = e - (v - (1, 2)) / 2.
    let weights = |e: (f64, f64), v: (f64, f64)| (e.0 - 0.5 * (v.0 - 1.0), e.1 - 0.5 * (v.1 - 2.0));
    match (scheme, functional) {
        (Scheme::A, Functional::Trapezoidal) => {
            let w = weights((2.0, 2.0), (4.0, 4.0));
            (w, w)
        }
        (Scheme::B, Functional::Trapezoidal) => {
            let w = weights((2.0, 2.0), (4.0, 2.0));
            (w, w)
        }
        (_, Functional::Rectangle) => (weights((1.0, 2.0), (4.0, 2.0)), weights((1.0, 2.0), (2.0, 4.0))),
    }
}
