use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::analysis::k0_bound;
use crate::coupling::LevelPair;
use crate::error::{Error, Result};

use super::index_set::{build_triangular_index_set, build_union_index_set, IndexSet, Triangle};
use super::LevelStats;

/// Exponent applied to `1 - alpha^2` in the sample allocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BudgetExponent {
    /// `(1 - alpha^2)^-1`, which meets `Var <= (1 - alpha^2) eps^2` with equality.
    #[default]
    Implied,
    /// `(1 - alpha^2)^-2`, as printed alongside the allocation formula.
    Printed,
}

impl BudgetExponent {
    pub fn factor(self, alpha: f64) -> f64 {
        let base = 1.0 - alpha * alpha;
        match self {
            BudgetExponent::Implied => 1.0 / base,
            BudgetExponent::Printed => 1.0 / (base * base),
        }
    }
}

/// Constants entering the level caps and the admissible `k0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapConstants {
    pub t: f64,
    pub h0: f64,
    /// Constant of the strong error bound `C (h^2 + k)`.
    pub error_constant: f64,
    /// `C0` of the error-expansion condition.
    pub c0: f64,
    /// `beta` of the error-expansion condition.
    pub beta: f64,
}

impl Default for CapConstants {
    fn default() -> Self {
        Self { t: 5.0, h0: 1.0, error_constant: 1.0, c0: 1.0, beta: 0.05 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct K0AndCaps {
    pub k0: f64,
    pub caps: LevelPair,
}

fn check_accuracy(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidAccuracy(epsilon))
    }
}

fn cap(r: f64, alpha: f64, epsilon: f64, scale: f64) -> u32 {
    let raw = 0.5 * (1.0 + r) * libm::log2(1.0 / (alpha * epsilon)) + 0.5 * libm::log2(scale);
    libm::fmax(libm::ceil(raw - 1e-12), 0.0) as u32
}

/// Smallest caps with `C h^2 <= (alpha eps)^(1+r)` and `C k <= (alpha eps)^(1+r)` for a given `k0`.
pub fn level_caps(epsilon: f64, alpha: f64, r: f64, k0: f64, consts: &CapConstants) -> Result<LevelPair> {
    check_accuracy(epsilon)?;
    let c = consts.error_constant;
    Ok(LevelPair::new(cap(r, alpha, epsilon, c * consts.h0 * consts.h0), cap(r, alpha, epsilon, c * k0)))
}

/// `k0` with `theta^(T/k0) = eps^(2(1+r))`, lowered to satisfy the error-expansion condition at the
/// spatial cap and then rounded down to divide `T`; caps follow for that `k0`.
pub fn choose_k0_and_caps(epsilon: f64, alpha: f64, r: f64, theta: f64, consts: &CapConstants) -> Result<K0AndCaps> {
    check_accuracy(epsilon)?;
    if !(alpha > 0.0 && alpha < 1.0 && r > 0.0 && theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidArgument("need 0 < alpha < 1, r > 0 and 0 < theta < 1"));
    }
    let from_decay = consts.t * libm::log2(1.0 / theta) / (2.0 * (1.0 + r) * libm::log2(1.0 / epsilon));
    let l1_cap = level_caps(epsilon, alpha, r, from_decay, consts)?.l1;
    let admissible = k0_bound(consts.h0, l1_cap, theta, consts.c0, consts.beta, consts.t);
    let target = libm::fmin(from_decay, admissible);
    let steps = libm::ceil(consts.t / target - 1e-9);
    let k0 = consts.t / steps;
    Ok(K0AndCaps { k0, caps: level_caps(epsilon, alpha, r, k0, consts)? })
}

/// `l* = log2(8 C1 h0^2 k0 / (3 alpha eps)) / 3`, floored at zero.
pub fn choose_l_star(c1: f64, h0: f64, k0: f64, alpha: f64, epsilon: f64) -> f64 {
    libm::fmax(libm::log2(8.0 * c1 * h0 * h0 * k0 / (3.0 * alpha * epsilon)) / 3.0, 0.0)
}

/// Sample counts `M_l = ceil(factor eps^-2 (sum sqrt(V W)) sqrt(V_l / W_l))`, at least one.
pub fn allocate_samples(
    index_set: &IndexSet,
    stats: &BTreeMap<LevelPair, LevelStats>,
    epsilon: f64,
    alpha: f64,
    exponent: BudgetExponent,
) -> Result<BTreeMap<LevelPair, u64>> {
    check_accuracy(epsilon)?;
    let mut vw = Vec::with_capacity(index_set.len());
    for pair in index_set.members() {
        let s = stats.get(&pair).filter(|s| s.count >= 2).ok_or(Error::MissingPilot { l1: pair.l1, l2: pair.l2 })?;
        vw.push((pair, s.variance(), s.avg_cost()));
    }
    Ok(allocate_from_moments(&vw, epsilon, alpha, exponent))
}

pub(crate) fn allocate_from_moments(
    moments: &[(LevelPair, f64, f64)],
    epsilon: f64,
    alpha: f64,
    exponent: BudgetExponent,
) -> BTreeMap<LevelPair, u64> {
    let total: f64 = moments.iter().map(|(_, v, w)| libm::sqrt(v * w)).sum();
    let scale = exponent.factor(alpha) / (epsilon * epsilon) * total;
    moments
        .iter()
        .map(|&(pair, v, w)| {
            let m = if w > 0.0 { libm::ceil(scale * libm::sqrt(v / w)) } else { 1.0 };
            (pair, if m >= 1.0 { m as u64 } else { 1 })
        })
        .collect()
}

/// Modeled total work `factor eps^-2 (sum sqrt(V W))^2 + sum W`.
pub fn modeled_work(moments: &[(f64, f64)], epsilon: f64, alpha: f64, exponent: BudgetExponent) -> f64 {
    let total: f64 = moments.iter().map(|(v, w)| libm::sqrt(v * w)).sum();
    let fixed: f64 = moments.iter().map(|(_, w)| w).sum();
    exponent.factor(alpha) / (epsilon * epsilon) * total * total + fixed
}

/// Minimises `cost` over `alpha`: a scan of `0.01, 0.02, .., 0.99` then golden-section refinement
/// between the neighbours of the best grid point.
pub fn optimize_alpha(cost: impl Fn(f64) -> f64) -> f64 {
    let grid = |i: usize| i as f64 / 100.0;
    let mut best = (grid(1), cost(grid(1)));
    for i in 2..=99 {
        let c = cost(grid(i));
        if c < best.1 {
            best = (grid(i), c);
        }
    }
    let (mut lo, mut hi) = (libm::fmax(best.0 - 0.01, 0.01), libm::fmin(best.0 + 0.01, 0.99));
    let ratio = 0.5 * (libm::sqrt(5.0) - 1.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (cost(x1), cost(x2));
    for _ in 0..40 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = cost(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = cost(x2);
        }
    }
    let refined = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    if refined.1 < best.1 {
        refined.0
    } else {
        best.0
    }
}

/// Modeled bias `|sum of E over the caps box outside the set|`.
pub fn excluded_bias(set: &IndexSet, mean: impl Fn(LevelPair) -> f64) -> f64 {
    libm::fabs(set.excluded().map(mean).sum::<f64>())
}

/// Candidate thresholds: the distinct values of `tri.level` over the caps box, ascending.
fn thresholds(caps: LevelPair, level: impl Fn(LevelPair) -> f64, keep: impl Fn(LevelPair) -> bool) -> Vec<f64> {
    let mut out: Vec<f64> = (0..=caps.l1)
        .flat_map(|a| (0..=caps.l2).map(move |b| LevelPair::new(a, b)))
        .filter(|p| keep(*p))
        .map(level)
        .collect();
    out.push(0.0);
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| libm::fabs(*a - *b) < 1e-12);
    out
}

/// Smallest triangular set whose excluded modeled mean satisfies the bias budget.
pub fn minimal_triangular_set(
    weights: (f64, f64),
    caps: LevelPair,
    budget: f64,
    mean: impl Fn(LevelPair) -> f64,
) -> Result<IndexSet> {
    let probe = Triangle::from_weights(weights.0, weights.1, 0.0)?;
    let mut last = None;
    for l_star in thresholds(caps, |p| probe.level(p), |_| true) {
        let set = build_triangular_index_set(weights.0, weights.1, l_star, caps)?;
        if excluded_bias(&set, &mean) <= budget {
            return Ok(set);
        }
        last = Some(set);
    }
    last.ok_or(Error::InvalidArgument("empty caps box"))
}

/// Cheapest union set meeting the bias budget, searching every pair of per-half thresholds.
pub fn minimal_union_set(
    lower_weights: (f64, f64),
    upper_weights: (f64, f64),
    caps: LevelPair,
    budget: f64,
    mean: impl Fn(LevelPair) -> f64,
    cost: impl Fn(&IndexSet) -> f64,
) -> Result<IndexSet> {
    let lower0 = Triangle::from_weights(lower_weights.0, lower_weights.1, 0.0)?;
    let upper0 = Triangle::from_weights(upper_weights.0, upper_weights.1, 0.0)?;
    let lows = thresholds(caps, |p| lower0.level(p), |p| p.l1 <= p.l2);
    let ups = thresholds(caps, |p| upper0.level(p), |p| p.l1 > p.l2);
    let mut best: Option<(f64, IndexSet)> = None;
    let mut fallback = None;
    for &a in &lows {
        for &b in &ups {
            let set = build_union_index_set(Triangle { l_star: a, ..lower0 }, Triangle { l_star: b, ..upper0 }, caps);
            if excluded_bias(&set, &mean) <= budget {
                let c = cost(&set);
                match &best {
                    Some((cheapest, _)) if *cheapest <= c => {}
                    _ => best = Some((c, set)),
                }
            } else {
                fallback = Some(set);
            }
        }
    }
    match best {
        Some((_, set)) => Ok(set),
        None => fallback.ok_or(Error::InvalidArgument("empty caps box")),
    }
}
