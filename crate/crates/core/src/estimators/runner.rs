use alloc::collections::btree_map::Entry;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::coupling::{Increment, IncrementSource, LevelPair, Phase};
use crate::error::{Error, Result};
use crate::math::fit_line;
use crate::spde::Functional;

use super::index_set::{IndexSet, IndexShape};
use super::planning::{
    allocate_from_moments, choose_k0_and_caps, choose_l_star, level_caps, minimal_triangular_set, minimal_union_set,
    modeled_work, optimize_alpha, BudgetExponent, CapConstants,
};
use super::rates::{theory_weights, RateConstants, RateModel};
use super::LevelStats;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaChoice {
    Fixed(f64),
    Optimize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum K0Choice {
    Fixed(f64),
    Auto,
}

/// Source of the profit weights that shape the index set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightChoice {
    /// Weights implied by the proven convergence rates.
    #[default]
    Theory,
    /// Weights of the planes fitted to the pilot run.
    Fitted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Mimc,
    Mlmc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorSettings {
    pub epsilon: f64,
    pub alpha: AlphaChoice,
    pub r: f64,
    pub exponent: BudgetExponent,
    /// `t` and `h0` are taken from the sampler; the remaining constants from here.
    pub caps: CapConstants,
    pub pilot_samples: u64,
    /// Pilot levels cover `[0, extent]^2` (MIMC) or `0..=extent` (MLMC).
    pub pilot_extent: u32,
    pub weights: WeightChoice,
    /// Ceiling on the projected main-phase work units.
    pub max_work: Option<f64>,
}

impl Default for EstimatorSettings {
    fn default() -> Self {
        Self {
            epsilon: 1e-3,
            alpha: AlphaChoice::Optimize,
            r: 0.1,
            exponent: BudgetExponent::Implied,
            caps: CapConstants::default(),
            pilot_samples: 200,
            pilot_extent: 3,
            weights: WeightChoice::Theory,
            max_work: None,
        }
    }
}

/// Resolves the base time step before a sampler is built.
pub fn resolve_k0(choice: K0Choice, settings: &EstimatorSettings, t: f64, h0: f64, theta: f64) -> Result<f64> {
    match choice {
        K0Choice::Fixed(k0) if k0 > 0.0 => Ok(k0),
        K0Choice::Fixed(_) => Err(Error::InvalidArgument("k0 must be positive")),
        K0Choice::Auto => {
            let alpha = match settings.alpha {
                AlphaChoice::Fixed(a) => a,
                AlphaChoice::Optimize => 0.5,
            };
            let consts = CapConstants { t, h0, ..settings.caps };
            Ok(choose_k0_and_caps(settings.epsilon, alpha, settings.r, theta, &consts)?.k0)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorPlan {
    pub method: Method,
    pub index_set: IndexSet,
    pub samples: BTreeMap<LevelPair, u64>,
    pub alpha: f64,
    pub epsilon: f64,
    pub k0: f64,
    pub constants: RateConstants,
    /// Threshold of the selected set (top level for the single-index method).
    pub l_star: f64,
    /// Threshold given by the closed-form rule for the space-first scheme.
    pub l_star_closed_form: f64,
    pub modeled_work: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub value: f64,
    pub est_variance: f64,
    pub est_bias: f64,
    /// Main-phase work units.
    pub work_units: f64,
    pub pilot_work_units: f64,
    pub per_level: Vec<LevelStats>,
    pub pilot: Vec<LevelStats>,
    pub plan: EstimatorPlan,
}

fn check_common<S: IncrementSource>(settings: &EstimatorSettings, source: &S) -> Result<CapConstants> {
    let params = source.params();
    if !params.is_stable() {
        return Err(Error::StabilityViolation { rho: params.rho });
    }
    if !(settings.epsilon > 0.0 && settings.epsilon < 1.0) {
        return Err(Error::InvalidAccuracy(settings.epsilon));
    }
    if settings.pilot_samples < 2 {
        return Err(Error::InvalidArgument("pilot needs at least two samples per level"));
    }
    if let AlphaChoice::Fixed(a) = settings.alpha {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::InvalidArgument("alpha must lie in (0, 1)"));
        }
    }
    Ok(CapConstants { t: params.t, h0: source.base().h0, ..settings.caps })
}

fn pick_alpha(choice: AlphaChoice, cost: impl Fn(f64) -> f64) -> f64 {
    match choice {
        AlphaChoice::Fixed(a) => a,
        AlphaChoice::Optimize => optimize_alpha(cost),
    }
}

/// Per-level moments over a box of levels: variance (measured where possible) and exact work.
struct LevelTable {
    width: usize,
    rows: Vec<(f64, f64)>,
}

impl LevelTable {
    fn get(&self, p: LevelPair) -> (f64, f64) {
        self.rows[p.l2 as usize * self.width + p.l1 as usize]
    }
}

fn run_main<S: IncrementSource>(
    source: &S,
    samples: &BTreeMap<LevelPair, u64>,
    increment: impl Fn(LevelPair) -> Increment,
    pilot: &BTreeMap<LevelPair, LevelStats>,
) -> Result<(Vec<LevelStats>, f64, f64)> {
    let mut per_level = Vec::with_capacity(samples.len());
    let mut value = 0.0;
    let mut variance = 0.0;
    for (&pair, &m) in samples {
        let stats = source.accumulate(increment(pair), Phase::Main, 0, m)?;
        let v = if stats.count >= 2 { stats.variance() } else { pilot[&pair].variance() };
        value += stats.mean;
        variance += v / m as f64;
        per_level.push(stats);
    }
    Ok((per_level, value, variance))
}

fn check_budget(projected: f64, ceiling: Option<f64>) -> Result<()> {
    match ceiling {
        Some(c) if projected > c => Err(Error::BudgetExceeded { projected, ceiling: c }),
        _ => Ok(()),
    }
}

/// Multi-index estimator over mixed differences.
pub fn run_mimc<S: IncrementSource>(settings: &EstimatorSettings, source: &S) -> Result<EstimateReport> {
    let consts = check_common(settings, source)?;
    let (eps, r, exponent) = (settings.epsilon, settings.r, settings.exponent);
    let k0 = source.base().k0;
    let n = settings.pilot_samples;

    let mut pilot = BTreeMap::new();
    let e = settings.pilot_extent.max(1);
    for l1 in 0..=e {
        for l2 in 0..=e {
            let pair = LevelPair::new(l1, l2);
            pilot.insert(pair, source.accumulate(Increment::Mixed(pair), Phase::Pilot, 0, n)?);
        }
    }
    let split = source.functional() == Functional::Rectangle;
    let model = RateModel::calibrate(&pilot, split, consts.h0, k0)?;
    let (lower_w, upper_w) = match settings.weights {
        WeightChoice::Theory => theory_weights(source.scheme(), source.functional()),
        WeightChoice::Fitted => {
            (model.profit_weights(LevelPair::new(0, 1)), model.profit_weights(LevelPair::new(1, 0)))
        }
    };

    // Moments over the widest caps any alpha can produce.
    let widest = level_caps(eps, 0.01, r, k0, &consts)?;
    let width = widest.l1 as usize + 1;
    let mut rows = Vec::with_capacity(width * (widest.l2 as usize + 1));
    for l2 in 0..=widest.l2 {
        for l1 in 0..width as u32 {
            let pair = LevelPair::new(l1, l2);
            let v = match pilot.get(&pair) {
                Some(s) if s.variance() > 0.0 => s.variance(),
                _ => model.variance_at(pair),
            };
            rows.push((v, source.unit_cost(Increment::Mixed(pair))?));
        }
    }
    let table = LevelTable { width, rows };
    let set_work = |set: &IndexSet, alpha: f64| {
        let moments: Vec<(f64, f64)> = set.members().map(|p| table.get(p)).collect();
        modeled_work(&moments, eps, alpha, exponent)
    };
    let plan_for = |alpha: f64| -> Result<(IndexSet, f64)> {
        let caps = level_caps(eps, alpha, r, k0, &consts)?;
        let mean = |p: LevelPair| model.mean_at(p);
        let set = if split {
            minimal_union_set(lower_w, upper_w, caps, alpha * eps, mean, |s| set_work(s, alpha))?
        } else {
            minimal_triangular_set(lower_w, caps, alpha * eps, mean)?
        };
        let work = set_work(&set, alpha);
        Ok((set, work))
    };
    let alpha = pick_alpha(settings.alpha, |a| plan_for(a).map_or(f64::INFINITY, |p| p.1));
    let (set, work) = plan_for(alpha)?;

    for pair in set.members() {
        if let Entry::Vacant(slot) = pilot.entry(pair) {
            slot.insert(source.accumulate(Increment::Mixed(pair), Phase::Pilot, 0, n)?);
        }
    }
    let moments: Vec<(LevelPair, f64, f64)> =
        set.members().map(|p| (p, pilot[&p].variance(), pilot[&p].avg_cost())).collect();
    let samples = allocate_from_moments(&moments, eps, alpha, exponent);
    let projected: f64 = moments.iter().map(|(p, _, w)| samples[p] as f64 * w).sum();
    check_budget(projected, settings.max_work)?;

    let (per_level, value, est_variance) = run_main(source, &samples, Increment::Mixed, &pilot)?;
    let main: BTreeMap<LevelPair, &LevelStats> = per_level.iter().map(|s| (s.pair, s)).collect();
    let est_bias: f64 = set
        .margin()
        .iter()
        .map(|q| {
            let plane = model.mean.plane(*q);
            let from_space =
                q.l1.checked_sub(1)
                    .map(|l1| LevelPair::new(l1, q.l2))
                    .and_then(|p| main.get(&p))
                    .map(|s| libm::fabs(s.mean) * libm::exp2(-plane.rate1));
            let from_time =
                q.l2.checked_sub(1)
                    .map(|l2| LevelPair::new(q.l1, l2))
                    .and_then(|p| main.get(&p))
                    .map(|s| libm::fabs(s.mean) * libm::exp2(-plane.rate2));
            libm::fmax(from_space.unwrap_or(0.0), from_time.unwrap_or(0.0))
        })
        .sum();
    let l_star = match set.shape {
        IndexShape::Triangular(t) => t.l_star,
        IndexShape::Union { lower, upper } => libm::fmax(lower.l_star, upper.l_star),
        _ => f64::NAN,
    };
    let plan = EstimatorPlan {
        method: Method::Mimc,
        index_set: set,
        samples,
        alpha,
        epsilon: eps,
        k0,
        constants: model.constants,
        l_star,
        l_star_closed_form: choose_l_star(model.constants.c1, consts.h0, k0, alpha, eps),
        modeled_work: work,
    };
    Ok(report(value, est_variance, est_bias, per_level, pilot, plan))
}

fn report(
    value: f64,
    est_variance: f64,
    est_bias: f64,
    per_level: Vec<LevelStats>,
    pilot: BTreeMap<LevelPair, LevelStats>,
    plan: EstimatorPlan,
) -> EstimateReport {
    EstimateReport {
        value,
        est_variance,
        est_bias,
        work_units: per_level.iter().map(|s| s.total_cost()).sum(),
        pilot_work_units: pilot.values().map(|s| s.total_cost()).sum(),
        per_level,
        pilot: pilot.into_values().collect(),
        plan,
    }
}

/// Single-index estimator over the diagonal levels `(l, l)`.
pub fn run_mlmc<S: IncrementSource>(settings: &EstimatorSettings, source: &S) -> Result<EstimateReport> {
    let consts = check_common(settings, source)?;
    let (eps, r, exponent) = (settings.epsilon, settings.r, settings.exponent);
    let k0 = source.base().k0;
    let n = settings.pilot_samples;
    let diag = |l: u32| LevelPair::new(l, l);
    let increment = |p: LevelPair| Increment::Diagonal(p.l1);

    let e = settings.pilot_extent.max(2);
    let mut pilot = BTreeMap::new();
    for l in 0..=e {
        pilot.insert(diag(l), source.accumulate(Increment::Diagonal(l), Phase::Pilot, 0, n)?);
    }
    let usable: Vec<&LevelStats> =
        pilot.values().filter(|s| s.pair.l1 > 0 && s.mean != 0.0 && s.variance() > 0.0).collect();
    let ls: Vec<f64> = usable.iter().map(|s| s.pair.l1 as f64).collect();
    let fit = |ys: Vec<f64>| fit_line(&ls, &ys).ok_or(Error::InvalidArgument("pilot levels are degenerate"));
    let (e0, e_slope) = fit(usable.iter().map(|s| libm::log2(libm::fabs(s.mean))).collect())?;
    let (v0, v_slope) = fit(usable.iter().map(|s| libm::log2(s.variance())).collect())?;
    let mean_at = |l: u32| libm::exp2(e0 + e_slope * l as f64);

    let widest = level_caps(eps, 0.01, r, k0, &consts)?;
    let top = widest.l1.max(widest.l2);
    let mut rows = Vec::with_capacity(top as usize + 1);
    for l in 0..=top {
        let v = match pilot.get(&diag(l)) {
            Some(s) if s.variance() > 0.0 => s.variance(),
            _ => libm::exp2(v0 + v_slope * l as f64),
        };
        rows.push((v, source.unit_cost(Increment::Diagonal(l))?));
    }
    let plan_for = |alpha: f64| -> Result<(u32, f64)> {
        let caps = level_caps(eps, alpha, r, k0, &consts)?;
        let cap = caps.l1.max(caps.l2);
        let mut chosen = cap;
        for last in 0..=cap {
            let tail: f64 = (last + 1..=cap).map(mean_at).sum();
            if tail <= alpha * eps {
                chosen = last;
                break;
            }
        }
        Ok((chosen, modeled_work(&rows[..=chosen as usize], eps, alpha, exponent)))
    };
    let alpha = pick_alpha(settings.alpha, |a| plan_for(a).map_or(f64::INFINITY, |p| p.1));
    let (last, work) = plan_for(alpha)?;

    for l in 0..=last {
        if let Entry::Vacant(slot) = pilot.entry(diag(l)) {
            slot.insert(source.accumulate(Increment::Diagonal(l), Phase::Pilot, 0, n)?);
        }
    }
    let moments: Vec<(LevelPair, f64, f64)> =
        (0..=last).map(|l| (diag(l), pilot[&diag(l)].variance(), pilot[&diag(l)].avg_cost())).collect();
    let samples = allocate_from_moments(&moments, eps, alpha, exponent);
    let projected: f64 = moments.iter().map(|(p, _, w)| samples[p] as f64 * w).sum();
    check_budget(projected, settings.max_work)?;

    let (per_level, value, est_variance) = run_main(source, &samples, increment, &pilot)?;
    let finest = per_level.last().map_or(0.0, |s| libm::fabs(s.mean));
    let est_bias = finest * libm::exp2(e_slope);
    let plan = EstimatorPlan {
        method: Method::Mlmc,
        index_set: IndexSet::diagonal(last),
        samples,
        alpha,
        epsilon: eps,
        k0,
        // Fitted level-zero intercepts of the mean, variance and work lines.
        constants: RateConstants { c1: libm::exp2(e0), c2: libm::exp2(v0), c3: rows[0].1 },
        l_star: last as f64,
        l_star_closed_form: f64::NAN,
        modeled_work: work,
    };
    Ok(report(value, est_variance, est_bias, per_level, pilot, plan))
}
