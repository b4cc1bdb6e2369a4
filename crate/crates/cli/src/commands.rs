//! The experiments behind each subcommand.
//!
//! Each `*_data` function returns the numbers; each `cmd_*` function also writes them as CSV
//! into the output directory. Wall-clock times go to separate `*_timing.csv` files so the
//! other files stay byte-identical across runs with the same seed.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use zakai_mimc_core::analysis::{compute_theta, profit_surface, ThetaResult};
use zakai_mimc_core::coupling::{Direction, Increment, IncrementSource, LevelPair, Phase};
use zakai_mimc_core::estimators::{self, run_mimc, run_mlmc, EstimateReport, LevelStats, Method, RateModel};
use zakai_mimc_core::math::fit_line;
use zakai_mimc_core::spde::Functional;
use zakai_mimc_core::Error as CoreError;

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::output::{real, Table};
use crate::parallel::ParallelSampler;

/// Base time step for `epsilon`: the configured one, or the automatic choice driven by theta.
///
/// When the theta iteration does not settle, its last estimate is used.
pub fn resolve_k0(cfg: &ExperimentConfig, epsilon: f64) -> CliResult<f64> {
    let choice = cfg.k0_choice();
    let theta = match choice {
        estimators::K0Choice::Fixed(_) => f64::NAN,
        estimators::K0Choice::Auto => theta_value(cfg, cfg.model.rho)?.theta,
    };
    let settings = cfg.estimator_settings(epsilon);
    Ok(estimators::resolve_k0(choice, &settings, cfg.model.t, cfg.grid.h0, theta)?)
}

fn theta_value(cfg: &ExperimentConfig, rho: f64) -> CliResult<ThetaResult> {
    match compute_theta(rho, cfg.model.t, &cfg.theta.settings()) {
        Ok(r) => Ok(r),
        Err(CoreError::NoConvergence { last, n }) => Ok(ThetaResult { theta: last, n_used: n, converged: false }),
        Err(e) => Err(e.into()),
    }
}

fn parallel_sampler(cfg: &ExperimentConfig, k0: f64) -> CliResult<ParallelSampler> {
    Ok(ParallelSampler::new(cfg.sampler(k0, cfg.global_seed)?))
}

fn first_epsilon(cfg: &ExperimentConfig) -> f64 {
    cfg.epsilon.values()[0]
}

fn write(table: &Table, dir: &Path, name: &str, written: &mut Vec<PathBuf>) -> CliResult<()> {
    written.push(table.write(dir, name)?);
    Ok(())
}

// ---------------------------------------------------------------- rates

/// Mixed-difference statistics on a box of levels.
#[derive(Debug, Clone)]
pub struct RateTable {
    pub stats: BTreeMap<LevelPair, LevelStats>,
}

/// Least-squares line through `log2` values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub intercept: f64,
    pub slope: f64,
}

impl RateTable {
    pub fn log2_abs_mean(&self, pair: LevelPair) -> f64 {
        self.stats[&pair].mean.abs().log2()
    }

    pub fn log2_variance(&self, pair: LevelPair) -> f64 {
        self.stats[&pair].variance().log2()
    }

    fn fit(
        &self,
        pick: impl Fn(LevelPair) -> Option<f64>,
        value: impl Fn(&Self, LevelPair) -> f64,
    ) -> Option<SlopeFit> {
        let (xs, ys): (Vec<f64>, Vec<f64>) =
            self.stats.keys().filter_map(|&p| pick(p).map(|x| (x, value(self, p)))).unzip();
        fit_line(&xs, &ys).map(|(intercept, slope)| SlopeFit { intercept, slope })
    }

    /// Slope of `log2 |mean|` against `l1 + l2` over every level in the table.
    pub fn diagonal_mean_slope(&self) -> Option<SlopeFit> {
        self.fit(|p| Some(p.total() as f64), Self::log2_abs_mean)
    }

    pub fn diagonal_variance_slope(&self) -> Option<SlopeFit> {
        self.fit(|p| Some(p.total() as f64), Self::log2_variance)
    }

    /// Slope of `log2 Var` along `direction` with the other level held at `fixed`.
    pub fn variance_slope_along(&self, direction: Direction, fixed: u32) -> Option<SlopeFit> {
        self.fit(
            |p| match direction {
                Direction::Space if p.l2 == fixed => Some(p.l1 as f64),
                Direction::Time if p.l1 == fixed => Some(p.l2 as f64),
                _ => None,
            },
            Self::log2_variance,
        )
    }
}

/// Samples the mixed differences at `pairs` with `samples` draws each.
pub fn rates_data(cfg: &ExperimentConfig, pairs: &[LevelPair], samples: u64) -> CliResult<RateTable> {
    let k0 = resolve_k0(cfg, first_epsilon(cfg))?;
    let sampler = parallel_sampler(cfg, k0)?;
    let mut stats = BTreeMap::new();
    for &pair in pairs {
        stats.insert(pair, sampler.accumulate(Increment::Mixed(pair), Phase::Rates, 0, samples)?);
    }
    Ok(RateTable { stats })
}

/// The square `[1, max]^2`.
pub fn rates_box(max: u32) -> Vec<LevelPair> {
    (1..=max).flat_map(|l1| (1..=max).map(move |l2| LevelPair::new(l1, l2))).collect()
}

pub fn cmd_rates(cfg: &ExperimentConfig) -> CliResult<Vec<PathBuf>> {
    let max = cfg.samples.rates_max_level;
    let table = rates_data(cfg, &rates_box(max), cfg.samples.rates)?;
    let mut grid =
        Table::new(&["l1", "l2", "samples", "mean", "variance", "avg_cost", "log2_abs_mean", "log2_variance"]);
    for (p, s) in &table.stats {
        grid.push(vec![
            p.l1.to_string(),
            p.l2.to_string(),
            s.count.to_string(),
            real(s.mean),
            real(s.variance()),
            real(s.avg_cost()),
            real(table.log2_abs_mean(*p)),
            real(table.log2_variance(*p)),
        ]);
    }
    let mid = max.div_ceil(2);
    let mut fits = Table::new(&["quantity", "along", "fixed_level", "slope", "intercept"]);
    let mut add = |name: &str, along: &str, fixed: String, fit: Option<SlopeFit>| {
        let (s, i) = fit.map_or((f64::NAN, f64::NAN), |f| (f.slope, f.intercept));
        fits.push(vec![name.into(), along.into(), fixed, real(s), real(i)]);
    };
    add("log2_abs_mean", "l1+l2", String::new(), table.diagonal_mean_slope());
    add("log2_variance", "l1+l2", String::new(), table.diagonal_variance_slope());
    add("log2_variance", "l2", format!("l1={mid}"), table.variance_slope_along(Direction::Time, mid));
    add("log2_variance", "l1", format!("l2={mid}"), table.variance_slope_along(Direction::Space, mid));
    let dir = &cfg.output_dir;
    let mut written = Vec::new();
    write(&grid, dir, "rates.csv", &mut written)?;
    write(&fits, dir, "rates_fit.csv", &mut written)?;
    Ok(written)
}

// ---------------------------------------------------------------- theta

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaRow {
    pub rho: f64,
    pub result: ThetaResult,
}

/// Theta over the configured correlation grid; unsettled iterations report their last estimate.
pub fn theta_data(cfg: &ExperimentConfig) -> CliResult<Vec<ThetaRow>> {
    cfg.theta.rho_grid.iter().map(|&rho| Ok(ThetaRow { rho, result: theta_value(cfg, rho)? })).collect()
}

pub fn cmd_theta(cfg: &ExperimentConfig) -> CliResult<Vec<PathBuf>> {
    let mut t = Table::new(&["rho", "theta", "steps", "converged"]);
    for row in theta_data(cfg)? {
        t.push(vec![
            real(row.rho),
            real(row.result.theta),
            row.result.n_used.to_string(),
            row.result.converged.to_string(),
        ]);
    }
    let mut written = Vec::new();
    write(&t, &cfg.output_dir, "theta.csv", &mut written)?;
    Ok(written)
}

// ---------------------------------------------------------------- estimate

/// One estimator run at `epsilon` with the configured method.
pub fn estimate_data(cfg: &ExperimentConfig, epsilon: f64) -> CliResult<EstimateReport> {
    let k0 = resolve_k0(cfg, epsilon)?;
    let sampler = parallel_sampler(cfg, k0)?;
    let settings = cfg.estimator_settings(epsilon);
    let report = match Method::from(cfg.method) {
        Method::Mimc => run_mimc(&settings, &sampler),
        Method::Mlmc => run_mlmc(&settings, &sampler),
    }?;
    Ok(report)
}

fn labels(cfg: &ExperimentConfig) -> Vec<String> {
    let method = match Method::from(cfg.method) {
        Method::Mimc => "mimc",
        Method::Mlmc => "mlmc",
    };
    let scheme = format!("{:?}", cfg.scheme).to_lowercase();
    let functional = match Functional::from(cfg.functional) {
        Functional::Trapezoidal => "trap",
        Functional::Rectangle => "rect",
    };
    vec![method.into(), scheme, functional.into()]
}

pub fn cmd_estimate(cfg: &ExperimentConfig) -> CliResult<(Vec<PathBuf>, Vec<EstimateReport>)> {
    let mut summary = Table::new(&[
        "method",
        "scheme",
        "functional",
        "epsilon",
        "value",
        "est_variance",
        "est_bias",
        "alpha",
        "k0",
        "l_star",
        "index_set_size",
        "modeled_work",
        "work_units",
        "pilot_work_units",
    ]);
    let mut levels = Table::new(&["epsilon", "l1", "l2", "samples", "mean", "variance", "avg_cost"]);
    let mut timing = Table::new(&["epsilon", "wall_seconds"]);
    let mut reports = Vec::new();
    for eps in cfg.epsilon.values() {
        let start = Instant::now();
        let r = estimate_data(cfg, eps)?;
        timing.push(vec![real(eps), real(start.elapsed().as_secs_f64())]);
        let mut row = labels(cfg);
        row.extend([
            real(eps),
            real(r.value),
            real(r.est_variance),
            real(r.est_bias),
            real(r.plan.alpha),
            real(r.plan.k0),
            real(r.plan.l_star),
            r.plan.index_set.len().to_string(),
            real(r.plan.modeled_work),
            real(r.work_units),
            real(r.pilot_work_units),
        ]);
        summary.push(row);
        for s in &r.per_level {
            levels.push(vec![
                real(eps),
                s.pair.l1.to_string(),
                s.pair.l2.to_string(),
                s.count.to_string(),
                real(s.mean),
                real(s.variance()),
                real(s.avg_cost()),
            ]);
        }
        reports.push(r);
    }
    let dir = &cfg.output_dir;
    let mut written = Vec::new();
    write(&summary, dir, "estimate.csv", &mut written)?;
    write(&levels, dir, "estimate_levels.csv", &mut written)?;
    write(&timing, dir, "estimate_timing.csv", &mut written)?;
    Ok((written, reports))
}

// ---------------------------------------------------------------- complexity

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityPoint {
    pub epsilon: f64,
    /// Main-phase work units, or the budget error for this point.
    pub outcome: Result<f64, CoreError>,
    pub wall_seconds: f64,
}

impl ComplexityPoint {
    pub fn scaled_work(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|w| self.epsilon * self.epsilon * w)
    }
}

/// Runs the estimator over the epsilon sweep; a point over budget is recorded, not fatal.
pub fn complexity_data(cfg: &ExperimentConfig) -> CliResult<Vec<ComplexityPoint>> {
    let mut points = Vec::new();
    for epsilon in cfg.epsilon.values() {
        let start = Instant::now();
        let outcome = match estimate_data(cfg, epsilon) {
            Ok(r) => Ok(r.work_units),
            Err(CliError::Core(e @ CoreError::BudgetExceeded { .. })) => Err(e),
            Err(e) => return Err(e),
        };
        points.push(ComplexityPoint { epsilon, outcome, wall_seconds: start.elapsed().as_secs_f64() });
    }
    Ok(points)
}

pub fn cmd_complexity(cfg: &ExperimentConfig) -> CliResult<(Vec<PathBuf>, Vec<ComplexityPoint>)> {
    let points = complexity_data(cfg)?;
    let mut t = Table::new(&["method", "scheme", "functional", "epsilon", "work_units", "eps2_work", "status"]);
    let mut timing = Table::new(&["method", "scheme", "functional", "epsilon", "wall_seconds"]);
    for p in &points {
        let (work, status) = match &p.outcome {
            Ok(w) => (*w, "ok"),
            Err(_) => (f64::NAN, "budget_exceeded"),
        };
        let mut row = labels(cfg);
        row.extend([real(p.epsilon), real(work), real(p.scaled_work().unwrap_or(f64::NAN)), status.into()]);
        t.push(row);
        let mut row = labels(cfg);
        row.extend([real(p.epsilon), real(p.wall_seconds)]);
        timing.push(row);
    }
    let mut written = Vec::new();
    write(&t, &cfg.output_dir, "complexity.csv", &mut written)?;
    write(&timing, &cfg.output_dir, "complexity_timing.csv", &mut written)?;
    Ok((written, points))
}

// ---------------------------------------------------------------- profit

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfitCell {
    pub pair: LevelPair,
    /// `|mean| / sqrt(var * cost)` from the pilot samples.
    pub measured: f64,
    /// The same ratio from the calibrated rate planes.
    pub modeled: f64,
}

/// Measured and modeled profit on the pilot box.
pub fn profit_data(cfg: &ExperimentConfig) -> CliResult<Vec<ProfitCell>> {
    let k0 = resolve_k0(cfg, first_epsilon(cfg))?;
    let sampler = parallel_sampler(cfg, k0)?;
    let extent = cfg.samples.pilot_extent.max(1);
    let mut stats = BTreeMap::new();
    for l1 in 0..=extent {
        for l2 in 0..=extent {
            let pair = LevelPair::new(l1, l2);
            stats.insert(pair, sampler.accumulate(Increment::Mixed(pair), Phase::Pilot, 0, cfg.samples.pilot)?);
        }
    }
    let split = Functional::from(cfg.functional) == Functional::Rectangle;
    let model = RateModel::calibrate(&stats, split, cfg.grid.h0, k0)?;
    let modeled = profit_surface(&model, LevelPair::new(extent, extent));
    Ok(stats
        .iter()
        .map(|(&pair, s)| ProfitCell {
            pair,
            measured: s.mean.abs() / (s.variance() * s.avg_cost()).sqrt(),
            modeled: modeled[&pair],
        })
        .collect())
}

pub fn cmd_profit(cfg: &ExperimentConfig) -> CliResult<Vec<PathBuf>> {
    let mut t = Table::new(&["l1", "l2", "measured_profit", "modeled_profit"]);
    for c in profit_data(cfg)? {
        t.push(vec![c.pair.l1.to_string(), c.pair.l2.to_string(), real(c.measured), real(c.modeled)]);
    }
    let mut written = Vec::new();
    write(&t, &cfg.output_dir, "profit.csv", &mut written)?;
    Ok(written)
}
