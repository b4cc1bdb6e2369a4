//! Experiment configuration, read from and written to TOML.
//!
//! Every field has a default, so an empty file (or no file at all) gives the baseline
//! credit-portfolio experiment. Scalars that may also be computed accept the string `"auto"`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use zakai_mimc_core::analysis::{stability_check, ThetaSettings};
use zakai_mimc_core::coupling::IncrementSampler;
use zakai_mimc_core::estimators::{
    AlphaChoice, BudgetExponent, CapConstants, EstimatorSettings, K0Choice, Method, WeightChoice,
};
use zakai_mimc_core::spde::{build_grid, BaseGrid, Functional, ModelParams, Scheme};
use zakai_mimc_core::Error as CoreError;

use crate::error::{CliError, CliResult};

/// Version of the file layout below; bump when a field changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Auto {
    Auto,
}

/// A number, or `"auto"` to let the runner pick it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AutoOr {
    Value(f64),
    Auto(Auto),
}

impl AutoOr {
    pub fn value(self) -> Option<f64> {
        match self {
            AutoOr::Value(v) => Some(v),
            AutoOr::Auto(_) => None,
        }
    }
}

/// One target accuracy or a sweep of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Epsilons {
    One(f64),
    Sweep(Vec<f64>),
}

impl Epsilons {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Epsilons::One(e) => vec![*e],
            Epsilons::Sweep(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SchemeName {
    A,
    B,
}

impl From<SchemeName> for Scheme {
    fn from(s: SchemeName) -> Self {
        match s {
            SchemeName::A => Scheme::A,
            SchemeName::B => Scheme::B,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FunctionalName {
    #[serde(alias = "trapezoidal")]
    #[value(alias = "trapezoidal")]
    Trap,
    #[serde(alias = "rectangle")]
    #[value(alias = "rectangle")]
    Rect,
}

impl From<FunctionalName> for Functional {
    fn from(f: FunctionalName) -> Self {
        match f {
            FunctionalName::Trap => Functional::Trapezoidal,
            FunctionalName::Rect => Functional::Rectangle,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MethodName {
    Mimc,
    Mlmc,
}

impl From<MethodName> for Method {
    fn from(m: MethodName) -> Self {
        match m {
            MethodName::Mimc => Method::Mimc,
            MethodName::Mlmc => Method::Mlmc,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightsName {
    Theory,
    Fitted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExponentName {
    Implied,
    Printed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub mu: f64,
    pub rho: f64,
    pub t: f64,
    pub x0: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        let m = ModelParams::baseline();
        Self { mu: m.mu, rho: m.rho, t: m.t, x0: m.x0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainSection {
    pub x_min: f64,
    pub x_max: f64,
}

impl Default for DomainSection {
    fn default() -> Self {
        Self { x_min: -10.0, x_max: 20.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub h0: f64,
    pub k0: AutoOr,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { h0: 1.0, k0: AutoOr::Value(0.25) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleCaps {
    /// Samples per level of the rate tables.
    pub rates: u64,
    /// Largest level of each direction in the rate tables.
    pub rates_max_level: u32,
    /// Pilot samples per level.
    pub pilot: u64,
    /// Pilot box `[0, extent]^2`.
    pub pilot_extent: u32,
    /// Abort when the projected main-phase work exceeds this many units.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_work: Option<f64>,
}

impl Default for SampleCaps {
    fn default() -> Self {
        Self { rates: 10_000, rates_max_level: 5, pilot: 200, pilot_extent: 3, max_work: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThetaSection {
    pub lambda: f64,
    pub p: f64,
    pub steps: Vec<usize>,
    pub tolerance: f64,
    pub quadrature_tolerance: f64,
    /// Correlations swept by the `theta` command.
    pub rho_grid: Vec<f64>,
}

impl Default for ThetaSection {
    fn default() -> Self {
        let s = ThetaSettings::default();
        Self {
            lambda: s.lambda,
            p: s.p,
            steps: s.steps,
            tolerance: s.tolerance,
            quadrature_tolerance: s.quadrature_tolerance,
            rho_grid: (0..=14).map(|i| 0.05 * i as f64).collect(),
        }
    }
}

impl ThetaSection {
    pub fn settings(&self) -> ThetaSettings {
        ThetaSettings {
            lambda: self.lambda,
            p: self.p,
            steps: self.steps.clone(),
            tolerance: self.tolerance,
            quadrature_tolerance: self.quadrature_tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorSection {
    /// Margin `r` of the level caps.
    pub r: f64,
    pub exponent: ExponentName,
    pub weights: WeightsName,
    /// Constant of the strong error bound used by the caps.
    pub error_constant: f64,
    pub c0: f64,
    pub beta: f64,
}

impl Default for EstimatorSection {
    fn default() -> Self {
        let c = CapConstants::default();
        Self {
            r: 0.1,
            exponent: ExponentName::Implied,
            weights: WeightsName::Theory,
            error_constant: c.error_constant,
            c0: c.c0,
            beta: c.beta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub global_seed: u64,
    pub output_dir: PathBuf,
    pub scheme: SchemeName,
    pub functional: FunctionalName,
    pub method: MethodName,
    pub epsilon: Epsilons,
    pub alpha: AutoOr,
    pub model: ModelSection,
    pub domain: DomainSection,
    pub grid: GridSection,
    pub samples: SampleCaps,
    pub estimator: EstimatorSection,
    pub theta: ThetaSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            global_seed: 2015,
            output_dir: PathBuf::from("results"),
            scheme: SchemeName::A,
            functional: FunctionalName::Trap,
            method: MethodName::Mimc,
            epsilon: Epsilons::Sweep(vec![4e-3, 2e-3, 1e-3, 5e-4]),
            alpha: AutoOr::Auto(Auto::Auto),
            model: ModelSection::default(),
            domain: DomainSection::default(),
            grid: GridSection::default(),
            samples: SampleCaps::default(),
            estimator: EstimatorSection::default(),
            theta: ThetaSection::default(),
        }
    }
}

fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| config_error(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string_pretty(self).map_err(|e| config_error(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Checks everything that can be checked without running anything.
    pub fn validate(&self) -> CliResult<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(config_error(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if !stability_check(self.model.rho) {
            return Err(CoreError::StabilityViolation { rho: self.model.rho }.into());
        }
        let params = self.model_params()?;
        // With "auto" the time step is only known later; check the space mesh with a step of T.
        let k0 = self.grid.k0.value().unwrap_or(self.model.t);
        build_grid(&params, &self.base_grid(k0)?, 0, 0)?;
        let eps = self.epsilon.values();
        if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
            return Err(config_error("epsilon values must lie in (0, 1)"));
        }
        if let Some(a) = self.alpha.value() {
            if !(a > 0.0 && a < 1.0) {
                return Err(config_error("alpha must lie in (0, 1) or be \"auto\""));
            }
        }
        if self.samples.rates < 2 || self.samples.pilot < 2 {
            return Err(config_error("sample counts must be at least 2"));
        }
        if self.samples.rates_max_level < 2 {
            return Err(config_error("rates_max_level must be at least 2"));
        }
        Ok(())
    }

    pub fn model_params(&self) -> CliResult<ModelParams> {
        let m = &self.model;
        Ok(ModelParams::new(m.mu, m.rho, m.t, m.x0)?)
    }

    /// Estimator settings for one accuracy target.
    pub fn estimator_settings(&self, epsilon: f64) -> EstimatorSettings {
        let e = &self.estimator;
        EstimatorSettings {
            epsilon,
            alpha: self.alpha.value().map_or(AlphaChoice::Optimize, AlphaChoice::Fixed),
            r: e.r,
            exponent: match e.exponent {
                ExponentName::Implied => BudgetExponent::Implied,
                ExponentName::Printed => BudgetExponent::Printed,
            },
            caps: CapConstants {
                t: self.model.t,
                h0: self.grid.h0,
                error_constant: e.error_constant,
                c0: e.c0,
                beta: e.beta,
            },
            pilot_samples: self.samples.pilot,
            pilot_extent: self.samples.pilot_extent,
            weights: match e.weights {
                WeightsName::Theory => WeightChoice::Theory,
                WeightsName::Fitted => WeightChoice::Fitted,
            },
            max_work: self.samples.max_work,
        }
    }

    pub fn k0_choice(&self) -> K0Choice {
        self.grid.k0.value().map_or(K0Choice::Auto, K0Choice::Fixed)
    }

    /// Base grid for a known `k0`.
    pub fn base_grid(&self, k0: f64) -> CliResult<BaseGrid> {
        Ok(BaseGrid::new(self.domain.x_min, self.domain.x_max, self.grid.h0, k0)?)
    }

    /// Sampler with the configured scheme, functional and seed.
    pub fn sampler(&self, k0: f64, seed: u64) -> CliResult<IncrementSampler> {
        Ok(IncrementSampler::new(
            self.model_params()?,
            self.base_grid(k0)?,
            self.scheme.into(),
            self.functional.into(),
            seed,
        )?)
    }
}
