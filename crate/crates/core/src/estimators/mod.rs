//! Multi-index and multilevel estimators: statistics, rate models, index sets and sample allocation.

mod index_set;
mod planning;
mod rates;
mod runner;
mod stats;

pub use index_set::{build_triangular_index_set, build_union_index_set, IndexSet, IndexShape, Triangle};
pub use planning::{
    allocate_samples, choose_k0_and_caps, choose_l_star, excluded_bias, level_caps, minimal_triangular_set,
    minimal_union_set, modeled_work, optimize_alpha, BudgetExponent, CapConstants, K0AndCaps,
};
pub use rates::{theory_weights, Piecewise, PlaneFit, RateConstants, RateModel};
pub use runner::{
    resolve_k0, run_mimc, run_mlmc, AlphaChoice, EstimateReport, EstimatorPlan, EstimatorSettings, K0Choice, Method,
    WeightChoice,
};
pub use stats::LevelStats;
