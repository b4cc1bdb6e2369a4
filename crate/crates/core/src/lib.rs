//! Implicit Milstein finite differences for a one-dimensional filtering SPDE, with multi-index
//! and multilevel Monte Carlo estimators of a loss functional.
//!
//! The crate is `no_std` (it needs `alloc`). Sampling is deterministic given a seed, so the
//! companion `zakai-mimc` crate can parallelise it without changing results.

#![no_std]

extern crate alloc;

pub mod analysis;
pub mod coupling;
pub mod estimators;
pub mod math;
pub mod spde;

mod error;

pub use error::{Error, Result};
