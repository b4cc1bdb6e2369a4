use crate::error::{Error, Result};
use crate::math::as_integer;

use super::ModelParams;

/// Deepest refinement level accepted in either direction.
pub const MAX_LEVEL: u32 = 30;

/// Domain and level-zero resolution shared by every level of a hierarchy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub h0: f64,
    pub k0: f64,
}

impl BaseGrid {
    pub fn new(x_min: f64, x_max: f64, h0: f64, k0: f64) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(Error::DomainMisaligned("x_max must exceed x_min"));
        }
        if !(h0 > 0.0 && h0.is_finite() && k0 > 0.0 && k0.is_finite()) {
            return Err(Error::InvalidArgument("h0 and k0 must be positive"));
        }
        Ok(Self { x_min, x_max, h0, k0 })
    }

    /// `(-10, 20)` with `h0 = 1`, `k0 = 1/4`.
    pub fn baseline() -> Self {
        Self { x_min: -10.0, x_max: 20.0, h0: 1.0, k0: 0.25 }
    }

    pub fn with_k0(self, k0: f64) -> Self {
        Self { k0, ..self }
    }
}

impl Default for BaseGrid {
    fn default() -> Self {
        Self::baseline()
    }
}

/// A validated space-time mesh at level `(l1, l2)`.
///
/// Nodes are numbered from `x_min` (node 0) to `x_max` (node `cells`); the two end
/// nodes carry the zero boundary values and are not stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub h0: f64,
    pub k0: f64,
    pub l1: u32,
    pub l2: u32,
    h: f64,
    k: f64,
    cells: usize,
    steps: usize,
    dirac_node: usize,
    zero_node: Option<usize>,
}

impl GridSpec {
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Number of mesh intervals between `x_min` and `x_max`.
    pub fn cells(&self) -> usize {
        self.cells
    }

    /// Number of stored (interior) nodes.
    pub fn interior(&self) -> usize {
        self.cells - 1
    }

    /// Number of time steps to reach `T`.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Node index (counted from `x_min`) carrying the initial Dirac mass.
    pub fn dirac_node(&self) -> usize {
        self.dirac_node
    }

    /// Node index (counted from `x_min`) at `x = 0`, if the mesh has one.
    pub fn zero_node(&self) -> Option<usize> {
        self.zero_node
    }

    pub fn node_x(&self, node: usize) -> f64 {
        self.x_min + node as f64 * self.h
    }

    /// Work units of one path: cells times time steps.
    pub fn work_units(&self) -> f64 {
        self.cells as f64 * self.steps as f64
    }
}

/// Builds the mesh with `h = h0 2^-l1` and `k = k0 4^-l2`, rejecting any misfit.
pub fn build_grid(params: &ModelParams, base: &BaseGrid, l1: u32, l2: u32) -> Result<GridSpec> {
    if l1 > MAX_LEVEL || l2 > MAX_LEVEL {
        return Err(Error::InvalidLevel { l1, l2 });
    }
    let h = libm::ldexp(base.h0, -(l1 as i32));
    let k = libm::ldexp(base.k0, -2 * l2 as i32);
    let cells = match as_integer((base.x_max - base.x_min) / h) {
        Some(n) if n >= 2 => n as usize,
        _ => return Err(Error::DomainMisaligned("domain length is not a multiple of h")),
    };
    let dirac_node = match as_integer((params.x0 - base.x_min) / h) {
        Some(n) if n >= 1 && (n as usize) < cells => n as usize,
        Some(_) => return Err(Error::DomainMisaligned("x0 must be an interior node")),
        None => return Err(Error::DomainMisaligned("x0 is not on the mesh")),
    };
    let steps = match as_integer(params.t / k) {
        Some(n) if n >= 1 => n as usize,
        _ => return Err(Error::DomainMisaligned("T is not a multiple of k")),
    };
    let zero_node = match as_integer(-base.x_min / h) {
        Some(n) if n >= 0 && n as usize <= cells => Some(n as usize),
        _ => None,
    };
    Ok(GridSpec {
        x_min: base.x_min,
        x_max: base.x_max,
        h0: base.h0,
        k0: base.k0,
        l1,
        l2,
        h,
        k,
        cells,
        steps,
        dirac_node,
        zero_node,
    })
}
