use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

use super::loss::loss_rows;
use super::{Functional, GridSpec, ModelParams, Scheme, ThomasFactors, TridiagonalOperator};

/// Discrete density at the interior nodes after `time_index` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    pub values: Vec<f64>,
    pub time_index: usize,
}

impl DensityState {
    /// Discrete mass `h * sum(V)`.
    pub fn mass(&self, h: f64) -> f64 {
        h * self.values.iter().sum::<f64>()
    }

    pub fn squared_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Dirac approximation: `1/h` at the node of `x0`, zero elsewhere.
pub fn initial_state(grid: &GridSpec) -> DensityState {
    let mut values = vec![0.0; grid.interior()];
    values[grid.dirac_node() - 1] = 1.0 / grid.h();
    DensityState { values, time_index: 0 }
}

/// Coefficients `(s, c)` of the explicit right-hand side
/// `V - s (V[j+1] - V[j-1]) + c * stencil(V)` for a normalised increment `z`.
pub fn rhs_coefficients(params: &ModelParams, scheme: Scheme, h: f64, k: f64, z: f64) -> (f64, f64) {
    let (noise, milstein) = rhs_scales(params, scheme, h, k);
    (noise * z, milstein * (z * z - 1.0))
}

fn rhs_scales(params: &ModelParams, scheme: Scheme, h: f64, k: f64) -> (f64, f64) {
    let noise = libm::sqrt(params.rho * k) / (2.0 * h);
    let milstein = match scheme {
        Scheme::A => params.rho * k / (8.0 * h * h),
        Scheme::B => params.rho * k / (2.0 * h * h),
    };
    (noise, milstein)
}

/// Scratch buffers for advancing `L` paths side by side.
#[derive(Debug, Clone)]
pub struct LaneWork<const L: usize> {
    // Interior nodes at offset 2, two zero ghost rows at each end.
    padded: Vec<[f64; L]>,
    forward: Vec<[f64; L]>,
}

impl<const L: usize> LaneWork<L> {
    pub fn new() -> Self {
        Self { padded: Vec::new(), forward: Vec::new() }
    }

    fn reset(&mut self, interior: usize) {
        self.padded.clear();
        self.padded.resize(interior + 4, [0.0; L]);
        self.forward.clear();
        self.forward.resize(interior + 1, [0.0; L]);
    }

    fn interior(&self) -> &[[f64; L]] {
        &self.padded[2..self.padded.len() - 2]
    }
}

impl<const L: usize> Default for LaneWork<L> {
    fn default() -> Self {
        Self::new()
    }
}

/// Time stepper for one mesh, with the implicit operator factored once.
#[derive(Debug, Clone)]
pub struct LevelSolver {
    grid: GridSpec,
    scheme: Scheme,
    op: TridiagonalOperator,
    factors: ThomasFactors,
    noise_scale: f64,
    milstein_scale: f64,
}

impl LevelSolver {
    pub fn new(grid: GridSpec, params: &ModelParams, scheme: Scheme) -> Result<Self> {
        let op = TridiagonalOperator::implicit_lhs(params.mu, grid.h(), grid.k());
        if !op.is_strictly_dominant() {
            return Err(Error::SolverFailure { row: 0 });
        }
        let factors = op.factor(grid.interior())?;
        let (noise_scale, milstein_scale) = rhs_scales(params, scheme, grid.h(), grid.k());
        Ok(Self { grid, scheme, op, factors, noise_scale, milstein_scale })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn operator(&self) -> &TridiagonalOperator {
        &self.op
    }

    pub fn initial_state(&self) -> DensityState {
        initial_state(&self.grid)
    }

    pub fn step(&self, state: &DensityState, z: f64) -> Result<DensityState> {
        let mut work = LaneWork::<1>::new();
        self.load(state, &mut work)?;
        self.step_lanes(&[z], &mut work);
        Ok(self.unload(&work, state.time_index + 1))
    }

    /// Runs all `steps()` steps from the Dirac initial state.
    pub fn evolve(&self, draws: &[f64]) -> Result<DensityState> {
        self.evolve_from(&self.initial_state(), draws)
    }

    /// Applies one step per draw to an arbitrary starting state.
    pub fn evolve_from(&self, state: &DensityState, draws: &[f64]) -> Result<DensityState> {
        let mut work = LaneWork::<1>::new();
        self.load(state, &mut work)?;
        for &z in draws {
            self.step_lanes(&[z], &mut work);
        }
        Ok(self.unload(&work, state.time_index + draws.len()))
    }

    /// Evolves `L` independent paths from the Dirac state and returns their losses.
    ///
    /// Lane `l` of the result is bit-identical to a single-path run on lane `l` of `draws`.
    pub fn path_losses<const L: usize>(
        &self,
        functional: Functional,
        draws: &[[f64; L]],
        work: &mut LaneWork<L>,
    ) -> Result<[f64; L]> {
        if draws.len() != self.grid.steps() {
            return Err(Error::InvalidArgument("draw count must equal the number of steps"));
        }
        work.reset(self.grid.interior());
        work.padded[self.grid.dirac_node() + 1] = [1.0 / self.grid.h(); L];
        for z in draws {
            self.step_lanes(z, work);
        }
        loss_rows(functional, &self.grid, work.interior())
    }

    fn load(&self, state: &DensityState, work: &mut LaneWork<1>) -> Result<()> {
        if state.values.len() != self.grid.interior() {
            return Err(Error::InvalidArgument("state does not match the grid"));
        }
        work.reset(self.grid.interior());
        for (slot, v) in work.padded[2..].iter_mut().zip(&state.values) {
            *slot = [*v];
        }
        Ok(())
    }

    fn unload(&self, work: &LaneWork<1>, time_index: usize) -> DensityState {
        DensityState { values: work.interior().iter().map(|r| r[0]).collect(), time_index }
    }

    fn step_lanes<const L: usize>(&self, z: &[f64; L], work: &mut LaneWork<L>) {
        let mut s = [0.0; L];
        let mut c = [0.0; L];
        for l in 0..L {
            s[l] = self.noise_scale * z[l];
            c[l] = self.milstein_scale * (z[l] * z[l] - 1.0);
        }
        match self.scheme {
            Scheme::A => self.sweep::<L, 2>(&s, &c, work),
            Scheme::B => self.sweep::<L, 1>(&s, &c, work),
        }
    }

    /// Builds the right-hand side, eliminates forward and substitutes back in place.
    /// `REACH` is the half-width of the Milstein stencil.
    fn sweep<const L: usize, const REACH: usize>(&self, s: &[f64; L], c: &[f64; L], work: &mut LaneWork<L>) {
        let n = self.factors.len();
        let lower = self.factors.lower();
        let inv = self.factors.inv_pivot();
        let upper = self.factors.upper();
        let pad = &mut work.padded;
        let fwd = &mut work.forward;
        for i in 0..n {
            let p = i + 2;
            let (vm, v, vp) = (pad[p - 1], pad[p], pad[p + 1]);
            let (wm, wp) = (pad[p - REACH], pad[p + REACH]);
            let prev = fwd[i];
            let mut out = [0.0; L];
            for l in 0..L {
                let rhs = v[l] - s[l] * (vp[l] - vm[l]) + c[l] * ((wp[l] - 2.0 * v[l]) + wm[l]);
                out[l] = rhs * inv[i] - lower[i] * prev[l];
            }
            fwd[i + 1] = out;
        }
        for i in (0..n).rev() {
            let next = pad[i + 3];
            let mut out = fwd[i + 1];
            for l in 0..L {
                out[l] -= upper[i] * next[l];
            }
            pad[i + 2] = out;
        }
    }
}

/// One step of the space-first scheme (wide Milstein stencil).
pub fn step_scheme_a(state: &DensityState, grid: &GridSpec, params: &ModelParams, z: f64) -> Result<DensityState> {
    LevelSolver::new(*grid, params, Scheme::A)?.step(state, z)
}

/// One step of the Milstein-first scheme (narrow Milstein stencil).
pub fn step_scheme_b(state: &DensityState, grid: &GridSpec, params: &ModelParams, z: f64) -> Result<DensityState> {
    LevelSolver::new(*grid, params, Scheme::B)?.step(state, z)
}

/// Evolves the Dirac initial state through `steps()` steps driven by `draws`.
pub fn evolve(grid: &GridSpec, params: &ModelParams, draws: &[f64], scheme: Scheme) -> Result<DensityState> {
    if draws.len() != grid.steps() {
        return Err(Error::InvalidArgument("draw count must equal the number of steps"));
    }
    LevelSolver::new(*grid, params, scheme)?.evolve(draws)
}

/// One step on a periodic mesh of spacing `h`; used to probe the Fourier symbols.
pub fn step_periodic(values: &[f64], h: f64, k: f64, params: &ModelParams, scheme: Scheme, z: f64) -> Result<Vec<f64>> {
    let n = values.len();
    if n < 5 {
        return Err(Error::InvalidArgument("periodic mesh needs at least 5 nodes"));
    }
    let (s, c) = rhs_coefficients(params, scheme, h, k, z);
    let reach = match scheme {
        Scheme::A => 2,
        Scheme::B => 1,
    };
    let at = |i: usize, off: isize| values[(i as isize + off).rem_euclid(n as isize) as usize];
    let rhs: Vec<f64> = (0..n)
        .map(|i| {
            let v = values[i];
            v - s * (at(i, 1) - at(i, -1)) + c * ((at(i, reach) - 2.0 * v) + at(i, -reach))
        })
        .collect();
    TridiagonalOperator::implicit_lhs(params.mu, h, k).solve_cyclic(&rhs)
}
