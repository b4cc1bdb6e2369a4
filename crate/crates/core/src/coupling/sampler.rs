use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::estimators::LevelStats;
use crate::spde::{build_grid, loss, BaseGrid, Functional, LaneWork, LevelSolver, ModelParams, Scheme};

use super::brownian::{aggregate_lanes, normals_into, stream, BrownianPath, Phase};
use super::{Increment, LevelPair};

/// Paths advanced together in one sweep.
pub const LANES: usize = 16;
/// Samples per independent unit of work; results are merged chunk by chunk in index order.
pub const CHUNK: u64 = 64;

/// One sample of an increment together with its corner losses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledIncrement {
    pub delta: f64,
    /// Corner losses in [`Increment::corners`] order; absent corners are `None`.
    pub corners: [Option<f64>; 4],
    /// Work units spent: cells times steps summed over the evaluated corners.
    pub cost: f64,
}

/// Anything that can produce accumulated statistics for an increment.
pub trait IncrementSource {
    fn params(&self) -> &ModelParams;
    fn base(&self) -> &BaseGrid;
    fn scheme(&self) -> Scheme;
    fn functional(&self) -> Functional;
    fn unit_cost(&self, increment: Increment) -> Result<f64>;
    /// Statistics of samples `first .. first + count` of `increment` in `phase`.
    fn accumulate(&self, increment: Increment, phase: Phase, first: u64, count: u64) -> Result<LevelStats>;
}

/// Splits `first .. first + count` into consecutive [`CHUNK`]-sized ranges.
pub fn chunk_ranges(first: u64, count: u64) -> impl Iterator<Item = (u64, u64)> {
    let chunks = count.div_ceil(CHUNK);
    (0..chunks).map(move |c| {
        let start = c * CHUNK;
        (first + start, CHUNK.min(count - start))
    })
}

struct CornerRun {
    solver: LevelSolver,
    // Time levels between the increment's finest grid and this corner.
    coarsening: u32,
}

/// Deterministic sampler of coupled increments keyed by `(seed, phase, increment, index)`.
#[derive(Debug, Clone)]
pub struct IncrementSampler {
    params: ModelParams,
    base: BaseGrid,
    scheme: Scheme,
    functional: Functional,
    seed: u64,
}

impl IncrementSampler {
    pub fn new(params: ModelParams, base: BaseGrid, scheme: Scheme, functional: Functional, seed: u64) -> Result<Self> {
        build_grid(&params, &base, 0, 0)?;
        Ok(Self { params, base, scheme, functional, seed })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn corner_runs(&self, increment: Increment) -> Result<Vec<CornerRun>> {
        let finest = increment.finest();
        let (corners, len) = increment.corners();
        let mut runs = Vec::with_capacity(len);
        for corner in &corners[..len] {
            let grid = build_grid(&self.params, &self.base, corner.pair.l1, corner.pair.l2)?;
            runs.push(CornerRun {
                solver: LevelSolver::new(grid, &self.params, self.scheme)?,
                coarsening: finest.l2 - corner.pair.l2,
            });
        }
        Ok(runs)
    }

    /// Evaluates the samples `indices` of `increment` side by side.
    fn run_lanes<const L: usize>(
        &self,
        increment: Increment,
        phase: Phase,
        indices: &[u64; L],
        runs: &[CornerRun],
    ) -> Result<[CoupledIncrement; L]> {
        let fine_steps = runs[0].solver.grid().steps();
        let mut fine = vec![[0.0; L]; fine_steps];
        let mut column = vec![0.0; fine_steps];
        for (l, &index) in indices.iter().enumerate() {
            let mut rng = stream(self.seed, phase, increment.stream_code(), index);
            normals_into(&mut rng, &mut column);
            for (row, z) in fine.iter_mut().zip(&column) {
                row[l] = *z;
            }
        }
        let mut coarse: Vec<Vec<[f64; L]>> = vec![fine];
        let mut work = LaneWork::<L>::new();
        let mut losses = [[0.0; L]; 4];
        let mut cost = 0.0;
        for (slot, run) in runs.iter().enumerate() {
            let depth = run.coarsening as usize;
            while coarse.len() <= depth {
                let next = aggregate_lanes(coarse.last().expect("fine path present"));
                coarse.push(next);
            }
            losses[slot] = run.solver.path_losses(self.functional, &coarse[depth], &mut work)?;
            cost += run.solver.grid().work_units();
        }
        let mut out = [CoupledIncrement { delta: 0.0, corners: [None; 4], cost }; L];
        for (l, sample) in out.iter_mut().enumerate() {
            let values: Vec<f64> = (0..runs.len()).map(|s| losses[s][l]).collect();
            sample.delta = Increment::combine(&values);
            for (s, v) in values.iter().enumerate() {
                sample.corners[s] = Some(*v);
            }
        }
        Ok(out)
    }

    /// Normalised increments on the finest time level of `increment` that drive sample `index`.
    pub fn driving_normals(&self, increment: Increment, phase: Phase, index: u64) -> Result<Vec<f64>> {
        let finest = increment.finest();
        let steps = build_grid(&self.params, &self.base, finest.l1, finest.l2)?.steps();
        let mut out = vec![0.0; steps];
        normals_into(&mut stream(self.seed, phase, increment.stream_code(), index), &mut out);
        Ok(out)
    }

    /// Sample `index` of `increment` in `phase`.
    pub fn sample(&self, increment: Increment, phase: Phase, index: u64) -> Result<CoupledIncrement> {
        let runs = self.corner_runs(increment)?;
        Ok(self.run_lanes::<1>(increment, phase, &[index], &runs)?[0])
    }

    /// Statistics of one contiguous range of at most a few chunks, evaluated [`LANES`] at a time.
    pub fn accumulate_chunk(&self, increment: Increment, phase: Phase, first: u64, count: u64) -> Result<LevelStats> {
        let mut stats = LevelStats::new(increment.finest());
        if count == 0 {
            return Ok(stats);
        }
        let runs = self.corner_runs(increment)?;
        let mut next = first;
        let end = first + count;
        while next < end {
            let indices: [u64; LANES] = core::array::from_fn(|l| next + l as u64);
            let samples = self.run_lanes::<LANES>(increment, phase, &indices, &runs)?;
            let take = (end - next).min(LANES as u64) as usize;
            for s in &samples[..take] {
                stats.push(s.delta, s.cost);
            }
            next += take as u64;
        }
        Ok(stats)
    }
}

impl IncrementSource for IncrementSampler {
    fn params(&self) -> &ModelParams {
        &self.params
    }

    fn base(&self) -> &BaseGrid {
        &self.base
    }

    fn scheme(&self) -> Scheme {
        self.scheme
    }

    fn functional(&self) -> Functional {
        self.functional
    }

    fn unit_cost(&self, increment: Increment) -> Result<f64> {
        let (corners, len) = increment.corners();
        corners[..len]
            .iter()
            .try_fold(0.0, |acc, c| Ok(acc + build_grid(&self.params, &self.base, c.pair.l1, c.pair.l2)?.work_units()))
    }

    fn accumulate(&self, increment: Increment, phase: Phase, first: u64, count: u64) -> Result<LevelStats> {
        let mut total = LevelStats::new(increment.finest());
        for (start, n) in chunk_ranges(first, count) {
            total.merge(&self.accumulate_chunk(increment, phase, start, n)?);
        }
        Ok(total)
    }
}

/// One sample of the mixed difference at `pair`, driven by the stream of `seed`.
pub fn sample_mixed_difference(
    pair: LevelPair,
    params: &ModelParams,
    base: &BaseGrid,
    scheme: Scheme,
    functional: Functional,
    seed: u64,
) -> Result<CoupledIncrement> {
    IncrementSampler::new(*params, *base, scheme, functional, seed)?.sample(Increment::Mixed(pair), Phase::Custom(0), 0)
}

/// One sample of the first difference at `pair` along `direction`.
pub fn sample_first_difference(
    pair: LevelPair,
    direction: super::Direction,
    params: &ModelParams,
    base: &BaseGrid,
    scheme: Scheme,
    functional: Functional,
    seed: u64,
) -> Result<CoupledIncrement> {
    IncrementSampler::new(*params, *base, scheme, functional, seed)?.sample(
        Increment::First(pair, direction),
        Phase::Custom(0),
        0,
    )
}

/// Pathwise telescoping residual `|sum of mixed differences over [0, l1] x [0, l2] - L(l1, l2)|`
/// with every level driven by one shared Brownian path.
pub fn telescoping_check(
    top: LevelPair,
    params: &ModelParams,
    base: &BaseGrid,
    scheme: Scheme,
    functional: Functional,
    seed: u64,
) -> Result<f64> {
    let finest = build_grid(params, base, top.l1, top.l2)?;
    let path = BrownianPath::generate(seed, finest.steps());
    let width = top.l1 as usize + 1;
    let mut table = vec![0.0; width * (top.l2 as usize + 1)];
    for l2 in 0..=top.l2 {
        let driver = path.coarsen_by(top.l2 - l2);
        for l1 in 0..=top.l1 {
            let grid = build_grid(params, base, l1, l2)?;
            let state = LevelSolver::new(grid, params, scheme)?.evolve(&driver.fine_normals)?;
            table[l2 as usize * width + l1 as usize] = loss(functional, &state, &grid)?;
        }
    }
    let value = |p: LevelPair| table[p.l2 as usize * width + p.l1 as usize];
    let mut pairs: Vec<LevelPair> =
        (0..=top.l1).flat_map(|a| (0..=top.l2).map(move |b| LevelPair::new(a, b))).collect();
    pairs.sort();
    let mut sum = 0.0;
    for pair in pairs {
        let (corners, len) = Increment::Mixed(pair).corners();
        let values: Vec<f64> = corners[..len].iter().map(|c| value(c.pair)).collect();
        sum += Increment::combine(&values);
    }
    if !sum.is_finite() {
        return Err(Error::SolverFailure { row: 0 });
    }
    Ok(libm::fabs(sum - value(top)))
}
