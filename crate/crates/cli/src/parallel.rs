use rayon::prelude::*;
use zakai_mimc_core::coupling::{chunk_ranges, Increment, IncrementSampler, IncrementSource, Phase};
use zakai_mimc_core::estimators::LevelStats;
use zakai_mimc_core::spde::{BaseGrid, Functional, ModelParams, Scheme};
use zakai_mimc_core::Result;

/// Spreads the chunks of a sample range over the rayon pool.
///
/// Chunks are merged in index order, so the statistics are bit-identical to the serial
/// sampler whatever the thread count.
#[derive(Debug, Clone)]
pub struct ParallelSampler {
    inner: IncrementSampler,
}

impl ParallelSampler {
    pub fn new(inner: IncrementSampler) -> Self {
        Self { inner }
    }

    pub fn inner(&self) -> &IncrementSampler {
        &self.inner
    }
}

impl IncrementSource for ParallelSampler {
    fn params(&self) -> &ModelParams {
        self.inner.params()
    }

    fn base(&self) -> &BaseGrid {
        self.inner.base()
    }

    fn scheme(&self) -> Scheme {
        self.inner.scheme()
    }

    fn functional(&self) -> Functional {
        self.inner.functional()
    }

    fn unit_cost(&self, increment: Increment) -> Result<f64> {
        self.inner.unit_cost(increment)
    }

    fn accumulate(&self, increment: Increment, phase: Phase, first: u64, count: u64) -> Result<LevelStats> {
        let ranges: Vec<(u64, u64)> = chunk_ranges(first, count).collect();
        let parts: Vec<LevelStats> = ranges
            .into_par_iter()
            .map(|(start, n)| self.inner.accumulate_chunk(increment, phase, start, n))
            .collect::<Result<_>>()?;
        let mut total = LevelStats::new(increment.finest());
        for p in &parts {
            total.merge(p);
        }
        Ok(total)
    }
}
