//! Coupled sampling of mixed and first differences across neighbouring levels.

mod brownian;
mod level;
mod sampler;

pub use brownian::{aggregate, BrownianPath, Phase};
pub use level::{Corner, Direction, Increment, LevelPair};
pub use sampler::{
    chunk_ranges, sample_first_difference, sample_mixed_difference, telescoping_check, CoupledIncrement,
    IncrementSampler, IncrementSource, CHUNK, LANES,
};
