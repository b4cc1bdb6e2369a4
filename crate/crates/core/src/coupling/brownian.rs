use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Which stage of an experiment a sample belongs to; each stage draws from its own streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Pilot,
    Main,
    Rates,
    Custom(u32),
}

impl Phase {
    fn tag(self) -> u64 {
        match self {
            Phase::Pilot => 1,
            Phase::Main => 2,
            Phase::Rates => 3,
            Phase::Custom(t) => 0x1_0000_0000 | t as u64,
        }
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for sample `index` of the stream `(seed, phase, code)`.
pub(crate) fn stream(seed: u64, phase: Phase, code: u64, index: u64) -> ChaCha8Rng {
    let mut state = seed;
    for part in [phase.tag(), code, index] {
        state = splitmix64(&mut state) ^ part;
    }
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Normalised Brownian increments `Z_n = (M(t_{n+1}) - M(t_n)) / sqrt(k)` at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianPath {
    pub fine_normals: Vec<f64>,
    pub seed: u64,
}

impl BrownianPath {
    /// Draws `steps` standard normals from the stream keyed by `seed`.
    pub fn generate(seed: u64, steps: usize) -> Self {
        let mut rng = stream(seed, Phase::Custom(0), 0, 0);
        let fine_normals = (0..steps).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        Self { fine_normals, seed }
    }

    /// Increments one time level coarser (a quarter of the steps).
    pub fn coarsen(&self) -> Self {
        Self { fine_normals: aggregate(&self.fine_normals), seed: self.seed }
    }

    /// Increments `levels` time levels coarser.
    pub fn coarsen_by(&self, levels: u32) -> Self {
        (0..levels).fold(self.clone(), |p, _| p.coarsen())
    }

    /// Terminal value of the driving Brownian motion for time step `k`.
    pub fn terminal_value(&self, k: f64) -> f64 {
        libm::sqrt(k) * self.fine_normals.iter().sum::<f64>()
    }
}

/// `Z~_n = (Z_{4n} + Z_{4n+1} + Z_{4n+2} + Z_{4n+3}) / 2`.
pub fn aggregate(fine: &[f64]) -> Vec<f64> {
    assert_eq!(fine.len() % 4, 0, "fine path length must be a multiple of 4");
    fine.chunks_exact(4).map(|z| (z[0] + z[1] + z[2] + z[3]) / 2.0).collect()
}

pub(crate) fn aggregate_lanes<const L: usize>(fine: &[[f64; L]]) -> Vec<[f64; L]> {
    fine.chunks_exact(4)
        .map(|z| {
            let mut out = [0.0; L];
            for l in 0..L {
                out[l] = (z[0][l] + z[1][l] + z[2][l] + z[3][l]) / 2.0;
            }
            out
        })
        .collect()
}

pub(crate) fn normals_into(rng: &mut ChaCha8Rng, out: &mut [f64]) {
    for z in out {
        *z = rng.sample(StandardNormal);
    }
}
