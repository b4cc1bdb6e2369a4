use crate::coupling::LevelPair;

/// Running mean, variance and cost of the samples taken at one level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelStats {
    pub pair: LevelPair,
    pub count: u64,
    pub mean: f64,
    sum_sq_dev: f64,
    total_cost: f64,
}

impl LevelStats {
    pub fn new(pair: LevelPair) -> Self {
        Self { pair, count: 0, mean: 0.0, sum_sq_dev: 0.0, total_cost: 0.0 }
    }

    pub fn from_samples(pair: LevelPair, samples: &[f64], unit_cost: f64) -> Self {
        let mut s = Self::new(pair);
        for &x in samples {
            s.push(x, unit_cost);
        }
        s
    }

    /// Rebuilds statistics from their summary values.
    pub fn from_parts(pair: LevelPair, count: u64, mean: f64, variance: f64, avg_cost: f64) -> Self {
        let dof = count.saturating_sub(1) as f64;
        Self { pair, count, mean, sum_sq_dev: variance * dof, total_cost: avg_cost * count as f64 }
    }

    pub fn push(&mut self, x: f64, cost: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.sum_sq_dev += d * (x - self.mean);
        self.total_cost += cost;
    }

    /// Pools `other` into `self` (pairwise update of Chan et al.).
    pub fn merge(&mut self, other: &LevelStats) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = Self { pair: self.pair, ..*other };
            return;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        let d = other.mean - self.mean;
        self.mean += d * (nb / n);
        self.sum_sq_dev += other.sum_sq_dev + d * d * (na * nb / n);
        self.count += other.count;
        self.total_cost += other.total_cost;
    }

    pub fn merged(mut self, other: &LevelStats) -> Self {
        self.merge(other);
        self
    }

    /// Unbiased sample variance; `NaN` below two samples.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            f64::NAN
        } else {
            self.sum_sq_dev / (self.count - 1) as f64
        }
    }

    pub fn avg_cost(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.total_cost / self.count as f64
        }
    }

    pub fn total_cost(&self) -> f64 {
        self.total_cost
    }
}
