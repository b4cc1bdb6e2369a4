use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Constant-coefficient tridiagonal matrix `sub * x[i-1] + diag * x[i] + sup * x[i+1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TridiagonalOperator {
    pub sub: f64,
    pub diag: f64,
    pub sup: f64,
}

impl TridiagonalOperator {
    /// The implicit part `I + (mu k / 2h) D1 - (k / 2h^2) D2` shared by both schemes.
    pub fn implicit_lhs(mu: f64, h: f64, k: f64) -> Self {
        let drift = mu * k / (2.0 * h);
        let diffusion = k / (2.0 * h * h);
        Self { sub: -drift - diffusion, diag: 1.0 + 2.0 * diffusion, sup: drift - diffusion }
    }

    pub fn is_strictly_dominant(&self) -> bool {
        libm::fabs(self.diag) > libm::fabs(self.sub) + libm::fabs(self.sup)
    }

    /// Matrix-vector product with zero values outside the vector.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let left = if i > 0 { self.sub * x[i - 1] } else { 0.0 };
                let right = if i + 1 < n { self.sup * x[i + 1] } else { 0.0 };
                left + self.diag * x[i] + right
            })
            .collect()
    }

    /// Precomputes the elimination factors for an `n`-row system.
    pub fn factor(&self, n: usize) -> Result<ThomasFactors> {
        if n == 0 {
            return Err(Error::InvalidArgument("empty tridiagonal system"));
        }
        let mut upper = Vec::with_capacity(n);
        let mut inv_pivot = Vec::with_capacity(n);
        let mut lower = Vec::with_capacity(n);
        let mut prev_upper = 0.0;
        for row in 0..n {
            let pivot = self.diag - self.sub * prev_upper;
            if !pivot.is_finite() || libm::fabs(pivot) < f64::MIN_POSITIVE {
                return Err(Error::SolverFailure { row });
            }
            let inv = 1.0 / pivot;
            prev_upper = self.sup * inv;
            upper.push(prev_upper);
            inv_pivot.push(inv);
            lower.push(self.sub * inv);
        }
        Ok(ThomasFactors { upper, inv_pivot, lower })
    }

    /// Solves the periodic system (corner entries wrap around) by Sherman-Morrison.
    pub fn solve_cyclic(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = rhs.len();
        if n < 3 {
            return Err(Error::InvalidArgument("cyclic system needs at least 3 rows"));
        }
        // A = B + u v^T with u = (g, 0, .., sup), v = (1, 0, .., sub / g).
        let g = -self.diag;
        let first = self.diag - g;
        let last = self.diag - self.sup * self.sub / g;
        let solve = |d: &[f64]| -> Result<Vec<f64>> {
            let mut upper = vec![0.0; n];
            let mut y = vec![0.0; n];
            let mut prev_u = 0.0;
            let mut prev_y = 0.0;
            for i in 0..n {
                let diag = if i == 0 {
                    first
                } else if i == n - 1 {
                    last
                } else {
                    self.diag
                };
                let sub = if i == 0 { 0.0 } else { self.sub };
                let pivot = diag - sub * prev_u;
                if !pivot.is_finite() || libm::fabs(pivot) < f64::MIN_POSITIVE {
                    return Err(Error::SolverFailure { row: i });
                }
                prev_u = self.sup / pivot;
                prev_y = (d[i] - sub * prev_y) / pivot;
                upper[i] = prev_u;
                y[i] = prev_y;
            }
            for i in (0..n - 1).rev() {
                y[i] -= upper[i] * y[i + 1];
            }
            Ok(y)
        };
        let x = solve(rhs)?;
        let mut u = vec![0.0; n];
        u[0] = g;
        u[n - 1] = self.sup;
        let q = solve(&u)?;
        let vx = x[0] + self.sub / g * x[n - 1];
        let vq = q[0] + self.sub / g * q[n - 1];
        let scale = vx / (1.0 + vq);
        Ok(x.iter().zip(&q).map(|(xi, qi)| xi - scale * qi).collect())
    }
}

/// Forward-elimination factors of a [`TridiagonalOperator`] (no pivoting).
#[derive(Debug, Clone, PartialEq)]
pub struct ThomasFactors {
    upper: Vec<f64>,
    inv_pivot: Vec<f64>,
    // `sub / pivot`, so the forward recurrence carries one multiply and one subtract.
    lower: Vec<f64>,
}

impl ThomasFactors {
    pub fn len(&self) -> usize {
        self.upper.len()
    }

    pub fn is_empty(&self) -> bool {
        self.upper.is_empty()
    }

    pub(crate) fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub(crate) fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub(crate) fn inv_pivot(&self) -> &[f64] {
        &self.inv_pivot
    }

    /// Overwrites `rhs` with the solution.
    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        assert_eq!(rhs.len(), self.len(), "right-hand side length mismatch");
        let mut prev = 0.0;
        for ((d, inv), low) in rhs.iter_mut().zip(&self.inv_pivot).zip(&self.lower) {
            prev = *d * inv - low * prev;
            *d = prev;
        }
        let mut next = 0.0;
        for (d, up) in rhs.iter_mut().zip(&self.upper).rev() {
            next = *d - up * next;
            *d = next;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lhs_bands_match_closed_form() {
        let (mu, h, k) = (0.081, 0.5, 0.0625);
        let op = TridiagonalOperator::implicit_lhs(mu, h, k);
        assert!((op.sub - (-mu * k / (2.0 * h) - k / (2.0 * h * h))).abs() < 1e-15);
        assert!((op.diag - (1.0 + k / (h * h))).abs() < 1e-15);
        assert!((op.sup - (mu * k / (2.0 * h) - k / (2.0 * h * h))).abs() < 1e-15);
        assert!(op.is_strictly_dominant());
    }

    #[test]
    fn solve_inverts_apply() {
        let op = TridiagonalOperator { sub: -0.7, diag: 2.5, sup: -1.1 };
        let x: Vec<f64> = (0..40).map(|i| libm::sin(i as f64)).collect();
        let mut b = op.apply(&x);
        op.factor(40).unwrap().solve_in_place(&mut b);
        for (a, e) in b.iter().zip(&x) {
            assert!((a - e).abs() < 1e-13);
        }
    }

    #[test]
    fn cyclic_solve_inverts_periodic_apply() {
        let op = TridiagonalOperator { sub: -0.3, diag: 1.9, sup: -0.45 };
        let n = 17;
        let x: Vec<f64> = (0..n).map(|i| libm::cos(0.7 * i as f64) + 0.1 * i as f64).collect();
        let b: Vec<f64> =
            (0..n).map(|i| op.sub * x[(i + n - 1) % n] + op.diag * x[i] + op.sup * x[(i + 1) % n]).collect();
        let y = op.solve_cyclic(&b).unwrap();
        for (a, e) in y.iter().zip(&x) {
            assert!((a - e).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_pivot_is_reported() {
        let op = TridiagonalOperator { sub: 1.0, diag: 0.0, sup: 1.0 };
        assert_eq!(op.factor(3), Err(Error::SolverFailure { row: 0 }));
    }
}
