//! Small numerical helpers shared across modules.

use core::f64::consts::SQRT_2;

/// Standard normal cumulative distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Returns `Some(n)` when `x` is within a relative `1e-9` of the integer `n`.
pub(crate) fn as_integer(x: f64) -> Option<i64> {
    if !x.is_finite() {
        return None;
    }
    let n = libm::round(x);
    if libm::fabs(x - n) <= 1e-9 * libm::fmax(1.0, libm::fabs(x)) {
        Some(n as i64)
    } else {
        None
    }
}

/// Ordinary least squares fit of `y = c0 + c1 * x`. Returns `(c0, c1)`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((my - slope * mx, slope))
}

/// Least squares fit of `y = c0 + c1 * a + c2 * b`. Returns `[c0, c1, c2]`.
pub fn fit_plane(rows: &[(f64, f64, f64)]) -> Option<[f64; 3]> {
    if rows.len() < 3 {
        return None;
    }
    // Normal equations.
    let mut m = [[0.0; 3]; 3];
    let mut r = [0.0; 3];
    for &(a, b, y) in rows {
        let v = [1.0, a, b];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += v[i] * v[j];
            }
            r[i] += v[i] * y;
        }
    }
    solve3(m, r)
}

#[allow(clippy::needless_range_loop)]
fn solve3(mut m: [[f64; 3]; 3], mut r: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| {
            libm::fabs(m[i][col]).partial_cmp(&libm::fabs(m[j][col])).unwrap_or(core::cmp::Ordering::Equal)
        })?;
        if libm::fabs(m[piv][col]) < 1e-12 {
            return None;
        }
        m.swap(col, piv);
        r.swap(col, piv);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            r[row] -= f * r[col];
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let mut s = r[i];
        for k in i + 1..3 {
            s -= m[i][k] * x[k];
        }
        x[i] = s / m[i][i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_reference_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((normal_cdf(1.96) - 0.975_002_104_851_78).abs() < 1e-12);
        assert!((normal_cdf(-2.417_189_483_677_272_7) - 7.820_436_332_094_452e-3).abs() < 1e-15);
    }

    #[test]
    fn integer_detection() {
        assert_eq!(as_integer(30.0), Some(30));
        assert_eq!(as_integer(20.000_000_000_1), Some(20));
        assert_eq!(as_integer(2.5), None);
        assert_eq!(as_integer(f64::NAN), None);
    }

    #[test]
    fn plane_fit_recovers_exact_plane() {
        let rows: alloc::vec::Vec<_> = (0..4)
            .flat_map(|a| (0..4).map(move |b| (a as f64, b as f64, 3.0 - 2.0 * a as f64 - 4.0 * b as f64)))
            .collect();
        let c = fit_plane(&rows).unwrap();
        assert!((c[0] - 3.0).abs() < 1e-12 && (c[1] + 2.0).abs() < 1e-12 && (c[2] + 4.0).abs() < 1e-12);
        assert_eq!(fit_plane(&[(1.0, 1.0, 0.0), (2.0, 2.0, 1.0), (3.0, 3.0, 2.0)]), None);
    }
}
