/// Adaptive Simpson quadrature with a tolerance relative to the coarse estimate.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    // Seed on a fixed partition so narrow peaks are not missed by the first panel.
    const PANELS: usize = 64;
    let width = (b - a) / PANELS as f64;
    let mut panels = [(0.0, 0.0, 0.0, 0.0, 0.0, 0.0); PANELS];
    let mut coarse = 0.0;
    for (i, slot) in panels.iter_mut().enumerate() {
        let lo = a + i as f64 * width;
        let hi = if i + 1 == PANELS { b } else { lo + width };
        let (flo, fhi, fmid) = (f(lo), f(hi), f(0.5 * (lo + hi)));
        let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        coarse += libm::fabs(whole);
        *slot = (lo, hi, flo, fmid, fhi, whole);
    }
    let tol = rel_tol * libm::fmax(coarse, f64::MIN_POSITIVE) / PANELS as f64;
    panels.iter().map(|&(lo, hi, flo, fmid, fhi, whole)| refine(f, lo, hi, flo, fmid, fhi, whole, tol, 48)).sum()
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || libm::fabs(delta) <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_smooth_and_peaked_functions() {
        let v = adaptive_simpson(&|x: f64| libm::exp(-x * x), -8.0, 8.0, 1e-10);
        assert!((v - libm::sqrt(core::f64::consts::PI)).abs() < 1e-9);
        let v = adaptive_simpson(&|x: f64| libm::exp(-4000.0 * x), 0.0, 1.0, 1e-10);
        assert!((v / (1.0 / 4000.0) - 1.0).abs() < 1e-8);
    }
}
