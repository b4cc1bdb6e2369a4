//! End-to-end acceptance checks, one test per criterion.
//!
//! Each test writes a single `criterion N: PASS|FAIL ...` line straight to the stderr handle
//! (bypassing libtest capture) before asserting, so a full run lists every verdict.
//! The scheme-A rate table over `[1, 5]^2` at 10^4 samples is shared by criteria 1 to 3 and
//! dominates the runtime.

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::OnceLock;

use zakai_mimc::commands::{cmd_estimate, cmd_rates, complexity_data, estimate_data, rates_box, rates_data, RateTable};
use zakai_mimc::config::{Epsilons, ExperimentConfig, FunctionalName, MethodName, SchemeName};
use zakai_mimc_core::analysis::{amplification_mean_square, compute_theta, FourierSymbols, ThetaSettings};
use zakai_mimc_core::coupling::{telescoping_check, BrownianPath, Direction, LevelPair};
use zakai_mimc_core::spde::{
    build_grid, initial_state, step_scheme_a, step_scheme_b, BaseGrid, ModelParams, Scheme, TridiagonalOperator,
};
use zakai_mimc_core::Error as CoreError;

/// `Phi((-x0 - mu T) / sqrt T)` for the baseline model, evaluated independently in 50-digit arithmetic.
const EXACT_LOSS: f64 = 7.820436332094452e-3;

fn verdict(n: u32, pass: bool, detail: String) {
    let line = format!("\ncriterion {n}: {} {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
    assert!(pass, "criterion {n} failed: {detail}");
}

fn baseline() -> ExperimentConfig {
    ExperimentConfig { output_dir: std::env::temp_dir().join("zakai-mimc-acceptance"), ..Default::default() }
}

fn with(scheme: SchemeName, functional: FunctionalName) -> ExperimentConfig {
    let mut cfg = baseline();
    cfg.scheme = scheme;
    cfg.functional = functional;
    cfg
}

fn table_a() -> &'static RateTable {
    static TABLE: OnceLock<RateTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let cfg = with(SchemeName::A, FunctionalName::Trap);
        rates_data(&cfg, &rates_box(5), 10_000).expect("scheme A rate table")
    })
}

fn lp(l1: u32, l2: u32) -> LevelPair {
    LevelPair::new(l1, l2)
}

#[test]
fn criterion_1_mean_spot_values() {
    let t = table_a();
    let mut pass = true;
    let mut detail = String::new();
    for (pair, want) in [(lp(1, 1), -14.34), (lp(3, 3), -22.29), (lp(5, 5), -30.21)] {
        let got = t.log2_abs_mean(pair);
        pass &= (got - want).abs() <= 0.5;
        detail += &format!("({},{}) {got:.3} vs {want}; ", pair.l1, pair.l2);
    }
    verdict(1, pass, detail);
}

#[test]
fn criterion_2_variance_spot_values() {
    let t = table_a();
    let mut pass = true;
    let mut detail = String::new();
    for (pair, want) in [(lp(1, 1), -26.26), (lp(5, 5), -57.0)] {
        let got = t.log2_variance(pair);
        pass &= (got - want).abs() <= 0.7;
        detail += &format!("({},{}) {got:.3} vs {want}; ", pair.l1, pair.l2);
    }
    verdict(2, pass, detail);
}

#[test]
fn criterion_3_diagonal_rates() {
    let t = table_a();
    let mean = t.diagonal_mean_slope().expect("mean fit").slope;
    let var = t.diagonal_variance_slope().expect("variance fit").slope;
    let pass = (mean + 2.0).abs() <= 0.3 && (var + 4.0).abs() <= 0.5;
    verdict(3, pass, format!("mean slope {mean:.3} (want -2 +- 0.3), variance slope {var:.3} (want -4 +- 0.5)"));
}

#[test]
fn criterion_4_scheme_b_anisotropy() {
    let cfg = with(SchemeName::B, FunctionalName::Trap);
    let mut pairs: Vec<LevelPair> = (1..=5).map(|l2| lp(3, l2)).collect();
    pairs.extend((1..=5).filter(|&l1| l1 != 3).map(|l1| lp(l1, 3)));
    let t = rates_data(&cfg, &pairs, 10_000).unwrap();
    let in_time = t.variance_slope_along(Direction::Time, 3).unwrap().slope;
    let in_space = t.variance_slope_along(Direction::Space, 3).unwrap().slope;
    let pass = (in_time + 2.0).abs() <= 0.5 && (in_space + 4.0).abs() <= 0.5;
    verdict(4, pass, format!("slope in l2 at l1=3 {in_time:.3} (want -2), in l1 at l2=3 {in_space:.3} (want -4)"));
}

#[test]
fn criterion_5_rectangle_min_structure() {
    let cfg = with(SchemeName::B, FunctionalName::Rect);
    let t = rates_data(&cfg, &[lp(1, 3), lp(3, 1), lp(2, 2)], 10_000).unwrap();
    let (a, b, c) = (t.log2_variance(lp(1, 3)), t.log2_variance(lp(3, 1)), t.log2_variance(lp(2, 2)));
    let pass = (a - b).abs() <= 0.7 && a >= c + 1.0 && b >= c + 1.0;
    verdict(5, pass, format!("log2 Var (1,3) {a:.3}, (3,1) {b:.3}, (2,2) {c:.3}"));
}

#[test]
fn criterion_6_theta() {
    let settings = ThetaSettings::default();
    let (theta, note) = match compute_theta(0.2, 5.0, &settings) {
        Ok(r) => (r.theta, format!("converged at N = {}", r.n_used)),
        Err(CoreError::NoConvergence { last, n }) => (last, format!("no convergence, last at N = {n}")),
        Err(e) => panic!("{e}"),
    };
    let mut curve = Vec::new();
    for i in 1..=14 {
        let rho = 0.05 * i as f64;
        let v = match compute_theta(rho, 5.0, &settings) {
            Ok(r) => r.theta,
            Err(CoreError::NoConvergence { last, .. }) => last,
            Err(e) => panic!("{e}"),
        };
        curve.push(v);
    }
    let monotone = curve.windows(2).all(|w| w[1] >= w[0]);
    let bounded = curve.iter().all(|&v| v <= 0.918);
    let pass = (theta - 0.0678).abs() <= 0.002 && monotone && bounded;
    verdict(
        6,
        pass,
        format!(
            "theta(0.2) {theta:.5} ({note}), want 0.0678 +- 0.002; curve monotone {monotone}, max {:.5} (bound 0.918)",
            curve.iter().cloned().fold(f64::NAN, f64::max)
        ),
    );
}

#[test]
fn criterion_7_bias_correctness() {
    let params = ModelParams::baseline();
    assert!((zakai_mimc_core::spde::exact_expected_loss(&params) - EXACT_LOSS).abs() < 1e-12);
    let eps = 5e-3;
    let mut hits = 0;
    let mut worst: f64 = 0.0;
    for run in 0..20u64 {
        let mut cfg = baseline();
        cfg.global_seed = 1000 + run;
        let r = estimate_data(&cfg, eps).unwrap();
        let err = (r.value - EXACT_LOSS).abs();
        worst = worst.max(err);
        if err <= eps {
            hits += 1;
        }
    }
    verdict(7, hits >= 19, format!("{hits}/20 runs within eps = {eps:e} of {EXACT_LOSS:.6e}, worst error {worst:.3e}"));
}

#[test]
fn criterion_8_complexity_flatness() {
    let sweep = vec![4e-3, 2e-3, 1e-3, 5e-4];
    let scaled = |scheme: SchemeName, method: MethodName| -> Vec<f64> {
        let mut cfg = with(scheme, FunctionalName::Trap);
        cfg.method = method;
        cfg.epsilon = Epsilons::Sweep(sweep.clone());
        complexity_data(&cfg).unwrap().iter().map(|p| p.scaled_work().expect("within budget")).collect()
    };
    let ratio = |v: &[f64]| v.iter().cloned().fold(f64::MIN, f64::max) / v.iter().cloned().fold(f64::MAX, f64::min);
    let a = scaled(SchemeName::A, MethodName::Mimc);
    let b = scaled(SchemeName::B, MethodName::Mimc);
    let ml = scaled(SchemeName::A, MethodName::Mlmc);
    let increasing = b.windows(2).all(|w| w[1] > w[0]);
    let pass = ratio(&a) <= 2.0 && ratio(&ml) <= 2.0 && increasing;
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(" ");
    verdict(
        8,
        pass,
        format!(
            "eps^2 work A-MIMC [{}] ratio {:.2}; MLMC [{}] ratio {:.2}; B-MIMC [{}] increasing {increasing}",
            fmt(&a),
            ratio(&a),
            fmt(&ml),
            ratio(&ml),
            fmt(&b)
        ),
    );
}

/// Gaussian elimination with partial pivoting.
fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        let pivot_row = a[col].clone();
        for row in col + 1..n {
            let f = a[row][col] / pivot_row[col];
            for (x, p) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

#[test]
fn criterion_9_exact_identities() {
    let params = ModelParams::baseline();
    let base = BaseGrid::baseline();
    let mut notes = Vec::new();

    let mut tele: f64 = 0.0;
    for (l1, l2) in [(1, 1), (2, 3), (3, 2), (3, 3)] {
        for scheme in [Scheme::A, Scheme::B] {
            for seed in 0..3 {
                let r = telescoping_check(
                    lp(l1, l2),
                    &params,
                    &base,
                    scheme,
                    zakai_mimc_core::spde::Functional::Trapezoidal,
                    seed,
                )
                .unwrap();
                tele = tele.max(r);
            }
        }
    }
    notes.push(format!("telescoping {tele:.1e}"));

    let n = 300;
    let op = TridiagonalOperator::implicit_lhs(0.081, 0.125, 0.05);
    let rhs: Vec<f64> = (0..n).map(|i| (0.1 * i as f64).sin() + 0.5).collect();
    let mut fast = rhs.clone();
    op.factor(n).unwrap().solve_in_place(&mut fast);
    let dense: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| match j as isize - i as isize {
                    -1 => op.sub,
                    0 => op.diag,
                    1 => op.sup,
                    _ => 0.0,
                })
                .collect()
        })
        .collect();
    let slow = dense_solve(dense, rhs);
    let thomas = fast.iter().zip(&slow).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    notes.push(format!("thomas vs dense {thomas:.1e}"));

    let mut cancel: f64 = 0.0;
    for i in 0..200 {
        let s = FourierSymbols::at(0.37 * i as f64, 0.05);
        cancel = cancel.max((s.a + 0.5 * s.c * s.c).abs() / (1.0 + s.c * s.c));
    }
    notes.push(format!("a + c^2/2 relative {cancel:.1e}"));

    let g = build_grid(&params, &base, 2, 1).unwrap();
    let mut s = initial_state(&g);
    let initial_mass = s.mass(g.h());
    let mut ab: f64 = 0.0;
    for z in [1.0, -1.0, 1.0, 1.0, -1.0] {
        let a = step_scheme_a(&s, &g, &params, z).unwrap();
        let b = step_scheme_b(&s, &g, &params, z).unwrap();
        ab = ab.max(a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max));
        s = a;
    }
    notes.push(format!("A vs B at z^2 = 1 {ab:.1e}, initial mass {initial_mass}"));

    let runs: Vec<BTreeMap<&str, Vec<u8>>> = (0..2)
        .map(|i| {
            let mut cfg = baseline();
            cfg.output_dir = std::env::temp_dir().join(format!("zakai-mimc-acceptance-det-{i}"));
            cfg.samples.rates = 200;
            cfg.samples.rates_max_level = 3;
            cfg.epsilon = Epsilons::Sweep(vec![4e-3, 2e-3]);
            cmd_rates(&cfg).unwrap();
            cmd_estimate(&cfg).unwrap();
            ["rates.csv", "rates_fit.csv", "estimate.csv", "estimate_levels.csv"]
                .into_iter()
                .map(|f| (f, std::fs::read(cfg.output_dir.join(f)).unwrap()))
                .collect()
        })
        .collect();
    let identical = runs[0] == runs[1];
    notes.push(format!("csv byte-identical {identical}"));

    let pass = tele <= 1e-12 && thomas <= 1e-12 && cancel <= 1e-15 && ab == 0.0 && initial_mass == 1.0 && identical;
    verdict(9, pass, notes.join(", "));
}

/// One-step amplification of the wide-stencil scheme for the mode `exp(i j xi)`, zero drift,
/// assembled from the difference operators: `D1 -> 2i sin xi`, `D1^2 -> -4 sin^2 xi`,
/// `D2 -> -4 sin^2(xi/2)`.
fn plane_wave_gain(xi: f64, h: f64, k: f64, rho: f64, z: f64) -> f64 {
    let s = (rho * k).sqrt() * z / (2.0 * h);
    let c = rho * k * (z * z - 1.0) / (8.0 * h * h);
    let num_re = 1.0 - 4.0 * c * xi.sin().powi(2);
    let num_im = -2.0 * s * xi.sin();
    let den = 1.0 + 2.0 * k / (h * h) * (0.5 * xi).sin().powi(2);
    (num_re * num_re + num_im * num_im) / (den * den)
}

#[test]
fn criterion_10_fourier_oracle() {
    let h = 0.1;
    let mut worst: f64 = 0.0;
    let mut points = 0;
    for (i, rho) in [0.05, 0.1, 0.2, 0.3].into_iter().enumerate() {
        for (j, (xi, lambda)) in [(0.3, 1.0), (0.8, 0.5), (1.5, 1.0), (2.2, 0.8), (3.0, 0.3)].into_iter().enumerate() {
            let k = lambda * h * h;
            let gamma = xi / h;
            let z = BrownianPath::generate(40 + (5 * i + j) as u64, 1_000_000).fine_normals;
            let mc = z.iter().map(|&z| plane_wave_gain(xi, h, k, rho, z)).sum::<f64>() / z.len() as f64;
            let f = amplification_mean_square(gamma, h, k, rho);
            worst = worst.max((mc - f).abs() / f);
            points += 1;
        }
    }
    assert_eq!(points, 20);
    verdict(10, worst <= 5e-4, format!("{points} points, worst relative gap {worst:.2e} (3 significant digits: 5e-4)"));
}
