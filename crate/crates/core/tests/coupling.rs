use proptest::prelude::*;
use zakai_mimc_core::coupling::*;
use zakai_mimc_core::estimators::LevelStats;
use zakai_mimc_core::spde::*;

fn sampler(scheme: Scheme, functional: Functional, seed: u64) -> IncrementSampler {
    IncrementSampler::new(ModelParams::baseline(), BaseGrid::baseline(), scheme, functional, seed).unwrap()
}

fn coarsen_once(z: &[f64]) -> Vec<f64> {
    z.chunks(4).map(|c| (c[0] + c[1] + c[2] + c[3]) / 2.0).collect()
}

fn corner_loss(pair: LevelPair, draws: &[f64], scheme: Scheme, functional: Functional) -> f64 {
    let p = ModelParams::baseline();
    let g = build_grid(&p, &BaseGrid::baseline(), pair.l1, pair.l2).unwrap();
    let s = evolve(&g, &p, draws, scheme).unwrap();
    loss(functional, &s, &g).unwrap()
}

#[test]
fn corners_share_one_path() {
    for (scheme, functional) in [(Scheme::A, Functional::Trapezoidal), (Scheme::B, Functional::Rectangle)] {
        let s = sampler(scheme, functional, 77);
        let inc = Increment::Mixed(LevelPair::new(2, 2));
        for index in [0, 5, 1_000_003] {
            let fine = s.driving_normals(inc, Phase::Main, index).unwrap();
            let coarse = coarsen_once(&fine);
            let got = s.sample(inc, Phase::Main, index).unwrap();
            let want = [
                corner_loss(LevelPair::new(2, 2), &fine, scheme, functional),
                corner_loss(LevelPair::new(2, 1), &coarse, scheme, functional),
                corner_loss(LevelPair::new(1, 2), &fine, scheme, functional),
                corner_loss(LevelPair::new(1, 1), &coarse, scheme, functional),
            ];
            for (g, w) in got.corners.iter().zip(want) {
                assert_eq!(g.unwrap().to_bits(), w.to_bits());
            }
            assert_eq!(got.delta, (want[0] - want[1]) - (want[2] - want[3]));
        }
    }
}

#[test]
fn aggregation_is_exact() {
    let path = BrownianPath::generate(3, 256);
    let c = path.coarsen();
    assert_eq!(c.fine_normals, coarsen_once(&path.fine_normals));
    assert_eq!(path.coarsen_by(2).fine_normals, coarsen_once(&c.fine_normals));
    let k = 1.0 / 64.0;
    assert!((path.terminal_value(k) - c.terminal_value(4.0 * k)).abs() < 1e-13);
}

#[test]
fn coarse_increments_are_standard_normal() {
    let c = BrownianPath::generate(9, 4 * 40_000).coarsen().fine_normals;
    let n = c.len() as f64;
    let mean = c.iter().sum::<f64>() / n;
    let var = c.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!(mean.abs() < 0.02);
    assert!((var - 1.0).abs() < 0.03);
}

#[test]
fn lanes_match_single_samples() {
    let s = sampler(Scheme::A, Functional::Trapezoidal, 5);
    let inc = Increment::Mixed(LevelPair::new(1, 2));
    let batched = s.accumulate_chunk(inc, Phase::Pilot, 3, 13).unwrap();
    let mut single = LevelStats::new(inc.finest());
    for i in 3..16 {
        let x = s.sample(inc, Phase::Pilot, i).unwrap();
        single.push(x.delta, x.cost);
    }
    assert_eq!(batched, single);
    let chunked = s.accumulate(inc, Phase::Pilot, 3, 200).unwrap();
    let mut serial = LevelStats::new(inc.finest());
    for (a, n) in chunk_ranges(3, 200) {
        serial.merge(&s.accumulate_chunk(inc, Phase::Pilot, a, n).unwrap());
    }
    assert_eq!(chunked, serial);
    assert_eq!(chunked.count, 200);
}

#[test]
fn chunks_tile_the_range() {
    let v: Vec<_> = chunk_ranges(10, 150).collect();
    assert_eq!(v, vec![(10, CHUNK), (10 + CHUNK, CHUNK), (10 + 2 * CHUNK, 150 - 2 * CHUNK)]);
    assert_eq!(chunk_ranges(0, 0).count(), 0);
}

#[test]
fn streams_are_keyed() {
    let s = sampler(Scheme::A, Functional::Trapezoidal, 1);
    let inc = Increment::Mixed(LevelPair::new(1, 1));
    let a = s.driving_normals(inc, Phase::Main, 4).unwrap();
    assert_eq!(a, s.driving_normals(inc, Phase::Main, 4).unwrap());
    assert_ne!(a, s.driving_normals(inc, Phase::Main, 5).unwrap());
    assert_ne!(a, s.driving_normals(inc, Phase::Pilot, 4).unwrap());
    assert_ne!(a, sampler(Scheme::A, Functional::Trapezoidal, 2).driving_normals(inc, Phase::Main, 4).unwrap());
    let other = s.driving_normals(Increment::First(LevelPair::new(1, 1), Direction::Space), Phase::Main, 4).unwrap();
    assert_ne!(a, other);
}

#[test]
fn origin_increment_is_the_plain_loss() {
    let p = ModelParams::baseline();
    let base = BaseGrid::baseline();
    let x = sample_mixed_difference(LevelPair::new(0, 0), &p, &base, Scheme::A, Functional::Trapezoidal, 8).unwrap();
    assert_eq!(x.corners[1], None);
    assert_eq!(x.delta, x.corners[0].unwrap());
    let g = build_grid(&p, &base, 0, 0).unwrap();
    assert_eq!(x.cost, g.work_units());
}

#[test]
fn axis_increments_degrade_to_first_differences() {
    let (c, n) = Increment::Mixed(LevelPair::new(3, 0)).corners();
    assert_eq!(n, 2);
    assert_eq!(c[1].pair, LevelPair::new(2, 0));
    let (c, n) = Increment::Mixed(LevelPair::new(0, 2)).corners();
    assert_eq!(n, 2);
    assert_eq!(c[1].pair, LevelPair::new(0, 1));
    assert_eq!(Increment::First(LevelPair::new(0, 4), Direction::Space).corners().1, 1);
    let (c, n) = Increment::Diagonal(3).corners();
    assert_eq!((n, c[1].pair), (2, LevelPair::new(2, 2)));
}

#[test]
fn noiseless_increment_ignores_the_seed() {
    let p = ModelParams { rho: 0.0, ..ModelParams::baseline() };
    let base = BaseGrid::baseline();
    let pair = LevelPair::new(2, 1);
    let a = sample_mixed_difference(pair, &p, &base, Scheme::A, Functional::Trapezoidal, 1).unwrap();
    let b = sample_mixed_difference(pair, &p, &base, Scheme::A, Functional::Trapezoidal, 999).unwrap();
    assert_eq!(a.delta, b.delta);
    assert!(a.delta != 0.0);
}

#[test]
fn telescoping_holds_pathwise() {
    let p = ModelParams::baseline();
    let base = BaseGrid::baseline();
    assert_eq!(telescoping_check(LevelPair::new(0, 0), &p, &base, Scheme::A, Functional::Trapezoidal, 1).unwrap(), 0.0);
    for seed in 0..10 {
        for top in [LevelPair::new(2, 2), LevelPair::new(3, 1)] {
            for (scheme, f) in [(Scheme::A, Functional::Trapezoidal), (Scheme::B, Functional::Rectangle)] {
                assert!(telescoping_check(top, &p, &base, scheme, f, seed).unwrap() <= 1e-12);
            }
        }
    }
}

#[test]
fn unit_cost_counts_evaluated_corners() {
    let s = sampler(Scheme::A, Functional::Trapezoidal, 0);
    let pair = LevelPair::new(2, 1);
    let p = ModelParams::baseline();
    let base = BaseGrid::baseline();
    let w = |a, b| build_grid(&p, &base, a, b).unwrap().work_units();
    assert_eq!(s.unit_cost(Increment::Mixed(pair)).unwrap(), w(2, 1) + w(2, 0) + w(1, 1) + w(1, 0));
    assert_eq!(s.unit_cost(Increment::Plain(pair)).unwrap(), w(2, 1));
    assert_eq!(s.sample(Increment::Mixed(pair), Phase::Main, 0).unwrap().cost, w(2, 1) + w(2, 0) + w(1, 1) + w(1, 0));
}

#[test]
fn mixed_mean_at_first_interior_pair() {
    let s = sampler(Scheme::A, Functional::Trapezoidal, 2024);
    let stats = s.accumulate(Increment::Mixed(LevelPair::new(1, 1)), Phase::Rates, 0, 10_000).unwrap();
    let log2 = stats.mean.abs().log2();
    assert!((log2 + 14.34).abs() <= 0.5, "log2|mean| = {log2}");
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn first_differences_decay_at_the_expected_rates() {
    let s = sampler(Scheme::A, Functional::Trapezoidal, 31);
    let levels = [1u32, 2, 3, 4];
    let xs: Vec<f64> = levels.iter().map(|&l| l as f64).collect();
    for dir in [Direction::Space, Direction::Time] {
        let ys: Vec<f64> = levels
            .iter()
            .map(|&l| {
                let pair = match dir {
                    Direction::Space => LevelPair::new(l, 0),
                    Direction::Time => LevelPair::new(0, l),
                };
                s.accumulate(Increment::First(pair, dir), Phase::Rates, 0, 2000).unwrap().mean.abs().log2()
            })
            .collect();
        let m = slope(&xs, &ys);
        assert!((m + 2.0).abs() <= 0.3, "{dir:?}: slope {m}, values {ys:?}");
    }
}

#[test]
fn equal_corners_cancel() {
    assert_eq!(Increment::combine(&[0.25, 0.25]), 0.0);
    assert_eq!(Increment::combine(&[0.1, 0.2, 0.1, 0.2]), 0.0);
}

#[test]
fn level_pairs_order_by_total_then_space() {
    let mut v = vec![LevelPair::new(2, 0), LevelPair::new(0, 1), LevelPair::new(1, 1), LevelPair::new(0, 0)];
    v.sort();
    assert_eq!(v, vec![LevelPair::new(0, 0), LevelPair::new(0, 1), LevelPair::new(1, 1), LevelPair::new(2, 0)]);
    assert_eq!(LevelPair::new(1, 3).to_string(), "(1, 3)");
}

proptest! {
    #[test]
    fn swapping_roles_negates(a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0, d in -1.0f64..1.0) {
        prop_assert_eq!(Increment::combine(&[b, a]), -Increment::combine(&[a, b]));
        // Swapping roles along one direction negates; along both it is the identity.
        prop_assert_eq!(Increment::combine(&[b, a, d, c]), -Increment::combine(&[a, b, c, d]));
        prop_assert_eq!(Increment::combine(&[c, d, a, b]), -Increment::combine(&[a, b, c, d]));
    }

    #[test]
    fn coarsening_is_bitwise_reproducible(seed in any::<u64>(), levels in 1u32..4) {
        let p = BrownianPath::generate(seed, 4usize.pow(levels) * 3);
        let mut z = p.fine_normals.clone();
        for _ in 0..levels {
            z = coarsen_once(&z);
        }
        prop_assert_eq!(p.coarsen_by(levels).fine_normals, z);
    }

    #[test]
    fn coarser_finer_roundtrip(l1 in 0u32..20, l2 in 0u32..20) {
        let p = LevelPair::new(l1, l2);
        for dir in [Direction::Space, Direction::Time] {
            prop_assert_eq!(p.finer(dir).coarser(dir), Some(p));
        }
        prop_assert_eq!(p.swapped().swapped(), p);
        prop_assert!(LevelPair::new(0, 0).le_componentwise(&p));
    }
}
