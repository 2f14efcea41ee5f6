use persist_core::lattice::{
    occupation_stats, sample_stable_step, sample_walk, WalkKind, WalkSpec,
};
use persist_core::parallel::map_units;
use persist_core::Seed;
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[test]
fn first_step_frequencies_in_two_dimensions() {
    let spec = WalkSpec::new(2, WalkKind::Simple, 1).unwrap();
    let trials = 40_000u64;
    let mut counts = [0u64; 4];
    for t in 0..trials {
        let s = sample_walk(&spec, Seed(1).derive(t)).unwrap().sites[1];
        let idx = match (s[0], s[1]) {
            (1, 0) => 0,
            (-1, 0) => 1,
            (0, 1) => 2,
            (0, -1) => 3,
            other => panic!("not a unit step: {other:?}"),
        };
        counts[idx] += 1;
    }
    let expected = trials as f64 / 4.0;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let crit = ChiSquared::new(3.0).unwrap().inverse_cdf(0.999);
    assert!(chi2 < crit, "chi2 {chi2} vs {crit}, counts {counts:?}");
}

#[test]
fn lazy_walk_holds_at_its_rate() {
    let spec = WalkSpec::new(1, WalkKind::Lazy { hold: 1.0 / 3.0 }, 1).unwrap();
    let trials = 30_000u64;
    let holds = (0..trials)
        .filter(|&t| sample_walk(&spec, Seed(2).derive(t)).unwrap().sites[1] == [0, 0, 0])
        .count() as f64;
    let p = holds / trials as f64;
    let se = (p * (1.0 - p) / trials as f64).sqrt();
    assert!((p - 1.0 / 3.0).abs() < 4.0 * se, "{p}");
}

fn stable_draws(alpha: f64, count: u64, seed: u64) -> Vec<f64> {
    map_units(count, |t| sample_stable_step(alpha, Seed(seed).derive(t)).unwrap())
}

#[test]
fn stable_law_at_two_has_variance_two() {
    let x = stable_draws(2.0, 100_000, 3);
    let m = x.len() as f64;
    let var = x.iter().map(|v| v * v).sum::<f64>() / m;
    // Var of the variance estimator: (E X^4 - 4) / m = 8 / m
    let sd = (8.0 / m).sqrt();
    assert!((var - 2.0).abs() < 3.0 * sd, "{var}");
}

#[test]
fn stable_law_is_symmetric_with_a_power_tail() {
    let alpha = 1.5;
    let x = stable_draws(alpha, 200_000, 4);
    let m = x.len() as f64;
    let positive = x.iter().filter(|v| **v > 0.0).count() as f64 / m;
    assert!((positive - 0.5).abs() < 4.0 * (0.25 / m).sqrt(), "{positive}");
    let mut sorted: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    assert!(median > 0.5 && median < 1.5, "median |X| = {median}");
    let tail = |t: f64| x.iter().filter(|v| v.abs() > t).count() as f64;
    // P(|X| > t) ~ c t^{-alpha}, so doubling t divides the tail by 2^alpha
    let ratio = tail(10.0) / tail(20.0);
    assert!((ratio / 2f64.powf(alpha) - 1.0).abs() < 0.15, "tail ratio {ratio}");
}

#[test]
fn self_intersections_grow_like_n_to_three_halves() {
    let mean_v = |n: usize| {
        let spec = WalkSpec::new(1, WalkKind::Simple, n).unwrap();
        let v: Vec<f64> = map_units(2_000, |t| {
            let path = sample_walk(&spec, Seed(5).derive(t)).unwrap();
            occupation_stats(&path, 2.0).self_intersections as f64
        });
        v.iter().sum::<f64>() / v.len() as f64 / (n as f64).powf(1.5)
    };
    let (a, b) = (mean_v(4_000), mean_v(16_000));
    assert!((a / b - 1.0).abs() < 0.15, "{a} vs {b}");
}

#[test]
fn transient_range_grows_linearly() {
    let mean_r = |n: usize, trials: u64| {
        let spec = WalkSpec::new(3, WalkKind::Simple, n).unwrap();
        let r: Vec<f64> = map_units(trials, |t| {
            let path = sample_walk(&spec, Seed(6).derive(t)).unwrap();
            occupation_stats(&path, 1.0).walk_range as f64 / n as f64
        });
        r.iter().sum::<f64>() / r.len() as f64
    };
    let (a, b) = (mean_r(10_000, 200), mean_r(100_000, 40));
    assert!((a / b - 1.0).abs() < 0.05, "{a} vs {b}");
    // escape probability of the simple walk on Z^3 is about 0.66
    assert!((b - 0.66).abs() < 0.03, "{b}");
}
