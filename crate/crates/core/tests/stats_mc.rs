use num_traits::ToPrimitive;
use persist_core::lattice::{WalkKind, WalkLaw};
use persist_core::rwrs::SceneryLaw;
use persist_core::stats::{
    brute_force_persistence, estimate_mean_max, estimate_mean_max_grid, estimate_persistence,
    estimate_persistence_grid, fit_exponent, wilson_interval, BruteSystem, PersistenceEvent, Z95,
};
use persist_core::{ProcessSpec, Seed};
use rand::SeedableRng;
use rand_distr::{Binomial, Distribution};

fn simple_walk() -> ProcessSpec {
    ProcessSpec::Walk {
        walk: WalkLaw {
            dimension: 1,
            kind: WalkKind::Simple,
        },
    }
}

fn rademacher_rwrs(kind: WalkKind, scenery: SceneryLaw) -> ProcessSpec {
    ProcessSpec::Rwrs {
        walk: WalkLaw { dimension: 1, kind },
        scenery,
    }
}

#[test]
fn wilson_coverage() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    let trials = 1_000u64;
    let reps = 10_000;
    for &p in &[0.01, 0.1, 0.5] {
        let binom = Binomial::new(trials, p).unwrap();
        let covered = (0..reps)
            .filter(|_| {
                let (lo, hi) = wilson_interval(binom.sample(&mut rng), trials, Z95);
                lo <= p && p <= hi
            })
            .count() as f64
            / reps as f64;
        assert!((0.93..=0.97).contains(&covered), "p = {p}: coverage {covered}");
    }
}

#[test]
fn interval_width_scales_with_trials() {
    let spec = rademacher_rwrs(WalkKind::Simple, SceneryLaw::Rademacher);
    let small = estimate_persistence(&spec, 64, -1.0, 400, Seed(1)).unwrap();
    let large = estimate_persistence(&spec, 64, -1.0, 6_400, Seed(2)).unwrap();
    let ratio = (small.ci_high - small.ci_low) / (large.ci_high - large.ci_low);
    assert!((ratio / 4.0 - 1.0).abs() < 0.25, "width ratio {ratio}");
}

/// Runs out of 100 that land outside the 99% normal interval around the
/// exact value, per supported system at n = 4.
fn oracle_misses() -> Vec<(String, usize)> {
    let z99 = 2.575_829_303_548_901;
    let n = 4u64;
    let cases = [
        simple_walk(),
        ProcessSpec::Walk {
            walk: WalkLaw {
                dimension: 1,
                kind: WalkKind::Lazy { hold: 0.5 },
            },
        },
        rademacher_rwrs(WalkKind::Simple, SceneryLaw::Rademacher),
        rademacher_rwrs(WalkKind::Simple, SceneryLaw::LazyRademacher { q: 0.5 }),
        ProcessSpec::Mdm { p: 0.5 },
    ];
    let trials = 100_000u64;
    cases
        .iter()
        .enumerate()
        .map(|(i, spec)| {
            let system = BruteSystem::from_process(spec).unwrap();
            let p = brute_force_persistence(&system, n as usize, -1)
                .unwrap()
                .probability
                .to_f64()
                .unwrap();
            let half = z99 * (p * (1.0 - p) / trials as f64).sqrt();
            let misses = (0..100u64)
                .filter(|&r| {
                    let est = estimate_persistence(spec, n, -1.0, trials, Seed(2024).derive(i as u64).derive(r))
                        .unwrap();
                    (est.p_hat - p).abs() > half
                })
                .count();
            (spec.label(), misses)
        })
        .collect()
}

// Misses are Binomial(100, 0.01) per system for an exact sampler; the bounds
// below are its 0.9995 quantiles (per system and pooled over 500 runs).
#[test]
fn oracle_agreement() {
    let misses = oracle_misses();
    for (label, m) in &misses {
        println!("{label}: {}/100 inside the 99% interval", 100 - m);
        assert!(*m <= 5, "{label}: {m}/100 runs outside the 99% interval");
    }
    let total: usize = misses.iter().map(|(_, m)| m).sum();
    assert!(total <= 13, "{total}/500 runs outside the 99% interval");
}

// An exact sampler meets ">= 99 of 100 inside" for all five systems with
// probability about 0.22.
#[test]
#[ignore = "literal >= 99/100 threshold fails for an exact sampler most of the time"]
fn oracle_agreement_literal_threshold() {
    for (label, m) in oracle_misses() {
        assert!(m <= 1, "{label}: {}/100 runs inside the 99% interval", 100 - m);
    }
}

#[test]
fn simple_walk_exponent_is_one_half() {
    let grid: Vec<u64> = (8..=16).map(|k| 1 << k).collect();
    let est = estimate_persistence_grid(
        &simple_walk(),
        &grid,
        PersistenceEvent::MaxAtMost { level: -1.0 },
        100_000,
        Seed(3),
    )
    .unwrap();
    let fit = fit_exponent(&est, false).unwrap();
    assert!((0.45..=0.55).contains(&fit.theta_hat), "{fit:?}");
    assert!(fit.stderr > 0.0);
}

#[test]
fn brownian_mean_max() {
    let b = estimate_mean_max(&ProcessSpec::Fgn { hurst: 0.5 }, 1 << 14, 4_000, Seed(4)).unwrap();
    let target = (2.0 / std::f64::consts::PI).sqrt();
    assert!((b.b_hat / target - 1.0).abs() < 0.05, "{b:?}");
}

#[test]
fn rademacher_mean_max_stabilizes() {
    let spec = rademacher_rwrs(WalkKind::Simple, SceneryLaw::Rademacher);
    let grid: Vec<u64> = (10..=16).map(|k| 1 << k).collect();
    let est = estimate_mean_max_grid(&spec, &grid, 2_000, Seed(5)).unwrap();
    for w in est.windows(2) {
        let se = w[0].stderr.hypot(w[1].stderr);
        assert!((w[1].b_hat - w[0].b_hat).abs() < 2.0 * se, "{:?} -> {:?}", w[0], w[1]);
    }
}

#[test]
fn mdm_mean_max_limit() {
    let b = estimate_mean_max(&ProcessSpec::Mdm { p: 1.0 / 3.0 }, 1 << 16, 2_000, Seed(6)).unwrap();
    let k_p = (1.0f64 / 3.0) * 1.5f64.powf(0.25);
    let target = k_p * 0.54;
    assert!((b.b_hat / target - 1.0).abs() < 0.15, "{b:?} vs {target}");
}
