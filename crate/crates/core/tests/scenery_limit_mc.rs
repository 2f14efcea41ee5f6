use persist_core::scenery_limit::{estimate_sup_delta, DeltaSpec};
use persist_core::Seed;

#[test]
fn stderr_shrinks_like_inverse_root_trials() {
    let small = estimate_sup_delta(&DeltaSpec::new(2.0, 1024, 400).unwrap(), Seed(1)).unwrap();
    let large = estimate_sup_delta(&DeltaSpec::new(2.0, 1024, 6_400).unwrap(), Seed(2)).unwrap();
    let ratio = small.stderr / large.stderr;
    assert!((ratio / 4.0 - 1.0).abs() < 0.25, "ratio {ratio}");
}

#[test]
fn refining_the_walk_changes_little() {
    let coarse = estimate_sup_delta(&DeltaSpec::new(2.0, 2048, 4_000).unwrap(), Seed(3)).unwrap();
    let fine = estimate_sup_delta(&DeltaSpec::new(2.0, 4096, 4_000).unwrap(), Seed(4)).unwrap();
    let se = coarse.stderr.hypot(fine.stderr);
    // the discretization bias is a few percent at these sizes
    assert!((fine.mean - coarse.mean).abs() < 4.0 * se + 0.03, "{coarse:?} {fine:?}");
    assert!(fine.mean > 0.4 && fine.mean < 0.65, "{fine:?}");
}

#[test]
fn stable_driver_gives_a_finite_positive_mean() {
    let est = estimate_sup_delta(&DeltaSpec::new(1.5, 2048, 1_000).unwrap(), Seed(5)).unwrap();
    assert!(est.mean > 0.0 && est.mean.is_finite());
    assert!(est.stderr < 0.1 * est.mean, "{est:?}");
}

#[test]
fn extrapolation_combines_two_levels() {
    let mut spec = DeltaSpec::new(2.0, 4096, 1_000).unwrap();
    spec.extrapolate = true;
    let ext = estimate_sup_delta(&spec, Seed(6)).unwrap();
    assert!(ext.extrapolated);
    assert!(ext.mean > 0.3 && ext.mean < 0.8, "{ext:?}");
    spec.inner_steps = 512;
    assert!(estimate_sup_delta(&spec, Seed(6)).is_err());
}
