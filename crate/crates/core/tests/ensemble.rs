use rrmdqw_core::detector::{relocate_window, WindowUpper};
use rrmdqw_core::*;

fn recorded(policy: DetectorPolicy, t_max: u64, n: u64) -> RunConfig {
    let mut c = RunConfig::new(policy, t_max);
    c.n_realizations = n;
    c.base_seed = 7;
    c.record = RecordSpec { snapshot_times: vec![t_max / 2, t_max], tracked_sites: vec![0, 5, 12], survival_series: true };
    c
}

#[test]
fn single_realization_has_zero_stderr() {
    let c = recorded(DetectorPolicy::RandomWindow { x_d: 5, t_r: 7, upper: WindowUpper::Exclusive }, 80, 1);
    let stats = run_ensemble(&c).unwrap();
    let r = run_realization(&c, 0).unwrap();
    assert_eq!(stats.count(), 1);
    assert_eq!(stats.mean_profile(80).unwrap(), r.snapshots[1].1);
    assert!(stats.stderr_profile(80).unwrap().values().iter().all(|&e| e == 0.0));
}

#[test]
fn deterministic_policies_have_zero_variance() {
    for policy in [
        DetectorPolicy::None,
        DetectorPolicy::Fixed { x_d: 6 },
        DetectorPolicy::Quench { x_d: 6, t_q: 20 },
    ] {
        let stats = run_ensemble(&recorded(policy, 60, 5)).unwrap();
        assert_eq!(stats.max_variance(), 0.0, "{policy:?}");
    }
}

#[test]
fn window_of_one_site_equals_stationary_detector() {
    let rr2 = recorded(DetectorPolicy::RandomWindow { x_d: 10, t_r: 1, upper: WindowUpper::Exclusive }, 120, 3);
    let siw = rr2.with_policy(DetectorPolicy::Fixed { x_d: 10 });
    let a = run_ensemble(&rr2).unwrap();
    let b = run_ensemble(&siw).unwrap();
    assert_eq!(a.mean_profile(120), b.mean_profile(120));
    assert_eq!(a.survival_series(), b.survival_series());
}

#[test]
fn merge_matches_sequential_pool() {
    let c = recorded(DetectorPolicy::RandomBeyond { x_d: 4, t_r: 5, l_r: 40 }, 60, 9);
    let all = run_ensemble(&c).unwrap();
    let mut a = EnsembleStats::empty(&c);
    let mut b = EnsembleStats::empty(&c);
    for s in 0..4 {
        a.push(&run_realization(&c, s).unwrap());
    }
    for s in 4..9 {
        b.push(&run_realization(&c, s).unwrap());
    }
    let merged = a.merge(&b).unwrap();
    assert_eq!(merged.count(), 9);
    let (m, p) = (merged.mean_profile(60).unwrap(), all.mean_profile(60).unwrap());
    assert!(m.max_abs_diff(&p) < 1e-12);
    let (sm, sp) = (merged.stderr_profile(60).unwrap(), all.stderr_profile(60).unwrap());
    assert!(sm.max_abs_diff(&sp) < 1e-12);

    assert_eq!(all.merge(&EnsembleStats::empty(&c)).unwrap(), all);
    let other = recorded(DetectorPolicy::None, 61, 1);
    assert_eq!(all.merge(&EnsembleStats::empty(&other)), Err(RunError::IncompatibleStats));
}

#[test]
fn realizations_are_reproducible_and_independent_of_order() {
    let c = recorded(DetectorPolicy::RandomBeyond { x_d: 3, t_r: 4, l_r: 30 }, 50, 4);
    let fwd: Vec<_> = (0..4).map(|s| run_realization(&c, s).unwrap()).collect();
    let rev: Vec<_> = (0..4).rev().map(|s| run_realization(&c, s).unwrap()).collect();
    for (a, b) in fwd.iter().zip(rev.iter().rev()) {
        assert_eq!(a, b);
    }
    assert_ne!(fwd[0].trajectory, fwd[1].trajectory);
}

#[test]
fn conservation_per_realization() {
    let c = recorded(DetectorPolicy::RandomWindow { x_d: 2, t_r: 3, upper: WindowUpper::Inclusive }, 300, 3);
    for s in 0..3 {
        let r = run_realization(&c, s).unwrap();
        assert!(r.conservation_error() < 1e-12);
        assert!(r.survival.windows(2).all(|w| w[1] <= w[0] + 1e-14));
    }
}

#[test]
fn config_validation() {
    let mut c = RunConfig::new(DetectorPolicy::Fixed { x_d: 3 }, 10);
    c.n_realizations = 0;
    assert_eq!(run_ensemble(&c).unwrap_err(), RunError::NoRealizations);
    c.n_realizations = 1;
    c.record.snapshot_times = vec![11];
    assert!(matches!(run_ensemble(&c), Err(RunError::SnapshotBeyondHorizon { .. })));
    c.record.snapshot_times.clear();
    c.record.tracked_sites = vec![1000];
    assert_eq!(run_ensemble(&c).unwrap_err(), RunError::SiteOutsideLattice(1000));
    let bad = RunConfig::new(DetectorPolicy::Fixed { x_d: 0 }, 10);
    assert!(matches!(run_ensemble(&bad), Err(RunError::Policy(_))));
}

#[test]
fn window_relocation_stays_in_window() {
    let mut rng = RngStream::new(1, 2);
    for _ in 0..1000 {
        let x = relocate_window(&mut rng, 20, 6, WindowUpper::Exclusive);
        assert!((20..26).contains(&x));
    }
}
