use proptest::prelude::*;
use rrmdqw_core::oracle::{compare, oracle_profile};
use rrmdqw_core::walk::init_state_in;
use rrmdqw_core::*;

fn coin() -> impl Strategy<Value = Coin> {
    (0.0..std::f64::consts::FRAC_PI_2, 0.0..std::f64::consts::TAU, 0.0..std::f64::consts::TAU).prop_map(|(th, a, b)| {
        let l = num_complex::Complex64::from_polar(th.cos(), a);
        let r = num_complex::Complex64::from_polar(th.sin(), b);
        let n = (l.norm_sqr() + r.norm_sqr()).sqrt();
        Coin::new(l / n, r / n)
    })
}

fn ticks(t: usize) -> impl Strategy<Value = Vec<Option<Site>>> {
    prop::collection::vec(prop::option::weighted(0.8, -6i64..=6), t)
}

fn random_state(seed: u64, half: Site) -> WalkerState {
    let mut rng = RngStream::new(seed, 0);
    let mut s = init_state_in(0, Coin::symmetric(), -half - 40, half + 40).unwrap();
    let mut amp = || num_complex::Complex64::new(rng.next_f64() - 0.5, rng.next_f64() - 0.5);
    for x in -half..=half {
        s.set_spinor(x, Spinor::new(amp(), amp()));
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn engine_matches_path_sum(c in coin(), t in 0usize..=12, raw in ticks(12)) {
        let traj = DetectorTrajectory::from_ticks(raw[..t].to_vec());
        let mut s = init_state(0, c, t as u64).unwrap();
        for k in 1..=t as u64 {
            s.step(traj.position_at(k)).unwrap();
        }
        let exact = oracle_profile(0, &c, &traj, t as u64).unwrap();
        prop_assert!(compare(&s.occupation_profile(), &exact) < 1e-12);
    }

    #[test]
    fn survival_never_increases(c in coin(), raw in ticks(200)) {
        let mut s = init_state(0, c, 200).unwrap();
        let mut prev = s.survival();
        let mut removed = 0.0;
        for (k, x) in raw.iter().enumerate() {
            let out = s.step(x.map(|x| x + (k as Site % 11))).unwrap();
            prop_assert!(out.removed_probability >= 0.0);
            removed += out.removed_probability;
            let now = s.survival();
            prop_assert!(now <= prev + 1e-14);
            prev = now;
        }
        prop_assert!((prev + removed - 1.0).abs() < 1e-12);
    }

    #[test]
    fn support_has_fixed_parity(c in coin(), origin in -5i64..5, raw in ticks(60)) {
        let mut s = init_state(origin, c, 60).unwrap();
        for (k, x) in raw.iter().enumerate() {
            s.step(*x).unwrap();
            let t = k as Site + 1;
            for (y, f) in s.occupation_profile().iter() {
                if (y - origin - t).rem_euclid(2) == 1 || (y - origin).abs() > t {
                    prop_assert_eq!(f, 0.0);
                }
            }
        }
    }

    #[test]
    fn coin_is_an_involution(seed in any::<u64>()) {
        let s0 = random_state(seed, 10);
        let mut s = s0.clone();
        s.coin_step();
        s.coin_step();
        for x in -10..=10 {
            let (a, b) = (s.spinor(x), s0.spinor(x));
            prop_assert!((a.l - b.l).norm() < 1e-14 && (a.r - b.r).norm() < 1e-14);
        }
    }

    #[test]
    fn free_evolution_preserves_norm(seed in any::<u64>(), steps in 1u64..30) {
        let mut s = random_state(seed, 8);
        let n0 = s.survival();
        s.coin_step();
        prop_assert!((s.survival() - n0).abs() < 1e-12 * n0);
        s.shift_step().unwrap();
        prop_assert!((s.survival() - n0).abs() < 1e-12 * n0);
        for _ in 0..steps {
            s.step(None).unwrap();
        }
        prop_assert!((s.survival() - n0).abs() < 1e-12 * n0);
    }

    #[test]
    fn welford_merge_is_associative(
        a in prop::collection::vec(-1e3f64..1e3, 0..40),
        b in prop::collection::vec(-1e3f64..1e3, 0..40),
        c in prop::collection::vec(-1e3f64..1e3, 0..40),
    ) {
        let acc = |xs: &[f64]| { let mut w = Welford::new(); xs.iter().for_each(|&x| w.push(x)); w };
        let (wa, wb, wc) = (acc(&a), acc(&b), acc(&c));
        let left = wa.merge(&wb).merge(&wc);
        let right = wa.merge(&wb.merge(&wc));
        let all = acc(&[a, b, c].concat());
        prop_assert_eq!(left.count(), all.count());
        for w in [left, right] {
            prop_assert!((w.mean() - all.mean()).abs() <= 1e-9 * (1.0 + all.mean().abs()));
            prop_assert!((w.variance() - all.variance()).abs() <= 1e-8 * (1.0 + all.variance()));
        }
    }

    #[test]
    fn relocation_stays_in_range(seed in any::<u64>(), stream in any::<u64>(), x_d in 1i64..50, t_r in 1u64..40) {
        let mut rng = RngStream::new(seed, stream);
        let beyond = detector::relocate_beyond(&mut rng, x_d, 10 * x_d + 5).unwrap();
        prop_assert!(beyond > x_d && beyond <= 10 * x_d + 5);
        let w = detector::relocate_window(&mut rng, x_d, t_r, WindowUpper::Exclusive);
        prop_assert!(w >= x_d && w < x_d + t_r as Site);
        let w = detector::relocate_window(&mut rng, x_d, t_r, WindowUpper::Inclusive);
        prop_assert!(w >= x_d && w <= x_d + t_r as Site);
    }

    #[test]
    fn trajectory_is_piecewise_constant(seed in any::<u64>(), t_r in 1u64..20, t_max in 1u64..300) {
        let policy = DetectorPolicy::RandomWindow { x_d: 3, t_r, upper: WindowUpper::Exclusive };
        let traj = build_trajectory(&policy, &mut RngStream::new(seed, 1), t_max).unwrap();
        prop_assert_eq!(traj.position_at(0), Some(3));
        for t in 1..=t_max {
            let k = (t - 1) / t_r;
            prop_assert_eq!(traj.position_at(t), traj.position_at(k * t_r + 1));
            if k == 0 {
                prop_assert_eq!(traj.position_at(t), Some(3));
            }
        }
    }
}
