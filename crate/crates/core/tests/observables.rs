use rrmdqw_core::observables::*;
use rrmdqw_core::Profile;

fn ts(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64).collect()
}

#[test]
fn ratio_skips_zero_reference() {
    let f = Series::from_values(&[0.0, 1.0, 2.0, 3.0], &[0.5, 0.0, 0.3, 0.0]);
    let f_inf = Series::from_values(&[0.0, 1.0, 2.0, 3.0], &[1.0, 0.0, 0.6, 1e-40]);
    let r = ratio_series(&f, &f_inf, RATIO_EPSILON).unwrap();
    assert_eq!(r.points().iter().map(|p| p.t).collect::<Vec<_>>(), vec![0.0, 2.0]);
    assert!((r.value_at(2.0).unwrap() - 0.5).abs() < 1e-15);

    let empty = Series::from_values(&[1.0], &[0.0]);
    assert_eq!(ratio_series(&f, &empty, RATIO_EPSILON), Err(ObservableError::EmptyIntersection));
}

#[test]
fn constant_series_saturates_exactly() {
    let s = Series::from_values(&ts(200), &vec![0.7; 200]);
    let est = saturation(&s, 40.0, SATURATION_WINDOW);
    assert!((est.value - 0.7).abs() < 1e-14);
    assert!(est.residual_slope.abs() < 1e-14);
    assert!(est.converged);
    assert_eq!(est.points, 40);
}

#[test]
fn drifting_series_is_not_converged() {
    let t = ts(200);
    let v: Vec<f64> = t.iter().map(|&t| 0.5 + 0.01 * t).collect();
    let est = saturation(&Series::from_values(&t, &v), 40.0, SATURATION_WINDOW);
    assert!(!est.converged);
    assert!((est.residual_slope - 0.01).abs() < 1e-12);
}

#[test]
fn too_few_points_after_onset() {
    let s = Series::from_values(&ts(50), &vec![1.0; 50]);
    assert!(!saturation(&s, 40.0, SATURATION_WINDOW).converged);
    let none = saturation(&s, 100.0, SATURATION_WINDOW);
    assert!(none.value.is_nan() && !none.converged);
}

#[test]
fn saturation_onset_rule() {
    assert_eq!(saturation_onset(10, 10), 40.0);
    assert_eq!(saturation_onset(3, 10), 20.0);
}

#[test]
fn crossings_with_band() {
    let s = Series::from_values(&[1.0, 2.0, 3.0], &[0.8, 1.2, 0.9]);
    let c = count_unity_crossings(&s, CROSSING_BAND);
    assert_eq!(c.count, 2);
    assert!((c.last_crossing.unwrap() - (2.0 + 0.2 / 0.3)).abs() < 1e-12);

    // Wandering inside the band never counts.
    let s = Series::from_values(&[1.0, 2.0, 3.0, 4.0], &[0.8, 1.004, 0.997, 0.7]);
    assert_eq!(count_unity_crossings(&s, CROSSING_BAND).count, 0);
    let s = Series::from_values(&[1.0, 2.0, 3.0], &[0.8, 1.004, 1.1]);
    let c = count_unity_crossings(&s, CROSSING_BAND);
    assert_eq!(c.count, 1);
    assert!((c.last_crossing.unwrap() - (2.0 - 0.004 / 0.204)).abs() < 1e-12);
}

#[test]
fn pure_power_law_is_degenerate() {
    let t: Vec<f64> = (0..30).map(|i| 10.0 * 1.2f64.powi(i)).collect();
    let v: Vec<f64> = t.iter().map(|t| 3.0 / t).collect();
    let fit = crossover_fit(&Series::from_values(&t, &v)).unwrap();
    assert!(fit.degenerate);
    assert!((fit.slope_above + 1.0).abs() < 0.01);
    assert!((fit.slope_below + 1.0).abs() < 0.01);
}

#[test]
fn synthetic_break_is_recovered() {
    let t: Vec<f64> = (0..25).map(|i| 20.0 * 1.15f64.powi(i)).collect();
    let v: Vec<f64> = t.iter().map(|&t| if t < 100.0 { 1.0 } else { 100.0 / t }).collect();
    let fit = crossover_fit(&Series::from_values(&t, &v)).unwrap();
    assert!(!fit.degenerate);
    let star = t.iter().position(|&x| (x - fit.t_r_star).abs() < 1e-9 * x).unwrap();
    let truth = t.iter().position(|&x| x >= 100.0).unwrap();
    assert!(star.abs_diff(truth) <= 1, "{} vs {}", fit.t_r_star, t[truth]);
    assert!(fit.slope_below.abs() < 0.05);
    assert!((fit.slope_above + 1.0).abs() < 0.05);
}

#[test]
fn crossover_needs_points() {
    let s = Series::from_values(&[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0]);
    assert!(matches!(crossover_fit(&s), Err(ObservableError::TooFewPoints { .. })));
}

#[test]
fn odd_displacement_rejected() {
    let s = Series::from_values(&[0.0], &[1.0]);
    assert_eq!(correlation_ratio(&s, &s, &s, &s, 3, RATIO_EPSILON), Err(ObservableError::OddDisplacement(3)));
}

#[test]
fn correlation_ratio_factorizes() {
    let t = [0.0, 2.0, 4.0, 6.0];
    let f_far = Series::from_values(&t, &[0.1, 0.2, 0.05, 0.3]);
    let f_det = Series::from_values(&t, &[0.4, 0.01, 0.02, 0.2]);
    let i_far = Series::from_values(&t, &[0.2, 0.1, 0.1, 0.25]);
    let i_det = Series::from_values(&t, &[0.3, 0.05, 0.04, 0.1]);
    let ratio = correlation_ratio(&f_far, &f_det, &i_far, &i_det, 4, RATIO_EPSILON).unwrap();
    let g = correlation(&f_far, &f_det);
    let g_inf = correlation(&i_far, &i_det);
    let direct = ratio_series(&g, &g_inf, RATIO_EPSILON).unwrap();
    for (a, b) in ratio.points().iter().zip(direct.points()) {
        assert_eq!(a.t, b.t);
        assert!((a.value - b.value).abs() < 1e-12 * b.value.abs());
    }
}

#[test]
fn profile_ratio_is_indexed_by_displacement() {
    let f = Profile::new(-2, vec![0.1, 0.0, 0.2, 0.0, 0.3]);
    let f_inf = Profile::new(-2, vec![0.2, 0.0, 0.4, 0.0, 0.3]);
    let s = profile_ratio(&f, &f_inf, 1, RATIO_EPSILON);
    let pairs: Vec<(f64, f64)> = s.points().iter().map(|p| (p.t, p.value)).collect();
    assert_eq!(pairs, vec![(-3.0, 0.5), (-1.0, 0.5), (1.0, 1.0)]);
}
