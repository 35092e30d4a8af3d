//! Ratios against the free walk, saturation values, unity crossings,
//! crossover fits and equal-time correlations.
//!
//! The free-walk occupation at a fixed site vanishes on every other tick,
//! so ratios are only formed where the reference exceeds
//! [`RATIO_EPSILON`]. Standard errors are propagated to first order.

use alloc::vec::Vec;

use crate::profile::Profile;
use crate::Site;

/// Reference values at or below this are treated as zero.
pub const RATIO_EPSILON: f64 = 1e-30;
/// Default half-width of the hysteresis band around 1.
pub const CROSSING_BAND: f64 = 0.005;
/// Default fraction of post-onset points averaged for a saturation value.
pub const SATURATION_WINDOW: f64 = 0.25;
/// Minimum post-onset points for a converged saturation value.
pub const SATURATION_MIN_POINTS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Point {
    /// Abscissa: a tick, a relocation period, or a displacement.
    pub t: f64,
    pub value: f64,
    pub stderr: f64,
}

impl Point {
    pub fn new(t: f64, value: f64) -> Self {
        Point { t, value, stderr: 0.0 }
    }

    pub fn with_stderr(t: f64, value: f64, stderr: f64) -> Self {
        Point { t, value, stderr }
    }
}

/// Ordered `(t, value)` pairs with strictly increasing `t`.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Series {
    /// Lattice site the series belongs to, if any.
    pub site: Option<Site>,
    points: Vec<Point>,
}

impl Series {
    /// Panics unless abscissas are strictly increasing.
    pub fn from_points(points: Vec<Point>) -> Self {
        assert!(points.windows(2).all(|w| w[0].t < w[1].t), "series abscissas must increase");
        Series { site: None, points }
    }

    pub fn from_values(ts: &[f64], values: &[f64]) -> Self {
        Self::from_points(ts.iter().zip(values).map(|(&t, &v)| Point::new(t, v)).collect())
    }

    pub fn with_site(mut self, x: Site) -> Self {
        self.site = Some(x);
        self
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.value)
    }

    pub fn value_at(&self, t: f64) -> Option<f64> {
        self.points.iter().find(|p| p.t == t).map(|p| p.value)
    }

    /// Points with `lo <= t <= hi`.
    pub fn restrict(&self, lo: f64, hi: f64) -> Series {
        Series {
            site: self.site,
            points: self.points.iter().copied().filter(|p| p.t >= lo && p.t <= hi).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ObservableError {
    #[error("no common abscissa with a nonzero reference value")]
    EmptyIntersection,
    #[error("displacement r = {0} is odd; the two sites are never occupied on the same tick")]
    OddDisplacement(Site),
    #[error("crossover fit needs at least {needed} positive points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
}

#[inline]
fn sq(x: f64) -> f64 {
    x * x
}

#[inline]
fn ratio_point(t: f64, num: Point, den: Point) -> Point {
    let value = num.value / den.value;
    // d(a/b) = sqrt((da/b)^2 + (a db / b^2)^2)
    let ea = num.stderr / den.value;
    let eb = value * den.stderr / den.value;
    Point::with_stderr(t, value, libm::sqrt(ea * ea + eb * eb))
}

/// `f / f_inf` on the common ticks where `f_inf > epsilon`.
pub fn ratio_series(f: &Series, f_inf: &Series, epsilon: f64) -> Result<Series, ObservableError> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    let (a, b) = (f.points(), f_inf.points());
    while i < a.len() && j < b.len() {
        if a[i].t < b[j].t {
            i += 1;
        } else if a[i].t > b[j].t {
            j += 1;
        } else {
            if b[j].value > epsilon {
                out.push(ratio_point(a[i].t, a[i], b[j]));
            }
            i += 1;
            j += 1;
        }
    }
    if out.is_empty() {
        return Err(ObservableError::EmptyIntersection);
    }
    Ok(Series { site: f.site, points: out })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SaturationEstimate {
    pub value: f64,
    /// Upper bound on the standard error of `value`: the mean of the
    /// pointwise standard errors in the window.
    pub stderr: f64,
    pub window: (f64, f64),
    pub points: usize,
    /// Least-squares slope of the series inside the window.
    pub residual_slope: f64,
    pub converged: bool,
}

/// Earliest tick the saturation window may start at for a run with
/// relocation period `t_r` and detector start `x_d`.
pub fn saturation_onset(t_r: u64, x_d: Site) -> f64 {
    (4 * t_r).max(2 * x_d.max(0) as u64) as f64
}

/// Long-time value of `series`: the mean over the trailing
/// `window_fraction` of points with `t >= onset`.
///
/// Converged when at least [`SATURATION_MIN_POINTS`] points follow `onset`
/// and the in-window drift `|slope| (t_hi - t_lo)` stays below 1% of the
/// value. With no point after `onset` the estimate is `NaN` and not
/// converged.
pub fn saturation(series: &Series, onset: f64, window_fraction: f64) -> SaturationEstimate {
    let tail: Vec<Point> = series.points().iter().copied().filter(|p| p.t >= onset).collect();
    if tail.is_empty() {
        return SaturationEstimate {
            value: f64::NAN,
            stderr: f64::NAN,
            window: (onset, onset),
            points: 0,
            residual_slope: 0.0,
            converged: false,
        };
    }
    let k = (libm::ceil(tail.len() as f64 * window_fraction.clamp(0.0, 1.0)) as usize).clamp(1, tail.len());
    let win = &tail[tail.len() - k..];
    let n = win.len() as f64;
    let value = win.iter().map(|p| p.value).sum::<f64>() / n;
    let stderr = win.iter().map(|p| p.stderr).sum::<f64>() / n;
    let (slope, _) = linear_fit(win.iter().map(|p| (p.t, p.value)));
    let window = (win[0].t, win[win.len() - 1].t);
    let drift = slope.abs() * (window.1 - window.0);
    SaturationEstimate {
        value,
        stderr,
        window,
        points: win.len(),
        residual_slope: slope,
        converged: tail.len() >= SATURATION_MIN_POINTS && drift < 0.01 * value.abs(),
    }
}

/// Ordinary least squares `y = slope x + intercept`; slope 0 for fewer
/// than two distinct abscissas.
pub fn linear_fit(points: impl Iterator<Item = (f64, f64)> + Clone) -> (f64, f64) {
    let (mut n, mut sx, mut sy) = (0.0, 0.0, 0.0);
    for (x, y) in points.clone() {
        n += 1.0;
        sx += x;
        sy += y;
    }
    if n == 0.0 {
        return (0.0, 0.0);
    }
    let (mx, my) = (sx / n, sy / n);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in points {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return (0.0, my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CrossingReport {
    pub count: usize,
    /// Interpolated abscissa of the last crossing of 1.
    pub last_crossing: Option<f64>,
}

/// Sign changes of `value - 1`, with a hysteresis band: a crossing is
/// counted only once the series has left `[1 - band, 1 + band]` on the
/// other side.
pub fn count_unity_crossings(series: &Series, band: f64) -> CrossingReport {
    let pts = series.points();
    let side = |v: f64| {
        if v > 1.0 + band {
            Some(true)
        } else if v < 1.0 - band {
            Some(false)
        } else {
            None
        }
    };
    let mut report = CrossingReport::default();
    let mut state: Option<(bool, usize)> = None;
    for (i, p) in pts.iter().enumerate() {
        let Some(above) = side(p.value) else { continue };
        match state {
            None => state = Some((above, i)),
            Some((prev, prev_i)) if prev != above => {
                report.count += 1;
                report.last_crossing = crossing_abscissa(&pts[prev_i..=i]);
                state = Some((above, i));
            }
            Some(_) => state = Some((above, i)),
        }
    }
    report
}

// Last segment of `pts` that brackets 1, linearly interpolated.
fn crossing_abscissa(pts: &[Point]) -> Option<f64> {
    pts.windows(2).rev().find_map(|w| {
        let (a, b) = (w[0].value - 1.0, w[1].value - 1.0);
        if a == 0.0 {
            Some(w[0].t)
        } else if a * b < 0.0 || b == 0.0 {
            Some(w[0].t + (w[1].t - w[0].t) * a / (a - b))
        } else {
            None
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CrossoverFit {
    /// First abscissa of the upper segment.
    pub t_r_star: f64,
    pub slope_below: f64,
    pub slope_above: f64,
    pub sse: f64,
    /// SSE of a single straight line through all points.
    pub single_line_sse: f64,
    /// The data is already a single power law, or several breakpoints tie;
    /// `t_r_star` then carries no information.
    pub degenerate: bool,
}

/// Minimum number of points on each side of a breakpoint.
const MIN_SEGMENT: usize = 3;

/// Two-segment least-squares fit of `ln(value)` against `ln(t)`.
///
/// Every interior split is tried; the upper segment starts at the
/// breakpoint and each segment needs at least three points. Non-positive
/// values are dropped before fitting.
pub fn crossover_fit(curve: &Series) -> Result<CrossoverFit, ObservableError> {
    let logs: Vec<(f64, f64)> = curve
        .points()
        .iter()
        .filter(|p| p.value > 0.0 && p.t > 0.0)
        .map(|p| (libm::log(p.t), libm::log(p.value)))
        .collect();
    let needed = 8;
    if logs.len() < needed {
        return Err(ObservableError::TooFewPoints { needed, got: logs.len() });
    }
    let fit_sse = |seg: &[(f64, f64)]| -> (f64, f64) {
        let (slope, icpt) = linear_fit(seg.iter().copied());
        let sse = seg.iter().map(|&(x, y)| sq(y - slope * x - icpt)).sum();
        (slope, sse)
    };
    let (_, single) = fit_sse(&logs);
    let mut best: Option<(usize, f64, f64, f64)> = None;
    let mut sses = Vec::new();
    for b in MIN_SEGMENT..=logs.len() - MIN_SEGMENT {
        let (s_lo, e_lo) = fit_sse(&logs[..b]);
        let (s_hi, e_hi) = fit_sse(&logs[b..]);
        let sse = e_lo + e_hi;
        sses.push(sse);
        if best.is_none_or(|(_, _, _, e)| sse < e) {
            best = Some((b, s_lo, s_hi, sse));
        }
    }
    let (b, slope_below, slope_above, sse) = best.expect("at least one split");
    let scale = single.max(1e-300);
    let ties = sses.iter().filter(|&&e| (e - sse) <= 1e-9 * scale).count();
    Ok(CrossoverFit {
        t_r_star: libm::exp(logs[b].0),
        slope_below,
        slope_above,
        sse,
        single_line_sse: single,
        degenerate: single < 1e-12 || ties > 1,
    })
}

/// `f(x_d + r) / f_inf(x_d + r)` indexed by `r`, on sites where the
/// reference exceeds `epsilon`.
pub fn profile_ratio(f: &Profile, f_inf: &Profile, x_d: Site, epsilon: f64) -> Series {
    let lo = f.x_min().min(f_inf.x_min());
    let hi = f.x_max().max(f_inf.x_max());
    let points = (lo..=hi)
        .filter_map(|x| {
            let den = f_inf.get(x);
            (den > epsilon).then(|| Point::new((x - x_d) as f64, f.get(x) / den))
        })
        .collect();
    Series::from_points(points)
}

/// Same as [`profile_ratio`] with standard errors on the numerator.
pub fn profile_ratio_with_stderr(f: &Profile, f_err: &Profile, f_inf: &Profile, x_d: Site, epsilon: f64) -> Series {
    let lo = f.x_min().min(f_inf.x_min());
    let hi = f.x_max().max(f_inf.x_max());
    let points = (lo..=hi)
        .filter_map(|x| {
            let den = f_inf.get(x);
            (den > epsilon).then(|| Point::with_stderr((x - x_d) as f64, f.get(x) / den, f_err.get(x) / den))
        })
        .collect();
    Series::from_points(points)
}

/// `g / g_inf` with `g(t) = f(x_d + r, t) f(x_d, t)`, on the ticks where
/// both reference series exceed `epsilon`.
pub fn correlation_ratio(
    f_far: &Series,
    f_det: &Series,
    f_inf_far: &Series,
    f_inf_det: &Series,
    r: Site,
    epsilon: f64,
) -> Result<Series, ObservableError> {
    if r % 2 != 0 {
        return Err(ObservableError::OddDisplacement(r));
    }
    let far = ratio_series(f_far, f_inf_far, epsilon)?;
    let det = ratio_series(f_det, f_inf_det, epsilon)?;
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    let (a, b) = (far.points(), det.points());
    while i < a.len() && j < b.len() {
        if a[i].t < b[j].t {
            i += 1;
        } else if a[i].t > b[j].t {
            j += 1;
        } else {
            let (p, q) = (a[i], b[j]);
            let value = p.value * q.value;
            let err = libm::sqrt(sq(p.stderr * q.value) + sq(q.stderr * p.value));
            out.push(Point::with_stderr(p.t, value, err));
            i += 1;
            j += 1;
        }
    }
    if out.is_empty() {
        return Err(ObservableError::EmptyIntersection);
    }
    Ok(Series::from_points(out))
}

/// `g(t) = f(x_d + r, t) f(x_d, t)` computed directly from the two
/// occupation series, without going through site ratios.
pub fn correlation(f_far: &Series, f_det: &Series) -> Series {
    let points = f_far
        .points()
        .iter()
        .filter_map(|p| {
            f_det
                .points()
                .binary_search_by(|q| q.t.partial_cmp(&p.t).expect("finite abscissa"))
                .ok()
                .map(|j| Point::new(p.t, p.value * f_det.points()[j].value))
        })
        .collect();
    Series::from_points(points)
}
