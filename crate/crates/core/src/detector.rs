//! Detector position schedules `X_D(t)`.
//!
//! A random-relocation detector starts at `x_D` and stays there for the
//! first `t_R` ticks. At each multiple of `t_R` it is removed and put back
//! at a random site:
//!
//! * [`DetectorPolicy::RandomBeyond`]: uniform in `{x_D + 1, ..., L_R}`,
//!   independent of where it was before.
//! * [`DetectorPolicy::RandomWindow`]: uniform in a window of width `t_R`
//!   starting at its current position, so the trajectory never moves left.
//!
//! Interval `k` covers the ticks `t` in `(k t_R, (k + 1) t_R]` (interval 0
//! also includes `t = 0`). The detector of interval `k` absorbs the
//! amplitude arriving at every tick of that interval, including the last
//! one, `t = (k + 1) t_R`.

use alloc::vec;
use alloc::vec::Vec;

use crate::rng::RngStream;
use crate::Site;

/// Upper end of the relocation window for [`DetectorPolicy::RandomWindow`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum WindowUpper {
    /// `{X_old, ..., X_old + t_R - 1}`; with `t_R = 1` the detector never
    /// moves.
    #[default]
    Exclusive,
    /// `{X_old, ..., X_old + t_R}`.
    Inclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum DetectorPolicy {
    /// No detector: the infinite walk.
    None,
    /// Detector fixed at `x_d` forever: the semi-infinite walk.
    Fixed { x_d: Site },
    /// Detector at `x_d` up to and including tick `t_q`, then gone: the
    /// quenched walk.
    Quench { x_d: Site, t_q: u64 },
    /// Relocated every `t_r` ticks uniformly into `{x_d + 1, ..., l_r}`.
    RandomBeyond { x_d: Site, t_r: u64, l_r: Site },
    /// Relocated every `t_r` ticks uniformly into a window of width `t_r`
    /// starting at the current position.
    RandomWindow { x_d: Site, t_r: u64, upper: WindowUpper },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolicyError {
    #[error("detector start site must be >= 1, got {0}")]
    StartNotPositive(Site),
    #[error("relocation period must be >= 1")]
    ZeroPeriod,
    #[error("relocation range {{{lo}, ..., {hi}}} is empty")]
    EmptyRange { lo: Site, hi: Site },
}

impl DetectorPolicy {
    pub fn validate(&self) -> Result<(), PolicyError> {
        let (x_d, t_r) = match *self {
            DetectorPolicy::None => return Ok(()),
            DetectorPolicy::Fixed { x_d } | DetectorPolicy::Quench { x_d, .. } => (x_d, None),
            DetectorPolicy::RandomBeyond { x_d, t_r, .. } | DetectorPolicy::RandomWindow { x_d, t_r, .. } => {
                (x_d, Some(t_r))
            }
        };
        if x_d < 1 {
            return Err(PolicyError::StartNotPositive(x_d));
        }
        if t_r == Some(0) {
            return Err(PolicyError::ZeroPeriod);
        }
        if let DetectorPolicy::RandomBeyond { x_d, l_r, .. } = *self {
            if l_r <= x_d {
                return Err(PolicyError::EmptyRange { lo: x_d + 1, hi: l_r });
            }
        }
        Ok(())
    }

    /// Initial detector site, if there is a detector at all.
    pub fn start(&self) -> Option<Site> {
        match *self {
            DetectorPolicy::None => None,
            DetectorPolicy::Fixed { x_d }
            | DetectorPolicy::Quench { x_d, .. }
            | DetectorPolicy::RandomBeyond { x_d, .. }
            | DetectorPolicy::RandomWindow { x_d, .. } => Some(x_d),
        }
    }

    /// Relocation period for the random policies.
    pub fn period(&self) -> Option<u64> {
        match *self {
            DetectorPolicy::RandomBeyond { t_r, .. } | DetectorPolicy::RandomWindow { t_r, .. } => Some(t_r),
            _ => None,
        }
    }

    pub fn is_random(&self) -> bool {
        self.period().is_some()
    }

    /// Short name used on the command line and in output files.
    pub fn label(&self) -> &'static str {
        match self {
            DetectorPolicy::None => "iw",
            DetectorPolicy::Fixed { .. } => "siw",
            DetectorPolicy::Quench { .. } => "qqw",
            DetectorPolicy::RandomBeyond { .. } => "rr1",
            DetectorPolicy::RandomWindow { .. } => "rr2",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Schedule {
    Absent,
    Fixed(Site),
    Until { x_d: Site, t_q: u64 },
    Periodic { period: u64, positions: Vec<Site> },
    PerTick(Vec<Option<Site>>),
}

/// Realized detector schedule of one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectorTrajectory {
    schedule: Schedule,
}

impl DetectorTrajectory {
    /// Piecewise-constant schedule: `positions[k]` holds for interval `k`.
    pub fn periodic(period: u64, positions: Vec<Site>) -> Self {
        assert!(period >= 1 && !positions.is_empty());
        DetectorTrajectory { schedule: Schedule::Periodic { period, positions } }
    }

    /// Arbitrary schedule: `ticks[s - 1]` is the detector for the step that
    /// produces tick `s`. Ticks past the end have no detector.
    pub fn from_ticks(ticks: Vec<Option<Site>>) -> Self {
        DetectorTrajectory { schedule: Schedule::PerTick(ticks) }
    }

    pub fn absent() -> Self {
        DetectorTrajectory { schedule: Schedule::Absent }
    }

    /// `X_D(t)`: the detector that absorbs amplitude arriving at tick `t`.
    ///
    /// Periodic schedules hold their last interval past the built horizon.
    pub fn position_at(&self, t: u64) -> Option<Site> {
        match &self.schedule {
            Schedule::Absent => None,
            Schedule::Fixed(x) => Some(*x),
            Schedule::Until { x_d, t_q } => (t <= *t_q).then_some(*x_d),
            Schedule::Periodic { period, positions } => {
                let k = interval_index(t, *period) as usize;
                Some(positions[k.min(positions.len() - 1)])
            }
            Schedule::PerTick(ticks) => {
                if t == 0 {
                    None
                } else {
                    ticks.get(t as usize - 1).copied().flatten()
                }
            }
        }
    }

    /// Positions `X_k` per relocation interval; deterministic policies
    /// report their single site, an absent detector reports nothing.
    pub fn interval_positions(&self) -> Vec<Site> {
        match &self.schedule {
            Schedule::Absent => Vec::new(),
            Schedule::Fixed(x) | Schedule::Until { x_d: x, .. } => vec![*x],
            Schedule::Periodic { positions, .. } => positions.clone(),
            Schedule::PerTick(ticks) => ticks.iter().flatten().copied().collect(),
        }
    }

    pub fn period(&self) -> Option<u64> {
        match &self.schedule {
            Schedule::Periodic { period, .. } => Some(*period),
            _ => None,
        }
    }
}

/// Index `k` of the relocation interval that contains tick `t`.
pub fn interval_index(t: u64, period: u64) -> u64 {
    if t == 0 {
        0
    } else {
        (t - 1) / period
    }
}

/// Uniform draw from `{x_d + 1, ..., l_r}`.
pub fn relocate_beyond(rng: &mut RngStream, x_d: Site, l_r: Site) -> Result<Site, PolicyError> {
    if l_r <= x_d {
        return Err(PolicyError::EmptyRange { lo: x_d + 1, hi: l_r });
    }
    Ok(rng.uniform_inclusive(x_d + 1, l_r))
}

/// Uniform draw from the window starting at `x_old` of width `t_r`
/// (`upper` decides whether `x_old + t_r` itself is allowed).
pub fn relocate_window(rng: &mut RngStream, x_old: Site, t_r: u64, upper: WindowUpper) -> Site {
    let width = match upper {
        WindowUpper::Exclusive => t_r.max(1) - 1,
        WindowUpper::Inclusive => t_r,
    } as Site;
    if width == 0 {
        return x_old;
    }
    rng.uniform_inclusive(x_old, x_old + width)
}

/// Realizes `policy` up to tick `t_max`, drawing relocations from `rng`.
pub fn build_trajectory(
    policy: &DetectorPolicy,
    rng: &mut RngStream,
    t_max: u64,
) -> Result<DetectorTrajectory, PolicyError> {
    policy.validate()?;
    let schedule = match *policy {
        DetectorPolicy::None => Schedule::Absent,
        DetectorPolicy::Fixed { x_d } => Schedule::Fixed(x_d),
        DetectorPolicy::Quench { x_d, t_q } => Schedule::Until { x_d, t_q },
        DetectorPolicy::RandomBeyond { x_d, t_r, l_r } => {
            let n = interval_count(t_max, t_r);
            let mut positions = Vec::with_capacity(n);
            positions.push(x_d);
            for _ in 1..n {
                positions.push(relocate_beyond(rng, x_d, l_r)?);
            }
            Schedule::Periodic { period: t_r, positions }
        }
        DetectorPolicy::RandomWindow { x_d, t_r, upper } => {
            let n = interval_count(t_max, t_r);
            let mut positions = Vec::with_capacity(n);
            let mut x = x_d;
            positions.push(x);
            for _ in 1..n {
                x = relocate_window(rng, x, t_r, upper);
                positions.push(x);
            }
            Schedule::Periodic { period: t_r, positions }
        }
    };
    Ok(DetectorTrajectory { schedule })
}

fn interval_count(t_max: u64, t_r: u64) -> usize {
    (t_max.div_ceil(t_r)).max(1) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model2(x_d: Site, t_r: u64) -> DetectorPolicy {
        DetectorPolicy::RandomWindow { x_d, t_r, upper: WindowUpper::Exclusive }
    }

    #[test]
    fn deterministic_policies() {
        let mut rng = RngStream::new(0, 0);
        let fixed = build_trajectory(&DetectorPolicy::Fixed { x_d: 10 }, &mut rng, 1000).unwrap();
        assert_eq!(fixed.position_at(999), Some(10));
        assert_eq!(fixed.position_at(0), Some(10));

        let q = build_trajectory(&DetectorPolicy::Quench { x_d: 10, t_q: 50 }, &mut rng, 1000).unwrap();
        assert_eq!(q.position_at(50), Some(10));
        assert_eq!(q.position_at(51), None);

        let none = build_trajectory(&DetectorPolicy::None, &mut rng, 1000).unwrap();
        assert_eq!(none.position_at(3), None);
        assert_eq!(rng.counter(), 0);
    }

    #[test]
    fn window_of_one_never_moves() {
        let mut rng = RngStream::new(5, 1);
        let tr = build_trajectory(&model2(10, 1), &mut rng, 1000).unwrap();
        assert!((0..=1000).all(|t| tr.position_at(t) == Some(10)));
    }

    #[test]
    fn inclusive_window_of_one_is_two_point() {
        let mut rng = RngStream::new(11, 0);
        let n = 20_000;
        let mut moved = 0;
        for _ in 0..n {
            let x = relocate_window(&mut rng, 3, 1, WindowUpper::Inclusive);
            assert!(x == 3 || x == 4);
            moved += (x == 4) as u32;
        }
        let p = moved as f64 / n as f64;
        assert!((p - 0.5).abs() < 0.02, "p = {p}");
    }

    #[test]
    fn window_mean_displacement() {
        let mut rng = RngStream::new(2024, 7);
        let n = 100_000;
        let total: i64 = (0..n).map(|_| relocate_window(&mut rng, 0, 20, WindowUpper::Exclusive)).sum();
        let mean = total as f64 / n as f64;
        assert!((mean - 9.5).abs() < 0.2, "mean = {mean}");
    }

    #[test]
    fn beyond_singleton_and_empty() {
        let mut rng = RngStream::new(1, 1);
        for _ in 0..100 {
            assert_eq!(relocate_beyond(&mut rng, 10, 11).unwrap(), 11);
        }
        assert!(relocate_beyond(&mut rng, 10, 10).is_err());
        let bad = DetectorPolicy::RandomBeyond { x_d: 10, t_r: 5, l_r: 10 };
        assert!(build_trajectory(&bad, &mut rng, 100).is_err());
    }

    #[test]
    fn validation() {
        assert_eq!(DetectorPolicy::Fixed { x_d: 0 }.validate(), Err(PolicyError::StartNotPositive(0)));
        assert_eq!(model2(3, 0).validate(), Err(PolicyError::ZeroPeriod));
        assert!(model2(3, 1).validate().is_ok());
    }

    #[test]
    fn short_horizon_is_single_interval() {
        let mut rng = RngStream::new(3, 3);
        let p = DetectorPolicy::RandomBeyond { x_d: 10, t_r: 50, l_r: 1000 };
        let tr = build_trajectory(&p, &mut rng, 49).unwrap();
        assert_eq!(tr.interval_positions(), vec![10]);
        assert_eq!(rng.counter(), 0);
    }

    #[test]
    fn interval_boundaries() {
        let tr = DetectorTrajectory::periodic(10, vec![1, 2, 3]);
        assert_eq!(tr.position_at(0), Some(1));
        assert_eq!(tr.position_at(10), Some(1));
        assert_eq!(tr.position_at(11), Some(2));
        assert_eq!(tr.position_at(20), Some(2));
        assert_eq!(tr.position_at(21), Some(3));
        assert_eq!(tr.position_at(500), Some(3));
    }

    #[test]
    fn union_bound_for_far_relocation() {
        // L_R = 1e6, t_max = 1000: P(any draw <= 1000) <= count * 1e-3.
        let p = DetectorPolicy::RandomBeyond { x_d: 10, t_r: 20, l_r: 1_000_000 };
        let runs = 2000;
        let mut hits = 0;
        let mut count = 0;
        for s in 0..runs {
            let mut rng = RngStream::new(77, s);
            let tr = build_trajectory(&p, &mut rng, 1000).unwrap();
            let pos = tr.interval_positions();
            count = pos.len() - 1;
            hits += pos[1..].iter().any(|&x| x <= 1000) as u32;
        }
        let frac = hits as f64 / runs as f64;
        assert!(frac < 1e-2 * count as f64, "frac = {frac}");
    }
}
