//! Independent realizations over relocation randomness and their
//! streaming aggregate.
//!
//! Realization `i` draws from [`RngStream::new(base_seed, i)`], so its
//! result does not depend on which other realizations run or when. The
//! aggregate is a fold over results in ascending stream order, which keeps
//! merged means bit-stable however the realizations were scheduled.

use alloc::vec;
use alloc::vec::Vec;

use crate::detector::{build_trajectory, DetectorPolicy, DetectorTrajectory, PolicyError};
use crate::observables::{Point, Series};
use crate::profile::Profile;
use crate::rng::RngStream;
use crate::stats::Welford;
use crate::walk::{default_window, init_state_in, Coin, WalkError};
use crate::Site;

/// What a realization records besides its final state.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct RecordSpec {
    /// Ticks at which the full occupation profile is stored.
    pub snapshot_times: Vec<u64>,
    /// Sites whose `f(x, t)` is stored for every tick `0..=t_max`.
    pub tracked_sites: Vec<Site>,
    /// Store `S(t)` and the cumulative absorbed weight at every tick.
    pub survival_series: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub policy: DetectorPolicy,
    pub t_max: u64,
    pub origin: Site,
    pub coin: Coin,
    /// Lattice window; `None` uses [`default_window`].
    pub lattice: Option<(Site, Site)>,
    pub n_realizations: u64,
    pub base_seed: u64,
    pub record: RecordSpec,
}

impl RunConfig {
    /// Origin 0, symmetric coin, default window, 500 realizations, seed 0.
    pub fn new(policy: DetectorPolicy, t_max: u64) -> Self {
        RunConfig {
            policy,
            t_max,
            origin: 0,
            coin: Coin::symmetric(),
            lattice: None,
            n_realizations: 500,
            base_seed: 0,
            record: RecordSpec::default(),
        }
    }

    pub fn window(&self) -> (Site, Site) {
        self.lattice.unwrap_or_else(|| default_window(self.origin, self.t_max))
    }

    pub fn validate(&self) -> Result<(), RunError> {
        self.policy.validate()?;
        if self.n_realizations == 0 {
            return Err(RunError::NoRealizations);
        }
        if let Some(&t) = self.record.snapshot_times.iter().find(|&&t| t > self.t_max) {
            return Err(RunError::SnapshotBeyondHorizon { t, t_max: self.t_max });
        }
        let (lo, hi) = self.window();
        if let Some(&x) = self.record.tracked_sites.iter().find(|&&x| x < lo || x > hi) {
            return Err(RunError::SiteOutsideLattice(x));
        }
        Ok(())
    }

    /// Copy with a different policy; everything else, seed included, kept.
    pub fn with_policy(&self, policy: DetectorPolicy) -> Self {
        RunConfig { policy, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("ensemble needs at least one realization")]
    NoRealizations,
    #[error("snapshot time {t} exceeds t_max = {t_max}")]
    SnapshotBeyondHorizon { t: u64, t_max: u64 },
    #[error("tracked site {0} lies outside the lattice window")]
    SiteOutsideLattice(Site),
    #[error("cannot merge statistics recorded with different record specs")]
    IncompatibleStats,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionEvent {
    pub t: u64,
    pub x: Site,
    pub removed_probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealizationResult {
    pub stream_id: u64,
    /// `(t, f(., t))` for each requested snapshot time, in request order.
    pub snapshots: Vec<(u64, Profile)>,
    /// `f(x, t)` for `t = 0..=t_max`, one row per tracked site.
    pub tracked: Vec<Vec<f64>>,
    /// `S(t)` for `t = 0..=t_max` (empty unless requested).
    pub survival: Vec<f64>,
    /// Cumulative absorbed weight up to tick `t` (empty unless requested).
    pub absorbed: Vec<f64>,
    pub trajectory: DetectorTrajectory,
    pub detections: Vec<DetectionEvent>,
    pub final_survival: f64,
    pub total_absorbed: f64,
}

impl RealizationResult {
    /// Largest `|S(t) + absorbed(t) - 1|` over the recorded ticks and the
    /// final state.
    pub fn conservation_error(&self) -> f64 {
        self.survival
            .iter()
            .zip(&self.absorbed)
            .map(|(s, a)| (s + a - 1.0).abs())
            .fold((self.final_survival + self.total_absorbed - 1.0).abs(), f64::max)
    }

    /// Detection events with `t <= t_hi`.
    pub fn detections_until(&self, t_hi: u64) -> usize {
        self.detections.iter().filter(|d| d.t <= t_hi).count()
    }
}

/// Runs realization `stream_id` of `config`.
pub fn run_realization(config: &RunConfig, stream_id: u64) -> Result<RealizationResult, RunError> {
    config.validate()?;
    let mut rng = RngStream::new(config.base_seed, stream_id);
    let trajectory = build_trajectory(&config.policy, &mut rng, config.t_max)?;
    run_with_trajectory(config, trajectory, stream_id)
}

/// Runs `config` against a given detector schedule instead of drawing one
/// from the policy.
pub fn run_with_trajectory(
    config: &RunConfig,
    trajectory: DetectorTrajectory,
    stream_id: u64,
) -> Result<RealizationResult, RunError> {
    let (x_min, x_max) = config.window();
    let mut state = init_state_in(config.origin, config.coin, x_min, x_max)?;
    let rec = &config.record;
    let steps = config.t_max as usize + 1;

    let mut snapshots = Vec::with_capacity(rec.snapshot_times.len());
    let mut tracked: Vec<Vec<f64>> = rec.tracked_sites.iter().map(|_| Vec::with_capacity(steps)).collect();
    let mut survival = Vec::new();
    let mut absorbed = Vec::new();
    let mut detections = Vec::new();
    let mut total_absorbed = 0.0;

    let mut record = |state: &crate::walk::WalkerState,
                      total_absorbed: f64,
                      snapshots: &mut Vec<(u64, Profile)>,
                      tracked: &mut [Vec<f64>]| {
        let t = state.time();
        for (row, &x) in tracked.iter_mut().zip(&rec.tracked_sites) {
            row.push(state.occupation(x));
        }
        for &ts in rec.snapshot_times.iter().filter(|&&ts| ts == t) {
            snapshots.push((ts, state.occupation_profile()));
        }
        if rec.survival_series {
            survival.push(state.survival());
            absorbed.push(total_absorbed);
        }
    };

    record(&state, 0.0, &mut snapshots, &mut tracked);
    for t in 1..=config.t_max {
        let x_det = trajectory.position_at(t);
        let outcome = state.step(x_det)?;
        if outcome.detection_event {
            detections.push(DetectionEvent {
                t,
                x: x_det.expect("detection without detector"),
                removed_probability: outcome.removed_probability,
            });
        }
        total_absorbed += outcome.removed_probability;
        record(&state, total_absorbed, &mut snapshots, &mut tracked);
    }
    // Snapshots are stored in request order.
    snapshots.sort_by_key(|(t, _)| rec.snapshot_times.iter().position(|x| x == t));

    Ok(RealizationResult {
        stream_id,
        snapshots,
        tracked,
        survival,
        absorbed,
        trajectory,
        detections,
        final_survival: state.survival(),
        total_absorbed,
    })
}

/// Streaming aggregate over realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    count: u64,
    snapshot_times: Vec<u64>,
    snapshot_x_min: Site,
    snapshots: Vec<Vec<Welford>>,
    tracked_sites: Vec<Site>,
    tracked: Vec<Vec<Welford>>,
    survival: Vec<Welford>,
    detections: Welford,
    final_survival: Welford,
}

impl EnsembleStats {
    /// Empty statistics shaped for `config`.
    pub fn empty(config: &RunConfig) -> Self {
        let (x_min, x_max) = config.window();
        let width = (x_max - x_min + 1) as usize;
        let steps = config.t_max as usize + 1;
        let rec = &config.record;
        EnsembleStats {
            count: 0,
            snapshot_times: rec.snapshot_times.clone(),
            snapshot_x_min: x_min,
            snapshots: vec![vec![Welford::new(); width]; rec.snapshot_times.len()],
            tracked_sites: rec.tracked_sites.clone(),
            tracked: vec![vec![Welford::new(); steps]; rec.tracked_sites.len()],
            survival: if rec.survival_series { vec![Welford::new(); steps] } else { Vec::new() },
            detections: Welford::new(),
            final_survival: Welford::new(),
        }
    }

    /// Adds one realization.
    pub fn push(&mut self, r: &RealizationResult) {
        self.count += 1;
        for (acc, (_, profile)) in self.snapshots.iter_mut().zip(&r.snapshots) {
            for (w, &v) in acc.iter_mut().zip(profile.values()) {
                w.push(v);
            }
        }
        for (acc, row) in self.tracked.iter_mut().zip(&r.tracked) {
            for (w, &v) in acc.iter_mut().zip(row) {
                w.push(v);
            }
        }
        for (w, &v) in self.survival.iter_mut().zip(&r.survival) {
            w.push(v);
        }
        self.detections.push(r.detections.len() as f64);
        self.final_survival.push(r.final_survival);
    }

    /// Pooled statistics of `self` and `other`.
    pub fn merge(&self, other: &EnsembleStats) -> Result<EnsembleStats, RunError> {
        if self.snapshot_times != other.snapshot_times
            || self.snapshot_x_min != other.snapshot_x_min
            || self.tracked_sites != other.tracked_sites
            || self.survival.len() != other.survival.len()
            || self.tracked.first().map(Vec::len) != other.tracked.first().map(Vec::len)
            || self.snapshots.first().map(Vec::len) != other.snapshots.first().map(Vec::len)
        {
            return Err(RunError::IncompatibleStats);
        }
        let zip = |a: &[Vec<Welford>], b: &[Vec<Welford>]| -> Vec<Vec<Welford>> {
            a.iter()
                .zip(b)
                .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p.merge(q)).collect())
                .collect()
        };
        Ok(EnsembleStats {
            count: self.count + other.count,
            snapshot_times: self.snapshot_times.clone(),
            snapshot_x_min: self.snapshot_x_min,
            snapshots: zip(&self.snapshots, &other.snapshots),
            tracked_sites: self.tracked_sites.clone(),
            tracked: zip(&self.tracked, &other.tracked),
            survival: self.survival.iter().zip(&other.survival).map(|(a, b)| a.merge(b)).collect(),
            detections: self.detections.merge(&other.detections),
            final_survival: self.final_survival.merge(&other.final_survival),
        })
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn snapshot_times(&self) -> &[u64] {
        &self.snapshot_times
    }

    pub fn tracked_sites(&self) -> &[Site] {
        &self.tracked_sites
    }

    /// Mean profile at snapshot time `t`.
    pub fn mean_profile(&self, t: u64) -> Option<Profile> {
        self.snapshot_stats(t).map(|acc| Profile::new(self.snapshot_x_min, acc.iter().map(Welford::mean).collect()))
    }

    /// Standard error of the mean profile at snapshot time `t`.
    pub fn stderr_profile(&self, t: u64) -> Option<Profile> {
        self.snapshot_stats(t).map(|acc| Profile::new(self.snapshot_x_min, acc.iter().map(Welford::stderr).collect()))
    }

    /// Per-site accumulators of the snapshot at time `t`.
    pub fn snapshot_stats(&self, t: u64) -> Option<&[Welford]> {
        let i = self.snapshot_times.iter().position(|&s| s == t)?;
        Some(&self.snapshots[i])
    }

    /// Per-tick accumulators of a tracked site.
    pub fn tracked_stats(&self, x: Site) -> Option<&[Welford]> {
        let i = self.tracked_sites.iter().position(|&s| s == x)?;
        Some(&self.tracked[i])
    }

    /// Mean `f(x, t)` of a tracked site as a time series (with standard
    /// errors).
    pub fn tracked_series(&self, x: Site) -> Option<Series> {
        self.tracked_stats(x).map(|acc| welford_series(acc).with_site(x))
    }

    /// Mean `S(t)` (empty if not recorded).
    pub fn survival_series(&self) -> Series {
        welford_series(&self.survival)
    }

    pub fn detections(&self) -> &Welford {
        &self.detections
    }

    pub fn final_survival(&self) -> &Welford {
        &self.final_survival
    }

    /// Largest sample variance over every recorded scalar.
    pub fn max_variance(&self) -> f64 {
        self.snapshots
            .iter()
            .chain(&self.tracked)
            .flatten()
            .chain(&self.survival)
            .map(Welford::variance)
            .fold(0.0, f64::max)
    }
}

fn welford_series(acc: &[Welford]) -> Series {
    Series::from_points(
        acc.iter()
            .enumerate()
            .map(|(t, w)| Point::with_stderr(t as f64, w.mean(), w.stderr()))
            .collect(),
    )
}

/// Sequential ensemble: realizations `0..n` folded in order.
pub fn run_ensemble(config: &RunConfig) -> Result<EnsembleStats, RunError> {
    config.validate()?;
    let mut stats = EnsembleStats::empty(config);
    for stream in 0..config.n_realizations {
        stats.push(&run_realization(config, stream)?);
    }
    Ok(stats)
}
