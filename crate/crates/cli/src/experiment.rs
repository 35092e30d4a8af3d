//! Experiment building blocks shared by the subcommands: ensembles with
//! free-walk references, saturation sweeps over `t_r`, profile snapshots
//! and correlation series.

use anyhow::{bail, Context};
use rrmdqw_core::observables::{
    correlation_ratio, count_unity_crossings, crossover_fit, profile_ratio_with_stderr, ratio_series, saturation,
    saturation_onset, CrossingReport, CrossoverFit, Point, SaturationEstimate, RATIO_EPSILON,
};
use rrmdqw_core::{run_ensemble, DetectorPolicy, EnsembleStats, Profile, RecordSpec, RunConfig, Series, Site};
use serde::Serialize;

use crate::config::ExperimentDoc;
use crate::parallel::run_ensemble_parallel;

/// Single deterministic run of `config` under `policy`, recording the same
/// things as `config`.
pub fn deterministic_reference(config: &RunConfig, policy: DetectorPolicy) -> anyhow::Result<EnsembleStats> {
    let mut c = config.with_policy(policy);
    c.n_realizations = 1;
    Ok(run_ensemble(&c)?)
}

/// Free-walk counterpart of `config`.
pub fn free_reference(config: &RunConfig) -> anyhow::Result<EnsembleStats> {
    deterministic_reference(config, DetectorPolicy::None)
}

/// Tick at which the saturation window may open for `config`.
pub fn onset_for(config: &RunConfig) -> f64 {
    saturation_onset(config.policy.period().unwrap_or(1), config.policy.start().unwrap_or(0))
}

#[derive(Debug, Clone, Serialize)]
pub struct SiteRatio {
    pub site: Site,
    /// Ensemble mean `f(x, t)` over every tick.
    #[serde(skip)]
    pub occupation: Series,
    /// `f / f_inf` on parity-valid ticks.
    #[serde(skip)]
    pub ratio: Series,
    pub saturation: SaturationEstimate,
    pub crossings: CrossingReport,
}

/// Ratio series at every tracked site of `stats` against `reference`.
pub fn site_ratios(
    stats: &EnsembleStats,
    reference: &EnsembleStats,
    onset: f64,
    window_fraction: f64,
    band: f64,
) -> anyhow::Result<Vec<SiteRatio>> {
    stats
        .tracked_sites()
        .iter()
        .map(|&x| {
            let occupation = stats.tracked_series(x).context("site not tracked")?;
            let free = reference.tracked_series(x).context("site not tracked in reference")?;
            let ratio = ratio_series(&occupation, &free, RATIO_EPSILON)
                .with_context(|| format!("site {x} is never reached by the free walk"))?;
            Ok(SiteRatio {
                site: x,
                saturation: saturation(&ratio, onset, window_fraction),
                crossings: count_unity_crossings(&ratio, band),
                occupation,
                ratio,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub t_r: u64,
    pub t_max: u64,
    pub saturation: SaturationEstimate,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepCurve {
    pub x_d: Site,
    pub n: u64,
    pub points: Vec<SweepPoint>,
    pub crossings: CrossingReport,
    pub fit: Option<CrossoverFit>,
    /// Why `fit` is absent, if it is.
    pub fit_error: Option<String>,
}

impl SweepCurve {
    /// Saturation value against `t_r`, skipping points without one.
    pub fn series(&self) -> Series {
        sweep_series(&self.points)
    }
}

fn sweep_series(points: &[SweepPoint]) -> Series {
    Series::from_points(
        points
            .iter()
            .filter(|p| p.saturation.value.is_finite())
            .map(|p| Point::with_stderr(p.t_r as f64, p.saturation.value, p.saturation.stderr))
            .collect(),
    )
}

/// Saturation value of `f / f_inf` at `x_d` for each relocation period in
/// `grid`, with the unity crossings and crossover fit of the resulting
/// curve.
pub fn saturation_sweep(doc: &ExperimentDoc, x_d: Site, grid: &[u64]) -> anyhow::Result<SweepCurve> {
    if grid.is_empty() {
        bail!("empty t_r grid");
    }
    let longest = grid.iter().map(|&t_r| doc.sweep_t_max(t_r)).max().unwrap_or(doc.t_max);
    let mut free = doc.run_config(x_d, grid[0], longest);
    free.record = RecordSpec { tracked_sites: vec![x_d], ..Default::default() };
    let free = free_reference(&free)?.tracked_series(x_d).context("reference series")?;

    let mut points = Vec::with_capacity(grid.len());
    for &t_r in grid {
        let t_max = doc.sweep_t_max(t_r);
        let mut config = doc.run_config(x_d, t_r, t_max);
        config.record = RecordSpec { tracked_sites: vec![x_d], ..Default::default() };
        let stats = run_ensemble_parallel(&config, doc.threads)?;
        let f = stats.tracked_series(x_d).context("tracked series")?;
        let ratio = ratio_series(&f, &free, RATIO_EPSILON)?;
        points.push(SweepPoint { t_r, t_max, saturation: saturation(&ratio, onset_for(&config), doc.window_fraction) });
    }
    let series = sweep_series(&points);
    let (fit, fit_error) = match crossover_fit(&series) {
        Ok(fit) => (Some(fit), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(SweepCurve { x_d, n: doc.n, crossings: count_unity_crossings(&series, doc.band), points, fit, fit_error })
}

/// Profiles at one tick: the ensemble mean with its standard error and the
/// free-walk and fixed-detector references.
#[derive(Debug, Clone)]
pub struct ProfileData {
    pub t: u64,
    pub x_d: Site,
    pub n: u64,
    pub mean: Profile,
    pub stderr: Profile,
    pub free: Profile,
    pub fixed: Profile,
}

impl ProfileData {
    /// Sum of pointwise standard errors: bounds the noise on any L1
    /// distance between `mean` and a fixed profile.
    pub fn l1_noise_bound(&self) -> f64 {
        self.stderr.sum()
    }

    pub fn l1_to_free(&self) -> f64 {
        self.mean.l1_distance(&self.free)
    }

    pub fn l1_to_fixed(&self) -> f64 {
        self.mean.l1_distance(&self.fixed)
    }

    /// `f(x_d + r)` with standard error, for `r` in `[r_min, r_max]`.
    pub fn occupation(&self, r_min: Site, r_max: Site) -> Series {
        let lo = (self.x_d + r_min).max(self.mean.x_min());
        let hi = (self.x_d + r_max).min(self.mean.x_max());
        Series::from_points(
            (lo..=hi)
                .map(|x| Point::with_stderr((x - self.x_d) as f64, self.mean.get(x), self.stderr.get(x)))
                .collect(),
        )
    }

    /// `f / f_inf` at `x_d + r` on parity-valid sites.
    pub fn ratio(&self, r_min: Site, r_max: Site) -> Series {
        profile_ratio_with_stderr(&self.mean, &self.stderr, &self.free, self.x_d, RATIO_EPSILON)
            .restrict(r_min as f64, r_max as f64)
    }
}

/// Ensemble profile of `config` at tick `t` together with its references.
pub fn profile_at(config: &RunConfig, t: u64, threads: Option<usize>) -> anyhow::Result<ProfileData> {
    let x_d = config.policy.start().unwrap_or(config.origin);
    let mut config = config.clone();
    config.record = RecordSpec { snapshot_times: vec![t], ..Default::default() };
    let stats = run_ensemble_parallel(&config, threads)?;
    let free = free_reference(&config)?;
    let fixed = if x_d >= 1 {
        deterministic_reference(&config, DetectorPolicy::Fixed { x_d })?.mean_profile(t)
    } else {
        free.mean_profile(t)
    };
    Ok(ProfileData {
        t,
        x_d,
        n: stats.count(),
        mean: stats.mean_profile(t).context("snapshot")?,
        stderr: stats.stderr_profile(t).context("snapshot")?,
        free: free.mean_profile(t).context("snapshot")?,
        fixed: fixed.context("snapshot")?,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrelationCurve {
    pub r: Site,
    /// `g / g_inf` on common parity-valid ticks.
    #[serde(skip)]
    pub series: Series,
    pub saturation: SaturationEstimate,
}

/// `g / g_inf` between `x_d` and `x_d + r` for every `r` in `rs`, from one
/// ensemble tracking all the sites involved.
pub fn correlation_curves(
    config: &RunConfig,
    rs: &[Site],
    window_fraction: f64,
    threads: Option<usize>,
) -> anyhow::Result<Vec<CorrelationCurve>> {
    if let Some(r) = rs.iter().find(|r| *r % 2 != 0) {
        bail!("displacement r = {r} is odd: x_d and x_d + r are never occupied on the same tick, so g/g_inf is undefined");
    }
    if rs.is_empty() {
        bail!("no displacements requested");
    }
    let x_d = config.policy.start().unwrap_or(config.origin);
    let mut sites = vec![x_d];
    sites.extend(rs.iter().map(|r| x_d + r));
    sites.sort_unstable();
    sites.dedup();
    let mut config = config.clone();
    config.record = RecordSpec { tracked_sites: sites, ..Default::default() };
    let stats = run_ensemble_parallel(&config, threads)?;
    let free = free_reference(&config)?;
    let series = |s: &EnsembleStats, x: Site| s.tracked_series(x).context("tracked series");
    let (f_det, f_inf_det) = (series(&stats, x_d)?, series(&free, x_d)?);
    rs.iter()
        .map(|&r| {
            let ratio = correlation_ratio(
                &series(&stats, x_d + r)?,
                &f_det,
                &series(&free, x_d + r)?,
                &f_inf_det,
                r,
                RATIO_EPSILON,
            )?;
            Ok(CorrelationCurve {
                r,
                saturation: saturation(&ratio, onset_for(&config), window_fraction),
                series: ratio,
            })
        })
        .collect()
}
