//! One function per subcommand. Each returns an [`Output`] without
//! touching the filesystem.

use anyhow::Context;
use rrmdqw_core::{RecordSpec, Series, Site};
use serde_json::json;

use crate::config::ExperimentDoc;
use crate::experiment::{correlation_curves, free_reference, onset_for, profile_at, saturation_sweep, site_ratios};
use crate::output::{Output, Table};
use crate::parallel::run_ensemble_parallel;

fn checked(doc: &ExperimentDoc) -> anyhow::Result<()> {
    doc.validate()?;
    doc.seed.context("seed must be resolved before running")?;
    Ok(())
}

/// Single experiment: occupation and ratio series at the tracked sites,
/// survival, and profiles at the snapshot times.
pub fn cmd_run(doc: &ExperimentDoc) -> anyhow::Result<Output> {
    checked(doc)?;
    let mut config = doc.base_config();
    let tracked = if doc.tracked_sites.is_empty() { vec![doc.x_d] } else { doc.tracked_sites.clone() };
    let snapshots = if doc.snapshot_times.is_empty() { vec![doc.t_max] } else { doc.snapshot_times.clone() };
    config.record = RecordSpec { snapshot_times: snapshots.clone(), tracked_sites: tracked, survival_series: true };
    let stats = run_ensemble_parallel(&config, doc.threads)?;
    let free = free_reference(&config)?;
    let sites = site_ratios(&stats, &free, onset_for(&config), doc.window_fraction, doc.band)?;
    let n = stats.count();

    let mut tables = Vec::new();
    for s in &sites {
        tables.push(Table::from_series(format!("occupation_x{}", s.site), "t", &s.occupation, n));
        tables.push(Table::from_series(format!("ratio_x{}", s.site), "t", &s.ratio, n));
    }
    tables.push(Table::from_series("survival", "t", &stats.survival_series(), n));
    let mut sums = Vec::new();
    for &t in &snapshots {
        let (mean, err) = (stats.mean_profile(t).context("snapshot")?, stats.stderr_profile(t).context("snapshot")?);
        let series = Series::from_points(
            mean.iter()
                .map(|(x, f)| rrmdqw_core::Point::with_stderr((x - doc.x_d) as f64, f, err.get(x)))
                .collect(),
        );
        tables.push(Table::from_series(format!("profile_t{t}"), "r", &series, n));
        sums.push(json!({ "t": t, "sum": mean.sum() }));
    }
    let derived = json!({
        "sites": sites,
        "profile_sums": sums,
        "detections": { "mean": stats.detections().mean(), "stderr": stats.detections().stderr() },
        "final_survival": { "mean": stats.final_survival().mean(), "stderr": stats.final_survival().stderr() },
    });
    Ok(Output::new("run", doc, derived, tables))
}

/// Saturation value against `t_r` for every sweep `x_d`, with unity
/// crossings and the crossover fit.
pub fn cmd_sweep_tr(doc: &ExperimentDoc) -> anyhow::Result<Output> {
    checked(doc)?;
    let grid = doc.sweep_t_r();
    let mut tables = Vec::new();
    let mut curves = Vec::new();
    for x_d in doc.sweep_x_d() {
        let curve = saturation_sweep(doc, x_d, &grid)?;
        tables.push(Table::from_series(format!("sweep_xd{x_d}"), "t_R", &curve.series(), curve.n));
        curves.push(curve);
    }
    Ok(Output::new("sweep-tr", doc, json!({ "curves": curves }), tables))
}

/// Profile of the ensemble at one tick, its ratio to the free walk and the
/// two references, indexed by `r = x - x_d`.
pub fn cmd_profile(doc: &ExperimentDoc) -> anyhow::Result<Output> {
    checked(doc)?;
    let t = doc.profile.t.unwrap_or(doc.t_max);
    if t > doc.t_max {
        anyhow::bail!("profile tick {t} exceeds t_max = {}", doc.t_max);
    }
    let data = profile_at(&doc.base_config(), t, doc.threads)?;
    let r_min = doc.profile.r_min.unwrap_or(Site::MIN / 4);
    let r_max = doc.profile.r_max.unwrap_or(Site::MAX / 4);
    let reference = |p: &rrmdqw_core::Profile| {
        let lo = (data.x_d + r_min).max(p.x_min());
        let hi = (data.x_d + r_max).min(p.x_max());
        Series::from_values(
            &(lo..=hi).map(|x| (x - data.x_d) as f64).collect::<Vec<_>>(),
            &(lo..=hi).map(|x| p.get(x)).collect::<Vec<_>>(),
        )
    };
    let tables = vec![
        Table::from_series("profile", "r", &data.occupation(r_min, r_max), data.n),
        Table::from_series("profile_ratio", "r", &data.ratio(r_min, r_max), data.n),
        Table::from_series("profile_free", "r", &reference(&data.free), 1),
        Table::from_series("profile_fixed", "r", &reference(&data.fixed), 1),
    ];
    let derived = json!({
        "t": t,
        "survival": data.mean.sum(),
        "l1_to_free": data.l1_to_free(),
        "l1_to_fixed": data.l1_to_fixed(),
        "l1_noise_bound": data.l1_noise_bound(),
    });
    Ok(Output::new("profile", doc, derived, tables))
}

/// `g / g_inf` series for every requested displacement.
pub fn cmd_correlation(doc: &ExperimentDoc) -> anyhow::Result<Output> {
    checked(doc)?;
    let curves = correlation_curves(&doc.base_config(), &doc.correlation.r, doc.window_fraction, doc.threads)?;
    let tables = curves
        .iter()
        .map(|c| Table::from_series(format!("correlation_r{}", c.r), "t", &c.series, doc.n))
        .collect();
    Ok(Output::new("correlation", doc, json!({ "curves": curves }), tables))
}
