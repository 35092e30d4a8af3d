//! The JSON experiment document and its translation into run configs.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use rrmdqw_core::{Coin, DetectorPolicy, RecordSpec, RunConfig, Site, WindowUpper};
use serde::{Deserialize, Serialize};

/// Environment variable consulted when no seed is given.
pub const SEED_ENV: &str = "RRMDQW_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Free walk, no detector.
    Iw,
    /// Detector fixed at x_d.
    Siw,
    /// Detector at x_d until t_q, then removed.
    Qqw,
    /// Relocated uniformly into {x_d + 1, ..., l_r} every t_r ticks.
    Rr1,
    /// Relocated uniformly into a window of width t_r every t_r ticks.
    #[default]
    Rr2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepDoc {
    /// Explicit relocation periods.
    pub t_r: Vec<u64>,
    /// `[start, stop, step]`, inclusive of `stop` when it lies on the grid.
    pub t_r_range: Option<[u64; 3]>,
    /// Geometric grid from `start` to `stop` with the given ratio, rounded
    /// to integers.
    pub t_r_geometric: Option<GeometricGrid>,
    /// Detector start sites; empty means the document's `x_d`.
    pub x_d: Vec<Site>,
    /// Each sweep point runs to `max(t_max, t_max_per_t_r * t_r)`.
    pub t_max_per_t_r: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometricGrid {
    pub start: u64,
    pub stop: u64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileDoc {
    /// Snapshot tick; defaults to `t_max`.
    pub t: Option<u64>,
    pub r_min: Option<Site>,
    pub r_max: Option<Site>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorrelationDoc {
    /// Displacements from `x_d`; each must be even.
    pub r: Vec<Site>,
}

impl Default for CorrelationDoc {
    fn default() -> Self {
        CorrelationDoc { r: vec![-20, 20] }
    }
}

pub const DEFAULT_T_MAX_PER_T_R: u64 = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentDoc {
    pub model: Model,
    pub x_d: Site,
    pub t_r: u64,
    /// Quench tick for `qqw`; defaults to `t_r`.
    pub t_q: Option<u64>,
    pub t_max: u64,
    pub n: u64,
    pub seed: Option<u64>,
    /// Upper relocation bound for `rr1`; defaults to `10 * t_max`.
    pub l_r: Option<Site>,
    pub window_upper: WindowUpper,
    pub origin: Site,
    pub coin: Coin,
    /// Lattice window `[x_min, x_max]`; defaults to `origin -+ (t_max + 2)`.
    pub lattice: Option<(Site, Site)>,
    /// Worker threads; results do not depend on it.
    pub threads: Option<usize>,
    pub window_fraction: f64,
    pub band: f64,
    /// Sites whose ratio series `run` reports; empty means `[x_d]`.
    pub tracked_sites: Vec<Site>,
    /// Ticks at which `run` stores profiles; empty means `[t_max]`.
    pub snapshot_times: Vec<u64>,
    pub sweep: SweepDoc,
    pub profile: ProfileDoc,
    pub correlation: CorrelationDoc,
    pub out: PathBuf,
    pub format: Format,
}

impl Default for ExperimentDoc {
    fn default() -> Self {
        ExperimentDoc {
            model: Model::Rr2,
            x_d: 10,
            t_r: 10,
            t_q: None,
            t_max: 1000,
            n: 500,
            seed: None,
            l_r: None,
            window_upper: WindowUpper::Exclusive,
            origin: 0,
            coin: Coin::symmetric(),
            lattice: None,
            threads: None,
            window_fraction: rrmdqw_core::observables::SATURATION_WINDOW,
            band: rrmdqw_core::observables::CROSSING_BAND,
            tracked_sites: Vec::new(),
            snapshot_times: Vec::new(),
            sweep: SweepDoc::default(),
            profile: ProfileDoc::default(),
            correlation: CorrelationDoc::default(),
            out: PathBuf::from("out"),
            format: Format::Csv,
        }
    }
}

impl ExperimentDoc {
    /// Reads a document from `path`. A summary written by an earlier run is
    /// accepted too; its embedded `config` is used.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let mut value: serde_json::Value = serde_json::from_str(text)?;
        if value.get("command").is_some() {
            if let Some(inner) = value.get_mut("config") {
                value = inner.take();
            }
        }
        Ok(serde_json::from_value(value)?)
    }

    pub fn base_seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    /// Fills `seed` from [`SEED_ENV`] when unset, or with 0.
    pub fn resolve_seed(&mut self) -> anyhow::Result<()> {
        if self.seed.is_none() {
            self.seed = Some(match std::env::var(SEED_ENV) {
                Ok(s) => s.trim().parse().with_context(|| format!("{SEED_ENV}={s:?} is not a u64"))?,
                Err(_) => 0,
            });
        }
        Ok(())
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.n == 0 {
            bail!("n must be >= 1");
        }
        if self.t_max == 0 {
            bail!("t_max must be >= 1");
        }
        if !(self.window_fraction > 0.0 && self.window_fraction <= 1.0) {
            bail!("window_fraction must lie in (0, 1]");
        }
        if self.band.is_nan() || self.band < 0.0 {
            bail!("band must be >= 0");
        }
        if self.threads == Some(0) {
            bail!("threads must be >= 1");
        }
        if let Some(g) = &self.sweep.t_r_geometric {
            if g.ratio.is_nan() || g.ratio <= 1.0 || g.start == 0 {
                bail!("geometric t_r grid needs start >= 1 and ratio > 1");
            }
        }
        if let Some([_, _, 0]) = self.sweep.t_r_range {
            bail!("t_r_range step must be >= 1");
        }
        if self.sweep.t_max_per_t_r == Some(0) {
            bail!("t_max_per_t_r must be >= 1");
        }
        self.policy(self.x_d, self.t_r, self.t_max).validate()?;
        Ok(())
    }

    /// Detector policy of this document's model for the given parameters.
    pub fn policy(&self, x_d: Site, t_r: u64, t_max: u64) -> DetectorPolicy {
        match self.model {
            Model::Iw => DetectorPolicy::None,
            Model::Siw => DetectorPolicy::Fixed { x_d },
            Model::Qqw => DetectorPolicy::Quench { x_d, t_q: self.t_q.unwrap_or(t_r) },
            Model::Rr1 => DetectorPolicy::RandomBeyond { x_d, t_r, l_r: self.l_r.unwrap_or(10 * t_max as Site) },
            Model::Rr2 => DetectorPolicy::RandomWindow { x_d, t_r, upper: self.window_upper },
        }
    }

    /// Run config for one parameter point, recording nothing.
    pub fn run_config(&self, x_d: Site, t_r: u64, t_max: u64) -> RunConfig {
        RunConfig {
            policy: self.policy(x_d, t_r, t_max),
            t_max,
            origin: self.origin,
            coin: self.coin,
            lattice: self.lattice,
            n_realizations: self.n,
            base_seed: self.base_seed(),
            record: RecordSpec::default(),
        }
    }

    /// Run config at the document's own `x_d`, `t_r`, `t_max`.
    pub fn base_config(&self) -> RunConfig {
        self.run_config(self.x_d, self.t_r, self.t_max)
    }

    /// Sorted, deduplicated relocation periods of the sweep; `[t_r]` if
    /// none are given.
    pub fn sweep_t_r(&self) -> Vec<u64> {
        let s = &self.sweep;
        let mut grid = s.t_r.clone();
        if let Some([start, stop, step]) = s.t_r_range {
            grid.extend((start..=stop).step_by(step.max(1) as usize));
        }
        if let Some(g) = s.t_r_geometric {
            grid.extend(geometric_grid(g.start, g.stop, g.ratio));
        }
        if grid.is_empty() {
            grid.push(self.t_r);
        }
        grid.sort_unstable();
        grid.dedup();
        grid
    }

    pub fn sweep_x_d(&self) -> Vec<Site> {
        if self.sweep.x_d.is_empty() {
            vec![self.x_d]
        } else {
            self.sweep.x_d.clone()
        }
    }

    /// Horizon of the sweep point at relocation period `t_r`.
    pub fn sweep_t_max(&self, t_r: u64) -> u64 {
        self.t_max.max(self.sweep.t_max_per_t_r.unwrap_or(DEFAULT_T_MAX_PER_T_R) * t_r)
    }
}

/// `round(start * ratio^k)` for `k = 0, 1, ...` up to `stop`, deduplicated.
pub fn geometric_grid(start: u64, stop: u64, ratio: f64) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::new();
    let mut x = start as f64;
    while x.round() as u64 <= stop {
        let v = x.round() as u64;
        if out.last() != Some(&v) {
            out.push(v);
        }
        x *= ratio;
    }
    out
}
