use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rrmdqw::commands::{cmd_correlation, cmd_profile, cmd_run, cmd_sweep_tr};
use rrmdqw::config::{ExperimentDoc, Format, GeometricGrid, Model};
use rrmdqw::output::Output;
use rrmdqw::verify::run_verify;
use rrmdqw_core::WindowUpper;

#[derive(Parser)]
#[command(name = "rrmdqw", version, about = "Hadamard walk with a randomly relocated absorbing detector")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ratio and occupation series at tracked sites, survival and profiles.
    Run {
        #[command(flatten)]
        common: Common,
        /// Sites whose series are reported (default: x_d).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        track: Vec<i64>,
        /// Ticks at which profiles are stored (default: t_max).
        #[arg(long, value_delimiter = ',')]
        snapshot: Vec<u64>,
    },
    /// Saturation ratio against the relocation period, with unity crossings
    /// and the crossover fit.
    SweepTr {
        #[command(flatten)]
        common: Common,
        /// Explicit relocation periods.
        #[arg(long, value_delimiter = ',')]
        tr_list: Vec<u64>,
        /// Linear grid START:STOP:STEP.
        #[arg(long, value_parser = parse_range)]
        tr_range: Option<[u64; 3]>,
        /// Geometric grid START:STOP:RATIO.
        #[arg(long, value_parser = parse_geometric)]
        tr_geom: Option<GeometricGrid>,
        /// Detector start sites to sweep.
        #[arg(long, value_delimiter = ',')]
        xd_list: Vec<i64>,
        /// Each point runs to max(tmax, K * t_r).
        #[arg(long)]
        tmax_per_tr: Option<u64>,
    },
    /// Profile and its ratio to the free walk at one tick, indexed by r = x - x_d.
    Profile {
        #[command(flatten)]
        common: Common,
        /// Snapshot tick (default: t_max).
        #[arg(long)]
        t: Option<u64>,
        #[arg(long, allow_hyphen_values = true)]
        r_min: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        r_max: Option<i64>,
    },
    /// Equal-time correlation ratio between x_d and x_d + r.
    Correlation {
        #[command(flatten)]
        common: Common,
        /// Even displacements from x_d.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        r: Vec<i64>,
    },
    /// Engine against the path-sum oracle, invariants and a mutation check.
    Verify,
}

#[derive(Clone, Copy, ValueEnum)]
enum UpperArg {
    Exclusive,
    Inclusive,
}

#[derive(Args)]
struct Common {
    /// JSON experiment document (or a summary.json from an earlier run).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: Option<Model>,
    #[arg(long)]
    xd: Option<i64>,
    #[arg(long)]
    tr: Option<u64>,
    #[arg(long)]
    tmax: Option<u64>,
    /// Number of realizations.
    #[arg(long)]
    n: Option<u64>,
    /// Base seed; falls back to RRMDQW_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Upper relocation bound of model rr1 (default 10 * tmax).
    #[arg(long)]
    lr: Option<i64>,
    #[arg(long, value_enum)]
    window_upper: Option<UpperArg>,
    /// Quench tick of model qqw (default: tr).
    #[arg(long)]
    tq: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads (results do not depend on it).
    #[arg(long)]
    threads: Option<usize>,
}

impl Common {
    fn doc(&self) -> anyhow::Result<ExperimentDoc> {
        let mut doc = match &self.config {
            Some(path) => ExperimentDoc::load(path)?,
            None => ExperimentDoc::default(),
        };
        macro_rules! set {
            ($flag:expr => $field:expr) => {
                if let Some(v) = $flag.clone() {
                    $field = v.into();
                }
            };
        }
        set!(self.model => doc.model);
        set!(self.xd => doc.x_d);
        set!(self.tr => doc.t_r);
        set!(self.tmax => doc.t_max);
        set!(self.n => doc.n);
        set!(self.out => doc.out);
        set!(self.format => doc.format);
        if self.seed.is_some() {
            doc.seed = self.seed;
        }
        if self.lr.is_some() {
            doc.l_r = self.lr;
        }
        if self.tq.is_some() {
            doc.t_q = self.tq;
        }
        if self.threads.is_some() {
            doc.threads = self.threads;
        }
        if let Some(u) = self.window_upper {
            doc.window_upper = match u {
                UpperArg::Exclusive => WindowUpper::Exclusive,
                UpperArg::Inclusive => WindowUpper::Inclusive,
            };
        }
        doc.resolve_seed()?;
        Ok(doc)
    }
}

fn parse_range(s: &str) -> Result<[u64; 3], String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, c] = parts.as_slice() else { return Err("expected START:STOP:STEP".into()) };
    let p = |x: &str| x.parse::<u64>().map_err(|e| format!("{x:?}: {e}"));
    Ok([p(a)?, p(b)?, p(c)?])
}

fn parse_geometric(s: &str) -> Result<GeometricGrid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, c] = parts.as_slice() else { return Err("expected START:STOP:RATIO".into()) };
    let p = |x: &str| x.parse::<u64>().map_err(|e| format!("{x:?}: {e}"));
    Ok(GeometricGrid { start: p(a)?, stop: p(b)?, ratio: c.parse().map_err(|e| format!("{c:?}: {e}"))? })
}

fn emit(output: Output) -> anyhow::Result<()> {
    let doc = &output.config;
    for path in output.write(&doc.out, doc.format)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = (|| -> anyhow::Result<bool> {
        match cli.command {
            Command::Run { common, track, snapshot } => {
                let mut doc = common.doc()?;
                if !track.is_empty() {
                    doc.tracked_sites = track;
                }
                if !snapshot.is_empty() {
                    doc.snapshot_times = snapshot;
                }
                emit(cmd_run(&doc)?)?;
            }
            Command::SweepTr { common, tr_list, tr_range, tr_geom, xd_list, tmax_per_tr } => {
                let mut doc = common.doc()?;
                if !tr_list.is_empty() || tr_range.is_some() || tr_geom.is_some() {
                    doc.sweep.t_r = tr_list;
                    doc.sweep.t_r_range = tr_range;
                    doc.sweep.t_r_geometric = tr_geom;
                }
                if !xd_list.is_empty() {
                    doc.sweep.x_d = xd_list;
                }
                if tmax_per_tr.is_some() {
                    doc.sweep.t_max_per_t_r = tmax_per_tr;
                }
                emit(cmd_sweep_tr(&doc)?)?;
            }
            Command::Profile { common, t, r_min, r_max } => {
                let mut doc = common.doc()?;
                doc.profile.t = t.or(doc.profile.t);
                doc.profile.r_min = r_min.or(doc.profile.r_min);
                doc.profile.r_max = r_max.or(doc.profile.r_max);
                emit(cmd_profile(&doc)?)?;
            }
            Command::Correlation { common, r } => {
                let mut doc = common.doc()?;
                if !r.is_empty() {
                    doc.correlation.r = r;
                }
                emit(cmd_correlation(&doc)?)?;
            }
            Command::Verify => {
                let report = run_verify();
                println!("{report}");
                return Ok(report.passed());
            }
        }
        Ok(true)
    })()
    .context("rrmdqw");
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
