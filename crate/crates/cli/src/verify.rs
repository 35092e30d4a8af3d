//! Self-check: engine against the path-sum oracle, conservation and
//! degenerate limits, and a mutated engine that the oracle must catch.

use std::fmt;

use rrmdqw_core::oracle::{compare, oracle_profile};
use rrmdqw_core::walk::{Amplitude, WalkError};
use rrmdqw_core::{
    build_trajectory, init_state, run_ensemble, run_realization, Coin, DetectorPolicy, DetectorTrajectory, RecordSpec,
    RngStream, RunConfig, Site, Spinor, WalkerState, WindowUpper,
};

pub const ORACLE_TOLERANCE: f64 = 1e-12;
pub const CONSERVATION_TOLERANCE: f64 = 1e-10;
/// The mutated engine must differ from the oracle by more than this.
pub const MUTATION_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: &'static str, passed: bool, detail: String) {
        self.checks.push(Check { name, passed, detail });
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{} {:<28} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        write!(f, "{}", if self.passed() { "all checks passed" } else { "verification FAILED" })
    }
}

/// One engine step; the mutant swaps the shift directions.
pub type Stepper = fn(&mut WalkerState, Option<Site>) -> Result<(), WalkError>;

pub fn engine_step(s: &mut WalkerState, x_det: Option<Site>) -> Result<(), WalkError> {
    s.step(x_det).map(|_| ())
}

/// Coin and absorption as in the engine, but L moves right and R left.
pub fn swapped_shift_step(s: &mut WalkerState, x_det: Option<Site>) -> Result<(), WalkError> {
    s.coin_step();
    let old: Vec<Spinor> = (s.x_min()..=s.x_max()).map(|x| s.spinor(x)).collect();
    let at = |x: Site| old.get((x - s.x_min()) as usize).copied().unwrap_or(Spinor::ZERO);
    let new: Vec<(Site, Spinor)> =
        (s.x_min()..=s.x_max()).map(|x| (x, Spinor { l: at(x - 1).l, r: at(x + 1).r })).collect();
    for (x, sp) in new {
        s.set_spinor(x, sp);
    }
    s.absorb(x_det);
    Ok(())
}

fn random_coin(rng: &mut RngStream) -> Coin {
    let theta = rng.next_f64() * std::f64::consts::FRAC_PI_2;
    let phase = rng.next_f64() * std::f64::consts::TAU;
    Coin::new(Amplitude::new(theta.cos(), 0.0), Amplitude::new(theta.sin() * phase.cos(), theta.sin() * phase.sin()))
}

fn random_ticks(rng: &mut RngStream, t: u64) -> DetectorTrajectory {
    DetectorTrajectory::from_ticks(
        (0..t).map(|_| (rng.next_f64() < 0.8).then(|| rng.uniform_inclusive(-6, 6))).collect(),
    )
}

/// Largest engine-vs-oracle difference over `cases` random coins and
/// detector schedules with `t <= 12`.
pub fn oracle_sweep(step: Stepper, cases: u64, seed: u64) -> Result<f64, WalkError> {
    let mut worst = 0.0f64;
    for case in 0..cases {
        let mut rng = RngStream::new(seed, case);
        let t = 1 + case % 12;
        let coin = random_coin(&mut rng);
        let traj = random_ticks(&mut rng, t);
        worst = worst.max(engine_vs_oracle(step, coin, &traj, t)?);
    }
    Ok(worst)
}

fn engine_vs_oracle(step: Stepper, coin: Coin, traj: &DetectorTrajectory, t: u64) -> Result<f64, WalkError> {
    let mut s = init_state(0, coin, t)?;
    for k in 1..=t {
        step(&mut s, traj.position_at(k))?;
    }
    let exact = oracle_profile(0, &coin, traj, t).expect("t within oracle range");
    Ok(compare(&s.occupation_profile(), &exact))
}

fn policies(t_r: u64) -> [DetectorPolicy; 5] {
    [
        DetectorPolicy::None,
        DetectorPolicy::Fixed { x_d: 3 },
        DetectorPolicy::Quench { x_d: 3, t_q: t_r },
        DetectorPolicy::RandomBeyond { x_d: 2, t_r, l_r: 9 },
        DetectorPolicy::RandomWindow { x_d: 2, t_r, upper: WindowUpper::Exclusive },
    ]
}

/// Runs every check.
pub fn run_verify() -> Report {
    let mut report = Report::default();
    let result = (|| -> Result<(), rrmdqw_core::RunError> {
        let worst = oracle_sweep(engine_step, 100, 0x5eed)?;
        report.push("oracle, random schedules", worst < ORACLE_TOLERANCE, format!("max |diff| = {worst:.3e} over 100 cases"));

        let mut worst = 0.0f64;
        for t_r in 1..=5 {
            for policy in policies(t_r) {
                for stream in 0..4 {
                    let traj = build_trajectory(&policy, &mut RngStream::new(11, stream), 12)?;
                    worst = worst.max(engine_vs_oracle(engine_step, Coin::symmetric(), &traj, 12)?);
                }
            }
        }
        report.push("oracle, policy schedules", worst < ORACLE_TOLERANCE, format!("max |diff| = {worst:.3e}"));

        let mutant = oracle_sweep(swapped_shift_step, 100, 0x5eed)?;
        report.push(
            "mutation detected",
            mutant > MUTATION_THRESHOLD,
            format!("swapped shift max |diff| = {mutant:.3e}"),
        );

        let mut c = RunConfig::new(DetectorPolicy::None, 1000);
        c.n_realizations = 1;
        c.record.survival_series = true;
        let r = run_realization(&c, 0)?;
        let drift = r.survival.iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max);
        report.push("free walk unitary", drift < CONSERVATION_TOLERANCE, format!("max |S - 1| = {drift:.3e}, t <= 1000"));

        let mut worst = 0.0f64;
        for policy in policies(7) {
            let mut c = RunConfig::new(policy, 400);
            c.record.survival_series = true;
            c.n_realizations = 3;
            for s in 0..3 {
                worst = worst.max(run_realization(&c, s)?.conservation_error());
            }
        }
        report.push("conservation", worst < CONSERVATION_TOLERANCE, format!("max |S + absorbed - 1| = {worst:.3e}"));

        let record = RecordSpec { snapshot_times: vec![300], tracked_sites: vec![10], survival_series: true };
        let mut rr2 = RunConfig::new(DetectorPolicy::RandomWindow { x_d: 10, t_r: 1, upper: WindowUpper::Exclusive }, 300);
        rr2.n_realizations = 4;
        rr2.record = record;
        let siw = rr2.with_policy(DetectorPolicy::Fixed { x_d: 10 });
        let (a, b) = (run_ensemble(&rr2)?, run_ensemble(&siw)?);
        let same = a.mean_profile(300) == b.mean_profile(300) && a.survival_series() == b.survival_series();
        report.push("window of width 1 is fixed", same, "t_r = 1 window model vs fixed detector".into());
        Ok(())
    })();
    if let Err(e) = result {
        report.push("engine error", false, e.to_string());
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pristine_engine_passes() {
        let report = run_verify();
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn mutant_is_caught() {
        assert!(oracle_sweep(swapped_shift_step, 100, 0x5eed).unwrap() > MUTATION_THRESHOLD);
    }
}
