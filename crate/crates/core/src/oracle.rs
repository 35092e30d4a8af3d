//! Brute-force path sum for the absorbed walk.
//!
//! Every coin history of length `t` is enumerated explicitly. Along a path
//! the Hadamard coin contributes a factor `1/sqrt 2` per step and a sign
//! `-1` whenever an R component stays R; a path dies at the first tick
//! whose post-shift site holds the detector. Surviving paths are summed
//! coherently per final `(site, chirality)`.
//!
//! Path weights are kept as integer counts per initial chirality, so the
//! amplitude at `(x, c)` is exactly `(n_L c_L + n_R c_R) 2^(-t/2)`; floating
//! point enters only when the counts are combined with the coin.

use alloc::vec;
use alloc::vec::Vec;

use crate::detector::DetectorTrajectory;
use crate::profile::Profile;
use crate::walk::Coin;
use crate::Site;

/// Largest horizon the oracle accepts (about 2 million paths).
pub const MAX_ORACLE_T: u64 = 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("path sum limited to t <= {MAX_ORACLE_T}, got {0}")]
    HorizonTooLarge(u64),
}

/// Integer path counts at horizon `t`.
///
/// `counts[i][c][c0]` is the signed number of surviving paths that start
/// in chirality `c0` at the origin and end at site `origin - t + i` in
/// chirality `c` (0 = L, 1 = R).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathCounts {
    pub origin: Site,
    pub t: u64,
    counts: Vec<[[i64; 2]; 2]>,
}

impl PathCounts {
    pub fn x_min(&self) -> Site {
        self.origin - self.t as Site
    }

    /// Signed path counts `(n_from_L, n_from_R)` into `(x, chirality)`.
    pub fn at(&self, x: Site, chirality: usize) -> [i64; 2] {
        let i = x - self.x_min();
        if i < 0 || i as usize >= self.counts.len() {
            return [0, 0];
        }
        self.counts[i as usize][chirality]
    }

    /// `f(x, t)` for initial coin `coin`.
    pub fn profile(&self, coin: &Coin) -> Profile {
        let scale = libm::pow(2.0, -(self.t as f64));
        let values = self
            .counts
            .iter()
            .map(|site| {
                site.iter()
                    .map(|&[nl, nr]| (coin.l * nl as f64 + coin.r * nr as f64).norm_sqr())
                    .sum::<f64>()
                    * scale
            })
            .collect();
        Profile::new(self.x_min(), values)
    }

    /// Exact unitarity check for an unabsorbed path sum: the integer
    /// columns `U|L>` and `U|R>` each have squared norm `2^t` and are
    /// orthogonal.
    pub fn is_exactly_unitary(&self) -> bool {
        let (mut ll, mut rr, mut lr) = (0i128, 0i128, 0i128);
        for site in &self.counts {
            for &[nl, nr] in site {
                ll += (nl as i128) * (nl as i128);
                rr += (nr as i128) * (nr as i128);
                lr += (nl as i128) * (nr as i128);
            }
        }
        let full = 1i128 << self.t;
        ll == full && rr == full && lr == 0
    }
}

/// Enumerates all `2 * 2^t` paths against detector schedule `detector`.
pub fn path_counts(origin: Site, detector: &DetectorTrajectory, t: u64) -> Result<PathCounts, OracleError> {
    if t > MAX_ORACLE_T {
        return Err(OracleError::HorizonTooLarge(t));
    }
    let blocked: Vec<Option<Site>> = (1..=t).map(|s| detector.position_at(s)).collect();
    let mut counts = vec![[[0i64; 2]; 2]; 2 * t as usize + 1];
    let x_min = origin - t as Site;
    for c0 in 0..2 {
        walk_paths(origin, c0, 1, 0, c0, &blocked, x_min, &mut counts);
    }
    Ok(PathCounts { origin, t, counts })
}

#[allow(clippy::too_many_arguments)]
fn walk_paths(
    x: Site,
    c: usize,
    sign: i64,
    depth: usize,
    c0: usize,
    blocked: &[Option<Site>],
    x_min: Site,
    counts: &mut [[[i64; 2]; 2]],
) {
    if depth == blocked.len() {
        counts[(x - x_min) as usize][c][c0] += sign;
        return;
    }
    for next in 0..2 {
        let s = if c == 1 && next == 1 { -sign } else { sign };
        let y = if next == 0 { x - 1 } else { x + 1 };
        if blocked[depth] == Some(y) {
            continue;
        }
        walk_paths(y, next, s, depth + 1, c0, blocked, x_min, counts);
    }
}

/// Exact `f(x, t)` by path enumeration.
pub fn oracle_profile(origin: Site, coin: &Coin, detector: &DetectorTrajectory, t: u64) -> Result<Profile, OracleError> {
    Ok(path_counts(origin, detector, t)?.profile(coin))
}

/// Largest absolute difference over sites and over the total (survival).
pub fn compare(engine: &Profile, oracle: &Profile) -> f64 {
    engine.max_abs_diff(oracle).max((engine.sum() - oracle.sum()).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_steps_free() {
        let p = oracle_profile(0, &Coin::symmetric(), &DetectorTrajectory::absent(), 2).unwrap();
        let expect = Profile::new(-2, vec![0.25, 0.0, 0.5, 0.0, 0.25]);
        assert!(compare(&p, &expect) < 1e-15, "{p:?}");
    }

    #[test]
    fn one_step_detector_right() {
        let tr = DetectorTrajectory::from_ticks(vec![Some(1)]);
        let p = oracle_profile(0, &Coin::symmetric(), &tr, 1).unwrap();
        assert!((p.get(-1) - 0.5).abs() < 1e-15);
        assert_eq!(p.get(1), 0.0);
        assert!((p.sum() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn free_sums_are_exactly_unitary() {
        for t in 0..=12 {
            let pc = path_counts(3, &DetectorTrajectory::absent(), t).unwrap();
            assert!(pc.is_exactly_unitary(), "t = {t}");
        }
        let p = oracle_profile(0, &Coin::symmetric(), &DetectorTrajectory::absent(), 4).unwrap();
        assert!((p.sum() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn absorbing_breaks_unitarity() {
        let pc = path_counts(0, &DetectorTrajectory::from_ticks(vec![Some(1); 6]), 6).unwrap();
        assert!(!pc.is_exactly_unitary());
    }

    #[test]
    fn horizon_limit() {
        assert_eq!(
            path_counts(0, &DetectorTrajectory::absent(), 21),
            Err(OracleError::HorizonTooLarge(21))
        );
    }
}
