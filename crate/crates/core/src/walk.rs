//! State-vector evolution of the 1D Hadamard walk with single-site perfect
//! absorption.
//!
//! One time step is `coin_step` (Hadamard on every site), then `shift_step`
//! (L moves to `x - 1`, R moves to `x + 1`), then `absorb` at the detector
//! site, if any. Absorbed weight is removed and never renormalized; the
//! remaining norm is the survival probability.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::profile::Profile;
use crate::Site;

/// One chirality amplitude.
pub type Amplitude = Complex64;

/// Amplitudes with `f <= DETECTION_EPSILON` are treated as exact zeros when
/// classifying detection events.
pub const DETECTION_EPSILON: f64 = 1e-30;

const FRAC_1_SQRT_2: f64 = core::f64::consts::FRAC_1_SQRT_2;

/// Two-component spinor `(psi_L, psi_R)` at one lattice site.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Spinor {
    pub l: Amplitude,
    pub r: Amplitude,
}

impl Spinor {
    pub const ZERO: Spinor = Spinor {
        l: Complex64::new(0.0, 0.0),
        r: Complex64::new(0.0, 0.0),
    };

    pub fn new(l: Amplitude, r: Amplitude) -> Self {
        Spinor { l, r }
    }

    #[inline]
    pub fn norm_sqr(&self) -> f64 {
        self.l.norm_sqr() + self.r.norm_sqr()
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.l == Complex64::new(0.0, 0.0) && self.r == Complex64::new(0.0, 0.0)
    }

    /// Hadamard coin: `(L, R) -> ((L + R)/sqrt 2, (L - R)/sqrt 2)`.
    #[inline]
    pub fn hadamard(self) -> Spinor {
        Spinor {
            l: (self.l + self.r) * FRAC_1_SQRT_2,
            r: (self.l - self.r) * FRAC_1_SQRT_2,
        }
    }
}

/// Initial coin state `(c_L, c_R)` placed at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Coin {
    pub l: Amplitude,
    pub r: Amplitude,
}

impl Coin {
    /// `(|L> + i|R>)/sqrt 2`, the coin that gives a left/right symmetric
    /// free-walk profile.
    pub fn symmetric() -> Self {
        Coin {
            l: Complex64::new(FRAC_1_SQRT_2, 0.0),
            r: Complex64::new(0.0, FRAC_1_SQRT_2),
        }
    }

    pub fn new(l: Amplitude, r: Amplitude) -> Self {
        Coin { l, r }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.l.norm_sqr() + self.r.norm_sqr()
    }
}

impl Default for Coin {
    fn default() -> Self {
        Coin::symmetric()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WalkError {
    #[error("coin state is not normalized: |c_L|^2 + |c_R|^2 = {0}")]
    CoinNotNormalized(f64),
    #[error("coin state has non-finite components")]
    CoinNotFinite,
    #[error("lattice window [{x_min}, {x_max}] does not contain origin {origin}")]
    OriginOutsideLattice { origin: Site, x_min: Site, x_max: Site },
    #[error("amplitude reached lattice boundary at t = {t}; lattice window is undersized")]
    BoundaryContact { t: u64 },
}

/// Result of the absorption part of a step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepOutcome {
    /// Probability `f(x_det)` removed by the detector.
    pub removed_probability: f64,
    /// `removed_probability > DETECTION_EPSILON`.
    pub detection_event: bool,
}

impl StepOutcome {
    fn from_removed(removed: f64) -> Self {
        StepOutcome {
            removed_probability: removed,
            detection_event: removed > DETECTION_EPSILON,
        }
    }
}

/// Walker state at integer time `t` on the window `[x_min, x_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkerState {
    t: u64,
    origin: Site,
    x_min: Site,
    x_max: Site,
    spinors: Vec<Spinor>,
    // Conservative support: every nonzero spinor lies in [lo, hi].
    lo: Site,
    hi: Site,
    // All amplitude sits on sites with `x - origin + t` even, so only
    // every other site needs updating.
    sublattice: bool,
    scratch: Vec<Spinor>,
}

/// Lattice window that keeps a walk of `horizon` steps two sites clear of
/// either boundary.
pub fn default_window(origin: Site, horizon: u64) -> (Site, Site) {
    let pad = horizon as Site + 2;
    (origin - pad, origin + pad)
}

/// Delta-localized state at `origin` with coin `coin`, on the default
/// window for `horizon` steps.
pub fn init_state(origin: Site, coin: Coin, horizon: u64) -> Result<WalkerState, WalkError> {
    let (x_min, x_max) = default_window(origin, horizon);
    init_state_in(origin, coin, x_min, x_max)
}

/// Same as [`init_state`] with an explicit lattice window.
pub fn init_state_in(
    origin: Site,
    coin: Coin,
    x_min: Site,
    x_max: Site,
) -> Result<WalkerState, WalkError> {
    if !(coin.l.re.is_finite() && coin.l.im.is_finite() && coin.r.re.is_finite() && coin.r.im.is_finite()) {
        return Err(WalkError::CoinNotFinite);
    }
    let n = coin.norm_sqr();
    if (n - 1.0).abs() > 1e-12 {
        return Err(WalkError::CoinNotNormalized(n));
    }
    if origin < x_min || origin > x_max {
        return Err(WalkError::OriginOutsideLattice { origin, x_min, x_max });
    }
    let len = (x_max - x_min + 1) as usize;
    let mut spinors = vec![Spinor::ZERO; len];
    spinors[(origin - x_min) as usize] = Spinor::new(coin.l, coin.r);
    Ok(WalkerState {
        t: 0,
        origin,
        x_min,
        x_max,
        spinors,
        lo: origin,
        hi: origin,
        sublattice: true,
        scratch: vec![Spinor::ZERO; len],
    })
}

impl WalkerState {
    pub fn time(&self) -> u64 {
        self.t
    }

    pub fn origin(&self) -> Site {
        self.origin
    }

    pub fn x_min(&self) -> Site {
        self.x_min
    }

    pub fn x_max(&self) -> Site {
        self.x_max
    }

    #[inline]
    fn index(&self, x: Site) -> Option<usize> {
        if x < self.x_min || x > self.x_max {
            None
        } else {
            Some((x - self.x_min) as usize)
        }
    }

    /// Spinor at `x`; zero outside the window.
    pub fn spinor(&self, x: Site) -> Spinor {
        self.index(x).map_or(Spinor::ZERO, |i| self.spinors[i])
    }

    /// Overwrites the spinor at `x`. Intended for tests and custom initial
    /// conditions; `x` must lie inside the window.
    pub fn set_spinor(&mut self, x: Site, s: Spinor) {
        let i = self.index(x).expect("site outside lattice window");
        self.spinors[i] = s;
        if !s.is_zero() && (x - self.origin + self.t as Site).rem_euclid(2) == 1 {
            self.sublattice = false;
            // The general update expects an all-zero scratch buffer.
            self.scratch.fill(Spinor::ZERO);
        }
        self.lo = self.lo.min(x);
        self.hi = self.hi.max(x);
    }

    pub fn spinors(&self) -> &[Spinor] {
        &self.spinors
    }

    /// Occupation probability `f(x, t) = |psi_L|^2 + |psi_R|^2`.
    pub fn occupation(&self, x: Site) -> f64 {
        self.spinor(x).norm_sqr()
    }

    /// `f(x, t)` over the whole window.
    pub fn occupation_profile(&self) -> Profile {
        Profile::new(self.x_min, self.spinors.iter().map(Spinor::norm_sqr).collect())
    }

    /// `S(t) = sum_x f(x, t)`.
    pub fn survival(&self) -> f64 {
        self.support().iter().map(Spinor::norm_sqr).sum()
    }

    fn support(&self) -> &[Spinor] {
        let a = (self.lo.max(self.x_min) - self.x_min) as usize;
        let b = (self.hi.min(self.x_max) - self.x_min) as usize;
        &self.spinors[a..=b]
    }

    /// Applies the Hadamard coin on every site.
    pub fn coin_step(&mut self) {
        let (a, b) = self.support_indices();
        for s in &mut self.spinors[a..=b] {
            *s = s.hadamard();
        }
    }

    /// Moves `psi_L` one site left and `psi_R` one site right.
    ///
    /// Fails if any amplitude sits on a window edge, since it would leave
    /// the lattice.
    pub fn shift_step(&mut self) -> Result<(), WalkError> {
        self.check_boundary()?;
        let Some((a, b)) = self.interior_support() else {
            self.t += 1;
            return Ok(());
        };
        self.scratch[a - 1..=b + 1].fill(Spinor::ZERO);
        for i in a..=b {
            let s = self.spinors[i];
            self.scratch[i - 1].l = s.l;
            self.scratch[i + 1].r = s.r;
        }
        self.swap_buffers(a, b);
        Ok(())
    }

    /// Zeroes both components at `x_det`. Absent or out-of-window detectors
    /// are a no-op.
    pub fn absorb(&mut self, x_det: Option<Site>) -> StepOutcome {
        let removed = match x_det.and_then(|x| self.index(x)) {
            Some(i) => {
                let f = self.spinors[i].norm_sqr();
                self.spinors[i] = Spinor::ZERO;
                f
            }
            None => 0.0,
        };
        StepOutcome::from_removed(removed)
    }

    /// Advances one time step: coin, shift, then absorption at `x_det`.
    ///
    /// Coin and shift are fused into a single pass; the result is identical
    /// to calling [`coin_step`](Self::coin_step) and
    /// [`shift_step`](Self::shift_step) in sequence.
    pub fn step(&mut self, x_det: Option<Site>) -> Result<StepOutcome, WalkError> {
        self.check_boundary()?;
        let Some((a, b)) = self.interior_support() else {
            self.t += 1;
            return Ok(self.absorb(x_det));
        };
        if self.sublattice {
            self.gather_sublattice(a, b);
        } else {
            let src = &self.spinors[a..=b];
            let dst = &mut self.scratch[a - 1..=b + 1];
            // dst[j] is site a - 1 + j; L arrives from the right, R from the left.
            for (j, s) in src.iter().enumerate() {
                dst[j].l = (s.l + s.r) * FRAC_1_SQRT_2;
                dst[j + 2].r = (s.l - s.r) * FRAC_1_SQRT_2;
            }
            self.swap_buffers(a, b);
        }
        Ok(self.absorb(x_det))
    }

    /// Steps `n` times with no detector.
    pub fn evolve_free(&mut self, n: u64) -> Result<(), WalkError> {
        for _ in 0..n {
            self.step(None)?;
        }
        Ok(())
    }

    fn support_indices(&self) -> (usize, usize) {
        (
            (self.lo.max(self.x_min) - self.x_min) as usize,
            (self.hi.min(self.x_max) - self.x_min) as usize,
        )
    }

    // Sublattice update: each buffer only ever holds one parity class, so
    // writing every destination site of the new parity in [a - 1, b + 1]
    // overwrites the state from two steps ago without a separate clear.
    fn gather_sublattice(&mut self, a: usize, b: usize) {
        let x = self.x_min + a as Site - 1;
        let first = a - 1 + (x - self.origin + self.t as Site + 1).rem_euclid(2) as usize;
        let src = &self.spinors;
        let dst = &mut self.scratch;
        let zero = Complex64::new(0.0, 0.0);
        let mut k = first;
        while k <= b + 1 {
            let l = if k < b {
                let s = src[k + 1];
                (s.l + s.r) * FRAC_1_SQRT_2
            } else {
                zero
            };
            let r = if k > a {
                let s = src[k - 1];
                (s.l - s.r) * FRAC_1_SQRT_2
            } else {
                zero
            };
            dst[k] = Spinor { l, r };
            k += 2;
        }
        core::mem::swap(&mut self.spinors, &mut self.scratch);
        self.advance_support();
    }

    // Support clipped to interior sites; edge sites are known to be zero
    // after `check_boundary`.
    fn interior_support(&self) -> Option<(usize, usize)> {
        let (a, b) = self.support_indices();
        let a = a.max(1);
        let b = b.min(self.spinors.len().saturating_sub(2));
        (a <= b).then_some((a, b))
    }

    // The new state was written into `scratch` on [a - 1, b + 1]. Swap it
    // in, then clear the old support so `scratch` is all-zero again.
    fn swap_buffers(&mut self, a: usize, b: usize) {
        core::mem::swap(&mut self.spinors, &mut self.scratch);
        self.scratch[a..=b].fill(Spinor::ZERO);
        self.advance_support();
    }

    fn advance_support(&mut self) {
        self.t += 1;
        self.lo = (self.lo - 1).max(self.x_min);
        self.hi = (self.hi + 1).min(self.x_max);
    }

    fn check_boundary(&self) -> Result<(), WalkError> {
        let last = self.spinors.len() - 1;
        if !self.spinors[0].is_zero() || !self.spinors[last].is_zero() {
            return Err(WalkError::BoundaryContact { t: self.t });
        }
        Ok(())
    }
}
