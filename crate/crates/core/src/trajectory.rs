//! Integration of the coupled system `(r, f₊, f₋)` in geodesic time `t`.
//!
//! The radius is evolved alongside the connection with `ṙ = √(1 − r⁻³)`, so
//! one adaptive stepper produces the metric and the instanton together. The
//! right-hand side is never evaluated below the seed time: `1/A` blows up on
//! the singular orbit, so every run starts from a [`SeriesJet`].

use alloc::vec::Vec;
use core::ops::ControlFlow;

use crate::instanton::{rhs_full_raw, InstantonState, NEARLY_KAHLER};
use crate::local::{SeriesJet, SERIES_VALIDITY_RADIUS};
use crate::metric::{coefficients_unchecked, dr_dt_unchecked, r_of_t, DEFAULT_QUAD_TOL};
use crate::ode::{self, SolveStatus, StepControl, StepStats};
use crate::{Error, Result};

/// One accepted step of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Sample {
    pub t: f64,
    pub r: f64,
    pub f_plus: f64,
    pub f_minus: f64,
}

impl Sample {
    pub fn state(&self) -> InstantonState {
        InstantonState::new(self.f_plus, self.f_minus)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Termination {
    ReachedTMax,
    /// Reached `t_max` inside the convergence ball, having entered it for
    /// the last time at `t_entry ≥ convergence_min_time`.
    Converged { t_entry: f64 },
    /// `|f₊|` or `|f₋|` exceeded the escape threshold at `t_escape`.
    Escaped { t_escape: f64 },
    /// The step size underflowed or the step budget ran out at `t`.
    StepFailure { t: f64 },
}

/// Event thresholds checked after every accepted step.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct EventSpec {
    pub escape_threshold: f64,
    /// Radius of the ball around the nearly-Kähler point `(2/3, 0)`.
    pub convergence_radius: f64,
    pub convergence_min_time: f64,
    /// Regions whose forward invariance is reported on each trajectory.
    pub watchers: Vec<Region>,
    /// Tolerance band for invariance reports.
    pub invariance_band: f64,
}

impl Default for EventSpec {
    fn default() -> Self {
        EventSpec {
            escape_threshold: 1e3,
            convergence_radius: 1e-3,
            convergence_min_time: 50.0,
            watchers: Vec::new(),
            invariance_band: 1e-9,
        }
    }
}

impl EventSpec {
    pub fn validate(&self) -> Result<()> {
        // Critical coordinates are bounded by 1 in absolute value.
        if !(self.escape_threshold > 10.0) {
            return Err(Error::InvalidArgument("escape threshold must exceed 10"));
        }
        if !(self.convergence_radius > 0.0) || !(self.invariance_band >= 0.0) {
            return Err(Error::InvalidArgument("convergence radius must be positive"));
        }
        Ok(())
    }
}

/// A region of the `(f₊, f₋)` plane.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Region {
    /// Open rectangle; bounds may be infinite.
    Rect { f_plus: (f64, f64), f_minus: (f64, f64) },
    /// `f₋ > 0`.
    UpperHalf,
    /// `f₋ < 0`.
    LowerHalf,
}

impl Region {
    /// `R₀ = (2/3, 1) × (0, 1)`.
    pub fn r_zero() -> Self {
        Region::Rect { f_plus: (2.0 / 3.0, 1.0), f_minus: (0.0, 1.0) }
    }

    /// `R∞ = (1, ∞) × (1, ∞)`.
    pub fn r_infinity() -> Self {
        Region::Rect { f_plus: (1.0, f64::INFINITY), f_minus: (1.0, f64::INFINITY) }
    }

    pub fn contains(&self, s: &InstantonState) -> bool {
        match *self {
            Region::Rect { f_plus: (a, b), f_minus: (c, d) } => {
                s.f_plus > a && s.f_plus < b && s.f_minus > c && s.f_minus < d
            }
            Region::UpperHalf => s.f_minus > 0.0,
            Region::LowerHalf => s.f_minus < 0.0,
        }
    }

    /// Sup-norm distance from `s` to the closure of the region.
    pub fn excess(&self, s: &InstantonState) -> f64 {
        let gap = |x: f64, lo: f64, hi: f64| (lo - x).max(x - hi).max(0.0);
        match *self {
            Region::Rect { f_plus: (a, b), f_minus: (c, d) } => {
                gap(s.f_plus, a, b).max(gap(s.f_minus, c, d))
            }
            Region::UpperHalf => (-s.f_minus).max(0.0),
            Region::LowerHalf => s.f_minus.max(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InvarianceReport {
    pub region: Region,
    /// Time of the first sample strictly inside the region.
    pub entered_at: Option<f64>,
    /// First later sample further than `band` outside the region's closure.
    pub exit: Option<(f64, InstantonState)>,
    pub band: f64,
}

impl InvarianceReport {
    /// Entered and never left (within the band).
    pub fn holds(&self) -> bool {
        self.entered_at.is_some() && self.exit.is_none()
    }
}

/// A single integrated solution.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub seed: SeriesJet,
    pub t0: f64,
    pub t_max: f64,
    pub tol: f64,
    pub termination: Termination,
    pub stats: StepStats,
    pub final_step: f64,
    pub region_reports: Vec<InvarianceReport>,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has at least the seed sample")
    }

    pub fn final_state(&self) -> InstantonState {
        self.last().state()
    }

    /// Samples with `t ≥ t_from`.
    pub fn tail(&self, t_from: f64) -> &[Sample] {
        let start = self.samples.partition_point(|s| s.t < t_from);
        &self.samples[start..]
    }

    /// Like [`Trajectory::tail`] but also keeps the last sample before
    /// `t_from`, so the window covers `[t_from, t_end]` completely.
    pub fn tail_covering(&self, t_from: f64) -> &[Sample] {
        let start = self.samples.partition_point(|s| s.t < t_from);
        &self.samples[start.saturating_sub(1)..]
    }

    pub fn reflected(&self) -> Trajectory {
        let mut out = self.clone();
        out.seed = self.seed.reflect();
        for s in out.samples.iter_mut() {
            s.f_minus = -s.f_minus;
        }
        out
    }
}

/// Integrates the instanton equations from the seed jet at `t0` to `t_max`.
///
/// Runs stop early on escape; otherwise they continue to `t_max` so the tail
/// is available for decay fits. Step-control failures are reported in the
/// termination, not as an error.
pub fn integrate(
    seed: &SeriesJet,
    t0: f64,
    t_max: f64,
    tol: f64,
    events: &EventSpec,
    control: &StepControl,
) -> Result<Trajectory> {
    if !(t0 > 0.0 && t0 <= SERIES_VALIDITY_RADIUS) {
        return Err(Error::InvalidArgument("seed time must lie in (0, 0.05]"));
    }
    if !(t_max > t0) || !t_max.is_finite() {
        return Err(Error::InvalidArgument("t_max must exceed the seed time"));
    }
    if !(1e-14..=1e-3).contains(&tol) {
        return Err(Error::InvalidArgument("tolerance must lie in [1e-14, 1e-3]"));
    }
    events.validate()?;

    let r0 = r_of_t(t0, DEFAULT_QUAD_TOL)?;
    let f0 = seed.evaluate(t0);
    let mut samples = Vec::with_capacity(1024);
    let mut escaped = None;
    let mut entry: Option<f64> = None;
    let within_ball = |s: &InstantonState| s.distance(&NEARLY_KAHLER) <= events.convergence_radius;

    let rhs = |_t: f64, y: &[f64; 3]| {
        let r = y[0].max(1.0);
        let (a, b) = coefficients_unchecked(r);
        let d = rhs_full_raw(InstantonState::new(y[1], y[2]), a, a / (b * b));
        [dr_dt_unchecked(r), d.f_plus, d.f_minus]
    };
    let report = ode::solve(rhs, t0, [r0, f0.f_plus, f0.f_minus], t_max, tol, tol, control, |t, y| {
        let s = InstantonState::new(y[1], y[2]);
        samples.push(Sample { t, r: y[0], f_plus: y[1], f_minus: y[2] });
        if s.max_abs() > events.escape_threshold {
            escaped = Some(t);
            return ControlFlow::Break(());
        }
        if t >= events.convergence_min_time && within_ball(&s) {
            entry.get_or_insert(t);
        } else {
            entry = None;
        }
        ControlFlow::Continue(())
    });

    let termination = match (report.status, escaped, entry) {
        (_, Some(t_escape), _) => Termination::Escaped { t_escape },
        (SolveStatus::Finished, None, Some(t_entry)) => Termination::Converged { t_entry },
        (SolveStatus::Finished, None, None) => Termination::ReachedTMax,
        _ => Termination::StepFailure { t: report.t },
    };

    let mut traj = Trajectory {
        samples,
        seed: seed.clone(),
        t0,
        t_max,
        tol,
        termination,
        stats: report.stats,
        final_step: report.stats.final_step(),
        region_reports: Vec::new(),
    };
    traj.region_reports = events
        .watchers
        .iter()
        .map(|region| check_region_invariance(&traj, region, events.invariance_band))
        .collect();
    Ok(traj)
}

/// Checks whether a trajectory, once strictly inside `region`, stays within
/// `band` of it for all later samples.
pub fn check_region_invariance(traj: &Trajectory, region: &Region, band: f64) -> InvarianceReport {
    let mut entered_at = None;
    let mut exit = None;
    for s in &traj.samples {
        let state = s.state();
        match entered_at {
            None if region.contains(&state) => entered_at = Some(s.t),
            Some(_) if region.excess(&state) > band => {
                exit = Some((s.t, state));
                break;
            }
            _ => {}
        }
    }
    InvarianceReport { region: *region, entered_at, exit, band }
}
