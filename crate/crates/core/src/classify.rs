//! Long-time classification of trajectories.
//!
//! Bounded solutions of the full system converge to a critical point of the
//! cone system. The local families split three ways: flat members sit on a
//! flat critical point for all time, irreducible bounded members converge to
//! the nearly-Kähler instanton as `f₊ = 2/3 + μt⁻² + O(t⁻³)`,
//! `f₋ = νt⁻² + O(t⁻³)`, and everything else escapes to infinity.
//!
//! The `t⁻²` decay is for the coefficients. Measured in the cone metric the
//! connection one-forms carry a further `t⁻¹` (the coframe `e±ᵢ` has norm
//! `O(t⁻¹)`), so the connection approaches `A^{nK}` at rate `−3`.

use crate::fit::{fit_line, fit_shared_slope};
use crate::instanton::{nearest_critical_point, CriticalKind, InstantonState, ShiftedState, NEARLY_KAHLER};
use crate::local::{Family, SeriesJet};
use crate::math::{ln, SQRT_3};
use crate::ode::StepControl;
use crate::trajectory::{integrate, EventSpec, Sample, Termination, Trajectory};
use crate::{instanton, Error, Result};
use alloc::vec::Vec;

/// Below this magnitude `f₋` is treated as identically zero in fits.
pub const UNDERFLOW: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct ClassifySettings {
    /// Fit window starts at `max(fit_window_min, fit_window_fraction·t_max)`.
    pub fit_window_min: f64,
    pub fit_window_fraction: f64,
    /// A trajectory within this distance of one flat point throughout is flat.
    pub flat_tolerance: f64,
    pub min_tail_samples: usize,
}

impl Default for ClassifySettings {
    fn default() -> Self {
        ClassifySettings {
            fit_window_min: 50.0,
            fit_window_fraction: 0.1,
            flat_tolerance: 1e-12,
            min_tail_samples: 50,
        }
    }
}

impl ClassifySettings {
    pub fn fit_start(&self, t_max: f64) -> f64 {
        self.fit_window_min.max(self.fit_window_fraction * t_max)
    }
}

/// Least-squares description of a decaying tail.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecayFit {
    /// Leading coefficient of `f₊ − 2/3` against `t⁻²`.
    pub mu: f64,
    /// Leading coefficient of `f₋` against `t⁻²`; exactly 0 when `f₋`
    /// underflows throughout the tail.
    pub nu: f64,
    /// Log-log slope shared by both components (or of `f₊` alone).
    pub fitted_exponent: f64,
    pub exponent_plus: f64,
    pub exponent_minus: Option<f64>,
    /// Largest deviation from the joint fit, in natural-log units.
    pub residual: f64,
    /// Log-log slope of `t⁻¹(|f₊ − 2/3| + |f₋|)`, the cone-metric norm of
    /// `A − A^{nK}` up to constants.
    pub connection_rate: f64,
    pub samples: usize,
    pub t_from: f64,
    pub t_to: f64,
}

/// Fits `f₊ − 2/3 ≈ μt^k` and `f₋ ≈ νt^k` on a trajectory tail.
///
/// The exponent comes from straight-line fits in log-log space. The
/// coefficients come from regressing `(f − target)·t²` on `1/t`, which
/// absorbs the `O(t⁻³)` correction into the slope.
pub fn fit_decay(tail: &[Sample], min_samples: usize) -> Result<DecayFit> {
    let span = match (tail.first(), tail.last()) {
        (Some(a), Some(b)) if a.t > 0.0 => b.t / a.t,
        _ => 0.0,
    };
    if tail.len() < min_samples.max(2) || span < 10.0 * (1.0 - 1e-12) {
        return Err(Error::TailTooShort { samples: tail.len(), span });
    }
    let target = NEARLY_KAHLER.f_plus;
    let dev_plus = |s: &Sample| s.f_plus - target;
    if tail.iter().any(|s| dev_plus(s) == 0.0) {
        return Err(Error::NoConvergence("f+ - 2/3 vanishes in the fit window"));
    }
    let xs: Vec<f64> = tail.iter().map(|s| ln(s.t)).collect();
    let yp: Vec<f64> = tail.iter().map(|s| ln(dev_plus(s).abs())).collect();
    let minus_live = tail.iter().all(|s| s.f_minus.abs() >= UNDERFLOW);
    let minus_dead = tail.iter().all(|s| s.f_minus.abs() < UNDERFLOW);

    let plus_fit = fit_line(&xs, &yp).ok_or(Error::NoConvergence("log-log fit of f+"))?;
    let (fitted_exponent, exponent_minus, residual) = if minus_live {
        let ym: Vec<f64> = tail.iter().map(|s| ln(s.f_minus.abs())).collect();
        let minus_fit = fit_line(&xs, &ym).ok_or(Error::NoConvergence("log-log fit of f-"))?;
        let (slope, _, res) = fit_shared_slope(&[(&xs, &yp), (&xs, &ym)])
            .ok_or(Error::NoConvergence("joint log-log fit"))?;
        (slope, Some(minus_fit.slope), res)
    } else {
        (plus_fit.slope, None, plus_fit.max_residual)
    };

    let inv_t: Vec<f64> = tail.iter().map(|s| 1.0 / s.t).collect();
    let leading = |values: &mut dyn Iterator<Item = f64>| -> Result<f64> {
        let scaled: Vec<f64> = values.collect();
        fit_line(&inv_t, &scaled).map(|f| f.intercept).ok_or(Error::NoConvergence("coefficient fit"))
    };
    let mu = leading(&mut tail.iter().map(|s| dev_plus(s) * s.t * s.t))?;
    let nu = if minus_dead { 0.0 } else { leading(&mut tail.iter().map(|s| s.f_minus * s.t * s.t))? };

    let yc: Vec<f64> = tail.iter().map(|s| ln((dev_plus(s).abs() + s.f_minus.abs()) / s.t)).collect();
    let connection_rate = fit_line(&xs, &yc).ok_or(Error::NoConvergence("connection fit"))?.slope;

    Ok(DecayFit {
        mu,
        nu,
        fitted_exponent,
        exponent_plus: plus_fit.slope,
        exponent_minus,
        residual,
        connection_rate,
        samples: tail.len(),
        t_from: tail[0].t,
        t_to: tail[tail.len() - 1].t,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum InconclusiveReason {
    StepFailure,
    /// Bounded at `t_max` but not inside the convergence ball.
    NotConverged,
    FitFailed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Outcome {
    Flat { gauge: CriticalKind },
    ConvergesToNK(DecayFit),
    BlowUp { t_escape: f64 },
    Inconclusive { reason: InconclusiveReason },
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Flat { .. } => "flat",
            Outcome::ConvergesToNK(_) => "converges_to_nk",
            Outcome::BlowUp { .. } => "blow_up",
            Outcome::Inconclusive { .. } => "inconclusive",
        }
    }

    pub fn is_blow_up(&self) -> bool {
        matches!(self, Outcome::BlowUp { .. })
    }

    pub fn decay(&self) -> Option<&DecayFit> {
        match self {
            Outcome::ConvergesToNK(fit) => Some(fit),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassificationRecord {
    pub family: Family,
    pub parameter: f64,
    pub outcome: Outcome,
    pub termination: Termination,
    pub final_state: InstantonState,
    pub t_final: f64,
}

impl ClassificationRecord {
    /// Irreducible here means "not identically a critical point".
    pub fn is_irreducible(&self) -> bool {
        !matches!(self.outcome, Outcome::Flat { .. })
    }
}

/// Maps a terminated trajectory to an outcome.
pub fn classify(traj: &Trajectory, settings: &ClassifySettings) -> ClassificationRecord {
    let last = *traj.last();
    let outcome = match traj.termination {
        Termination::Escaped { t_escape } => Outcome::BlowUp { t_escape },
        Termination::StepFailure { .. } => Outcome::Inconclusive { reason: InconclusiveReason::StepFailure },
        _ => {
            let (anchor, _) = nearest_critical_point(&traj.samples[0].state());
            let flat = anchor.kind.is_flat()
                && traj.samples.iter().all(|s| s.state().distance(&anchor.state) <= settings.flat_tolerance);
            if flat {
                Outcome::Flat { gauge: anchor.kind }
            } else if let Termination::Converged { .. } = traj.termination {
                match fit_decay(traj.tail_covering(settings.fit_start(traj.t_max)), settings.min_tail_samples) {
                    Ok(fit) => Outcome::ConvergesToNK(fit),
                    Err(_) => Outcome::Inconclusive { reason: InconclusiveReason::FitFailed },
                }
            } else {
                Outcome::Inconclusive { reason: InconclusiveReason::NotConverged }
            }
        }
    };
    ClassificationRecord {
        family: traj.seed.family,
        parameter: traj.seed.parameter,
        outcome,
        termination: traj.termination,
        final_state: last.state(),
        t_final: last.t,
    }
}

/// Everything needed to integrate and classify one family member.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryProbe {
    pub t0: f64,
    pub t_max: f64,
    pub tol: f64,
    pub events: EventSpec,
    pub control: StepControl,
    pub settings: ClassifySettings,
}

impl Default for BoundaryProbe {
    fn default() -> Self {
        BoundaryProbe {
            t0: crate::local::DEFAULT_SEED_TIME,
            t_max: 1e4,
            tol: 1e-10,
            events: EventSpec::default(),
            control: StepControl::default(),
            settings: ClassifySettings::default(),
        }
    }
}

impl BoundaryProbe {
    pub fn run(&self, family: Family, parameter: f64) -> Result<ClassificationRecord> {
        let traj = integrate(&SeriesJet::new(family, parameter), self.t0, self.t_max, self.tol, &self.events, &self.control)?;
        Ok(classify(&traj, &self.settings))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundaryResult {
    pub family: Family,
    /// Midpoint of the final bracket.
    pub estimate: f64,
    /// Last parameter classified as bounded.
    pub bounded_side: f64,
    /// Last parameter classified as blow-up.
    pub blow_up_side: f64,
    pub probes: usize,
}

/// Bisects on the family parameter between a bounded member and a blow-up
/// member until the bracket is narrower than `tol_param`.
///
/// Interior probes are split on blow-up versus no blow-up; a bounded probe
/// that has not yet settled in the convergence ball counts as bounded.
pub fn locate_boundary(family: Family, bracket: (f64, f64), tol_param: f64, probe: &BoundaryProbe) -> Result<BoundaryResult> {
    let (lo, hi) = bracket;
    if !(tol_param > 0.0) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument("bracket and tolerance must be finite and positive"));
    }
    let at_lo = probe.run(family, lo)?.outcome;
    let at_hi = probe.run(family, hi)?.outcome;
    let settled = |o: &Outcome| matches!(o, Outcome::ConvergesToNK(_) | Outcome::Flat { .. });
    let (mut bounded, mut blow) = match (settled(&at_lo) && at_hi.is_blow_up(), settled(&at_hi) && at_lo.is_blow_up()) {
        (true, _) => (lo, hi),
        (_, true) => (hi, lo),
        _ => return Err(Error::BracketNotStraddling { lo, hi }),
    };
    let mut probes = 2;
    while (blow - bounded).abs() >= tol_param {
        let mid = 0.5 * (bounded + blow);
        probes += 1;
        if probe.run(family, mid)?.outcome.is_blow_up() {
            blow = mid;
        } else {
            bounded = mid;
        }
    }
    Ok(BoundaryResult { family, estimate: 0.5 * (bounded + blow), bounded_side: bounded, blow_up_side: blow, probes })
}

/// The cone instanton `f₊ = 2t²/(1 + 3t²)`, `f₋ = 0`, running from the flat
/// origin at `t = 0` to `A^{nK}` as `t → ∞`.
pub fn cone_line_solution(t: f64) -> Result<InstantonState> {
    if !(t > 0.0) {
        return Err(Error::Domain { what: "cone time t", value: t });
    }
    Ok(InstantonState::new(2.0 * t * t / (1.0 + 3.0 * t * t), 0.0))
}

/// The straight-line cone solution and its two images under the rotation
/// of the S₃ symmetry, each paired with its exact `t`-derivative.
///
/// The first image starts at the flat point `(1, 1)`, the second at `(1, −1)`.
pub fn cone_line_images(t: f64) -> Result<[(InstantonState, InstantonState); 3]> {
    let base = cone_line_solution(t)?;
    let d = 1.0 + 3.0 * t * t;
    let base_dot = InstantonState::new(4.0 * t / (d * d), 0.0);
    let to_shifted_rate = |v: InstantonState| ShiftedState::new(v.f_plus, v.f_minus / SQRT_3);
    let from_shifted_rate = |g: ShiftedState| InstantonState::new(g.g_plus, SQRT_3 * g.g_minus);
    let g0 = base.to_shifted();
    let dg0 = to_shifted_rate(base_dot);
    let g1 = instanton::rotate_cone(g0);
    let dg1 = instanton::rotate_cone(dg0);
    let g2 = instanton::rotate_cone(g1);
    let dg2 = instanton::rotate_cone(dg1);
    Ok([
        (base, base_dot),
        (g1.to_unshifted(), from_shifted_rate(dg1)),
        (g2.to_unshifted(), from_shifted_rate(dg2)),
    ])
}

/// Index of the Dirac operator at a connection asymptotic to `A^{nK}`, as a
/// function of the Sobolev weight.
pub fn index_lookup(weight: f64) -> Result<i32> {
    if weight > -2.0 && weight < 0.0 {
        Ok(1)
    } else if weight > -4.0 && weight < -2.0 {
        Ok(-1)
    } else {
        Err(Error::UnsupportedWeight(weight))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instanton::rhs_cone;
    use crate::local::clarke_closed_form;
    use crate::metric::{r_of_t, t_of_r};

    fn synthetic_tail(mu: f64, nu: f64) -> Vec<Sample> {
        (0..200)
            .map(|i| {
                let t = 100.0 * libm::pow(10.0, i as f64 / 199.0);
                Sample { t, r: t, f_plus: 2.0 / 3.0 + mu / (t * t) + 0.3 / (t * t * t), f_minus: nu / (t * t) }
            })
            .collect()
    }

    #[test]
    fn fit_recovers_synthetic_coefficients() {
        let fit = fit_decay(&synthetic_tail(0.7, -0.2), 50).unwrap();
        assert!((fit.mu - 0.7).abs() < 1e-9);
        assert!((fit.nu + 0.2).abs() < 1e-9);
        assert!((fit.fitted_exponent + 2.0).abs() < 0.01);
        assert!((fit.connection_rate + 3.0).abs() < 0.01);
        assert!(fit.exponent_minus.is_some());
    }

    #[test]
    fn fit_with_vanishing_minus_component() {
        let fit = fit_decay(&synthetic_tail(0.7, 0.0), 50).unwrap();
        assert_eq!(fit.nu, 0.0);
        assert!(fit.exponent_minus.is_none());
    }

    #[test]
    fn fit_rejects_short_tails() {
        let tail = synthetic_tail(1.0, 0.0);
        assert!(matches!(fit_decay(&tail[..40], 50), Err(Error::TailTooShort { .. })));
        assert!(matches!(fit_decay(&tail[..150], 50), Err(Error::TailTooShort { .. })));
    }

    // Samples of the explicit T_γ solution as a stand-in trajectory tail.
    fn clarke_tail(gamma: f64) -> Vec<Sample> {
        (0..120)
            .map(|i| {
                let t = 100.0 * libm::pow(10.0, i as f64 / 119.0);
                let r = r_of_t(t, 1e-14).unwrap();
                let s = clarke_closed_form(gamma, r).unwrap().state;
                Sample { t, r, f_plus: s.f_plus, f_minus: s.f_minus }
            })
            .collect()
    }

    #[test]
    fn clarke_tail_decay() {
        for &g in &[0.1, 1.0, 10.0] {
            let fit = fit_decay(&clarke_tail(g), 50).unwrap();
            assert_eq!(fit.nu, 0.0);
            assert!((fit.fitted_exponent + 2.0).abs() < 0.05, "g={g} {fit:?}");
            // Large-r expansion of the closed form: f₊ − 2/3 ≈ (2/3 − 1/γ) r⁻².
            let mu = 2.0 / 3.0 - 1.0 / g;
            assert!((fit.mu - mu).abs() < 0.02 * mu.abs().max(1.0), "g={g} {}", fit.mu);
        }
    }

    #[test]
    fn clarke_three_halves_decays_faster() {
        // 2γ(r − 1) − 3r = −3 at γ = 3/2, so the t⁻² term is absent.
        let fit = fit_decay(&clarke_tail(1.5), 50).unwrap();
        assert!((fit.fitted_exponent + 3.0).abs() < 0.05, "{fit:?}");
    }

    #[test]
    fn cone_line_examples() {
        assert_eq!(cone_line_solution(1.0).unwrap(), InstantonState::new(0.5, 0.0));
        assert!(cone_line_solution(1e-8).unwrap().norm() < 1e-15);
        assert!((cone_line_solution(1e8).unwrap().f_plus - 2.0 / 3.0).abs() < 1e-15);
        assert!(cone_line_solution(0.0).is_err());
    }

    #[test]
    fn cone_line_images_solve_cone_system() {
        let mut t: f64 = 0.01;
        while t <= 100.0 {
            for (state, rate) in cone_line_images(t).unwrap() {
                let rhs = rhs_cone(t, state).unwrap();
                assert!((rhs - rate).max_abs() < 1e-10, "t={t} {state:?}");
            }
            t *= 1.3;
        }
        let images = cone_line_images(1e-6).unwrap();
        assert!(images[1].0.distance(&InstantonState::new(1.0, 1.0)) < 1e-9);
        assert!(images[2].0.distance(&InstantonState::new(1.0, -1.0)) < 1e-9);
    }

    #[test]
    fn index_table() {
        assert_eq!(index_lookup(-1.0), Ok(1));
        assert_eq!(index_lookup(-3.0), Ok(-1));
        assert_eq!(index_lookup(-2.0), Err(Error::UnsupportedWeight(-2.0)));
        assert!(index_lookup(0.0).is_err());
        assert!(index_lookup(-4.5).is_err());
    }

    #[test]
    fn classify_flat_and_converging() {
        let probe = BoundaryProbe { t_max: 1e3, ..BoundaryProbe::default() };
        let flat = probe.run(Family::TPrime, 1.0).unwrap();
        assert!(matches!(flat.outcome, Outcome::Flat { gauge: CriticalKind::FlatPlusPlus }));
        let origin = probe.run(Family::TGamma, 0.0).unwrap();
        assert!(matches!(origin.outcome, Outcome::Flat { gauge: CriticalKind::FlatOrigin }));
        let half = probe.run(Family::TPrime, 0.5).unwrap();
        let fit = half.outcome.decay().copied().unwrap_or_else(|| panic!("{half:?}"));
        assert!((fit.fitted_exponent + 2.0).abs() < 0.05);
        assert!(half.is_irreducible());
        let up = probe.run(Family::TPrime, 1.05).unwrap();
        assert!(up.outcome.is_blow_up());
        let _ = t_of_r(2.0, 1e-12).unwrap();
    }
}
