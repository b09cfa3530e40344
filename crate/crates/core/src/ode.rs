//! Dormand–Prince 5(4) embedded Runge–Kutta pair with PI step control.
//!
//! The stepper works on fixed-size arrays and is fully deterministic: for
//! fixed inputs and [`StepControl`] constants it performs the same floating
//! point operations in the same order.

use core::ops::ControlFlow;

use crate::math::{pow, sqrt};

/// Step-size controller constants.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct StepControl {
    pub safety: f64,
    pub fac_min: f64,
    pub fac_max: f64,
    /// Exponent on the current error in the PI controller.
    pub pi_alpha: f64,
    /// Exponent on the previous accepted error.
    pub pi_beta: f64,
    /// Upper bound on `h/|t|`; `0` disables the bound.
    pub max_step_ratio: f64,
    /// First trial step as a fraction of `|t₀|`.
    pub initial_step_ratio: f64,
    /// Step underflow threshold as a fraction of `|t|`.
    pub min_step_ratio: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            safety: 0.9,
            fac_min: 0.2,
            fac_max: 5.0,
            pi_alpha: 0.17,
            pi_beta: 0.04,
            max_step_ratio: 0.02,
            initial_step_ratio: 1e-3,
            min_step_ratio: 1e-13,
            max_steps: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// Reached the requested end time.
    Finished,
    /// The step callback asked to stop.
    Stopped,
    /// The step size fell below `min_step_ratio·|t|`, or the state became
    /// non-finite.
    StepUnderflow,
    MaxSteps,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
    #[cfg_attr(feature = "serde", serde(skip))]
    final_step_bits: u64,
}

impl StepStats {
    pub fn final_step(&self) -> f64 {
        f64::from_bits(self.final_step_bits)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub status: SolveStatus,
    pub stats: StepStats,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Fifth- minus fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[inline]
fn combine<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

/// Integrates `dy/dt = f(t, y)` from `(t0, y0)` to `t_end > t0`.
///
/// `on_step` is called after every accepted step (and once for the
/// initial point) and may stop the integration early. Errors are measured
/// in the RMS norm with per-component scale `atol + rtol·max(|y|, |y_new|)`.
#[allow(clippy::too_many_arguments)]
pub fn solve<const N: usize, F, C>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    atol: f64,
    rtol: f64,
    control: &StepControl,
    mut on_step: C,
) -> SolveReport<N>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    C: FnMut(f64, &[f64; N]) -> ControlFlow<()>,
{
    let mut stats = StepStats::default();
    let mut t = t0;
    let mut y = y0;
    let report = |t, y, status, mut stats: StepStats, h: f64| {
        stats.final_step_bits = h.to_bits();
        SolveReport { t, y, status, stats }
    };
    if on_step(t, &y).is_break() {
        return report(t, y, SolveStatus::Stopped, stats, 0.0);
    }
    let mut k1 = f(t, &y);
    stats.evaluations += 1;
    let scale_ref = t0.abs().max(f64::MIN_POSITIVE);
    let mut h = (control.initial_step_ratio * scale_ref).min(t_end - t0);
    let mut err_prev: f64 = 1e-4;
    let mut rejected_last = false;

    while t < t_end {
        if stats.accepted + stats.rejected >= control.max_steps {
            return report(t, y, SolveStatus::MaxSteps, stats, h);
        }
        if control.max_step_ratio > 0.0 {
            h = h.min(control.max_step_ratio * t.abs().max(scale_ref));
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        if h <= control.min_step_ratio * t.abs().max(scale_ref) {
            return report(t, y, SolveStatus::StepUnderflow, stats, h);
        }

        let y2 = combine(&y, h, &[(A21, &k1)]);
        let k2 = f(t + C2 * h, &y2);
        let y3 = combine(&y, h, &[(A31, &k1), (A32, &k2)]);
        let k3 = f(t + C3 * h, &y3);
        let y4 = combine(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        let k4 = f(t + C4 * h, &y4);
        let y5 = combine(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        let k5 = f(t + C5 * h, &y5);
        let y6 = combine(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
        let t_new = if last { t_end } else { t + h };
        let k6 = f(t_new, &y6);
        let y_new = combine(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = f(t_new, &y_new);
        stats.evaluations += 6;

        let mut sum = 0.0;
        let mut finite = true;
        for i in 0..N {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = atol + rtol * y[i].abs().max(y_new[i].abs());
            let q = e / sc;
            sum += q * q;
            finite &= y_new[i].is_finite();
        }
        let err = sqrt(sum / N as f64);

        if !finite || !err.is_finite() {
            // Shrink hard; a non-finite stage usually means a pole inside the step.
            h *= control.fac_min;
            stats.rejected += 1;
            rejected_last = true;
            continue;
        }

        if err <= 1.0 {
            t = t_new;
            y = y_new;
            k1 = k7;
            stats.accepted += 1;
            let mut fac = if err == 0.0 {
                control.fac_max
            } else {
                control.safety * pow(err, -control.pi_alpha) * pow(err_prev, control.pi_beta)
            };
            fac = fac.clamp(control.fac_min, control.fac_max);
            if rejected_last {
                fac = fac.min(1.0);
            }
            err_prev = err.max(1e-4);
            rejected_last = false;
            if on_step(t, &y).is_break() {
                return report(t, y, SolveStatus::Stopped, stats, h);
            }
            h *= fac;
        } else {
            let fac = (control.safety * pow(err, -0.2)).max(control.fac_min);
            h *= fac;
            stats.rejected += 1;
            rejected_last = true;
        }
    }
    report(t, y, SolveStatus::Finished, stats, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::vec::Vec;

    #[test]
    fn exponential_decay() {
        let control = StepControl { max_step_ratio: 0.0, ..StepControl::default() };
        let rep = solve(|_, y: &[f64; 1]| [-y[0]], 0.0_f64.max(1e-300), [1.0], 5.0, 1e-12, 1e-12, &control, |_, _| ControlFlow::Continue(()));
        assert_eq!(rep.status, SolveStatus::Finished);
        assert!((rep.y[0] - libm::exp(-5.0)).abs() < 1e-10);
    }

    #[test]
    fn harmonic_oscillator_order() {
        let control = StepControl::default();
        let run = |tol| {
            solve(|_, y: &[f64; 2]| [y[1], -y[0]], 1.0, [libm::cos(1.0), -libm::sin(1.0)], 11.0, tol, tol, &control, |_, _| ControlFlow::Continue(()))
        };
        let rep = run(1e-10);
        assert!((rep.y[0] - libm::cos(11.0)).abs() < 1e-8);
        assert!(rep.stats.accepted > 0);
    }

    #[test]
    fn callback_can_stop() {
        let control = StepControl::default();
        let mut seen = Vec::new();
        let rep = solve(|_, _: &[f64; 1]| [1.0], 1.0, [0.0], 100.0, 1e-9, 1e-9, &control, |t, _| {
            seen.push(t);
            if t > 2.0 { ControlFlow::Break(()) } else { ControlFlow::Continue(()) }
        });
        assert_eq!(rep.status, SolveStatus::Stopped);
        assert!(rep.t > 2.0 && rep.t < 3.0);
        assert!(seen.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn pole_gives_underflow_not_hang() {
        // y' = y², y(1) = 1 blows up at t = 2.
        let control = StepControl::default();
        let rep = solve(|_, y: &[f64; 1]| [y[0] * y[0]], 1.0, [1.0], 3.0, 1e-10, 1e-10, &control, |_, _| ControlFlow::Continue(()));
        assert!(matches!(rep.status, SolveStatus::StepUnderflow | SolveStatus::MaxSteps));
        assert!(rep.t < 2.0);
    }
}
