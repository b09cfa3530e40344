//! The Bryant–Salamon metric on the spinor bundle of S³.
//!
//! The metric is `g = dt² + A²Σ(e⁺ᵢ)² + B²Σ(e⁻ᵢ)²` with, in terms of the
//! rescaled radius `r = √3·B ∈ [1, ∞)`,
//!
//! ```text
//! A(r) = (r/3)·√(1 − r⁻³),    B(r) = r/√3,    dr/dt = √(1 − r⁻³).
//! ```
//!
//! `t` is the geodesic distance from the singular orbit `r = 1`. Note that
//! `t − r` tends to a constant (≈ −0.4312) rather than zero, so statements
//! about the asymptotic cone are phrased in terms of `r`, which is the
//! radial parameter of the cone the metric is asymptotic to.

use crate::diff::central5;
use crate::math::{sqrt, SQRT_3};
use crate::quadrature;
use crate::{Error, Result};

/// Default absolute/relative tolerance for the `t ↔ r` quadrature.
pub const DEFAULT_QUAD_TOL: f64 = 1e-14;

/// Default finite-difference step for residual checks.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Metric coefficients at one point of the orbit space.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricSample {
    /// Geodesic distance from the singular orbit, when known.
    pub t: Option<f64>,
    /// Rescaled radius `√3·B`.
    pub r: f64,
    /// Coefficient of the `e⁺ᵢ` directions.
    pub a: f64,
    /// Coefficient of the `e⁻ᵢ` directions.
    pub b: f64,
}

impl MetricSample {
    /// The function `a = (B³ + BA²)/8` of the closed G₂-structure.
    pub fn flow_potential(&self) -> f64 {
        (self.b * self.b * self.b + self.b * self.a * self.a) / 8.0
    }

    /// The constant `p = (B³ − 3BA²)/8`, the size of the class `[φ]`.
    pub fn class_size(&self) -> f64 {
        (self.b * self.b * self.b - 3.0 * self.b * self.a * self.a) / 8.0
    }

    /// `A/B²`, the coefficient multiplying `f₋²` in the instanton equations.
    pub fn a_over_b_squared(&self) -> f64 {
        self.a / (self.b * self.b)
    }

    pub fn with_t(mut self, t: f64) -> Self {
        self.t = Some(t);
        self
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r >= 1.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { what: "radius r", value: r })
    }
}

/// `1 − r⁻³`, written as `(r − 1)(r² + r + 1)/r³` so it keeps full
/// relative precision near the singular orbit.
#[inline]
pub(crate) fn one_minus_inv_cube(r: f64) -> f64 {
    (r - 1.0) * (r * r + r + 1.0) / (r * r * r)
}

#[inline]
pub(crate) fn coefficients_unchecked(r: f64) -> (f64, f64) {
    let a = r / 3.0 * sqrt(one_minus_inv_cube(r).max(0.0));
    (a, r / SQRT_3)
}

#[inline]
pub(crate) fn dr_dt_unchecked(r: f64) -> f64 {
    sqrt(one_minus_inv_cube(r).max(0.0))
}

/// Metric coefficients at radius `r ≥ 1`. The `t` field is left unset.
pub fn metric_at_r(r: f64) -> Result<MetricSample> {
    check_radius(r)?;
    let (a, b) = coefficients_unchecked(r);
    Ok(MetricSample { t: None, r, a, b })
}

/// `dr/dt = √(1 − r⁻³)`, in `[0, 1)`.
pub fn dr_dt(r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(dr_dt_unchecked(r))
}

/// `dt/du` after substituting `r = 1 + u²` into `dt = dr/√(1 − r⁻³)`.
///
/// The substitution removes the inverse square-root endpoint singularity:
/// the integrand is analytic with value `2/√3` at `u = 0`.
fn dt_du(u: f64) -> f64 {
    let r = 1.0 + u * u;
    2.0 * r * sqrt(r) / sqrt(r * r + r + 1.0)
}

fn t_of_u(u: f64, tol: f64) -> Result<f64> {
    quadrature::integrate(dt_du, 0.0, u, tol, tol)
}

/// Geodesic distance from the singular orbit to radius `r`.
pub fn t_of_r(r: f64, tol: f64) -> Result<f64> {
    check_radius(r)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("quadrature tolerance must be positive"));
    }
    t_of_u(sqrt(r - 1.0), tol)
}

/// Inverse of [`t_of_r`], by Newton iteration in `u = √(r − 1)`.
///
/// `t(u)` is increasing and convex, so Newton converges from any start
/// after at most one overshoot.
pub fn r_of_t(t: f64, tol: f64) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain { what: "geodesic time t", value: t });
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    let mut u = if t < 1.0 { 0.5 * SQRT_3 * t } else { sqrt(t - 0.5) };
    for _ in 0..60 {
        let step = (t_of_u(u, tol)? - t) / dt_du(u);
        let next = (u - step).max(0.5 * u);
        let done = (next - u).abs() <= 4.0 * f64::EPSILON * next;
        u = next;
        if done {
            return Ok(1.0 + u * u);
        }
    }
    Err(Error::NoConvergence("r(t) Newton iteration"))
}

/// A pair of metric coefficients `(A, B)` given along some coordinate `x`
/// together with `dx/dt`.
pub trait MetricProfile {
    fn coefficients(&self, x: f64) -> (f64, f64);
    fn dx_dt(&self, x: f64) -> f64;
}

/// The Bryant–Salamon closed form, parametrised by `r`.
#[derive(Debug, Clone, Copy, Default)]
pub struct BryantSalamon;

impl MetricProfile for BryantSalamon {
    fn coefficients(&self, r: f64) -> (f64, f64) {
        coefficients_unchecked(r)
    }
    fn dx_dt(&self, r: f64) -> f64 {
        dr_dt_unchecked(r)
    }
}

/// The conical G₂-metric `A = t/3`, `B = t/√3`, parametrised by `t`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Cone;

impl MetricProfile for Cone {
    fn coefficients(&self, t: f64) -> (f64, f64) {
        (t / 3.0, t / SQRT_3)
    }
    fn dx_dt(&self, _t: f64) -> f64 {
        1.0
    }
}

/// A profile with its coefficients multiplied by constant factors.
#[derive(Debug, Clone, Copy)]
pub struct Scaled<P> {
    pub inner: P,
    pub a_factor: f64,
    pub b_factor: f64,
}

impl<P: MetricProfile> MetricProfile for Scaled<P> {
    fn coefficients(&self, x: f64) -> (f64, f64) {
        let (a, b) = self.inner.coefficients(x);
        (a * self.a_factor, b * self.b_factor)
    }
    fn dx_dt(&self, x: f64) -> f64 {
        self.inner.dx_dt(x)
    }
}

/// Residuals `(Ȧ − ½(1 − A²/B²), Ḃ − A/B)` of the Hitchin flow for an
/// arbitrary profile, with derivatives by central differences of step `h`
/// in the profile's own coordinate.
pub fn hitchin_residual_of<P: MetricProfile>(profile: &P, x: f64, h: f64) -> (f64, f64) {
    let (a, b) = profile.coefficients(x);
    let speed = profile.dx_dt(x);
    let da = central5(|y| profile.coefficients(y).0, x, h) * speed;
    let db = central5(|y| profile.coefficients(y).1, x, h) * speed;
    (da - 0.5 * (1.0 - a * a / (b * b)), db - a / b)
}

/// Hitchin-flow residuals at a sample: `Ȧ`, `Ḃ` come from differentiating
/// the closed form along `t` at `sample.r`; the algebraic right-hand side
/// uses the sample's own `A` and `B`, so a perturbed sample is detected.
pub fn hitchin_residual(sample: &MetricSample, h: f64) -> Result<(f64, f64)> {
    check_radius(sample.r - 2.0 * h)?;
    let speed = dr_dt_unchecked(sample.r);
    let da = central5(|r| coefficients_unchecked(r).0, sample.r, h) * speed;
    let db = central5(|r| coefficients_unchecked(r).1, sample.r, h) * speed;
    let (a, b) = (sample.a, sample.b);
    Ok((da - 0.5 * (1.0 - a * a / (b * b)), db - a / b))
}

/// Residuals of the co-closed condition `4ȧ⁶ = 3a⁴ − 8pa³ + 6p²a² − p⁴` for
/// the closed form at radius `r`.
///
/// Returns `(relative, dp_dr)`: the first is `|lhs − rhs| / max(|lhs|, |rhs|)`
/// (both sides grow like `r¹²`), the second the finite-difference derivative
/// of `p` along `r`. The step is relative, `h·r`.
pub fn potential_residual(r: f64, h: f64) -> Result<(f64, f64)> {
    let step = h * r.max(1.0);
    check_radius(r - 2.0 * step)?;
    let sample_at = |x: f64| {
        let (a, b) = coefficients_unchecked(x);
        MetricSample { t: None, r: x, a, b }
    };
    let s = sample_at(r);
    let (a, p) = (s.flow_potential(), s.class_size());
    let a_dot = central5(|x| sample_at(x).flow_potential(), r, step) * dr_dt_unchecked(r);
    let dp_dr = central5(|x| sample_at(x).class_size(), r, step);
    let a2 = a_dot * a_dot;
    let lhs = 4.0 * a2 * a2 * a2;
    let rhs = 3.0 * a * a * a * a - 8.0 * p * a * a * a + 6.0 * p * p * a * a - p * p * p * p;
    let scale = lhs.abs().max(rhs.abs());
    let rel = if scale > 0.0 { (lhs - rhs).abs() / scale } else { 0.0 };
    Ok((rel, dp_dr))
}
