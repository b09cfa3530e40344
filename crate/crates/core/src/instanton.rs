//! The SU(2)³-invariant instanton equations.
//!
//! An invariant connection is `f₊ Σ Eᵢ⊗e⁺ᵢ + f₋ Σ Eᵢ⊗e⁻ᵢ`; the instanton
//! condition on the Bryant–Salamon metric is
//!
//! ```text
//! ḟ₊ = (f₊/A)(1 − A²/B² − f₊) + f₋²·A/B²,    ḟ₋ = (2f₋/A)(f₊ − 1),
//! ```
//!
//! and on the G₂-cone (`A = t/3`, `B = t/√3`) it reduces to
//!
//! ```text
//! ḟ₊ = (2f₊ − 3f₊² + f₋²)/t,    ḟ₋ = 6f₋(f₊ − 1)/t.
//! ```

use core::ops::{Add, Mul, Sub};

use crate::math::{sqrt, SQRT_3};
use crate::metric::MetricSample;
use crate::{Error, Result};

/// Connection coefficients `(f₊, f₋)`, or a rate of change of them.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InstantonState {
    pub f_plus: f64,
    pub f_minus: f64,
}

impl InstantonState {
    pub const fn new(f_plus: f64, f_minus: f64) -> Self {
        Self { f_plus, f_minus }
    }

    pub fn norm(&self) -> f64 {
        sqrt(self.f_plus * self.f_plus + self.f_minus * self.f_minus)
    }

    pub fn max_abs(&self) -> f64 {
        self.f_plus.abs().max(self.f_minus.abs())
    }

    pub fn distance(&self, other: &Self) -> f64 {
        (*self - *other).norm()
    }

    pub fn is_finite(&self) -> bool {
        self.f_plus.is_finite() && self.f_minus.is_finite()
    }

    /// `(f₊ − 2/3, f₋/√3)`: coordinates centred on the nearly-Kähler point in
    /// which the S₃ symmetry of the cone equations is orthogonal.
    pub fn to_shifted(self) -> ShiftedState {
        ShiftedState { g_plus: self.f_plus - 2.0 / 3.0, g_minus: self.f_minus / SQRT_3 }
    }
}

impl Add for InstantonState {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.f_plus + o.f_plus, self.f_minus + o.f_minus)
    }
}

impl Sub for InstantonState {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.f_plus - o.f_plus, self.f_minus - o.f_minus)
    }
}

impl Mul<InstantonState> for f64 {
    type Output = InstantonState;
    fn mul(self, s: InstantonState) -> InstantonState {
        InstantonState::new(self * s.f_plus, self * s.f_minus)
    }
}

/// Shifted coordinates `(g₊, g₋)` with `f₊ = g₊ + 2/3`, `f₋ = √3·g₋`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShiftedState {
    pub g_plus: f64,
    pub g_minus: f64,
}

impl ShiftedState {
    pub const fn new(g_plus: f64, g_minus: f64) -> Self {
        Self { g_plus, g_minus }
    }

    pub fn to_unshifted(self) -> InstantonState {
        InstantonState { f_plus: self.g_plus + 2.0 / 3.0, f_minus: SQRT_3 * self.g_minus }
    }

    pub fn reflect(self) -> Self {
        Self::new(self.g_plus, -self.g_minus)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        let (dp, dm) = (self.g_plus - other.g_plus, self.g_minus - other.g_minus);
        sqrt(dp * dp + dm * dm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CriticalKind {
    FlatOrigin,
    FlatPlusPlus,
    FlatPlusMinus,
    NearlyKahler,
}

impl CriticalKind {
    pub fn is_flat(self) -> bool {
        !matches!(self, CriticalKind::NearlyKahler)
    }
}

/// A critical point of the cone equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub state: InstantonState,
    pub kind: CriticalKind,
}

/// The nearly-Kähler instanton `A^{nK}`.
pub const NEARLY_KAHLER: InstantonState = InstantonState::new(2.0 / 3.0, 0.0);

/// All critical points of the cone system: the flat connection in three
/// gauges and the nearly-Kähler instanton.
pub const CRITICAL_POINTS: [CriticalPoint; 4] = [
    CriticalPoint { state: InstantonState::new(0.0, 0.0), kind: CriticalKind::FlatOrigin },
    CriticalPoint { state: InstantonState::new(1.0, 1.0), kind: CriticalKind::FlatPlusPlus },
    CriticalPoint { state: InstantonState::new(1.0, -1.0), kind: CriticalKind::FlatPlusMinus },
    CriticalPoint { state: NEARLY_KAHLER, kind: CriticalKind::NearlyKahler },
];

/// Critical point closest to `s`, with its distance.
pub fn nearest_critical_point(s: &InstantonState) -> (CriticalPoint, f64) {
    CRITICAL_POINTS
        .iter()
        .map(|c| (*c, c.state.distance(s)))
        .fold((CRITICAL_POINTS[0], f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best })
}

/// Full system from the coefficients `A` and `q = A/B²`.
///
/// Written as `ḟ₊ = f₊(1 − f₊)/A + (f₋² − f₊)·q`, which is the same
/// expression rearranged so that `(0, 0)` and `(1, ±1)` are fixed points in
/// floating point as well, and so that `f₋ ↦ −f₋` commutes with every
/// rounding step.
#[inline]
pub(crate) fn rhs_full_raw(s: InstantonState, a: f64, q: f64) -> InstantonState {
    let (fp, fm) = (s.f_plus, s.f_minus);
    InstantonState {
        f_plus: fp * (1.0 - fp) / a + (fm * fm - fp) * q,
        f_minus: 2.0 * fm * (fp - 1.0) / a,
    }
}

/// Right-hand side of the instanton equations on the Bryant–Salamon metric.
///
/// The metric sample is passed explicitly so a caller can evolve `r` in the
/// same stepper. Fails on the singular orbit where `A = 0`.
pub fn rhs_full(t: f64, s: InstantonState, m: &MetricSample) -> Result<InstantonState> {
    if !(t > 0.0) || !(m.a > 0.0) {
        return Err(Error::SingularPoint { t });
    }
    Ok(rhs_full_raw(s, m.a, m.a_over_b_squared()))
}

/// `(2f₊ − 3f₊² + f₋², 6f₋(f₊ − 1))`, the cone equations in `τ = log t`.
#[inline]
pub fn rhs_autonomous(s: InstantonState) -> InstantonState {
    let (fp, fm) = (s.f_plus, s.f_minus);
    InstantonState { f_plus: fp * (2.0 - 3.0 * fp) + fm * fm, f_minus: 6.0 * fm * (fp - 1.0) }
}

/// Right-hand side of the cone equations at cone radius `t`.
pub fn rhs_cone(t: f64, s: InstantonState) -> Result<InstantonState> {
    if !(t > 0.0) {
        return Err(Error::SingularPoint { t });
    }
    let d = rhs_autonomous(s);
    Ok(InstantonState::new(d.f_plus / t, d.f_minus / t))
}

/// The autonomous cone system in shifted coordinates:
/// `(3g₋² − g₊(3g₊ + 2), 2g₋(3g₊ − 1))`.
#[inline]
pub fn rhs_autonomous_shifted(g: ShiftedState) -> ShiftedState {
    let (gp, gm) = (g.g_plus, g.g_minus);
    ShiftedState { g_plus: 3.0 * gm * gm - gp * (3.0 * gp + 2.0), g_minus: 2.0 * gm * (3.0 * gp - 1.0) }
}

/// `(f₊, f₋) ↦ (f₊, −f₋)`, a symmetry of both the full and the cone system.
#[inline]
pub fn reflect(s: InstantonState) -> InstantonState {
    InstantonState::new(s.f_plus, -s.f_minus)
}

/// Clockwise rotation by 2π/3 in shifted coordinates; together with
/// reflection it generates the S₃ symmetry of the cone equations.
#[inline]
pub fn rotate_cone(g: ShiftedState) -> ShiftedState {
    ShiftedState {
        g_plus: 0.5 * (-g.g_plus + SQRT_3 * g.g_minus),
        g_minus: 0.5 * (-SQRT_3 * g.g_plus - g.g_minus),
    }
}

/// The six elements of S₃ applied to `g`, as `[id, ρ, ρ², σ, σρ, σρ²]`.
pub fn s3_orbit(g: ShiftedState) -> [ShiftedState; 6] {
    let r1 = rotate_cone(g);
    let r2 = rotate_cone(r1);
    [g, r1, r2, g.reflect(), r1.reflect(), r2.reflect()]
}
