//! Local solution families at the singular orbit.
//!
//! Near `t = 0` every solution lies in one of two one-parameter families:
//!
//! - `T_γ`, on the trivial homogeneous bundle: `f₊ = γt² + O(t⁴)`, `f₋ = 0`.
//!   It is known in closed form along the whole of `r ∈ [1, ∞)`.
//! - `T′_γ′`, on the non-trivial bundle:
//!   `f₊ = 1 + (3/8)(γ′² − 1)t² + O(t⁴)`, `f₋ = γ′ + (3/4)(γ′² − 1)γ′t² + O(t⁴)`.
//!   Only `γ′ = 0` has a closed form.

use alloc::vec;
use alloc::vec::Vec;

use crate::instanton::InstantonState;
use crate::{Error, Result};

/// Largest seed time the truncated jets are trusted at.
pub const SERIES_VALIDITY_RADIUS: f64 = 0.05;

/// Default seed time for integrations.
pub const DEFAULT_SEED_TIME: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Family {
    /// Extends over the trivial bundle on the singular orbit.
    #[cfg_attr(feature = "serde", serde(rename = "tgamma"))]
    TGamma,
    /// Extends over the non-trivial bundle on the singular orbit.
    #[cfg_attr(feature = "serde", serde(rename = "tprime"))]
    TPrime,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::TGamma => "tgamma",
            Family::TPrime => "tprime",
        }
    }

    /// Parameter values whose member is a flat connection.
    pub fn is_flat_parameter(self, parameter: f64) -> bool {
        match self {
            Family::TGamma => parameter == 0.0,
            Family::TPrime => parameter.abs() == 1.0,
        }
    }
}

impl core::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tgamma" | "t_gamma" | "clarke" => Ok(Family::TGamma),
            "tprime" | "t_prime" => Ok(Family::TPrime),
            _ => Err(Error::InvalidArgument("family must be `tgamma` or `tprime`")),
        }
    }
}

impl core::fmt::Display for Family {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// Truncated Taylor expansion in `t` of a local solution.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SeriesJet {
    pub family: Family,
    pub parameter: f64,
    /// `(power, coefficient)` pairs for `f₊`.
    pub plus: Vec<(u32, f64)>,
    /// `(power, coefficient)` pairs for `f₋`.
    pub minus: Vec<(u32, f64)>,
    /// The first power not represented, i.e. the error is `O(t^order)`.
    pub truncation_order: u32,
}

impl SeriesJet {
    pub fn t_gamma(gamma: f64) -> Self {
        SeriesJet {
            family: Family::TGamma,
            parameter: gamma,
            plus: vec![(2, gamma)],
            minus: Vec::new(),
            truncation_order: 4,
        }
    }

    pub fn tprime(gamma_prime: f64) -> Self {
        let c = gamma_prime * gamma_prime - 1.0;
        SeriesJet {
            family: Family::TPrime,
            parameter: gamma_prime,
            plus: vec![(0, 1.0), (2, 0.375 * c)],
            minus: vec![(0, gamma_prime), (2, 0.75 * c * gamma_prime)],
            truncation_order: 4,
        }
    }

    pub fn new(family: Family, parameter: f64) -> Self {
        match family {
            Family::TGamma => Self::t_gamma(parameter),
            Family::TPrime => Self::tprime(parameter),
        }
    }

    /// Reflected jet; for `T′` this is the jet of `T′_{−γ′}`.
    pub fn reflect(&self) -> Self {
        let mut out = self.clone();
        for (_, c) in out.minus.iter_mut() {
            *c = -*c;
        }
        if self.family == Family::TPrime {
            out.parameter = -self.parameter;
        }
        out
    }

    pub fn evaluate(&self, t: f64) -> InstantonState {
        let sum = |terms: &[(u32, f64)]| {
            terms.iter().fold(0.0, |acc, &(p, c)| acc + c * power(t, p))
        };
        InstantonState::new(sum(&self.plus), sum(&self.minus))
    }
}

fn power(t: f64, p: u32) -> f64 {
    (0..p).fold(1.0, |acc, _| acc * t)
}

/// Result of [`clarke_closed_form`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClarkeState {
    pub state: InstantonState,
    /// Set for `γ < 0`: the solution breaks down at
    /// `r = √(1 + 3/(2|γ|))` and is only local.
    pub breaks_down: bool,
}

/// The explicit `T_γ` solution,
/// `f₊ = (2/3)(1 + (2γ(r−1) − 3r)/(2γr(r²−1) + 3r))`, `f₋ = 0`.
///
/// Evaluated as `(4γ/3)(r−1)(r²+r+1) / (r(2γ(r²−1) + 3))`, which is the
/// same rational function with the cancellation near `r = 1` removed.
pub fn clarke_closed_form(gamma: f64, r: f64) -> Result<ClarkeState> {
    if !(r >= 1.0) {
        return Err(Error::Domain { what: "radius r", value: r });
    }
    let num = 4.0 * gamma / 3.0 * (r - 1.0) * (r * r + r + 1.0);
    let den = r * (2.0 * gamma * (r * r - 1.0) + 3.0);
    Ok(ClarkeState { state: InstantonState::new(num / den, 0.0), breaks_down: gamma < 0.0 })
}

/// The explicit `T′_0` solution, `f₊ = (2/3)(1 + 1/(r(r+1)))`, `f₋ = 0`;
/// also the `γ → ∞` limit of [`clarke_closed_form`] away from `r = 1`.
pub fn lotay_oliveira_closed_form(r: f64) -> Result<InstantonState> {
    if !(r >= 1.0) {
        return Err(Error::Domain { what: "radius r", value: r });
    }
    Ok(InstantonState::new(2.0 / 3.0 * (1.0 + 1.0 / (r * (r + 1.0))), 0.0))
}

/// `T′_γ′` truncated jet evaluated at `t`.
pub fn tprime_series(gamma_prime: f64, t: f64) -> InstantonState {
    SeriesJet::tprime(gamma_prime).evaluate(t)
}

/// `T_γ` truncated jet evaluated at `t`.
pub fn t_gamma_series(gamma: f64, t: f64) -> InstantonState {
    SeriesJet::t_gamma(gamma).evaluate(t)
}
