use core::fmt;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Radius below the singular orbit `r = 1`, or another argument outside
    /// the domain of a closed form.
    Domain { what: &'static str, value: f64 },
    /// A right-hand side was evaluated on the singular orbit (`A = 0` or `t = 0`).
    SingularPoint { t: f64 },
    /// Invalid tolerance, horizon or seed time.
    InvalidArgument(&'static str),
    /// Decay fit window has too few samples or spans less than a decade.
    TailTooShort { samples: usize, span: f64 },
    /// Bisection bracket whose endpoints do not classify differently.
    BracketNotStraddling { lo: f64, hi: f64 },
    /// Sobolev weight at the critical value or outside the tabulated range.
    UnsupportedWeight(f64),
    /// Quadrature or root iteration failed to reach its tolerance.
    NoConvergence(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { what, value } => write!(f, "{what} out of domain: {value}"),
            Error::SingularPoint { t } => {
                write!(f, "right-hand side is singular at t = {t}; seed from series instead")
            }
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::TailTooShort { samples, span } => write!(
                f,
                "fit tail too short: {samples} samples spanning a factor {span} in t (need >= 50 and >= 10)"
            ),
            Error::BracketNotStraddling { lo, hi } => {
                write!(f, "bracket [{lo}, {hi}] does not straddle a blow-up boundary")
            }
            Error::UnsupportedWeight(w) => {
                if *w == -2.0 {
                    write!(f, "weight -2 is the critical weight; index undefined")
                } else {
                    write!(f, "weight {w} outside the tabulated range (-4, 0)")
                }
            }
            Error::NoConvergence(what) => write!(f, "{what} did not converge"),
        }
    }
}

impl core::error::Error for Error {}
