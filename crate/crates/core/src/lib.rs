//! Numerics for SU(2)³-invariant G₂-instantons on the Bryant–Salamon metric
//! over the spinor bundle of S³.
//!
//! The crate is `no_std` (it needs `alloc` for trajectories) and holds the
//! whole algorithmic pipeline:
//!
//! - [`metric`]: closed-form metric coefficients `A(r)`, `B(r)`, the radial
//!   reparametrisation `t ↔ r` and residuals of the Hitchin-flow equations.
//! - [`instanton`]: right-hand sides of the full and conical instanton ODEs,
//!   their discrete symmetries and critical points.
//! - [`local`]: the two local families `T_γ`, `T′_γ′` at the singular orbit,
//!   as series jets and, where known, closed forms.
//! - [`trajectory`]: adaptive integration of the coupled `(r, f₊, f₋)` system
//!   with blow-up and convergence events.
//! - [`classify`]: long-time classification, decay fits, bisection on the
//!   moduli boundary and the Dirac index table.
//!
//! IO, configuration files and the command-line tool live in the companion
//! `g2moduli` crate.

#![no_std]
#![warn(missing_debug_implementations)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod classify;
pub mod diff;
mod error;
pub mod fit;
pub mod instanton;
pub mod local;
mod math;
pub mod metric;
pub mod ode;
pub mod quadrature;
pub mod trajectory;

pub use error::{Error, Result};

pub use classify::{
    classify, cone_line_images, cone_line_solution, fit_decay, index_lookup, locate_boundary,
    BoundaryProbe, ClassificationRecord, ClassifySettings, DecayFit, Outcome,
};
pub use instanton::{
    reflect, rhs_autonomous, rhs_autonomous_shifted, rhs_cone, rhs_full, rotate_cone,
    CriticalKind, CriticalPoint, InstantonState, ShiftedState, CRITICAL_POINTS,
};
pub use local::{
    clarke_closed_form, lotay_oliveira_closed_form, t_gamma_series, tprime_series, ClarkeState,
    Family, SeriesJet,
};
pub use metric::{dr_dt, metric_at_r, r_of_t, t_of_r, MetricSample};
pub use ode::StepControl;
pub use trajectory::{
    check_region_invariance, integrate, EventSpec, InvarianceReport, Region, Sample, Termination,
    Trajectory,
};
