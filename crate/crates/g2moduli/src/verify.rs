//! The `verify` check suite.
//!
//! Each check compares one measured quantity against a threshold from
//! [`VerifyConfig`](crate::config::VerifyConfig). The cone right-hand side is
//! injected through [`Model`] so the suite can be run against a mutated
//! system.

use std::fmt;

use g2moduli_core::diff::central5;
use g2moduli_core::fit::fit_line;
use g2moduli_core::instanton::s3_orbit;
use g2moduli_core::metric::{hitchin_residual, hitchin_residual_of, potential_residual, Cone, DEFAULT_FD_STEP};
use g2moduli_core::{
    clarke_closed_form, cone_line_images, dr_dt, index_lookup, integrate, lotay_oliveira_closed_form, metric_at_r,
    r_of_t, reflect, rhs_full, rotate_cone, t_gamma_series, t_of_r, tprime_series, Family, InstantonState, Outcome,
    SeriesJet, ShiftedState, CRITICAL_POINTS,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::run;

pub type ConeRhs = fn(f64, InstantonState) -> g2moduli_core::Result<InstantonState>;

/// The pieces of the system the suite can be pointed at.
#[derive(Debug, Clone, Copy)]
pub struct Model {
    pub rhs_cone: ConeRhs,
}

impl Default for Model {
    fn default() -> Self {
        Model { rhs_cone: g2moduli_core::rhs_cone }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Comparison {
    #[serde(rename = "<")]
    Below,
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "==")]
    Equal,
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Comparison::Below => "<",
            Comparison::AtMost => "<=",
            Comparison::AtLeast => ">=",
            Comparison::Equal => "==",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub comparison: Comparison,
    pub threshold: f64,
    pub detail: String,
}

impl Check {
    fn new(name: &str, value: f64, comparison: Comparison, threshold: f64, detail: impl Into<String>) -> Self {
        let passed = match comparison {
            Comparison::Below => value < threshold,
            Comparison::AtMost => value <= threshold,
            Comparison::AtLeast => value >= threshold,
            Comparison::Equal => value == threshold,
        };
        Check { name: name.to_owned(), passed, value, comparison, threshold, detail: detail.into() }
    }

    fn failed(name: &str, detail: impl Into<String>) -> Self {
        Check {
            name: name.to_owned(),
            passed: false,
            value: f64::NAN,
            comparison: Comparison::Equal,
            threshold: 0.0,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag}  {:<32} {:>12.4e} {} {:<10.3e}", self.name, self.value, self.comparison, self.threshold)?;
        if !self.detail.is_empty() {
            write!(f, "  {}", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

fn max_of(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, |m, x| if x.is_nan() || m.is_nan() { f64::NAN } else { m.max(x) })
}

/// Sup-norm residual of `df/dt = rhs_full` for a closed form given in `r`.
pub fn closed_form_residual(f: impl Fn(f64) -> InstantonState, r: f64) -> g2moduli_core::Result<f64> {
    let h = 2e-3 * (r - 1.0).min(1.0);
    let speed = dr_dt(r)?;
    let dfp = central5(|x| f(x).f_plus, r, h) * speed;
    let dfm = central5(|x| f(x).f_minus, r, h) * speed;
    let m = metric_at_r(r)?;
    let rhs = rhs_full(t_of_r(r, 1e-14)?, f(r), &m)?;
    Ok((dfp - rhs.f_plus).abs().max((dfm - rhs.f_minus).abs()))
}

fn metric_checks(cfg: &RunConfig, out: &mut Vec<Check>) {
    let v = &cfg.verify;
    let rs = log_space(v.residual_r[0], v.residual_r[1], v.residual_points);
    let mut flow = 0.0f64;
    let mut pot = 0.0f64;
    let mut dp = 0.0f64;
    let mut ordered = true;
    let mut monotone = true;
    let mut prev_t = 0.0;
    for &r in &rs {
        let sample = match metric_at_r(r) {
            Ok(s) => s,
            Err(e) => return out.push(Check::failed("metric.hitchin_flow", e.to_string())),
        };
        let step = DEFAULT_FD_STEP * (r - 1.0).min(1.0);
        match (hitchin_residual(&sample, step), potential_residual(r, 1e-2 * (r - 1.0) / r), t_of_r(r, cfg.metric.quad_tol)) {
            (Ok((ra, rb)), Ok((rel, d)), Ok(t)) => {
                flow = max_of([flow, ra.abs(), rb.abs()]);
                pot = max_of([pot, rel]);
                dp = max_of([dp, d.abs()]);
                ordered &= 3.0 * sample.a * sample.a < sample.b * sample.b;
                monotone &= t > prev_t;
                prev_t = t;
            }
            (a, b, c) => {
                let msg = format!("{:?} {:?} {:?}", a.err(), b.err(), c.err());
                return out.push(Check::failed("metric.hitchin_flow", msg));
            }
        }
    }
    let tol = v.residual_tol;
    out.push(Check::new("metric.hitchin_flow", flow, Comparison::Below, tol, "max over sampled r"));
    let cone = max_of(rs.iter().map(|&t| {
        let (a, b) = hitchin_residual_of(&Cone, t, 0.25 * t);
        a.abs().max(b.abs())
    }));
    out.push(Check::new("metric.cone_hitchin_flow", cone, Comparison::Below, 1e-14, "rounding only"));
    out.push(Check::new("metric.co_closed", pot, Comparison::Below, tol, "relative residual"));
    out.push(Check::new("metric.class_constant", dp, Comparison::Below, tol, "|dp/dr|"));
    out.push(Check::new("metric.3a2_below_b2", f64::from(u8::from(ordered)), Comparison::Equal, 1.0, ""));
    out.push(Check::new("metric.t_monotone", f64::from(u8::from(monotone)), Comparison::Equal, 1.0, ""));
}

fn closed_form_checks(cfg: &RunConfig, out: &mut Vec<Check>) {
    let v = &cfg.verify;
    let rs = log_space(v.residual_r[0], v.residual_r[1], v.residual_points);
    for &g in &v.clarke_gammas {
        let f = |r: f64| clarke_closed_form(g, r).map(|c| c.state).unwrap_or(InstantonState::new(f64::NAN, f64::NAN));
        let res: Result<Vec<f64>, _> = rs.iter().map(|&r| closed_form_residual(f, r)).collect();
        let name = format!("local.clarke_residual[{g}]");
        out.push(match res {
            Ok(xs) => Check::new(&name, max_of(xs), Comparison::Below, v.residual_tol, ""),
            Err(e) => Check::failed(&name, e.to_string()),
        });
    }
    let f = |r: f64| lotay_oliveira_closed_form(r).unwrap_or(InstantonState::new(f64::NAN, f64::NAN));
    let res: Result<Vec<f64>, _> = rs.iter().map(|&r| closed_form_residual(f, r)).collect();
    out.push(match res {
        Ok(xs) => Check::new("local.lotay_oliveira_residual", max_of(xs), Comparison::Below, v.residual_tol, ""),
        Err(e) => Check::failed("local.lotay_oliveira_residual", e.to_string()),
    });
}

fn contact_slope(series: impl Fn(f64) -> InstantonState, exact: impl Fn(f64) -> InstantonState, ts: &[f64]) -> f64 {
    let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = ts.iter().map(|&t| series(t).distance(&exact(t)).ln()).collect();
    fit_line(&xs, &ys).map_or(f64::NAN, |l| l.slope)
}

fn series_checks(cfg: &RunConfig, out: &mut Vec<Check>) {
    let v = &cfg.verify;
    let r = |t: f64| r_of_t(t, 1e-15).unwrap_or(f64::NAN);
    let nan = InstantonState::new(f64::NAN, f64::NAN);
    let tp = contact_slope(
        |t| tprime_series(0.0, t),
        |t| lotay_oliveira_closed_form(r(t)).unwrap_or(nan),
        &v.contact_times,
    );
    out.push(Check::new("local.contact_order_tprime", tp, Comparison::AtLeast, v.contact_slope_min, "vs closed form"));
    let tg = contact_slope(
        |t| t_gamma_series(1.0, t),
        |t| clarke_closed_form(1.0, r(t)).map_or(nan, |c| c.state),
        &v.contact_times,
    );
    out.push(Check::new("local.contact_order_tgamma", tg, Comparison::AtLeast, v.contact_slope_min, "gamma = 1"));
}

fn oracle_check(cfg: &RunConfig, out: &mut Vec<Check>) {
    let i = &cfg.integrator;
    let v = &cfg.verify;
    let traj = match integrate(&SeriesJet::tprime(0.0), i.t0, v.oracle_t_max, i.tol, &cfg.events, &i.step) {
        Ok(t) => t,
        Err(e) => return out.push(Check::failed("trajectory.tprime0_vs_closed_form", e.to_string())),
    };
    let err = max_of(traj.samples.iter().map(|s| match lotay_oliveira_closed_form(s.r) {
        Ok(e) => s.state().distance(&e),
        Err(_) => f64::NAN,
    }));
    let detail = format!("{} samples to t = {:e}", traj.samples.len(), traj.last().t);
    out.push(Check::new("trajectory.tprime0_vs_closed_form", err, Comparison::Below, v.oracle_tol, detail));
}

fn cone_checks(cfg: &RunConfig, model: &Model, out: &mut Vec<Check>) {
    let v = &cfg.verify;
    let ts = log_space(1e-2, 1e2, 101);
    let mut line = 0.0f64;
    for &t in &ts {
        match cone_line_images(t) {
            Ok(imgs) => {
                for (s, ds) in imgs {
                    let res = (model.rhs_cone)(t, s).map_or(f64::NAN, |d| d.distance(&ds));
                    line = max_of([line, res]);
                }
            }
            Err(_) => line = f64::NAN,
        }
    }
    out.push(Check::new("cone.line_solution_residual", line, Comparison::Below, 1e-10, "three S3 images"));

    let zero = max_of(CRITICAL_POINTS.iter().map(|cp| (model.rhs_cone)(1.0, cp.state).map_or(f64::NAN, |d| d.norm())));
    out.push(Check::new("cone.critical_points", zero, Comparison::Below, 1e-15, "four zeros"));

    let mut worst = f64::NEG_INFINITY;
    let mut detail = Vec::new();
    let tgrid = log_space(v.cone_t[0], v.cone_t[1], v.cone_points);
    for &[fp, fm] in &v.cone_states {
        let s = InstantonState::new(fp, fm);
        let (xs, ys): (Vec<f64>, Vec<f64>) = tgrid
            .iter()
            .map(|&t| {
                let d = r_of_t(t, 1e-15).and_then(|r| {
                    let full = rhs_full(t, s, &metric_at_r(r)?.with_t(t))?;
                    Ok((full - (model.rhs_cone)(r, s)?).norm())
                });
                (t.ln(), d.map_or(f64::NAN, f64::ln))
            })
            .unzip();
        let slope = fit_line(&xs, &ys).map_or(f64::NAN, |l| l.slope);
        worst = if slope.is_nan() || worst.is_nan() { f64::NAN } else { worst.max(slope) };
        detail.push(format!("({fp}, {fm}): {slope:.4}"));
    }
    out.push(Check::new("cone.full_vs_cone_slope", worst, Comparison::AtMost, v.cone_slope_max, detail.join(", ")));
}

fn symmetry_checks(cfg: &RunConfig, model: &Model, out: &mut Vec<Check>) {
    let v = &cfg.verify;
    let ax = crate::portrait::axis(0.0, 1.5, 13);
    let mut exact = true;
    let mut rot = 0.0f64;
    let mut equiv = 0.0f64;
    let shifted_rate = |d: InstantonState| ShiftedState::new(d.f_plus, d.f_minus / 3f64.sqrt());
    for &x in &ax {
        for &y in &ax {
            let s = InstantonState::new(x + 2.0 / 3.0, y);
            let m = metric_at_r(2.0).map(|m| m.with_t(1.5));
            if let Ok(m) = m {
                exact &= rhs_full(1.5, reflect(s), &m).ok() == rhs_full(1.5, s, &m).ok().map(reflect);
            }
            exact &= (model.rhs_cone)(1.0, reflect(s)).ok() == (model.rhs_cone)(1.0, s).ok().map(reflect);
            let g = ShiftedState::new(x, y);
            let back = rotate_cone(rotate_cone(rotate_cone(g)));
            rot = max_of([rot, back.distance(&g)]);
            let lhs = (model.rhs_cone)(1.0, rotate_cone(g).to_unshifted()).map(shifted_rate);
            let rhs = (model.rhs_cone)(1.0, g.to_unshifted()).map(|d| rotate_cone(shifted_rate(d)));
            let e = match (lhs, rhs) {
                (Ok(a), Ok(b)) => a.distance(&b) / (1.0 + b.g_plus.hypot(b.g_minus)),
                _ => f64::NAN,
            };
            equiv = max_of([equiv, e]);
        }
    }
    out.push(Check::new("symmetry.reflect_rhs_bitwise", f64::from(u8::from(exact)), Comparison::Equal, 1.0, ""));
    out.push(Check::new("symmetry.rotation_order_3", rot, Comparison::Below, v.symmetry_tol, ""));
    out.push(Check::new("symmetry.cone_rotation_equivariance", equiv, Comparison::Below, 1e-13, "relative"));

    let orbit = s3_orbit(ShiftedState::new(-2.0 / 3.0, 0.0));
    let flats: Vec<ShiftedState> =
        CRITICAL_POINTS.iter().filter(|c| c.kind.is_flat()).map(|c| c.state.to_shifted()).collect();
    let orbit_err = max_of(orbit.iter().map(|g| flats.iter().map(|f| f.distance(g)).fold(f64::INFINITY, f64::min)));
    let covered = max_of(flats.iter().map(|f| orbit.iter().map(|g| f.distance(g)).fold(f64::INFINITY, f64::min)));
    out.push(Check::new("symmetry.s3_orbit_flat_points", orbit_err.max(covered), Comparison::Below, v.symmetry_tol, ""));

    let i = &cfg.integrator;
    let bitwise = [0.5, 1.2].iter().all(|&g| {
        let a = integrate(&SeriesJet::tprime(g), i.t0, 1e2, i.tol, &cfg.events, &i.step);
        let b = integrate(&SeriesJet::tprime(-g), i.t0, 1e2, i.tol, &cfg.events, &i.step);
        match (a, b) {
            (Ok(a), Ok(b)) => {
                a.samples.len() == b.samples.len()
                    && a.samples.iter().zip(&b.samples).all(|(p, q)| {
                        p.t.to_bits() == q.t.to_bits()
                            && p.f_plus.to_bits() == q.f_plus.to_bits()
                            && p.f_minus.to_bits() == (-q.f_minus).to_bits()
                    })
            }
            _ => false,
        }
    });
    out.push(Check::new("symmetry.reflect_integration_bitwise", f64::from(u8::from(bitwise)), Comparison::Equal, 1.0, ""));
}

fn classification_checks(cfg: &RunConfig, out: &mut Vec<Check>) {
    let v = &cfg.verify;
    let recs = match run::scan(cfg, Family::TPrime, &cfg.scan.tprime) {
        Ok(r) => r,
        Err(e) => return out.push(Check::failed("classify.tprime_trichotomy", e.to_string())),
    };
    let wrong: Vec<String> = recs
        .iter()
        .filter(|rec| {
            let g = rec.parameter;
            let ok = match rec.outcome {
                Outcome::ConvergesToNK(_) => g.abs() < 1.0,
                Outcome::Flat { .. } => g.abs() == 1.0,
                Outcome::BlowUp { .. } => g.abs() > 1.0,
                Outcome::Inconclusive { .. } => false,
            };
            !ok
        })
        .map(|rec| format!("{}: {}", rec.parameter, rec.outcome.label()))
        .collect();
    let detail = if wrong.is_empty() { format!("{} members", recs.len()) } else { wrong.join(", ") };
    out.push(Check::new("classify.tprime_trichotomy", wrong.len() as f64, Comparison::Equal, 0.0, detail));

    let mut fits: Vec<(String, g2moduli_core::DecayFit)> =
        recs.iter().filter_map(|r| r.outcome.decay().map(|f| (format!("T' {}", r.parameter), *f))).collect();
    let p = run::probe(cfg, cfg.integrator.t_max);
    for &g in &v.decay_gammas {
        match p.run(Family::TGamma, g) {
            Ok(rec) => match rec.outcome.decay() {
                Some(f) => fits.push((format!("T_gamma {g}"), *f)),
                None => return out.push(Check::failed("decay.exponent", format!("T_gamma {g}: {}", rec.outcome.label()))),
            },
            Err(e) => return out.push(Check::failed("decay.exponent", e.to_string())),
        }
    }
    let [lo, hi] = v.exponent_band;
    let dev = |x: f64, lo: f64, hi: f64| (lo - x).max(x - hi);
    let mut worst_exp = f64::NEG_INFINITY;
    let mut worst_conn = f64::NEG_INFINITY;
    for (_, f) in &fits {
        for e in [Some(f.exponent_plus), f.exponent_minus].into_iter().flatten() {
            worst_exp = worst_exp.max(dev(e, lo, hi));
        }
        worst_conn = worst_conn.max(dev(f.connection_rate, v.connection_band[0], v.connection_band[1]));
    }
    let n = format!("{} converging runs, band [{lo}, {hi}]", fits.len());
    out.push(Check::new("decay.exponent", worst_exp, Comparison::AtMost, 0.0, n));
    let n = format!("band [{}, {}]", v.connection_band[0], v.connection_band[1]);
    out.push(Check::new("decay.connection_rate", worst_conn, Comparison::AtMost, 0.0, n));

    let t = v.boundary_tol;
    let (a, b) = cfg.boundary.bracket(Family::TPrime);
    for (name, bracket, target) in [
        ("classify.tprime_boundary_plus", (a, b), 1.0),
        ("classify.tprime_boundary_minus", (-b, -a), -1.0),
    ] {
        out.push(match run::boundary(cfg, Family::TPrime, bracket, cfg.boundary.tol) {
            Ok(rep) => Check::new(name, (rep.estimate - target).abs(), Comparison::AtMost, t, format!("estimate {}", rep.estimate)),
            Err(e) => Check::failed(name, e.to_string()),
        });
    }
    out.push(match run::boundary(cfg, Family::TGamma, cfg.boundary.bracket(Family::TGamma), cfg.boundary.tol) {
        Ok(rep) => Check::new("classify.tgamma_boundary", rep.estimate.abs(), Comparison::AtMost, t, format!("estimate {}", rep.estimate)),
        Err(e) => Check::failed("classify.tgamma_boundary", e.to_string()),
    });
    out.push(match p.run(Family::TGamma, -0.05) {
        Ok(rec) => {
            let label = rec.outcome.label();
            Check::new("classify.tgamma_negative_blows_up", f64::from(u8::from(rec.outcome.is_blow_up())), Comparison::Equal, 1.0, label)
        }
        Err(e) => Check::failed("classify.tgamma_negative_blows_up", e.to_string()),
    });
}

fn index_checks(out: &mut Vec<Check>) {
    let plus = [-1.99, -1.0, -0.01].iter().all(|&w| index_lookup(w).ok() == Some(1));
    let minus = [-3.99, -3.0, -2.01].iter().all(|&w| index_lookup(w).ok() == Some(-1));
    let edge = index_lookup(-2.0).is_err();
    let ok = plus && minus && edge;
    out.push(Check::new("classify.index_table", f64::from(u8::from(ok)), Comparison::Equal, 1.0, ""));
}

/// Runs every check against `model`.
pub fn run(cfg: &RunConfig, model: &Model) -> VerifyReport {
    let mut checks = Vec::new();
    metric_checks(cfg, &mut checks);
    closed_form_checks(cfg, &mut checks);
    series_checks(cfg, &mut checks);
    oracle_check(cfg, &mut checks);
    cone_checks(cfg, model, &mut checks);
    symmetry_checks(cfg, model, &mut checks);
    classification_checks(cfg, &mut checks);
    index_checks(&mut checks);
    VerifyReport { passed: checks.iter().all(|c| c.passed), checks }
}
