//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Integrator settings come from the shipped default config; thresholds are
//! the acceptance tolerances themselves.

use std::process::ExitCode;
use std::time::Instant;

use g2moduli::config::{RunConfig, DEFAULT_TOML};
use g2moduli_core::classify::BoundaryProbe;
use g2moduli_core::fit::fit_line;
use g2moduli_core::instanton::s3_orbit;
use g2moduli_core::metric::{hitchin_residual, hitchin_residual_of, potential_residual, Cone};
use g2moduli_core::{
    clarke_closed_form, dr_dt, index_lookup, integrate, locate_boundary, lotay_oliveira_closed_form, metric_at_r,
    r_of_t, rhs_cone, rhs_full, rotate_cone, t_gamma_series, t_of_r, tprime_series, CriticalKind, Family,
    InstantonState, Outcome, SeriesJet, ShiftedState, CRITICAL_POINTS,
};

type Verdict = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Verdict + 'a>);

fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| (lo.ln() + (hi / lo).ln() * i as f64 / (n - 1) as f64).exp()).collect()
}

fn judge(ok: bool, msg: String) -> Verdict {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn config() -> RunConfig {
    RunConfig::from_toml(DEFAULT_TOML).expect("shipped config parses")
}

fn probe(cfg: &RunConfig, t_max: f64) -> BoundaryProbe {
    BoundaryProbe {
        t0: cfg.integrator.t0,
        t_max,
        tol: cfg.integrator.tol,
        events: cfg.events.clone(),
        control: cfg.integrator.step,
        settings: cfg.fit,
    }
}

/// Fourth-order central difference.
fn d5(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

fn ode_residual(f: impl Fn(f64) -> InstantonState, r: f64) -> Result<f64, String> {
    let h = 2e-3 * (r - 1.0).min(1.0);
    let speed = dr_dt(r).map_err(e)?;
    let lhs = InstantonState::new(d5(|x| f(x).f_plus, r, h) * speed, d5(|x| f(x).f_minus, r, h) * speed);
    let t = t_of_r(r, 1e-14).map_err(e)?;
    let rhs = rhs_full(t, f(r), &metric_at_r(r).map_err(e)?.with_t(t)).map_err(e)?;
    Ok((lhs - rhs).max_abs())
}

fn closed_form_residuals() -> Verdict {
    let rs = log_space(1.01, 100.0, 200);
    let mut worst = Vec::new();
    for g in [0.1, 1.0, 10.0] {
        let f = |r: f64| clarke_closed_form(g, r).map(|c| c.state).unwrap_or(InstantonState::new(f64::NAN, 0.0));
        let m = rs.iter().map(|&r| ode_residual(f, r)).collect::<Result<Vec<_>, _>>()?;
        worst.push((format!("clarke {g}"), m.into_iter().fold(0.0, f64::max)));
    }
    let f = |r: f64| lotay_oliveira_closed_form(r).unwrap_or(InstantonState::new(f64::NAN, 0.0));
    let m = rs.iter().map(|&r| ode_residual(f, r)).collect::<Result<Vec<_>, _>>()?;
    worst.push(("lotay-oliveira".into(), m.into_iter().fold(0.0, f64::max)));
    let ok = worst.iter().all(|(_, x)| *x < 1e-8);
    let msg = worst.iter().map(|(n, x)| format!("{n}: {x:.2e}")).collect::<Vec<_>>().join(", ");
    judge(ok, format!("max residual {msg} (< 1e-8)"))
}

fn trajectory_vs_oracle(cfg: &RunConfig) -> Verdict {
    let traj = integrate(&SeriesJet::tprime(0.0), 1e-2, 1e3, 1e-10, &cfg.events, &cfg.integrator.step).map_err(e)?;
    let mut sup = 0.0f64;
    for s in &traj.samples {
        let r = r_of_t(s.t, 1e-15).map_err(e)?;
        let exact = lotay_oliveira_closed_form(r).map_err(e)?;
        sup = sup.max(s.state().distance(&exact));
    }
    let t_end = traj.last().t;
    judge(sup < 1e-6 && t_end == 1e3, format!("sup error {sup:.2e} over {} samples to t = {t_end} (< 1e-6)", traj.samples.len()))
}

fn moduli_boundary(cfg: &RunConfig) -> Verdict {
    let bp = probe(cfg, cfg.boundary.t_max);
    let plus = locate_boundary(Family::TPrime, (0.5, 1.5), 1e-3, &bp).map_err(e)?;
    let minus = locate_boundary(Family::TPrime, (-1.5, -0.5), 1e-3, &bp).map_err(e)?;
    let scan = probe(cfg, cfg.integrator.t_max);
    let mut wrong = Vec::new();
    for i in 0..=60 {
        let g = ((-1.5 + 0.05 * i as f64) * 1e12).round() / 1e12;
        let rec = scan.run(Family::TPrime, g).map_err(e)?;
        let ok = match rec.outcome {
            Outcome::ConvergesToNK(_) => g.abs() < 1.0,
            Outcome::Flat { gauge } => {
                (g == 1.0 && gauge == CriticalKind::FlatPlusPlus) || (g == -1.0 && gauge == CriticalKind::FlatPlusMinus)
            }
            Outcome::BlowUp { .. } => g.abs() > 1.0,
            Outcome::Inconclusive { .. } => false,
        };
        if !ok {
            wrong.push(format!("{g}: {}", rec.outcome.label()));
        }
    }
    let ok = (plus.estimate - 1.0).abs() <= 1e-3 && (minus.estimate + 1.0).abs() <= 1e-3 && wrong.is_empty();
    judge(
        ok,
        format!(
            "boundary {:.6} and {:.6} (1 and -1 within 1e-3); 61-point grid misclassified: {}",
            plus.estimate,
            minus.estimate,
            if wrong.is_empty() { "none".to_owned() } else { wrong.join(", ") }
        ),
    )
}

fn clarke_boundary(cfg: &RunConfig) -> Verdict {
    let bp = probe(cfg, cfg.boundary.t_max);
    let b = locate_boundary(Family::TGamma, (-0.2, 0.2), 1e-3, &bp).map_err(e)?;
    let neg = probe(cfg, cfg.integrator.t_max).run(Family::TGamma, -0.05).map_err(e)?;
    let t_esc = match neg.outcome {
        Outcome::BlowUp { t_escape } => Some(t_escape),
        _ => None,
    };
    judge(
        b.estimate.abs() <= 1e-3 && t_esc.is_some_and(f64::is_finite),
        format!("gamma_crit {:.6} (0 within 1e-3); gamma = -0.05 escapes at t = {t_esc:?}", b.estimate),
    )
}

fn decay_rates(cfg: &RunConfig) -> Verdict {
    let p = probe(cfg, cfg.integrator.t_max);
    let mut members: Vec<(Family, f64)> = (1..40).map(|i| (Family::TPrime, ((-1.0 + 0.05 * i as f64) * 1e12).round() / 1e12)).collect();
    members.extend([0.1, 1.0, 10.0].map(|g| (Family::TGamma, g)));
    let (mut lo, mut hi, mut clo, mut chi) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    let mut bad = Vec::new();
    for (fam, g) in members.iter().copied() {
        let rec = p.run(fam, g).map_err(e)?;
        let Some(fit) = rec.outcome.decay() else {
            bad.push(format!("{fam} {g}: {}", rec.outcome.label()));
            continue;
        };
        for x in [Some(fit.exponent_plus), fit.exponent_minus].into_iter().flatten() {
            lo = lo.min(x);
            hi = hi.max(x);
        }
        clo = clo.min(fit.connection_rate);
        chi = chi.max(fit.connection_rate);
    }
    let ok = bad.is_empty() && lo >= -2.05 && hi <= -1.95 && (clo + 3.0).abs() <= 0.05 && (chi + 3.0).abs() <= 0.05;
    judge(
        ok,
        format!(
            "{} runs: exponents in [{lo:.4}, {hi:.4}] (within [-2.05, -1.95]), connection rate in [{clo:.4}, {chi:.4}] (-3 +- 0.05){}",
            members.len(),
            if bad.is_empty() { String::new() } else { format!("; not converging: {}", bad.join(", ")) }
        ),
    )
}

fn full_vs_cone() -> Verdict {
    let ts = log_space(10.0, 1e3, 41);
    let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let mut slopes = Vec::new();
    for s in [
        InstantonState::new(0.9, 0.4),
        InstantonState::new(0.5, -0.3),
        InstantonState::new(1.2, 0.7),
        InstantonState::new(2.0 / 3.0, 0.1),
    ] {
        let mut ys = Vec::new();
        for &t in &ts {
            let r = r_of_t(t, 1e-15).map_err(e)?;
            let full = rhs_full(t, s, &metric_at_r(r).map_err(e)?.with_t(t)).map_err(e)?;
            let cone = rhs_cone(r, s).map_err(e)?;
            ys.push((full - cone).norm().ln());
        }
        slopes.push(fit_line(&xs, &ys).ok_or("fit failed")?.slope);
    }
    let worst = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    judge(worst <= -3.9, format!("log-log slopes {slopes:.4?} (<= -3.9)"))
}

fn symmetry(cfg: &RunConfig) -> Verdict {
    let i = &cfg.integrator;
    let mut bitwise = true;
    for g in [0.25, 0.5, 0.9, 1.2, 1.5] {
        let a = integrate(&SeriesJet::tprime(g), i.t0, 1e3, i.tol, &cfg.events, &i.step).map_err(e)?;
        let b = integrate(&SeriesJet::tprime(-g), i.t0, 1e3, i.tol, &cfg.events, &i.step).map_err(e)?;
        bitwise &= a.samples.len() == b.samples.len()
            && a.samples.iter().zip(&b.samples).all(|(p, q)| {
                p.t.to_bits() == q.t.to_bits()
                    && p.r.to_bits() == q.r.to_bits()
                    && p.f_plus.to_bits() == q.f_plus.to_bits()
                    && p.f_minus.to_bits() == (-q.f_minus).to_bits()
            });
    }
    let mut rot = 0.0f64;
    for i in 0..=20 {
        for j in 0..=20 {
            let g = ShiftedState::new(-2.0 + 0.2 * i as f64, -2.0 + 0.2 * j as f64);
            rot = rot.max(rotate_cone(rotate_cone(rotate_cone(g))).distance(&g));
        }
    }
    let flats: Vec<ShiftedState> =
        CRITICAL_POINTS.iter().filter(|c| c.kind.is_flat()).map(|c| c.state.to_shifted()).collect();
    let orbit = s3_orbit(ShiftedState::new(-2.0 / 3.0, 0.0));
    let nearest = |g: &ShiftedState, set: &[ShiftedState]| set.iter().map(|f| f.distance(g)).fold(f64::INFINITY, f64::min);
    let orbit_err = orbit.iter().map(|g| nearest(g, &flats)).chain(flats.iter().map(|f| nearest(f, &orbit))).fold(0.0, f64::max);
    judge(
        bitwise && rot < 1e-14 && orbit_err < 1e-14,
        format!("reflected runs bitwise equal: {bitwise}; rotation^3 error {rot:.2e}; S3 orbit error {orbit_err:.2e} (< 1e-14)"),
    )
}

fn metric_suite() -> Verdict {
    let rs = log_space(1.01, 100.0, 200);
    let (mut flow, mut cone, mut pot, mut dp) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for &r in &rs {
        let (a, b) = hitchin_residual(&metric_at_r(r).map_err(e)?, 1e-5 * (r - 1.0).min(1.0)).map_err(e)?;
        flow = flow.max(a.abs()).max(b.abs());
        let (a, b) = hitchin_residual_of(&Cone, r, 0.25 * r);
        cone = cone.max(a.abs()).max(b.abs());
        let (rel, d) = potential_residual(r, 1e-2 * (r - 1.0) / r).map_err(e)?;
        pot = pot.max(rel);
        dp = dp.max(d.abs());
    }
    judge(
        flow < 1e-8 && cone < 1e-14 && pot < 1e-8 && dp < 1e-8,
        format!("hitchin flow {flow:.2e}, cone {cone:.2e} (rounding), co-closed {pot:.2e}, |dp/dr| {dp:.2e} (< 1e-8)"),
    )
}

fn order_of_contact() -> Verdict {
    let ts: [f64; 4] = [4e-2, 2e-2, 1e-2, 5e-3];
    let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let slope = |err: &dyn Fn(f64) -> Result<f64, String>| -> Result<f64, String> {
        let ys = ts.iter().map(|&t| err(t).map(f64::ln)).collect::<Result<Vec<_>, _>>()?;
        Ok(fit_line(&xs, &ys).ok_or("fit failed")?.slope)
    };
    let r = |t: f64| r_of_t(t, 1e-15).map_err(e);
    let tp = slope(&|t| Ok(tprime_series(0.0, t).distance(&lotay_oliveira_closed_form(r(t)?).map_err(e)?)))?;
    let mut slopes = vec![("tprime 0".to_owned(), tp)];
    for g in [0.1, 1.0, 10.0] {
        let s = slope(&|t| Ok(t_gamma_series(g, t).distance(&clarke_closed_form(g, r(t)?).map_err(e)?.state)))?;
        slopes.push((format!("tgamma {g}"), s));
    }
    let ok = slopes.iter().all(|(_, s)| *s >= 3.8);
    let msg = slopes.iter().map(|(n, s)| format!("{n}: {s:.4}")).collect::<Vec<_>>().join(", ");
    judge(ok, format!("t-halving slopes {msg} (>= 3.8)"))
}

fn index_table() -> Verdict {
    let plus = log_space(1e-6, 2.0 - 1e-9, 50).iter().all(|&x| index_lookup(-x).ok() == Some(1));
    let minus = (1..100).map(|k| -2.0 - 0.02 * k as f64).all(|w| index_lookup(w).ok() == Some(-1));
    let edges = [-2.0, 0.0, -4.0].iter().all(|&w| index_lookup(w).is_err());
    judge(plus && minus && edges, format!("+1 on (-2, 0): {plus}; -1 on (-4, -2): {minus}; errors at -2, 0, -4: {edges}"))
}

fn main() -> ExitCode {
    let cfg = config();
    let criteria: [Criterion; 10] = [
        ("closed-form oracle residuals", Box::new(closed_form_residuals)),
        ("trajectory vs closed form", Box::new(|| trajectory_vs_oracle(&cfg))),
        ("T' moduli boundary and trichotomy", Box::new(|| moduli_boundary(&cfg))),
        ("T_gamma boundary and breakdown", Box::new(|| clarke_boundary(&cfg))),
        ("decay rates", Box::new(|| decay_rates(&cfg))),
        ("full vs cone asymptotics", Box::new(full_vs_cone)),
        ("symmetry suite", Box::new(|| symmetry(&cfg))),
        ("metric suite", Box::new(metric_suite)),
        ("series order of contact", Box::new(order_of_contact)),
        ("index lookup", Box::new(index_table)),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = check();
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(msg) => println!("PASS  {:>2}  {name}: {msg} [{secs:.2}s]", k + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL  {:>2}  {name}: {msg} [{secs:.2}s]", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
