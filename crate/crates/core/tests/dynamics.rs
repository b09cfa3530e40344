use g2moduli_core::instanton::nearest_critical_point;
use g2moduli_core::{
    check_region_invariance, integrate, r_of_t, rhs_autonomous, rhs_cone, rhs_full, metric_at_r, EventSpec,
    InstantonState, Region, SeriesJet, StepControl, Termination, Trajectory, CRITICAL_POINTS,
};

fn run_with(seed: SeriesJet, t_max: f64, tol: f64, events: &EventSpec, control: &StepControl) -> Trajectory {
    integrate(&seed, 1e-2, t_max, tol, events, control).unwrap()
}

fn run(gp: f64, t_max: f64) -> Trajectory {
    run_with(SeriesJet::tprime(gp), t_max, 1e-10, &EventSpec::default(), &StepControl::default())
}

#[test]
fn bounded_members_stay_in_r_zero() {
    for gp in [0.1, 0.5, 0.9] {
        let events = EventSpec { watchers: vec![Region::r_zero()], ..EventSpec::default() };
        let traj = run_with(SeriesJet::tprime(gp), 1e3, 1e-10, &events, &StepControl::default());
        let rep = &traj.region_reports[0];
        assert!(rep.entered_at.is_some_and(|t| t < 0.1), "gamma' = {gp}: {rep:?}");
        assert!(rep.holds(), "gamma' = {gp}: {rep:?}");
        let after: Vec<_> = traj.samples.iter().filter(|s| s.t >= rep.entered_at.unwrap()).collect();
        assert!(after.windows(2).all(|w| w[1].f_minus < w[0].f_minus), "f- decreasing in R0");
    }
}

#[test]
fn blow_up_members_stay_in_r_infinity() {
    for gp in [1.05, 1.2, 1.5] {
        let traj = run(gp, 1e3);
        assert!(matches!(traj.termination, Termination::Escaped { .. }));
        let rep = check_region_invariance(&traj, &Region::r_infinity(), 1e-9);
        assert!(rep.entered_at.is_some() && rep.holds(), "gamma' = {gp}: {rep:?}");
        let after: Vec<_> = traj.samples.iter().filter(|s| s.t >= rep.entered_at.unwrap()).collect();
        assert!(after.windows(2).all(|w| w[1].f_minus > w[0].f_minus), "f- increasing in R-infinity");
    }
}

#[test]
fn negative_members_stay_in_lower_half_plane() {
    for gp in [-0.5, -0.95, -1.2] {
        let traj = run(gp, 1e3);
        let rep = check_region_invariance(&traj, &Region::LowerHalf, 1e-9);
        assert_eq!(rep.entered_at, Some(traj.t0));
        assert!(rep.holds(), "{rep:?}");
    }
}

#[test]
fn reflection_of_trajectories() {
    let a = run(0.7, 1e3);
    let b = run(-0.7, 1e3).reflected();
    assert_eq!(a.samples, b.samples);
}

#[test]
fn coupled_radius_matches_quadrature() {
    let tol = 1e-10;
    let traj = run(0.5, 1e3);
    let worst = traj
        .samples
        .iter()
        .step_by(7)
        .map(|s| (s.r - r_of_t(s.t, 1e-15).unwrap()).abs() / s.r.max(1.0))
        .fold(0.0, f64::max);
    assert!(worst < 10.0 * tol, "relative r error {worst:e}");
}

#[test]
fn tolerance_refinement_converges() {
    let free = StepControl { max_step_ratio: 0.0, ..StepControl::default() };
    let ev = EventSpec::default();
    let reference = run_with(SeriesJet::tprime(0.5), 100.0, 1e-13, &ev, &free).final_state();
    let mut prev = f64::INFINITY;
    for tol in [1e-6, 1e-8, 1e-10] {
        let at = run_with(SeriesJet::tprime(0.5), 100.0, tol, &ev, &free).final_state();
        let halved = run_with(SeriesJet::tprime(0.5), 100.0, tol / 2.0, &ev, &free).final_state();
        let err = at.distance(&reference);
        assert!(err < 1e3 * tol, "tol {tol:e}: error {err:e}");
        assert!(at.distance(&halved) < 1e3 * tol);
        assert!(err < prev);
        prev = err;
    }
}

#[test]
fn cone_zero_set_is_the_four_critical_points() {
    let n = 401;
    let mut found = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let s = InstantonState::new(-0.5 + 2.0 * i as f64 / (n - 1) as f64, -1.5 + 3.0 * j as f64 / (n - 1) as f64);
            if rhs_autonomous(s).norm() < 0.05 {
                let (cp, d) = nearest_critical_point(&s);
                assert!(d < 0.05, "spurious near-zero at {s:?}");
                if !found.contains(&cp.kind) {
                    found.push(cp.kind);
                }
            }
        }
    }
    assert_eq!(found.len(), CRITICAL_POINTS.len());
    for cp in CRITICAL_POINTS.iter() {
        assert_eq!(rhs_cone(3.0, cp.state).unwrap(), InstantonState::new(0.0, 0.0));
    }
}

#[test]
fn full_system_approaches_cone_like_inverse_fourth_power_in_r() {
    let s = InstantonState::new(0.8, 0.3);
    let ratio = |t: f64| {
        let r = r_of_t(t, 1e-15).unwrap();
        let full = rhs_full(t, s, &metric_at_r(r).unwrap().with_t(t)).unwrap();
        (full - rhs_cone(r, s).unwrap()).norm() * t.powi(4)
    };
    let (a, b) = (ratio(100.0), ratio(1000.0));
    assert!((a / b - 1.0).abs() < 0.2, "{a} vs {b}");
}
