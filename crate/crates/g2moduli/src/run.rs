//! Batch drivers shared by the subcommands.

use anyhow::{Context, Result};
use g2moduli_core::classify::BoundaryProbe;
use g2moduli_core::{
    dr_dt, integrate, locate_boundary, metric_at_r, t_of_r, ClassificationRecord, Family, MetricSample, SeriesJet,
    Trajectory,
};
use rayon::prelude::*;

use crate::config::{Grid, RunConfig};
use crate::report::BoundaryReport;

pub fn probe(cfg: &RunConfig, t_max: f64) -> BoundaryProbe {
    BoundaryProbe {
        t0: cfg.integrator.t0,
        t_max,
        tol: cfg.integrator.tol,
        events: cfg.events.clone(),
        control: cfg.integrator.step,
        settings: cfg.fit,
    }
}

/// Metric samples on an evenly spaced `r` grid, with `dr/dt` alongside.
pub fn metric_table(r_min: f64, r_max: f64, samples: usize, quad_tol: f64) -> Result<(Vec<MetricSample>, Vec<f64>)> {
    let n = samples.max(2);
    let rows: Result<Vec<_>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let r = if i == n - 1 { r_max } else { r_min + (r_max - r_min) * i as f64 / (n - 1) as f64 };
            let t = t_of_r(r, quad_tol).with_context(|| format!("t(r) at r = {r}"))?;
            let m = metric_at_r(r)?.with_t(t);
            Ok((m, dr_dt(r)?))
        })
        .collect();
    Ok(rows?.into_iter().unzip())
}

pub fn integrate_member(cfg: &RunConfig, family: Family, parameter: f64) -> Result<Trajectory> {
    let i = &cfg.integrator;
    integrate(&SeriesJet::new(family, parameter), i.t0, i.t_max, i.tol, &cfg.events, &i.step)
        .with_context(|| format!("integrating {family} at {parameter}"))
}

/// Classifies every grid point in parallel; records come back sorted by
/// parameter.
pub fn scan(cfg: &RunConfig, family: Family, grid: &Grid) -> Result<Vec<ClassificationRecord>> {
    let p = probe(cfg, cfg.integrator.t_max);
    let mut recs = grid
        .points()
        .into_par_iter()
        .map(|x| p.run(family, x).with_context(|| format!("{family} at {x}")))
        .collect::<Result<Vec<_>>>()?;
    recs.sort_by(|a, b| a.parameter.total_cmp(&b.parameter));
    Ok(recs)
}

pub fn boundary(cfg: &RunConfig, family: Family, bracket: (f64, f64), tol: f64) -> Result<BoundaryReport> {
    let p = probe(cfg, cfg.boundary.t_max);
    let res = locate_boundary(family, bracket, tol, &p).with_context(|| format!("bisecting {family} on {bracket:?}"))?;
    Ok(BoundaryReport::new(&res, bracket, tol, p.t_max))
}
