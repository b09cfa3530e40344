//! Phase portrait of the autonomous cone system and the `T′` fan.
//!
//! The portrait lives in shifted coordinates `(g₊, g₋) = (f₊ − 2/3, f₋/√3)`
//! where the S₃ symmetry acts by isometries; the fan is drawn in `(f₊, f₋)`.

use std::fmt::Write as _;

use anyhow::Result;
use g2moduli_core::{
    rhs_autonomous_shifted, CriticalKind, Family, InstantonState, Region, ShiftedState, Trajectory, CRITICAL_POINTS,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{PortraitConfig, RunConfig};
use crate::report::{write_table, write_text};
use crate::run::integrate_member;

pub const VECTOR_HEADER: [&str; 4] = ["g_plus", "g_minus", "dg_plus", "dg_minus"];
pub const STREAMLINE_HEADER: [&str; 3] = ["line", "g_plus", "g_minus"];
pub const FAN_HEADER: [&str; 5] = ["gamma_prime", "t", "r", "f_plus", "f_minus"];

/// `n` points symmetric about `c`, with both ends exactly `c ± w`.
pub fn axis(c: f64, w: f64, n: usize) -> Vec<f64> {
    let m = (n - 1) as f64;
    (0..n).map(|j| c + w * (2.0 * j as f64 - m) / m).collect()
}

/// Rows `[g₊, g₋, ġ₊, ġ₋]`, `g₊` outer and `g₋` inner.
pub fn vector_grid(p: &PortraitConfig) -> Vec<[f64; 4]> {
    let xs = axis(p.center[0], p.half_width, p.grid);
    let ys = axis(p.center[1], p.half_width, p.grid);
    let mut rows = Vec::with_capacity(xs.len() * ys.len());
    for &x in &xs {
        for &y in &ys {
            let d = rhs_autonomous_shifted(ShiftedState::new(x, y));
            rows.push([x, y, d.g_plus, d.g_minus]);
        }
    }
    rows
}

fn rk4(g: ShiftedState, h: f64) -> ShiftedState {
    let f = rhs_autonomous_shifted;
    let add = |a: ShiftedState, b: ShiftedState, s: f64| ShiftedState::new(a.g_plus + s * b.g_plus, a.g_minus + s * b.g_minus);
    let k1 = f(g);
    let k2 = f(add(g, k1, 0.5 * h));
    let k3 = f(add(g, k2, 0.5 * h));
    let k4 = f(add(g, k3, h));
    ShiftedState::new(
        g.g_plus + h / 6.0 * (k1.g_plus + 2.0 * k2.g_plus + 2.0 * k3.g_plus + k4.g_plus),
        g.g_minus + h / 6.0 * (k1.g_minus + 2.0 * k2.g_minus + 2.0 * k3.g_minus + k4.g_minus),
    )
}

fn inside(p: &PortraitConfig, g: &ShiftedState, margin: f64) -> bool {
    let w = p.half_width * margin;
    g.g_plus.is_finite()
        && g.g_minus.is_finite()
        && (g.g_plus - p.center[0]).abs() <= w
        && (g.g_minus - p.center[1]).abs() <= w
}

fn trace(p: &PortraitConfig, seed: ShiftedState, h: f64) -> Vec<ShiftedState> {
    let mut pts = vec![seed];
    let mut g = seed;
    for _ in 0..p.streamline_steps {
        g = rk4(g, h);
        if !inside(p, &g, 1.25) {
            break;
        }
        pts.push(g);
    }
    pts
}

/// One polyline per seed, traced backward then forward with fixed-step RK4.
pub fn streamlines(p: &PortraitConfig) -> Vec<Vec<ShiftedState>> {
    let n = p.seeds as f64;
    let off = |c: f64, j: usize| c + p.half_width * (2.0 * j as f64 + 1.0 - n) / n;
    let seeds: Vec<_> = (0..p.seeds)
        .flat_map(|i| (0..p.seeds).map(move |j| (i, j)))
        .map(|(i, j)| ShiftedState::new(off(p.center[0], i), off(p.center[1], j)))
        .collect();
    seeds
        .into_par_iter()
        .map(|s| {
            let mut line = trace(p, s, -p.streamline_dt);
            line.reverse();
            line.extend(trace(p, s, p.streamline_dt).into_iter().skip(1));
            line
        })
        .collect()
}

struct View {
    x0: f64,
    y0: f64,
    span_x: f64,
    span_y: f64,
    size: f64,
}

impl View {
    fn px(&self, x: f64, y: f64) -> (f64, f64) {
        ((x - self.x0) / self.span_x * self.size, self.size - (y - self.y0) / self.span_y * self.size)
    }

    fn polyline(&self, out: &mut String, class: &str, pts: impl Iterator<Item = (f64, f64)>) {
        let mut d = String::new();
        for (x, y) in pts {
            let (a, b) = self.px(x, y);
            let _ = write!(d, "{a:.2},{b:.2} ");
        }
        let _ = writeln!(out, r#"  <polyline class="{class}" points="{}" fill="none"/>"#, d.trim_end());
    }
}

fn kind_name(k: CriticalKind) -> &'static str {
    match k {
        CriticalKind::FlatOrigin => "flat-origin",
        CriticalKind::FlatPlusPlus => "flat-plus-plus",
        CriticalKind::FlatPlusMinus => "flat-plus-minus",
        CriticalKind::NearlyKahler => "nearly-kahler",
    }
}

fn svg_open(out: &mut String, size: f64, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = writeln!(out, "  <title>{title}</title>");
    let _ = writeln!(
        out,
        "  <style>.streamline{{stroke:#4a6fa5;stroke-width:0.8}} .vector{{stroke:#999;stroke-width:0.6}} \
         .axis{{stroke:#000;stroke-width:0.5}} .critical-point{{fill:#c0392b}} .fan{{stroke:#1e8449;stroke-width:1.4}} \
         .fan-point{{fill:#1e8449}} .region{{fill:#f4d03f;fill-opacity:0.25;stroke:#b7950b}}</style>"
    );
    let _ = writeln!(out, r#"  <rect width="{size}" height="{size}" fill="white"/>"#);
}

/// SVG phase portrait: vector glyphs, streamlines and the critical points
/// that fall inside the window.
pub fn portrait_svg(p: &PortraitConfig, grid: &[[f64; 4]], lines: &[Vec<ShiftedState>]) -> String {
    let v = View {
        x0: p.center[0] - p.half_width,
        y0: p.center[1] - p.half_width,
        span_x: 2.0 * p.half_width,
        span_y: 2.0 * p.half_width,
        size: p.size,
    };
    let mut out = String::new();
    svg_open(&mut out, p.size, "Autonomous cone system, shifted coordinates");
    let (ax0, ay) = v.px(v.x0, 0.0);
    let (ax1, _) = v.px(v.x0 + v.span_x, 0.0);
    let (bx, by0) = v.px(0.0, v.y0);
    let (_, by1) = v.px(0.0, v.y0 + v.span_y);
    let _ = writeln!(out, r#"  <line class="axis" x1="{ax0:.2}" y1="{ay:.2}" x2="{ax1:.2}" y2="{ay:.2}"/>"#);
    let _ = writeln!(out, r#"  <line class="axis" x1="{bx:.2}" y1="{by0:.2}" x2="{bx:.2}" y2="{by1:.2}"/>"#);
    let glyph = 0.4 * v.span_x / p.grid as f64;
    for row in grid {
        let n = row[2].hypot(row[3]);
        if n > 0.0 {
            let (a, b) = v.px(row[0], row[1]);
            let (c, d) = v.px(row[0] + glyph * row[2] / n, row[1] + glyph * row[3] / n);
            let _ = writeln!(out, r#"  <line class="vector" x1="{a:.2}" y1="{b:.2}" x2="{c:.2}" y2="{d:.2}"/>"#);
        }
    }
    for line in lines.iter().filter(|l| l.len() > 1) {
        v.polyline(&mut out, "streamline", line.iter().map(|g| (g.g_plus, g.g_minus)));
    }
    for cp in CRITICAL_POINTS.iter() {
        let g = cp.state.to_shifted();
        if inside(p, &g, 1.0) {
            let (a, b) = v.px(g.g_plus, g.g_minus);
            let _ = writeln!(
                out,
                r#"  <circle class="critical-point" data-kind="{}" cx="{a:.2}" cy="{b:.2}" r="4"><title>({}, {})</title></circle>"#,
                kind_name(cp.kind),
                cp.state.f_plus,
                cp.state.f_minus
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Integrates the `T′` members listed in the config.
pub fn fan(cfg: &RunConfig) -> Result<Vec<Trajectory>> {
    let mut local = cfg.clone();
    local.integrator.t_max = cfg.portrait.fan_t_max;
    cfg.portrait.fan.par_iter().map(|&g| integrate_member(&local, Family::TPrime, g)).collect()
}

fn is_constant(tr: &Trajectory) -> bool {
    let s0 = tr.samples[0].state();
    tr.samples.iter().all(|s| s.state().distance(&s0) <= 1e-12)
}

/// SVG of the fan over `R₀`, in unshifted coordinates. Constant members are
/// drawn as single points.
pub fn fan_svg(size: f64, fan: &[Trajectory]) -> String {
    let v = View { x0: 0.55, y0: -0.1, span_x: 0.6, span_y: 1.2, size };
    let mut out = String::new();
    svg_open(&mut out, size, "T' family over the invariant region R0");
    if let Region::Rect { f_plus: (a, b), f_minus: (c, d) } = Region::r_zero() {
        let (x0, y0) = v.px(a, d);
        let (x1, y1) = v.px(b, c);
        let _ = writeln!(
            out,
            r#"  <rect class="region" x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}"/>"#,
            x1 - x0,
            y1 - y0
        );
    }
    for tr in fan {
        let g = tr.seed.parameter;
        if is_constant(tr) {
            let s = tr.samples[0];
            let (a, b) = v.px(s.f_plus, s.f_minus);
            let _ = writeln!(
                out,
                r#"  <circle class="fan-point" data-gamma-prime="{g}" cx="{a:.2}" cy="{b:.2}" r="4"/>"#
            );
        } else {
            v.polyline(&mut out, "fan", tr.samples.iter().map(|s| (s.f_plus, s.f_minus)));
        }
    }
    out.push_str("</svg>\n");
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct PortraitSummary {
    pub vector_rows: usize,
    pub streamlines: usize,
    pub critical_points: usize,
    pub fan_members: Vec<FanMember>,
    pub files: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FanMember {
    pub gamma_prime: f64,
    pub samples: usize,
    pub constant: bool,
    pub final_state: InstantonState,
}

/// Writes every portrait artifact into the configured output directory.
pub fn write_all(cfg: &RunConfig) -> Result<PortraitSummary> {
    let p = &cfg.portrait;
    let o = &cfg.output;
    let grid = vector_grid(p);
    let lines = streamlines(p);
    let members = fan(cfg)?;

    let vf = o.path(&o.vector_field);
    write_table(&vf, &VECTOR_HEADER, &grid)?;
    let sl = o.path(&o.streamlines);
    let rows = lines.iter().enumerate().flat_map(|(i, l)| l.iter().map(move |g| [i as f64, g.g_plus, g.g_minus]));
    write_table(&sl, &STREAMLINE_HEADER, rows)?;
    let svg = portrait_svg(p, &grid, &lines);
    let ps = o.path(&o.portrait);
    write_text(&ps, &svg)?;
    let fc = o.path(&o.fan);
    let fan_rows = members
        .iter()
        .flat_map(|tr| tr.samples.iter().map(move |s| [tr.seed.parameter, s.t, s.r, s.f_plus, s.f_minus]));
    write_table(&fc, &FAN_HEADER, fan_rows)?;
    let fs = o.path(&o.fan_svg);
    write_text(&fs, &fan_svg(p.size, &members))?;

    Ok(PortraitSummary {
        vector_rows: grid.len(),
        streamlines: lines.len(),
        critical_points: svg.matches(r#"class="critical-point""#).count(),
        fan_members: members
            .iter()
            .map(|tr| FanMember {
                gamma_prime: tr.seed.parameter,
                samples: tr.samples.len(),
                constant: is_constant(tr),
                final_state: tr.final_state(),
            })
            .collect(),
        files: [vf, sl, ps, fc, fs].iter().map(|p| p.display().to_string()).collect(),
    })
}
