//! File formats: CSV tables and JSON records.
//!
//! CSV headers are fixed:
//!
//! | file | columns |
//! |------|---------|
//! | metric | `r,t,A,B,dr_dt` |
//! | trajectory | `t,r,f_plus,f_minus` |
//! | vector field | `g_plus,g_minus,dg_plus,dg_minus` |
//! | streamlines | `line,g_plus,g_minus` |
//! | fan | `gamma_prime,t,r,f_plus,f_minus` |
//!
//! Floats are written in shortest round-trip scientific notation.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use g2moduli_core::classify::BoundaryResult;
use g2moduli_core::{ClassificationRecord, Family, MetricSample, Outcome, Sample, Termination, Trajectory};
use serde::{Deserialize, Serialize};

pub const METRIC_HEADER: [&str; 5] = ["r", "t", "A", "B", "dr_dt"];
pub const TRAJECTORY_HEADER: [&str; 4] = ["t", "r", "f_plus", "f_minus"];

pub fn fmt_f64(x: f64) -> String {
    format!("{x:e}")
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

/// Writes a header and rows of floats.
pub fn write_table<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: AsRef<[f64]>,
{
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.as_ref().iter().map(|&x| fmt_f64(x)))?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_metric_csv(path: &Path, samples: &[MetricSample], dr_dt: &[f64]) -> Result<()> {
    let rows = samples.iter().zip(dr_dt).map(|(s, &d)| [s.r, s.t.unwrap_or(f64::NAN), s.a, s.b, d]);
    write_table(path, &METRIC_HEADER, rows)
}

pub fn write_trajectory_csv(path: &Path, samples: &[Sample]) -> Result<()> {
    write_table(path, &TRAJECTORY_HEADER, samples.iter().map(|s| [s.t, s.r, s.f_plus, s.f_minus]))
}

pub fn read_trajectory_csv(path: &Path) -> Result<Vec<Sample>> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        let (t, r, f_plus, f_minus): (f64, f64, f64, f64) = row?;
        out.push(Sample { t, r, f_plus, f_minus });
    }
    Ok(out)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Flat JSON form of a classification, one object per scanned parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub family: Family,
    pub parameter: f64,
    pub outcome: String,
    pub mu: Option<f64>,
    pub nu: Option<f64>,
    pub fitted_exponent: Option<f64>,
    pub t_escape: Option<f64>,
    pub exponent_plus: Option<f64>,
    pub exponent_minus: Option<f64>,
    pub connection_rate: Option<f64>,
    pub fit_residual: Option<f64>,
    /// Which flat critical point, for `flat` outcomes.
    pub gauge: Option<String>,
    /// Why the run was not classified, for `inconclusive` outcomes.
    pub reason: Option<String>,
    pub termination: String,
    pub t_final: f64,
    pub f_plus_final: f64,
    pub f_minus_final: f64,
    pub warning: Option<String>,
}

fn snake<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(serde_json::Value::Object(m)) => m.get("kind").and_then(|k| k.as_str()).unwrap_or_default().to_owned(),
        _ => String::new(),
    }
}

impl From<&ClassificationRecord> for ScanRecord {
    fn from(rec: &ClassificationRecord) -> Self {
        let fit = rec.outcome.decay();
        let (gauge, reason, t_escape) = match rec.outcome {
            Outcome::Flat { gauge } => (Some(snake(&gauge)), None, None),
            Outcome::Inconclusive { reason } => (None, Some(snake(&reason)), None),
            Outcome::BlowUp { t_escape } => (None, None, Some(t_escape)),
            Outcome::ConvergesToNK(_) => (None, None, None),
        };
        let warning = (rec.family == Family::TGamma && rec.parameter < 0.0)
            .then(|| "negative gamma: finite-time breakdown expected".to_owned());
        ScanRecord {
            family: rec.family,
            parameter: rec.parameter,
            outcome: rec.outcome.label().to_owned(),
            mu: fit.map(|f| f.mu),
            nu: fit.map(|f| f.nu),
            fitted_exponent: fit.map(|f| f.fitted_exponent),
            t_escape,
            exponent_plus: fit.map(|f| f.exponent_plus),
            exponent_minus: fit.and_then(|f| f.exponent_minus),
            connection_rate: fit.map(|f| f.connection_rate),
            fit_residual: fit.map(|f| f.residual),
            gauge,
            reason,
            termination: snake(&rec.termination),
            t_final: rec.t_final,
            f_plus_final: rec.final_state.f_plus,
            f_minus_final: rec.final_state.f_minus,
            warning,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryReport {
    pub family: Family,
    pub bracket: [f64; 2],
    pub tol: f64,
    pub estimate: f64,
    pub bounded_side: f64,
    pub blow_up_side: f64,
    pub probes: usize,
    pub probe_t_max: f64,
}

impl BoundaryReport {
    pub fn new(res: &BoundaryResult, bracket: (f64, f64), tol: f64, probe_t_max: f64) -> Self {
        BoundaryReport {
            family: res.family,
            bracket: [bracket.0, bracket.1],
            tol,
            estimate: res.estimate,
            bounded_side: res.bounded_side,
            blow_up_side: res.blow_up_side,
            probes: res.probes,
            probe_t_max,
        }
    }
}

/// Summary printed after `integrate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub family: Family,
    pub parameter: f64,
    pub samples: usize,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub termination: String,
    pub t_final: f64,
    pub f_plus_final: f64,
    pub f_minus_final: f64,
    pub t_escape: Option<f64>,
}

impl From<&Trajectory> for RunSummary {
    fn from(tr: &Trajectory) -> Self {
        let last = tr.last();
        let t_escape = match tr.termination {
            Termination::Escaped { t_escape } => Some(t_escape),
            _ => None,
        };
        RunSummary {
            family: tr.seed.family,
            parameter: tr.seed.parameter,
            samples: tr.samples.len(),
            accepted_steps: tr.stats.accepted,
            rejected_steps: tr.stats.rejected,
            termination: snake(&tr.termination),
            t_final: last.t,
            f_plus_final: last.f_plus,
            f_minus_final: last.f_minus,
            t_escape,
        }
    }
}
