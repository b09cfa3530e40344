//! Run configuration.
//!
//! Every numeric default used by the CLI and the verification suite lives in
//! [`RunConfig::default`], mirrored by `config/default.toml`.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use g2moduli_core::{ClassifySettings, EventSpec, Family, StepControl};
use serde::{Deserialize, Serialize};

/// Environment variable that overrides the config file path.
pub const CONFIG_ENV: &str = "G2MODULI_CONFIG";

/// The shipped default configuration.
pub const DEFAULT_TOML: &str = include_str!("../config/default.toml");

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub integrator: IntegratorConfig,
    pub events: EventSpec,
    pub fit: ClassifySettings,
    pub boundary: BoundaryConfig,
    pub metric: MetricConfig,
    pub scan: ScanConfig,
    pub portrait: PortraitConfig,
    pub verify: VerifyConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub t0: f64,
    pub t_max: f64,
    pub tol: f64,
    pub step: StepControl,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundaryConfig {
    /// Horizon for each bisection probe.
    pub t_max: f64,
    /// Target width of the final bracket.
    pub tol: f64,
    pub tprime_bracket: [f64; 2],
    pub tgamma_bracket: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricConfig {
    pub r_min: f64,
    pub r_max: f64,
    pub samples: usize,
    pub quad_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub from: f64,
    pub to: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub tprime: Grid,
    pub tgamma: Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PortraitConfig {
    /// Window centre in shifted coordinates.
    pub center: [f64; 2],
    pub half_width: f64,
    /// Vector-field samples per axis.
    pub grid: usize,
    /// Streamline seeds per axis.
    pub seeds: usize,
    pub streamline_steps: usize,
    pub streamline_dt: f64,
    pub fan: Vec<f64>,
    pub fan_t_max: f64,
    /// SVG canvas side in pixels.
    pub size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub residual_tol: f64,
    pub residual_points: usize,
    pub residual_r: [f64; 2],
    pub clarke_gammas: Vec<f64>,
    pub oracle_t_max: f64,
    pub oracle_tol: f64,
    pub cone_t: [f64; 2],
    pub cone_points: usize,
    pub cone_states: Vec<[f64; 2]>,
    pub cone_slope_max: f64,
    pub decay_gammas: Vec<f64>,
    pub exponent_band: [f64; 2],
    pub connection_band: [f64; 2],
    pub symmetry_tol: f64,
    pub contact_times: Vec<f64>,
    pub contact_slope_min: f64,
    pub boundary_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub metric: String,
    pub trajectory: String,
    pub scan: String,
    pub boundary: String,
    pub vector_field: String,
    pub streamlines: String,
    pub portrait: String,
    pub fan: String,
    pub fan_svg: String,
    pub verify: String,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { t0: 1e-2, t_max: 1e3, tol: 1e-10, step: StepControl::default() }
    }
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        BoundaryConfig { t_max: 1e4, tol: 1e-3, tprime_bracket: [0.5, 1.5], tgamma_bracket: [-0.2, 0.2] }
    }
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig { r_min: 1.0, r_max: 100.0, samples: 200, quad_tol: 1e-14 }
    }
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            tprime: Grid { from: -1.5, to: 1.5, step: 0.05 },
            tgamma: Grid { from: -0.2, to: 2.0, step: 0.05 },
        }
    }
}

impl Default for PortraitConfig {
    fn default() -> Self {
        PortraitConfig {
            center: [0.0, 0.0],
            half_width: 1.0,
            grid: 21,
            seeds: 9,
            streamline_steps: 400,
            streamline_dt: 0.01,
            fan: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            fan_t_max: 1e3,
            size: 600.0,
        }
    }
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            residual_tol: 1e-8,
            residual_points: 200,
            residual_r: [1.01, 100.0],
            clarke_gammas: vec![0.1, 1.0, 10.0],
            oracle_t_max: 1e3,
            oracle_tol: 1e-6,
            cone_t: [10.0, 1e3],
            cone_points: 41,
            cone_states: vec![[0.9, 0.4], [0.5, -0.3], [1.2, 0.7]],
            cone_slope_max: -3.9,
            decay_gammas: vec![0.1, 1.0, 10.0],
            exponent_band: [-2.05, -1.95],
            connection_band: [-3.05, -2.95],
            symmetry_tol: 1e-14,
            contact_times: vec![4e-2, 2e-2, 1e-2, 5e-3],
            contact_slope_min: 3.8,
            boundary_tol: 1e-3,
        }
    }
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("out"),
            metric: "metric.csv".into(),
            trajectory: "traj.csv".into(),
            scan: "scan.json".into(),
            boundary: "boundary.json".into(),
            vector_field: "vector_field.csv".into(),
            streamlines: "streamlines.csv".into(),
            portrait: "portrait.svg".into(),
            fan: "fan.csv".into(),
            fan_svg: "fan.svg".into(),
            verify: "verify.json".into(),
        }
    }
}

impl Grid {
    /// Grid points `from + i·step` up to `to`, snapped to `1e-12` so that
    /// nominal values such as `±1` are hit exactly.
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.to - self.from) / self.step + 1e-9).floor() as usize;
        (0..=n)
            .map(|i| ((self.from + i as f64 * self.step) * 1e12).round() / 1e12)
            .collect()
    }

    fn validate(&self, name: &str) -> Result<()> {
        let finite = self.from.is_finite() && self.to.is_finite() && self.step.is_finite();
        if !finite || self.step <= 0.0 || self.to < self.from {
            bail!("{name}: grid needs finite from <= to and step > 0");
        }
        if (self.to - self.from) / self.step > 1e6 {
            bail!("{name}: grid has more than 1e6 points");
        }
        Ok(())
    }
}

impl ScanConfig {
    pub fn grid(&self, family: Family) -> Grid {
        match family {
            Family::TPrime => self.tprime,
            Family::TGamma => self.tgamma,
        }
    }
}

impl BoundaryConfig {
    pub fn bracket(&self, family: Family) -> (f64, f64) {
        let [a, b] = match family {
            Family::TPrime => self.tprime_bracket,
            Family::TGamma => self.tgamma_bracket,
        };
        (a, b)
    }
}

impl OutputConfig {
    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if !(x.is_finite() && x > 0.0) {
        bail!("{name} must be a positive finite number, got {x}");
    }
    Ok(())
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).context("parsing config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    /// Resolves the config path from an explicit flag, then `G2MODULI_CONFIG`,
    /// falling back to built-in defaults.
    pub fn resolve(flag: Option<&Path>) -> Result<Self> {
        if let Some(p) = flag {
            return Self::load(p);
        }
        match std::env::var_os(CONFIG_ENV) {
            Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
            _ => Ok(Self::default()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let i = &self.integrator;
        positive("integrator.t0", i.t0)?;
        positive("integrator.tol", i.tol)?;
        if !(i.t_max > i.t0) {
            bail!("integrator.t_max must exceed integrator.t0");
        }
        self.events.validate().map_err(|e| anyhow::anyhow!("events: {e}"))?;
        positive("events.convergence_radius", self.events.convergence_radius)?;
        positive("events.invariance_band", self.events.invariance_band)?;
        positive("fit.flat_tolerance", self.fit.flat_tolerance)?;
        positive("boundary.t_max", self.boundary.t_max)?;
        positive("boundary.tol", self.boundary.tol)?;
        let m = &self.metric;
        if !(m.r_min >= 1.0 && m.r_max > m.r_min && m.samples >= 2) {
            bail!("metric: need 1 <= r_min < r_max and samples >= 2");
        }
        positive("metric.quad_tol", m.quad_tol)?;
        self.scan.tprime.validate("scan.tprime")?;
        self.scan.tgamma.validate("scan.tgamma")?;
        let p = &self.portrait;
        positive("portrait.half_width", p.half_width)?;
        positive("portrait.streamline_dt", p.streamline_dt)?;
        positive("portrait.fan_t_max", p.fan_t_max)?;
        positive("portrait.size", p.size)?;
        if p.grid < 2 || p.seeds < 1 || p.streamline_steps < 1 || p.fan.is_empty() {
            bail!("portrait: grids must be non-empty");
        }
        let v = &self.verify;
        for (name, x) in [
            ("verify.residual_tol", v.residual_tol),
            ("verify.oracle_tol", v.oracle_tol),
            ("verify.symmetry_tol", v.symmetry_tol),
            ("verify.boundary_tol", v.boundary_tol),
        ] {
            positive(name, x)?;
        }
        if v.residual_points < 2 || v.cone_points < 2 || v.contact_times.len() < 2 {
            bail!("verify: sample grids need at least two points");
        }
        if v.clarke_gammas.is_empty() || v.cone_states.is_empty() || v.decay_gammas.is_empty() {
            bail!("verify: parameter lists must be non-empty");
        }
        Ok(())
    }
}
