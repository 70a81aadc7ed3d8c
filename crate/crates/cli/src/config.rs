//! Run configuration: JSON schema and validation.

use anyhow::{Context, Result};
use cone_dirac::estimates::TimeWindow;
use cone_dirac::extension::ExtensionParam;
use cone_dirac::grid::{RadialGrid, RadialGridSpec, SpectralGrid, SpectralGridSpec};
use cone_dirac::eigenbasis::ConeParams;
use serde::Deserialize;
use std::fmt;
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

/// A configuration problem, reported with the path of the offending field.
#[derive(Debug)]
pub struct ValidationError {
    pub path: String,
    pub reason: String,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid config field `{}`: {}", self.path, self.reason)
    }
}

impl std::error::Error for ValidationError {}

pub fn reject(path: impl Into<String>, reason: impl Into<String>) -> anyhow::Error {
    ValidationError { path: path.into(), reason: reason.into() }.into()
}

/// Re-labels a library parameter error with the config path it came from.
fn at<T>(path: &str, r: cone_dirac::Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        cone_dirac::Error::InvalidParameter { field, reason } => reject(format!("{path}.{field}"), reason),
        other => reject(path, other.to_string()),
    })
}

/// γ as "sin0" / "cos0", a number of radians, or {"degrees": x}.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GammaSpec {
    Radians(f64),
    Token(String),
    Degrees { degrees: f64 },
}

impl Default for GammaSpec {
    fn default() -> Self {
        GammaSpec::Token("sin0".into())
    }
}

/// An exponent: a number or "inf".
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum Exponent {
    Finite(f64),
    Named(Inf),
}

#[derive(Debug, Clone, Copy, Deserialize)]
pub enum Inf {
    #[serde(rename = "inf", alias = "infinity", alias = "Inf")]
    Inf,
}

impl Exponent {
    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(x) => x,
            Exponent::Named(_) => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Wave,
    Schrodinger,
    Heat,
}

impl KernelKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "wave" => Some(KernelKind::Wave),
            "schrodinger" => Some(KernelKind::Schrodinger),
            "heat" => Some(KernelKind::Heat),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Wave => "wave",
            KernelKind::Schrodinger => "schrodinger",
            KernelKind::Heat => "heat",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    #[serde(default = "default_kernel_kind")]
    pub kind: KernelKind,
    pub t: f64,
    pub ks: Vec<i64>,
    pub r: Vec<f64>,
    pub s: Vec<f64>,
}

fn default_kernel_kind() -> KernelKind {
    KernelKind::Wave
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeWindowConfig {
    pub start: f64,
    pub end: f64,
    pub samples: usize,
}

/// The JSON configuration file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default)]
    pub gamma: GammaSpec,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    pub radial_grid: Option<RadialGridSpec>,
    pub spectral_grid: Option<SpectralGridSpec>,
    #[serde(default)]
    pub band_j: i32,
    pub time_window: Option<TimeWindowConfig>,
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
    #[serde(default)]
    pub pq: Vec<[Exponent; 2]>,
    pub q: Option<f64>,
    #[serde(default = "default_cutoffs")]
    pub inner_cutoffs: Vec<f64>,
    pub kernel: Option<KernelConfig>,
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    pub tolerance: Option<f64>,
    pub input: Option<PathBuf>,
}

fn default_sigma() -> f64 {
    1.0
}

fn default_k_max() -> usize {
    16
}

fn default_times() -> Vec<f64> {
    vec![0.0]
}

fn default_cutoffs() -> Vec<f64> {
    vec![1e-2, 1e-3, 1e-4]
}

/// Upper bounds keeping a run at desk scale.
const MAX_K: usize = 256;
const MAX_BAND: i32 = 20;

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let path = e.path().to_string();
            let path = if path == "." { "<root>".to_string() } else { path };
            reject(path, e.into_inner().to_string())
        })?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(reject("schema_version", format!("expected {SCHEMA_VERSION}, got {}", cfg.schema_version)));
        }
        Ok(cfg)
    }

    /// Checks every field that every command reads; command-specific fields
    /// are checked by the command before it computes anything.
    pub fn validate(&self) -> Result<()> {
        self.cone()?;
        self.gamma()?;
        self.k_max()?;
        let j = self.band_j()?;
        let radial = self.radial_grid()?;
        self.spectral_grid(&radial)?;
        self.time_window(j)?;
        self.times()?;
        self.pairs()?;
        self.tolerance()?;
        if let Some(q) = self.q {
            if !(q >= 1.0) {
                return Err(reject("q", format!("must be at least 1, got {q}")));
            }
        }
        if let Some(i) = self.inner_cutoffs.iter().position(|e| !(*e > 0.0 && *e < 1.0)) {
            return Err(reject(format!("inner_cutoffs[{i}]"), format!("must lie in (0, 1), got {}", self.inner_cutoffs[i])));
        }
        if self.kernel.is_some() {
            self.kernel()?;
        }
        Ok(())
    }

    pub fn cone(&self) -> Result<ConeParams> {
        if !(self.sigma > 0.0 && self.sigma <= 1.0) {
            return Err(reject("sigma", format!("must lie in (0, 1], got {}", self.sigma)));
        }
        at("sigma", ConeParams::new(self.sigma))
    }

    pub fn gamma(&self) -> Result<ExtensionParam> {
        match &self.gamma {
            GammaSpec::Token(t) => match t.as_str() {
                "sin0" => Ok(ExtensionParam::sin_zero()),
                "cos0" => Ok(ExtensionParam::cos_zero()),
                other => Err(reject("gamma", format!("unknown token {other:?}; use \"sin0\", \"cos0\", radians or {{\"degrees\": x}}"))),
            },
            GammaSpec::Radians(g) => at("gamma", ExtensionParam::new(*g)),
            GammaSpec::Degrees { degrees } => at("gamma.degrees", ExtensionParam::from_degrees(*degrees)),
        }
    }

    /// Display form of γ for reports.
    pub fn gamma_label(&self) -> String {
        match &self.gamma {
            GammaSpec::Token(t) => t.clone(),
            GammaSpec::Radians(g) => format!("{g}"),
            GammaSpec::Degrees { degrees } => format!("{degrees}deg"),
        }
    }

    pub fn k_max(&self) -> Result<usize> {
        if self.k_max > MAX_K {
            return Err(reject("k_max", format!("must be at most {MAX_K}, got {}", self.k_max)));
        }
        Ok(self.k_max)
    }

    pub fn band_j(&self) -> Result<i32> {
        if self.band_j.abs() > MAX_BAND {
            return Err(reject("band_j", format!("must lie in [-{MAX_BAND}, {MAX_BAND}], got {}", self.band_j)));
        }
        Ok(self.band_j)
    }

    pub fn radial_grid(&self) -> Result<RadialGrid> {
        let spec = self.radial_grid.unwrap_or_default();
        at("radial_grid", RadialGrid::from_spec(&spec))
    }

    pub fn spectral_grid(&self, radial: &RadialGrid) -> Result<SpectralGrid> {
        match &self.spectral_grid {
            Some(spec) => at("spectral_grid", SpectralGrid::from_spec(radial, spec)),
            None => Ok(SpectralGrid::default_for(radial)),
        }
    }

    pub fn time_window(&self, j: i32) -> Result<TimeWindow> {
        match self.time_window {
            Some(w) => at("time_window", TimeWindow::new(w.start, w.end, w.samples)),
            None => Ok(TimeWindow::for_band(j)),
        }
    }

    pub fn times(&self) -> Result<&[f64]> {
        if self.times.is_empty() {
            return Err(reject("times", "need at least one time"));
        }
        if let Some(i) = self.times.iter().position(|t| !t.is_finite()) {
            return Err(reject(format!("times[{i}]"), "must be finite"));
        }
        Ok(&self.times)
    }

    pub fn pairs(&self) -> Result<Vec<(f64, f64)>> {
        self.pq
            .iter()
            .enumerate()
            .map(|(i, [p, q])| {
                let (p, q) = (p.value(), q.value());
                for (name, x) in [("p", p), ("q", q)] {
                    if !(x > 0.0) {
                        return Err(reject(format!("pq[{i}].{name}"), format!("must be positive, got {x}")));
                    }
                }
                Ok((p, q))
            })
            .collect()
    }

    pub fn tolerance(&self) -> Result<Option<f64>> {
        match self.tolerance {
            Some(t) if !(t > 0.0 && t.is_finite()) => Err(reject("tolerance", format!("must be positive, got {t}"))),
            t => Ok(t),
        }
    }

    pub fn kernel(&self) -> Result<&KernelConfig> {
        let k = self.kernel.as_ref().ok_or_else(|| reject("kernel", "required by --cmd kernel"))?;
        if !k.t.is_finite() {
            return Err(reject("kernel.t", "must be finite"));
        }
        if k.ks.is_empty() {
            return Err(reject("kernel.ks", "need at least one mode"));
        }
        for (name, pts) in [("r", &k.r), ("s", &k.s)] {
            if pts.is_empty() {
                return Err(reject(format!("kernel.{name}"), "need at least one point"));
            }
            if let Some(i) = pts.iter().position(|x| !(*x > 0.0 && x.is_finite())) {
                return Err(reject(format!("kernel.{name}[{i}]"), format!("must be positive, got {}", pts[i])));
            }
        }
        Ok(k)
    }
}
