//! Monte Carlo experiment configuration, loadable from TOML.
//!
//! ```toml
//! n_values = [10, 20, 50]
//! reps = 1000
//! tests = ["gmd", "var"]
//! noise = ["normal", "t3", "chisq2"]
//! master_seed = 2024
//!
//! [[dep]]
//! kind = "iid"
//!
//! [[surfaces]]
//! kind = "a2"
//! amplitudes = [0.0, 0.25, 0.5, 1.0]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::change::TestKind;
use crate::decorrelate::{DecorrelateMethod, DecorrelateOptions, RepairMethod, DEFAULT_SIZE_GUARD};
use crate::error::{Error, Result};
use crate::fieldgen::{DepKind, DependenceSpec, NoiseDist, SAR_MIN_ORDER};
use crate::grid::SurfaceKind;

/// One dependence structure in the sweep. `q` defaults to 1 for SMA and to
/// the minimum order for the SAR approximation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DepConfig {
    pub kind: DepKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    #[serde(default)]
    pub rho: f64,
}

impl DepConfig {
    pub fn iid() -> Self {
        DepConfig { kind: DepKind::Iid, q: None, rho: 0.0 }
    }

    pub fn spec(&self) -> DependenceSpec {
        match self.kind {
            DepKind::Iid => DependenceSpec::iid(),
            DepKind::Sma => DependenceSpec::sma(self.q.unwrap_or(1), self.rho),
            DepKind::Sar => DependenceSpec { kind: DepKind::Sar, q: self.q.unwrap_or(SAR_MIN_ORDER), rho: self.rho },
        }
    }
}

impl From<DependenceSpec> for DepConfig {
    fn from(d: DependenceSpec) -> Self {
        DepConfig { kind: d.kind, q: (d.kind != DepKind::Iid).then_some(d.q), rho: d.rho }
    }
}

/// A mean-surface shape and the amplitudes to sweep over.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSweep {
    pub kind: SurfaceKind,
    pub amplitudes: Vec<f64>,
}

impl SurfaceSweep {
    pub fn new(kind: SurfaceKind, amplitudes: impl Into<Vec<f64>>) -> Self {
        SurfaceSweep { kind, amplitudes: amplitudes.into() }
    }
}

fn default_s() -> f64 {
    0.6
}
fn default_alpha() -> f64 {
    0.05
}
fn default_reps() -> usize {
    1000
}
fn default_tests() -> Vec<TestKind> {
    vec![TestKind::Gmd, TestKind::Var]
}
fn default_noise() -> Vec<NoiseDist> {
    vec![NoiseDist::StdNormal]
}
fn default_dep() -> Vec<DepConfig> {
    vec![DepConfig::iid()]
}
fn default_surfaces() -> Vec<SurfaceSweep> {
    vec![SurfaceSweep::new(SurfaceKind::Constant, [0.0])]
}
fn default_guard() -> usize {
    DEFAULT_SIZE_GUARD
}

/// Grid sizes are square (`n = m`). Noise seeds are derived from
/// `master_seed`, so the noise list holds distributions only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_values: Vec<usize>,
    #[serde(default = "default_s")]
    pub s_target: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default = "default_tests")]
    pub tests: Vec<TestKind>,
    #[serde(default = "default_noise")]
    pub noise: Vec<NoiseDist>,
    #[serde(default = "default_dep")]
    pub dep: Vec<DepConfig>,
    #[serde(default = "default_surfaces")]
    pub surfaces: Vec<SurfaceSweep>,
    #[serde(default)]
    pub decorrelate: bool,
    #[serde(default = "default_method")]
    pub decorrelate_method: DecorrelateMethod,
    #[serde(default = "default_guard")]
    pub size_guard: usize,
    #[serde(default)]
    pub repair: RepairMethod,
    pub master_seed: u64,
}

fn default_method() -> DecorrelateMethod {
    DecorrelateMethod::Full
}

impl ExperimentConfig {
    /// Null-only iid configuration with default settings.
    pub fn new(n_values: impl Into<Vec<usize>>, master_seed: u64) -> Self {
        ExperimentConfig {
            n_values: n_values.into(),
            s_target: default_s(),
            alpha: default_alpha(),
            reps: default_reps(),
            tests: default_tests(),
            noise: default_noise(),
            dep: default_dep(),
            surfaces: default_surfaces(),
            decorrelate: false,
            decorrelate_method: default_method(),
            size_guard: DEFAULT_SIZE_GUARD,
            repair: RepairMethod::default(),
            master_seed,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn decorrelation(&self) -> Option<DecorrelateOptions> {
        self.decorrelate.then_some(DecorrelateOptions {
            method: self.decorrelate_method,
            size_guard: self.size_guard,
            repair: self.repair,
        })
    }

    pub fn has_null_amplitude(&self) -> bool {
        self.surfaces.iter().any(|s| s.amplitudes.contains(&0.0))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n_values.is_empty() {
            return bad("n_values is empty".into());
        }
        if self.tests.is_empty() || self.noise.is_empty() || self.dep.is_empty() {
            return bad("tests, noise and dep must be nonempty".into());
        }
        if self.surfaces.is_empty() || self.surfaces.iter().any(|s| s.amplitudes.is_empty()) {
            return bad("every surface needs a nonempty amplitude list".into());
        }
        if self.surfaces.iter().any(|s| s.kind == SurfaceKind::Custom) {
            return bad("custom surfaces cannot be used in a configuration file".into());
        }
        if let Some(a) = self.surfaces.iter().flat_map(|s| &s.amplitudes).find(|a| !a.is_finite()) {
            return bad(format!("amplitude {a} is not finite"));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidAlpha(self.alpha));
        }
        if !(self.s_target > 0.0 && self.s_target < 1.0) {
            return bad(format!("s_target {} must lie in (0, 1)", self.s_target));
        }
        if self.reps < 100 {
            return bad(format!("reps = {} is below the minimum of 100", self.reps));
        }
        for d in &self.dep {
            d.spec().validate()?;
        }
        Ok(())
    }
}
