//! Run settings as read from a config file (JSON, or TOML by extension).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{default_cutoff, CavityConfig, ConfigError, LeftCoupling};
use crate::grid::MIN_POINTS_PER_PERIOD;
use crate::modulation::{ModulationProfile, SampledWindow};
use crate::quadrature::QuadratureSpec;

/// Below this many drive periods per decay time the drive is far from
/// monochromatic; a warning is logged.
pub const MIN_PERIODS_PER_DECAY: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirichletTag {
    Dirichlet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LeftCouplingSetting {
    Named(DirichletTag),
    Finite { g: f64 },
}

impl Default for LeftCouplingSetting {
    fn default() -> Self {
        Self::Named(DirichletTag::Dirichlet)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModulationKind {
    DampedCosine,
    Gaussian,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulationSettings {
    #[serde(rename = "type")]
    pub kind: ModulationKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub decay_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples_path: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSettings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_subdivisions: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSettings {
    #[serde(default = "default_points_per_period")]
    pub points_per_period: usize,
}

fn default_points_per_period() -> usize {
    16
}

impl Default for GridSettings {
    fn default() -> Self {
        Self {
            points_per_period: default_points_per_period(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub length: f64,
    pub lambda0: f64,
    /// Defaults to 50π/L.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
    #[serde(default)]
    pub left_coupling: LeftCouplingSetting,
    pub modulation: ModulationSettings,
    #[serde(default)]
    pub quadrature: QuadratureSettings,
    #[serde(default)]
    pub grid: GridSettings,
}

impl Settings {
    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    /// Reads TOML for a `.toml` extension and JSON otherwise. A relative
    /// `samples_path` is resolved against the file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("cannot read {}: {e}", path.display())))?;
        let mut s = match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => Self::from_toml_str(&text)?,
            _ => Self::from_json_str(&text)?,
        };
        if let Some(p) = &s.modulation.samples_path {
            if p.is_relative() {
                let base = path.parent().unwrap_or_else(|| Path::new("."));
                s.modulation.samples_path = Some(base.join(p));
            }
        }
        Ok(s)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("settings serialize")
    }

    pub fn cavity(&self) -> Result<CavityConfig, ConfigError> {
        let left = match self.left_coupling {
            LeftCouplingSetting::Named(DirichletTag::Dirichlet) => LeftCoupling::DirichletLimit,
            LeftCouplingSetting::Finite { g } => LeftCoupling::FiniteG(g),
        };
        let cutoff = self.cutoff.unwrap_or_else(|| default_cutoff(self.length));
        CavityConfig::new(self.length, self.lambda0, cutoff, left)
    }

    pub fn profile(&self) -> Result<ModulationProfile, ConfigError> {
        let m = &self.modulation;
        let need = |v: Option<f64>, key: &str| {
            v.ok_or_else(|| ConfigError::Modulation(format!("`modulation.{key}` is required for {:?}", m.kind)))
        };
        let profile = match m.kind {
            ModulationKind::DampedCosine => {
                ModulationProfile::damped_cosine(need(m.omega, "omega")?, need(m.decay_time, "T")?)?
            }
            ModulationKind::Gaussian => ModulationProfile::gaussian(need(m.omega, "omega")?, need(m.sigma_t, "sigma_t")?)?,
            ModulationKind::Sampled => {
                let path = m.samples_path.as_ref().ok_or_else(|| {
                    ConfigError::Modulation("`modulation.samples_path` is required for sampled".into())
                })?;
                ModulationProfile::SampledWindow(SampledWindow::from_csv(path)?)
            }
        };
        if let (Some(omega), Some(t)) = (profile.drive_frequency(), m.decay_time.or(m.sigma_t)) {
            if omega * t < MIN_PERIODS_PER_DECAY {
                log::warn!("Ω·T = {} is small; the drive is far from monochromatic", omega * t);
            }
        }
        Ok(profile)
    }

    /// Quadrature settings merged over the defaults, with hint π/L.
    pub fn quadrature_spec(&self) -> Result<QuadratureSpec, ConfigError> {
        let d = QuadratureSpec::default();
        let q = &self.quadrature;
        let spec = QuadratureSpec::new(
            q.rel_tol.unwrap_or(d.rel_tol),
            q.abs_tol.unwrap_or(d.abs_tol),
            q.max_subdivisions.unwrap_or(d.max_subdivisions),
        )
        .map_err(|e| ConfigError::Parse(format!("quadrature: {e}")))?;
        if !(self.length > 0.0) {
            return Err(ConfigError::OutOfRange {
                key: "length",
                requirement: "positive and finite",
                value: self.length,
            });
        }
        Ok(spec.with_hint(std::f64::consts::PI / self.length))
    }

    pub fn points_per_period(&self) -> Result<usize, ConfigError> {
        let n = self.grid.points_per_period;
        if n < MIN_POINTS_PER_PERIOD {
            return Err(ConfigError::OutOfRange {
                key: "grid.points_per_period",
                requirement: "at least 8",
                value: n as f64,
            });
        }
        Ok(n)
    }
}
