//! Time profiles f(t) of the right mirror's coupling, λ(t) = λ₀ f(t) with
//! |f| ≤ 1, and their transforms under the convention
//! f[ω] = ∫ dt f(t) e^{+iωt}, whose inverse is f(t) = ∫ dω/2π f[ω] e^{-iωt}.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::ConfigError;

/// Slack allowed on |f| ≤ 1 for sampled data read from text.
const AMPLITUDE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum ModulationProfile {
    /// f(t) = e^{-|t|/T} cos(Ωt).
    DampedCosine { omega: f64, decay_time: f64 },
    /// f(t) = e^{-t²/2σ²} cos(Ωt).
    GaussianPulse { omega: f64, sigma_t: f64 },
    SampledWindow(SampledWindow),
}

/// A spectral peak of f[ω]: location and width (both in frequency units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralFeature {
    pub center: f64,
    pub width: f64,
}

impl ModulationProfile {
    pub fn damped_cosine(omega: f64, decay_time: f64) -> Result<Self, ConfigError> {
        if !(omega >= 0.0) || !omega.is_finite() {
            return Err(ConfigError::Modulation(format!("drive frequency must be >= 0, got {omega}")));
        }
        if !(decay_time > 0.0) || !decay_time.is_finite() {
            return Err(ConfigError::Modulation(format!("decay time must be positive, got {decay_time}")));
        }
        Ok(Self::DampedCosine { omega, decay_time })
    }

    pub fn gaussian(omega: f64, sigma_t: f64) -> Result<Self, ConfigError> {
        if !(omega >= 0.0) || !omega.is_finite() {
            return Err(ConfigError::Modulation(format!("centre frequency must be >= 0, got {omega}")));
        }
        if !(sigma_t > 0.0) || !sigma_t.is_finite() {
            return Err(ConfigError::Modulation(format!("sigma_t must be positive, got {sigma_t}")));
        }
        Ok(Self::GaussianPulse { omega, sigma_t })
    }

    pub fn eval_time(&self, t: f64) -> f64 {
        match self {
            Self::DampedCosine { omega, decay_time } => (-t.abs() / decay_time).exp() * (omega * t).cos(),
            Self::GaussianPulse { omega, sigma_t } => (-0.5 * (t / sigma_t).powi(2)).exp() * (omega * t).cos(),
            Self::SampledWindow(w) => w.eval(t),
        }
    }

    pub fn fourier(&self, omega: f64) -> Complex64 {
        match self {
            Self::DampedCosine { omega: drive, decay_time: t } => {
                let lorentz = |x: f64| t / (1.0 + (t * x).powi(2));
                Complex64::new(lorentz(omega - drive) + lorentz(omega + drive), 0.0)
            }
            Self::GaussianPulse { omega: drive, sigma_t: s } => {
                let g = |x: f64| (-0.5 * (s * x).powi(2)).exp();
                let norm = 0.5 * s * (2.0 * PI).sqrt();
                Complex64::new(norm * (g(omega - drive) + g(omega + drive)), 0.0)
            }
            Self::SampledWindow(w) => w.fourier(omega),
        }
    }

    /// Where |f[ω]| is concentrated, used to place quadrature breakpoints.
    pub fn spectral_features(&self) -> Vec<SpectralFeature> {
        match self {
            Self::DampedCosine { omega, decay_time } => peaks(*omega, 1.0 / decay_time),
            Self::GaussianPulse { omega, sigma_t } => peaks(*omega, 1.0 / sigma_t),
            Self::SampledWindow(w) => vec![SpectralFeature {
                center: 0.0,
                width: 1.0 / w.half_width(),
            }],
        }
    }

    /// Characteristic duration of the drive (T, σ_t, or half the window).
    pub fn duration(&self) -> f64 {
        match self {
            Self::DampedCosine { decay_time, .. } => *decay_time,
            Self::GaussianPulse { sigma_t, .. } => *sigma_t,
            Self::SampledWindow(w) => w.half_width(),
        }
    }

    pub fn drive_frequency(&self) -> Option<f64> {
        match self {
            Self::DampedCosine { omega, .. } | Self::GaussianPulse { omega, .. } => Some(*omega),
            Self::SampledWindow(_) => None,
        }
    }
}

fn peaks(omega: f64, width: f64) -> Vec<SpectralFeature> {
    if omega == 0.0 {
        vec![SpectralFeature { center: 0.0, width }]
    } else {
        vec![
            SpectralFeature { center: -omega, width },
            SpectralFeature { center: omega, width },
        ]
    }
}

/// f(t) from uniform samples on `[start, start + (n-1)·dt]`, linearly
/// interpolated inside and zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWindow {
    start: f64,
    step: f64,
    values: Vec<f64>,
}

impl SampledWindow {
    pub fn new(start: f64, step: f64, values: Vec<f64>) -> Result<Self, ConfigError> {
        if values.len() < 2 {
            return Err(ConfigError::Modulation("a sampled window needs at least two samples".into()));
        }
        if !(step > 0.0) || !step.is_finite() || !start.is_finite() {
            return Err(ConfigError::Modulation(format!("bad sample spacing {step}")));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || v.abs() > 1.0 + AMPLITUDE_SLACK)
        {
            return Err(ConfigError::Modulation(format!(
                "sample {i} has |f| = {} > 1",
                v.abs()
            )));
        }
        Ok(Self { start, step, values })
    }

    /// Builds a window from `(t, f)` pairs, which must be uniformly spaced.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self, ConfigError> {
        if pairs.len() < 2 {
            return Err(ConfigError::Modulation("a sampled window needs at least two samples".into()));
        }
        let start = pairs[0].0;
        let end = pairs[pairs.len() - 1].0;
        let step = (end - start) / (pairs.len() - 1) as f64;
        for (k, (t, _)) in pairs.iter().enumerate() {
            let expected = start + step * k as f64;
            if (t - expected).abs() > 1e-9 * step.max(end.abs()) {
                return Err(ConfigError::Modulation(format!(
                    "samples must be uniformly spaced; t[{k}] = {t}, expected {expected}"
                )));
            }
        }
        Self::new(start, step, pairs.iter().map(|p| p.1).collect())
    }

    /// Reads a two-column `t,f` CSV; a non-numeric first row is taken as a header.
    pub fn from_csv(path: &Path) -> Result<Self, ConfigError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        let mut pairs = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
            let parsed = (
                record.get(0).and_then(|s| s.parse::<f64>().ok()),
                record.get(1).and_then(|s| s.parse::<f64>().ok()),
            );
            match parsed {
                (Some(t), Some(f)) => pairs.push((t, f)),
                _ if row == 0 => continue,
                _ => {
                    return Err(ConfigError::Modulation(format!(
                        "{}: row {} is not a (t, f) pair",
                        path.display(),
                        row + 1
                    )))
                }
            }
        }
        Self::from_pairs(&pairs)
    }

    pub fn support(&self) -> (f64, f64) {
        (self.start, self.start + self.step * (self.values.len() - 1) as f64)
    }

    pub fn half_width(&self) -> f64 {
        let (a, b) = self.support();
        0.5 * (b - a)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(k, v)| (self.start + self.step * k as f64, *v))
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (a, b) = self.support();
        if !(t >= a && t <= b) {
            return 0.0;
        }
        let x = (t - a) / self.step;
        let k = (x.floor() as usize).min(self.values.len() - 2);
        let frac = x - k as f64;
        self.values[k] * (1.0 - frac) + self.values[k + 1] * frac
    }

    /// Trapezoid sum of f(t) e^{iωt} over the samples.
    pub fn fourier(&self, omega: f64) -> Complex64 {
        let last = self.values.len() - 1;
        self.samples()
            .enumerate()
            .map(|(k, (t, f))| {
                let w = if k == 0 || k == last { 0.5 } else { 1.0 };
                Complex64::cis(omega * t) * (w * f)
            })
            .sum::<Complex64>()
            * self.step
    }
}
