//! Emission spectrum, radiated particle number / energy / momentum, and
//! propelling efficiencies.
//!
//! With a Dirichlet left mirror every created quantum eventually moves to
//! the right, so the radiated energy and momentum have the same integrand
//! (E = P, massless field, c = 1).

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::config::{CavityConfig, ConfigError};
use crate::grid::FrequencyGrid;
use crate::modulation::ModulationProfile;
use crate::quadrature::{
    guarded_sinc_sq, integrate_1d, integrate_1d_with_points, integrate_semi_infinite_with_points,
    IntegralResult, QuadratureError, QuadratureSpec,
};
use crate::scattering::{ScatteringError, ScatteringKernels};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ObservableError {
    #[error("frequency must be positive and finite, got {0}")]
    InvalidFrequency(f64),
    #[error("drive frequencies must be positive and sorted")]
    InvalidDrives,
    #[error("spectra are sampled on different grids")]
    GridMismatch,
    #[error("spectra have {values} values for {points} grid points")]
    LengthMismatch { points: usize, values: usize },
    #[error("total radiation vanishes; efficiency undefined")]
    ZeroRadiation,
    #[error("band [{lo}, {hi}] holds no propagating modes for mass {mass}")]
    EmptyBand { lo: f64, hi: f64, mass: f64 },
    #[error("band lower edge {lo} is below the mass {mass}")]
    BandBelowMass { lo: f64, mass: f64 },
    #[error("band [{lo}, {hi}] is not covered by the weighting spectrum")]
    BandOutsideSpectrum { lo: f64, hi: f64 },
    #[error("conversion factor k must lie in (0, 1], got {0}")]
    InvalidConversion(f64),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Scattering(#[from] ScatteringError),
}

/// n(ω), number of quanta per unit frequency, on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralDensity {
    grid: FrequencyGrid,
    values: Vec<f64>,
}

impl SpectralDensity {
    /// Values within quadrature noise below zero are clamped to zero.
    pub fn new(grid: FrequencyGrid, values: Vec<f64>) -> Result<Self, ObservableError> {
        if grid.len() != values.len() {
            return Err(ObservableError::LengthMismatch {
                points: grid.len(),
                values: values.len(),
            });
        }
        let values = values.into_iter().map(|v| v.max(0.0)).collect();
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid.points().iter().copied().zip(self.values.iter().copied())
    }

    /// Linear interpolation; zero outside the sampled band.
    pub fn interpolate(&self, omega: f64) -> f64 {
        let pts = self.grid.points();
        if pts.is_empty() || omega < pts[0] || omega > pts[pts.len() - 1] {
            return 0.0;
        }
        let i = pts.partition_point(|p| *p <= omega);
        if i == 0 {
            return self.values[0];
        }
        if i >= pts.len() {
            return self.values[pts.len() - 1];
        }
        let (a, b) = (pts[i - 1], pts[i]);
        let t = (omega - a) / (b - a);
        self.values[i - 1] * (1.0 - t) + self.values[i] * t
    }

    /// Trapezoid-rule moments N = ∫n, E = P = ∫ω n over the sampled band.
    pub fn moments(&self) -> RadiationTotals {
        let number = trapezoid(self.grid.points(), |_, v| v, &self.values);
        let momentum = trapezoid(self.grid.points(), |w, v| w * v, &self.values);
        RadiationTotals::from_number_and_momentum(number, momentum)
    }
}

fn trapezoid(points: &[f64], f: impl Fn(f64, f64) -> f64, values: &[f64]) -> f64 {
    points
        .windows(2)
        .zip(values.windows(2))
        .map(|(w, v)| 0.5 * (w[1] - w[0]) * (f(w[0], v[0]) + f(w[1], v[1])))
        .sum()
}

/// Radiated particle number, energy and momentum. Energy and momentum share
/// one integrand, so `energy` is always a copy of `momentum`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadiationTotals {
    pub particle_number: f64,
    pub energy: f64,
    pub momentum: f64,
}

impl RadiationTotals {
    pub fn from_number_and_momentum(particle_number: f64, momentum: f64) -> Self {
        Self {
            particle_number,
            energy: momentum,
            momentum,
        }
    }
}

fn check_frequency(omega: f64) -> Result<(), ObservableError> {
    if omega > 0.0 && omega.is_finite() {
        Ok(())
    } else {
        Err(ObservableError::InvalidFrequency(omega))
    }
}

/// Breakpoints at `center + shift` and a few widths either side, for each peak.
pub(crate) fn peak_points(profile: &ModulationProfile, shift: f64, sign: f64) -> Vec<f64> {
    const OFFSETS: [f64; 7] = [-16.0, -4.0, -1.0, 0.0, 1.0, 4.0, 16.0];
    profile
        .spectral_features()
        .iter()
        .flat_map(|feat| OFFSETS.iter().map(move |k| sign * feat.center + shift + k * feat.width))
        .collect()
}

/// ∫₀^Λ |f[ω + ω′]|² · 4 sin²(ω′L)/ω′ dω′, the ω-independent part of n(ω)
/// up to the front factor.
fn spectrum_inner(
    cfg: &CavityConfig,
    profile: &ModulationProfile,
    omega: f64,
    spec: &QuadratureSpec,
) -> Result<IntegralResult<f64>, QuadratureError> {
    let l = cfg.length();
    let points = peak_points(profile, -omega, 1.0);
    let spec = cfg.hinted(spec);
    integrate_semi_infinite_with_points(
        |wp: f64| profile.fourier(omega + wp).norm_sqr() * l * guarded_sinc_sq(wp * l),
        0.0,
        cfg.cutoff(),
        &points,
        &spec,
    )
}

/// Emission spectrum to order λ₀²,
/// n(ω) = (λ₀²/4ω) |1 - e^{2iωL}|² ∫₀^Λ dω′ |f[ω+ω′]|² |1 - e^{2iω′L}|² / ω′.
pub fn emission_spectrum(
    cfg: &CavityConfig,
    profile: &ModulationProfile,
    omega: f64,
    spec: &QuadratureSpec,
) -> Result<f64, ObservableError> {
    check_frequency(omega)?;
    let l = cfg.length();
    // λ₀²/(4ω)·4 sin²(ωL), zero at the resonances ωL ∈ πℤ.
    let front = 0.25 * cfg.lambda0().powi(2) * l * guarded_sinc_sq(omega * l);
    if front == 0.0 {
        return Ok(0.0);
    }
    let inner = spectrum_inner(cfg, profile, omega, spec)?;
    Ok((front * inner.value).max(0.0))
}

/// The same spectrum from the trace formula
/// n(ω) = ∫_0^Λ dω′ (ω/ω′) Tr(S₁[-ω,ω′] S₁ᵀ[ω,-ω′]), built from the S₁ matrices.
/// Only ω′ > 0 survives the vacuum average: the leftmost input operator must
/// annihilate.
pub fn spectrum_from_kernels(kernels: &ScatteringKernels<'_>, omega: f64, spec: &QuadratureSpec) -> Result<f64, ObservableError> {
    check_frequency(omega)?;
    if kernels.config().lambda0() == 0.0 {
        return Ok(0.0);
    }
    let cutoff = kernels.config().cutoff();
    let spec = &kernels.config().hinted(spec);
    let points = peak_points(kernels.profile(), -omega, 1.0);
    let r = integrate_1d_with_points(
        |wp: f64| {
            if wp == 0.0 {
                return 0.0;
            }
            let a = kernels.order1(-omega, wp);
            let b = kernels.order1(omega, -wp);
            (omega / wp) * (a * b.transpose()).trace().re
        },
        0.0,
        cutoff,
        &points,
        spec,
    )?;
    Ok(r.value.max(0.0))
}

/// n(ω) on every grid point, evaluated in parallel; ω = 0 maps to its limit 0.
pub fn spectrum_on_grid(
    cfg: &CavityConfig,
    profile: &ModulationProfile,
    grid: &FrequencyGrid,
    spec: &QuadratureSpec,
) -> Result<SpectralDensity, ObservableError> {
    let values = grid
        .points()
        .par_iter()
        .map(|&w| if w == 0.0 { Ok(0.0) } else { emission_spectrum(cfg, profile, w, spec) })
        .collect::<Result<Vec<_>, _>>()?;
    SpectralDensity::new(grid.clone(), values)
}

/// λ₀-free N integrand 4 sin²(ωL) sin²((Ω-ω)L) / (ω(Ω-ω)).
fn number_integrand(l: f64, drive: f64, omega: f64) -> f64 {
    0.25 * l * l * guarded_sinc_sq(omega * l) * guarded_sinc_sq((drive - omega) * l)
}

/// Totals in the monochromatic limit ΩT → ∞, where the drive's spectrum
/// concentrates on ω + ω′ = Ω:
/// N = ∫₀^Ω dω (λ₀²/4ω) |1-e^{2iωL}|² |1-e^{2i(Ω-ω)L}|² / (Ω-ω), and P the
/// same integral without the 1/ω. E is set equal to P.
pub fn monochromatic_totals(cfg: &CavityConfig, drive: f64, spec: &QuadratureSpec) -> Result<RadiationTotals, ObservableError> {
    check_frequency(drive)?;
    let l = cfg.length();
    let scale = cfg.lambda0() * cfg.lambda0();
    let spec = &cfg.hinted(spec);
    let number = integrate_1d(|w: f64| number_integrand(l, drive, w), 0.0, drive, spec)?;
    let momentum = integrate_1d(|w: f64| w * number_integrand(l, drive, w), 0.0, drive, spec)?;
    Ok(RadiationTotals::from_number_and_momentum(
        number.value * scale,
        momentum.value * scale,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub drive: f64,
    #[serde(serialize_with = "serialize_row_result")]
    pub totals: Result<RadiationTotals, ObservableError>,
}

fn serialize_row_result<S: serde::Serializer>(
    r: &Result<RadiationTotals, ObservableError>,
    s: S,
) -> Result<S::Ok, S::Error> {
    match r {
        Ok(t) => t.serialize(s),
        Err(e) => s.serialize_str(&e.to_string()),
    }
}

/// [`monochromatic_totals`] for each drive frequency. Points are evaluated in
/// parallel; rows come back in input order and failures stay per-row.
pub fn sweep_totals(cfg: &CavityConfig, drives: &[f64], spec: &QuadratureSpec) -> Result<Vec<SweepRow>, ObservableError> {
    if drives.iter().any(|d| !(*d > 0.0) || !d.is_finite()) || drives.windows(2).any(|w| w[1] < w[0]) {
        return Err(ObservableError::InvalidDrives);
    }
    Ok(drives
        .par_iter()
        .map(|&drive| SweepRow {
            drive,
            totals: monochromatic_totals(cfg, drive, spec),
        })
        .collect())
}

fn check_conversion(k: f64) -> Result<(), ObservableError> {
    if k > 0.0 && k <= 1.0 {
        Ok(())
    } else {
        Err(ObservableError::InvalidConversion(k))
    }
}

/// Propelling efficiency with radiation on both sides,
/// η = k |∫(n_L - n_R)| / ∫(n_L + n_R). The magnitude is returned since
/// efficiency is defined through |P|; it lies in [0, k].
pub fn efficiency_two_sided(n_left: &SpectralDensity, n_right: &SpectralDensity, k: f64) -> Result<f64, ObservableError> {
    check_conversion(k)?;
    if n_left.grid.points() != n_right.grid.points() {
        return Err(ObservableError::GridMismatch);
    }
    let pts = n_left.grid.points();
    let left = trapezoid(pts, |_, v| v, &n_left.values);
    let right = trapezoid(pts, |_, v| v, &n_right.values);
    let total = left + right;
    if !(total > 0.0) {
        return Err(ObservableError::ZeroRadiation);
    }
    Ok(k * ((left - right).abs() / total).min(1.0))
}

/// Efficiency for a field of mass m over the band `[lo, hi]`:
/// η = k ∫ √(ω² - m²) dω / ∫ ω dω, optionally with both integrands weighted
/// by a spectrum n(ω).
pub fn efficiency_massive(
    mass: f64,
    k: f64,
    band: (f64, f64),
    weight: Option<&SpectralDensity>,
    spec: &QuadratureSpec,
) -> Result<f64, ObservableError> {
    check_conversion(k)?;
    let (lo, hi) = band;
    if !(mass >= 0.0) || !mass.is_finite() || !lo.is_finite() || !hi.is_finite() || !(hi > lo) || mass >= hi {
        return Err(ObservableError::EmptyBand { lo, hi, mass });
    }
    if lo < mass {
        return Err(ObservableError::BandBelowMass { lo, mass });
    }
    // The square root has an endpoint singularity at ω = m; ask for more.
    let spec = spec.with_rel_tol(spec.rel_tol.min(1e-13)).with_abs_tol(1e-300);
    let (num, den) = match weight {
        None => {
            let num = integrate_1d(|w: f64| (w * w - mass * mass).max(0.0).sqrt(), lo, hi, &spec)?;
            let den = integrate_1d(|w: f64| w, lo, hi, &spec)?;
            (num.value, den.value)
        }
        Some(n) => {
            let pts = n.grid.points();
            if pts.is_empty() || lo < pts[0] || hi > pts[pts.len() - 1] {
                return Err(ObservableError::BandOutsideSpectrum { lo, hi });
            }
            let num = integrate_1d_with_points(
                |w: f64| (w * w - mass * mass).max(0.0).sqrt() * n.interpolate(w),
                lo,
                hi,
                pts,
                &spec,
            )?;
            let den = integrate_1d_with_points(|w: f64| w * n.interpolate(w), lo, hi, pts, &spec)?;
            (num.value, den.value)
        }
    };
    if !(den > 0.0) {
        return Err(ObservableError::ZeroRadiation);
    }
    Ok((k * num / den).clamp(0.0, k))
}
