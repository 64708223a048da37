use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::config::CavityConfig;

pub const MIN_POINTS_PER_PERIOD: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("omega_max must be positive and finite, got {0}")]
    BadUpperBound(f64),
    #[error("points_per_period must be at least {MIN_POINTS_PER_PERIOD}, got {0}")]
    TooCoarse(usize),
    #[error("grid points must be finite, non-negative and strictly increasing")]
    NotIncreasing,
}

/// Non-negative frequency samples, dense enough to resolve the π/L
/// resonance structure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyGrid {
    points: Vec<f64>,
    points_per_period: usize,
}

impl FrequencyGrid {
    /// Wraps explicit points, checking ordering and the spacing rule for `length`.
    pub fn from_points(points: Vec<f64>, points_per_period: usize, length: f64) -> Result<Self, GridError> {
        if points_per_period < MIN_POINTS_PER_PERIOD {
            return Err(GridError::TooCoarse(points_per_period));
        }
        if points.iter().any(|p| !p.is_finite() || *p < 0.0) || points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(GridError::NotIncreasing);
        }
        let limit = (PI / length) / points_per_period as f64;
        if points.windows(2).any(|w| w[1] - w[0] > limit * (1.0 + 1e-9)) {
            return Err(GridError::TooCoarse(points_per_period));
        }
        Ok(Self {
            points,
            points_per_period,
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn points_per_period(&self) -> usize {
        self.points_per_period
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn max_spacing(&self) -> f64 {
        self.points.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }
}

fn interval_count(omega_max: f64, length: f64, points_per_period: usize) -> usize {
    let spacing = (PI / length) / points_per_period as f64;
    // Tolerate rounding when omega_max is an exact multiple of the spacing.
    ((omega_max / spacing) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

/// Uniform grid on `[0, omega_max]`, both endpoints included, with spacing at
/// most `(π/L) / points_per_period`.
pub fn make_grid(cfg: &CavityConfig, omega_max: f64, points_per_period: usize) -> Result<FrequencyGrid, GridError> {
    if !(omega_max > 0.0) || !omega_max.is_finite() {
        return Err(GridError::BadUpperBound(omega_max));
    }
    if points_per_period < MIN_POINTS_PER_PERIOD {
        return Err(GridError::TooCoarse(points_per_period));
    }
    let n = interval_count(omega_max, cfg.length(), points_per_period);
    let mut points: Vec<f64> = (0..n).map(|k| omega_max * k as f64 / n as f64).collect();
    points.push(omega_max);
    Ok(FrequencyGrid {
        points,
        points_per_period,
    })
}

/// Uniform grid on `[-omega_max, omega_max]` containing 0, for force spectra.
pub fn make_symmetric_grid(cfg: &CavityConfig, omega_max: f64, points_per_period: usize) -> Result<Vec<f64>, GridError> {
    let half = make_grid(cfg, omega_max, points_per_period)?;
    let mut out: Vec<f64> = half.points.iter().skip(1).rev().map(|w| -w).collect();
    out.extend_from_slice(&half.points);
    Ok(out)
}
