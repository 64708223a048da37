//! Cavity geometry and couplings. Natural units, ħ = c = 1: lengths are
//! inverse frequencies and every coupling shares the frequency unit.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::QuadratureSpec;

/// Above this value of λ₀·L the second-order truncation is unlikely to be
/// meaningful; construction still succeeds but a warning is logged.
pub const LARGE_COUPLING_WARNING: f64 = 1.0;

/// Minimum number of cavity resonances (spacing π/L) below the cutoff.
pub const MIN_RESONANCES_BELOW_CUTOFF: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("`{key}` must be {requirement}, got {value}")]
    OutOfRange {
        key: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("`cutoff` = {cutoff} is below 10π/L = {minimum}; at least ten cavity resonances must lie under the cutoff")]
    CutoffTooLow { cutoff: f64, minimum: f64 },
    #[error("left mirror must be Dirichlet for the global kernels")]
    NotDirichlet,
    #[error("invalid modulation: {0}")]
    Modulation(String),
    #[error("invalid config file: {0}")]
    Parse(String),
    #[error("{0}")]
    Io(String),
}

/// Coupling of the static left mirror to the field.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum LeftCoupling {
    /// g → ∞: perfectly reflecting.
    #[default]
    DirichletLimit,
    FiniteG(f64),
}

impl LeftCoupling {
    pub fn is_dirichlet(&self) -> bool {
        matches!(self, Self::DirichletLimit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityConfig {
    length: f64,
    lambda0: f64,
    cutoff: f64,
    left_coupling: LeftCoupling,
}

impl CavityConfig {
    pub fn new(length: f64, lambda0: f64, cutoff: f64, left_coupling: LeftCoupling) -> Result<Self, ConfigError> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(ConfigError::OutOfRange {
                key: "length",
                requirement: "positive and finite",
                value: length,
            });
        }
        if !(lambda0 >= 0.0) || !lambda0.is_finite() {
            return Err(ConfigError::OutOfRange {
                key: "lambda0",
                requirement: "non-negative and finite",
                value: lambda0,
            });
        }
        if !(cutoff > 0.0) || !cutoff.is_finite() {
            return Err(ConfigError::OutOfRange {
                key: "cutoff",
                requirement: "positive and finite",
                value: cutoff,
            });
        }
        let minimum = MIN_RESONANCES_BELOW_CUTOFF * PI / length;
        // Allow for the rounding in user-supplied multiples of π.
        if cutoff < minimum * (1.0 - 1e-12) {
            return Err(ConfigError::CutoffTooLow { cutoff, minimum });
        }
        if let LeftCoupling::FiniteG(g) = left_coupling {
            if !(g > 0.0) || !g.is_finite() {
                return Err(ConfigError::OutOfRange {
                    key: "left_coupling.g",
                    requirement: "positive and finite",
                    value: g,
                });
            }
        }
        if lambda0 * length > LARGE_COUPLING_WARNING {
            log::warn!(
                "lambda0 * length = {} is not small; second-order results may be unreliable",
                lambda0 * length
            );
        }
        Ok(Self {
            length,
            lambda0,
            cutoff,
            left_coupling,
        })
    }

    /// Dirichlet left mirror with the default cutoff 50π/L.
    pub fn dirichlet(length: f64, lambda0: f64) -> Result<Self, ConfigError> {
        Self::new(length, lambda0, default_cutoff(length), LeftCoupling::DirichletLimit)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn left_coupling(&self) -> LeftCoupling {
        self.left_coupling
    }

    /// Spacing of the cavity resonances, π/L.
    pub fn resonance_spacing(&self) -> f64 {
        PI / self.length
    }

    pub fn with_lambda0(&self, lambda0: f64) -> Result<Self, ConfigError> {
        Self::new(self.length, lambda0, self.cutoff, self.left_coupling)
    }

    pub fn with_length(&self, length: f64) -> Result<Self, ConfigError> {
        Self::new(length, self.lambda0, self.cutoff, self.left_coupling)
    }

    pub fn with_cutoff(&self, cutoff: f64) -> Result<Self, ConfigError> {
        Self::new(self.length, self.lambda0, cutoff, self.left_coupling)
    }

    /// Default quadrature settings for cavity integrands: hint = π/L.
    pub fn quadrature_spec(&self) -> QuadratureSpec {
        QuadratureSpec::default().with_hint(self.resonance_spacing())
    }

    /// `spec` with the π/L hint filled in when the caller gave none.
    pub fn hinted(&self, spec: &QuadratureSpec) -> QuadratureSpec {
        let mut s = *spec;
        if s.oscillation_period_hint.is_none() {
            s.oscillation_period_hint = Some(self.resonance_spacing());
        }
        s
    }

    pub(crate) fn require_dirichlet(&self) -> Result<(), ConfigError> {
        if self.left_coupling.is_dirichlet() {
            Ok(())
        } else {
            Err(ConfigError::NotDirichlet)
        }
    }
}

pub fn default_cutoff(length: f64) -> f64 {
    50.0 * PI / length
}

/// The field at a point as its right-moving (φ) and left-moving (ψ) parts.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ComplexAmplitudePair {
    pub right_moving: Complex64,
    pub left_moving: Complex64,
}

impl ComplexAmplitudePair {
    pub fn new(right_moving: Complex64, left_moving: Complex64) -> Self {
        Self {
            right_moving,
            left_moving,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.right_moving.is_finite() && self.left_moving.is_finite()
    }

    /// Apply a 2×2 matrix acting on the column vector (φ, ψ).
    pub fn transformed(&self, m: &nalgebra::Matrix2<Complex64>) -> Self {
        let v = m * nalgebra::Vector2::new(self.right_moving, self.left_moving);
        Self::new(v[0], v[1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_geometry() {
        assert!(CavityConfig::new(0.0, 0.1, 100.0, LeftCoupling::DirichletLimit).is_err());
        assert!(CavityConfig::new(-1.0, 0.1, 100.0, LeftCoupling::DirichletLimit).is_err());
        assert!(CavityConfig::new(1.0, -0.1, 100.0, LeftCoupling::DirichletLimit).is_err());
        assert!(CavityConfig::new(1.0, f64::NAN, 100.0, LeftCoupling::DirichletLimit).is_err());
        assert!(CavityConfig::new(1.0, 0.1, 100.0, LeftCoupling::FiniteG(0.0)).is_err());
    }

    #[test]
    fn cutoff_must_cover_ten_resonances() {
        let err = CavityConfig::new(1.0, 0.1, 9.9 * PI, LeftCoupling::DirichletLimit).unwrap_err();
        assert!(matches!(err, ConfigError::CutoffTooLow { .. }));
        assert!(CavityConfig::new(1.0, 0.1, 10.0 * PI, LeftCoupling::DirichletLimit).is_ok());
        // Longer cavity, denser resonances.
        assert!(CavityConfig::new(2.0, 0.1, 5.0 * PI, LeftCoupling::DirichletLimit).is_ok());
        assert!(CavityConfig::new(2.0, 0.1, 4.9 * PI, LeftCoupling::DirichletLimit).is_err());
    }

    #[test]
    fn default_cutoff_is_fifty_resonances() {
        let cfg = CavityConfig::dirichlet(2.0, 0.01).unwrap();
        assert!((cfg.cutoff() - 25.0 * PI).abs() < 1e-12);
        assert!(cfg.left_coupling().is_dirichlet());
    }

    #[test]
    fn zero_lambda_is_allowed() {
        assert!(CavityConfig::dirichlet(1.0, 0.0).is_ok());
    }

    #[test]
    fn amplitude_pair_transform() {
        let swap = nalgebra::Matrix2::new(
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        );
        let p = ComplexAmplitudePair::new(Complex64::new(1.0, 2.0), Complex64::new(3.0, 0.0));
        let q = p.transformed(&swap);
        assert_eq!(q.right_moving, p.left_moving);
        assert_eq!(q.left_moving, p.right_moving);
        assert!(q.is_finite());
    }
}
