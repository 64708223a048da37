//! Asymmetric dynamical Casimir radiation from a 1D cavity with a perfectly
//! reflecting left mirror and a transparency-modulated right mirror.
//!
//! Units are natural (ħ = c = 1) throughout. The crate computes the
//! perturbative scattering kernels, the emission spectrum and its moments,
//! the frequency-domain force on each mirror, and propelling efficiencies.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod config;
pub mod force;
pub mod grid;
pub mod modulation;
pub mod observables;
pub mod quadrature;
pub mod scattering;
pub mod settings;
pub mod validation;

pub use config::{CavityConfig, ComplexAmplitudePair, ConfigError, LeftCoupling};
pub use grid::{make_grid, make_symmetric_grid, FrequencyGrid};
pub use modulation::{ModulationProfile, SampledWindow};
pub use quadrature::{IntegralResult, QuadratureError, QuadratureSpec};
pub use observables::{RadiationTotals, SpectralDensity};
pub use settings::Settings;
