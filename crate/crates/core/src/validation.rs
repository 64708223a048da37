//! Brute-force reference values: composite Simpson and midpoint grids,
//! written without the adaptive engine, plus cross-formula checks.
//! Slow on purpose; used by tests and the CLI's verification mode.

use std::fmt;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::config::CavityConfig;
use crate::force::{force2, ForceError, Mirror};
use crate::modulation::ModulationProfile;
use crate::observables::{emission_spectrum, monochromatic_totals, spectrum_from_kernels, ObservableError};
use crate::quadrature::{integrate_1d_with_points, QuadratureSpec};
use crate::scattering::{ScatteringError, ScatteringKernels};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("Simpson's rule needs an even number of panels >= 2, got {0}")]
    OddPanels(usize),
    #[error("midpoint grid needs at least one cell per axis")]
    EmptyGrid,
    #[error("oracle not converged: doubling the resolution changed the value by {change:e}, above {target:e}")]
    NotConverged { change: f64, target: f64 },
    #[error("momentum trend needs a damped-cosine drive")]
    NotDampedCosine,
    #[error(transparent)]
    Observable(#[from] ObservableError),
    #[error(transparent)]
    Force(#[from] ForceError),
    #[error(transparent)]
    Scattering(#[from] ScatteringError),
}

/// Composite Simpson rule with `panels` (even) subintervals.
pub fn simpson(f: impl Fn(f64) -> f64 + Sync, a: f64, b: f64, panels: usize) -> Result<f64, ValidationError> {
    if panels < 2 || !panels.is_multiple_of(2) {
        return Err(ValidationError::OddPanels(panels));
    }
    let h = (b - a) / panels as f64;
    let interior: f64 = (1..panels)
        .into_par_iter()
        .map(|k| {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            w * f(a + h * k as f64)
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    Ok(h / 3.0 * (f(a) + interior + f(b)))
}

/// An oracle value together with the same computation at double resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleEstimate<T> {
    pub value: T,
    pub refined: T,
    pub resolution: (usize, usize),
}

impl OracleEstimate<f64> {
    pub fn change(&self) -> f64 {
        (self.refined - self.value).abs()
    }

    /// The refined value, provided doubling moved it by at most `target`.
    pub fn accept(&self, target: f64) -> Result<f64, ValidationError> {
        let change = self.change();
        if change <= target {
            Ok(self.refined)
        } else {
            Err(ValidationError::NotConverged { change, target })
        }
    }
}

impl OracleEstimate<Complex64> {
    pub fn change(&self) -> f64 {
        (self.refined - self.value).norm()
    }

    pub fn accept(&self, target: f64) -> Result<Complex64, ValidationError> {
        let change = self.change();
        if change <= target {
            Ok(self.refined)
        } else {
            Err(ValidationError::NotConverged { change, target })
        }
    }
}

/// Simpson at `panels` and `2·panels`.
pub fn oracle_integral_1d(
    f: impl Fn(f64) -> f64 + Sync,
    a: f64,
    b: f64,
    panels: usize,
) -> Result<OracleEstimate<f64>, ValidationError> {
    let value = simpson(&f, a, b, panels)?;
    let refined = simpson(&f, a, b, 2 * panels)?;
    Ok(OracleEstimate {
        value,
        refined,
        resolution: (panels, 2 * panels),
    })
}

/// Midpoint rule on an `nx × ny` grid over `[x0,x1] × [y0,y1]`. Rows are
/// summed in parallel and combined in order, so the result is reproducible.
pub fn midpoint_2d(
    f: impl Fn(f64, f64) -> Complex64 + Sync,
    x: (f64, f64),
    y: (f64, f64),
    nx: usize,
    ny: usize,
) -> Result<Complex64, ValidationError> {
    if nx == 0 || ny == 0 {
        return Err(ValidationError::EmptyGrid);
    }
    let hx = (x.1 - x.0) / nx as f64;
    let hy = (y.1 - y.0) / ny as f64;
    let rows: Vec<Complex64> = (0..nx)
        .into_par_iter()
        .map(|i| {
            let xi = x.0 + hx * (i as f64 + 0.5);
            (0..ny).map(|j| f(xi, y.0 + hy * (j as f64 + 0.5))).sum()
        })
        .collect();
    Ok(rows.iter().sum::<Complex64>() * (hx * hy))
}

/// Midpoint at `(nx, ny)` and `(2nx, 2ny)`.
pub fn oracle_integral_2d(
    f: impl Fn(f64, f64) -> Complex64 + Sync,
    x: (f64, f64),
    y: (f64, f64),
    nx: usize,
    ny: usize,
) -> Result<OracleEstimate<Complex64>, ValidationError> {
    let value = midpoint_2d(&f, x, y, nx, ny)?;
    let refined = midpoint_2d(&f, x, y, 2 * nx, 2 * ny)?;
    Ok(OracleEstimate {
        value,
        refined,
        resolution: (nx, ny),
    })
}

/// One reference comparison. The difference is recorded whether or not it passed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub quantity: String,
    pub oracle_value: f64,
    pub main_value: f64,
    pub relative_difference: f64,
    pub resolution: String,
    pub passed: bool,
}

impl OracleReport {
    /// `floor` keeps the relative difference meaningful when both values are
    /// at rounding level, as at the cavity resonances.
    pub fn compare(
        quantity: impl Into<String>,
        oracle_value: f64,
        main_value: f64,
        floor: f64,
        tolerance: f64,
        resolution: impl Into<String>,
    ) -> Self {
        let denom = oracle_value.abs().max(main_value.abs()).max(floor);
        let relative_difference = if denom > 0.0 {
            (oracle_value - main_value).abs() / denom
        } else {
            0.0
        };
        Self {
            quantity: quantity.into(),
            oracle_value,
            main_value,
            relative_difference,
            resolution: resolution.into(),
            passed: relative_difference <= tolerance,
        }
    }
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: oracle {:.10e}, main {:.10e}, rel diff {:.2e} ({})",
            if self.passed { "ok  " } else { "FAIL" },
            self.quantity,
            self.oracle_value,
            self.main_value,
            self.relative_difference,
            self.resolution
        )
    }
}

pub const SPECTRUM_AGREEMENT: f64 = 1e-6;

/// n(ω) from the explicit second-order formula against the trace over the
/// first-order kernels, at the given frequencies.
pub fn cross_check_spectrum_at(
    cfg: &CavityConfig,
    p: &ModulationProfile,
    omegas: &[f64],
    spec: &QuadratureSpec,
) -> Result<Vec<OracleReport>, ValidationError> {
    let kernels = ScatteringKernels::new(cfg, p)?;
    let pairs = omegas
        .par_iter()
        .map(|&w| -> Result<(f64, f64, f64), ValidationError> {
            let a = spectrum_from_kernels(&kernels, w, spec)?;
            let b = emission_spectrum(cfg, p, w, spec)?;
            Ok((w, a, b))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let peak = pairs.iter().fold(0.0f64, |m, (_, a, b)| m.max(*a).max(*b));
    Ok(pairs
        .into_iter()
        .map(|(w, a, b)| {
            OracleReport::compare(format!("n({w})"), a, b, 1e-10 * peak, SPECTRUM_AGREEMENT, "adaptive, trace form")
        })
        .collect())
}

/// [`cross_check_spectrum_at`] at `samples` frequencies drawn uniformly from
/// (0, 10π/L) with a seeded generator.
pub fn cross_check_spectrum(
    cfg: &CavityConfig,
    p: &ModulationProfile,
    samples: usize,
    seed: u64,
    spec: &QuadratureSpec,
) -> Result<Vec<OracleReport>, ValidationError> {
    let mut rng = StdRng::seed_from_u64(seed);
    let top = 10.0 * cfg.resonance_spacing();
    let omegas: Vec<f64> = (0..samples).map(|_| rng.random_range(1e-3..top)).collect();
    cross_check_spectrum_at(cfg, p, &omegas, spec)
}

/// Radiated momentum of a finite drive, P = ∫₀^Λ ω n(ω) dω.
pub fn radiated_momentum(cfg: &CavityConfig, p: &ModulationProfile, spec: &QuadratureSpec) -> Result<f64, ValidationError> {
    let inner = spec.with_rel_tol((spec.rel_tol / 10.0).max(1e-14));
    let points: Vec<f64> = p.spectral_features().iter().map(|f| f.center.abs()).collect();
    let failure = std::sync::Mutex::new(None);
    let r = integrate_1d_with_points(
        |w: f64| {
            if w <= 0.0 {
                return 0.0;
            }
            match emission_spectrum(cfg, p, w, &inner) {
                Ok(n) => w * n,
                Err(e) => {
                    failure.lock().unwrap().get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        cfg.cutoff(),
        &points,
        spec,
    )
    .map_err(ObservableError::from)?;
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e.into());
    }
    Ok(r.value)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendRow {
    pub cutoff: f64,
    pub decay_time: f64,
    /// Second-order F[0] summed over both mirrors.
    pub impulse: f64,
    /// Minus the radiated momentum of the finite drive.
    pub minus_momentum: f64,
    /// Minus the ΩT → ∞ momentum from the closed band integral.
    pub minus_momentum_monochromatic: f64,
    /// impulse / (-P); `None` when P vanishes.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendReport {
    pub rows: Vec<TrendRow>,
    /// Every step up in Λ (fixed T) or in T (fixed Λ) kept |ratio - 1| from growing.
    pub monotone: bool,
    pub warnings: Vec<String>,
}

/// Second-order impulse against the radiated momentum over a grid of
/// cutoffs and decay times. A trend away from 1 is reported, not raised.
pub fn momentum_conservation_trend(
    cfg: &CavityConfig,
    p: &ModulationProfile,
    cutoffs: &[f64],
    decay_times: &[f64],
    spec: &QuadratureSpec,
) -> Result<TrendReport, ValidationError> {
    let ModulationProfile::DampedCosine { omega, .. } = *p else {
        return Err(ValidationError::NotDampedCosine);
    };
    let mut rows = Vec::new();
    for &t in decay_times {
        for &cutoff in cutoffs {
            let c = cfg.with_cutoff(cutoff).map_err(ObservableError::from)?;
            let q = ModulationProfile::damped_cosine(omega, t).map_err(ObservableError::from)?;
            let f_spec = spec.with_rel_tol(spec.rel_tol.max(1e-6));
            let left = force2(&c, &q, Mirror::Left, 0.0, &f_spec)?.total().value;
            let right = force2(&c, &q, Mirror::Right, 0.0, &f_spec)?.total().value;
            let impulse = (left + right).re;
            let minus_momentum = -radiated_momentum(&c, &q, &c.quadrature_spec().with_rel_tol(1e-8))?;
            let mono = if omega > 0.0 {
                -monochromatic_totals(&c, omega, &c.quadrature_spec())?.momentum
            } else {
                0.0
            };
            let ratio = (minus_momentum != 0.0).then(|| impulse / minus_momentum);
            rows.push(TrendRow {
                cutoff,
                decay_time: t,
                impulse,
                minus_momentum,
                minus_momentum_monochromatic: mono,
                ratio,
            });
        }
    }
    let mut warnings = Vec::new();
    let dist = |r: &TrendRow| r.ratio.map(|x| (x - 1.0).abs());
    let check = |a: &TrendRow, b: &TrendRow, what: &str, warnings: &mut Vec<String>| {
        if let (Some(da), Some(db)) = (dist(a), dist(b)) {
            if db > da {
                warnings.push(format!(
                    "|ratio - 1| grew from {da:.6} to {db:.6} going {what} (Λ {} -> {}, T {} -> {})",
                    a.cutoff, b.cutoff, a.decay_time, b.decay_time
                ));
            }
        }
    };
    let nc = cutoffs.len();
    for ti in 0..decay_times.len() {
        for ci in 1..nc {
            check(&rows[ti * nc + ci - 1], &rows[ti * nc + ci], "up in Λ", &mut warnings);
        }
    }
    for ci in 0..nc {
        for ti in 1..decay_times.len() {
            check(&rows[(ti - 1) * nc + ci], &rows[ti * nc + ci], "up in T", &mut warnings);
        }
    }
    for w in &warnings {
        log::warn!("momentum trend: {w}");
    }
    Ok(TrendReport {
        rows,
        monotone: warnings.is_empty(),
        warnings,
    })
}
