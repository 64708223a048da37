//! Mean force on the two mirrors, order by order in λ₀, in the frequency
//! domain, plus the inverse transform to F(t) and the impulse F[0].
//!
//! The spatial axis points right: a negative impulse pushes the cavity to
//! the left. The bare frequency integrals diverge, so every result depends
//! on the cutoff Λ and carries it along. Full-line ranges are cut to
//! [-Λ, Λ].
//!
//! F(t) is real, so F[-ω] = conj F[ω]. The formulas are evaluated for ω ≥ 0
//! and negative frequencies are filled in by conjugation.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::config::{CavityConfig, ConfigError};
use crate::modulation::ModulationProfile;
use crate::observables::peak_points;
use crate::quadrature::{
    guarded_sinc_sq, integrate_1d, integrate_2d_with_points, one_minus_phase, one_minus_phase_over,
    IntegralResult, QuadratureError, QuadratureSpec, Rectangle,
};
use crate::scattering::Matrix2c;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ForceError {
    #[error("frequency {omega} must be finite and below the cutoff {cutoff}")]
    AboveCutoff { omega: f64, cutoff: f64 },
    #[error("force grid must be symmetric about 0 and contain 0")]
    NotSymmetric,
    #[error("force spectrum is empty")]
    Empty,
    #[error("order {0} is not computed; choose 1 or 2")]
    UnsupportedOrder(u8),
    #[error("time-domain force has imaginary residue {residue:e} relative to its real part")]
    ImaginaryResidue { residue: f64 },
    #[error("force failed at {} frequencies, first at ω = {}: {}", .0.len(), .0[0].omega, .0[0].message)]
    Points(Vec<PointFailure>),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointFailure {
    pub omega: f64,
    pub message: String,
}

/// η = diag(1, -1), the weight in the momentum density Tr[η ∂ₜΦ ∂ₜ′Φᵀ].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EtaMatrix;

impl EtaMatrix {
    pub fn matrix(&self) -> Matrix2c {
        Matrix2c::new(Complex64::new(1.0, 0.0), ZERO, ZERO, Complex64::new(-1.0, 0.0))
    }

    /// e^{iηωx} = diag(e^{iωx}, e^{-iωx}), the free propagation over a distance x.
    pub fn phase(&self, omega: f64, x: f64) -> Matrix2c {
        let p = Complex64::cis(omega * x);
        Matrix2c::new(p, ZERO, ZERO, p.conj())
    }

    /// Tr(η m).
    pub fn trace_weight(&self, m: &Matrix2c) -> Complex64 {
        m[(0, 0)] - m[(1, 1)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Mirror {
    /// The static mirror at x = -L.
    Left,
    /// The modulated mirror at x = 0.
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ForceOrder {
    Zeroth,
    First,
    Second,
    /// First plus second order.
    Summed,
}

impl ForceOrder {
    pub fn from_number(n: u8) -> Result<Self, ForceError> {
        match n {
            1 => Ok(Self::First),
            2 => Ok(Self::Second),
            other => Err(ForceError::UnsupportedOrder(other)),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Zeroth => "0",
            Self::First => "1",
            Self::Second => "2",
            Self::Summed => "1+2",
        }
    }
}

/// A force value with its error estimate and the magnitude scale of the
/// integrals it came from. Cancellations are judged against `scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ForceValue {
    pub value: Complex64,
    pub error_estimate: f64,
    pub scale: f64,
}

impl ForceValue {
    const ZERO: Self = Self {
        value: ZERO,
        error_estimate: 0.0,
        scale: 0.0,
    };

    fn conj(self) -> Self {
        Self {
            value: self.value.conj(),
            ..self
        }
    }
}

fn check_omega(cfg: &CavityConfig, omega: f64) -> Result<(), ForceError> {
    if !omega.is_finite() || omega.abs() >= cfg.cutoff() {
        return Err(ForceError::AboveCutoff {
            omega,
            cutoff: cfg.cutoff(),
        });
    }
    Ok(())
}

/// Zeroth order vanishes identically.
pub fn force0(_cfg: &CavityConfig, _p: &ModulationProfile, _mirror: Mirror, _omega: f64) -> Complex64 {
    ZERO
}

/// The two ω′ brackets of the first-order force, unsimplified.
fn brackets1(mirror: Mirror, omega: f64, length: f64) -> (impl Fn(f64) -> Complex64, impl Fn(f64) -> Complex64) {
    let e = move |x: f64| Complex64::cis(x * length);
    let one = Complex64::new(1.0, 0.0);
    let upper = move |w: f64| match mirror {
        Mirror::Left => (e(2.0 * w - omega) - one) - e(omega) * (one - e(2.0 * (w - omega))),
        Mirror::Right => {
            (one - e(2.0 * (w - omega))) + (one - e(2.0 * w)) * (e(2.0 * (omega - w)) - one)
                - e(2.0 * w) * (one - e(-2.0 * (w - omega)))
        }
    };
    let lower = move |w: f64| match mirror {
        Mirror::Left => e(omega) * (one - e(-2.0 * w)) - e(-(omega + 2.0 * w)) * (one - e(2.0 * w)),
        Mirror::Right => {
            e(2.0 * (omega - w)) * (one - e(2.0 * w)) - (e(-2.0 * w) - one) * (one - e(2.0 * w)) - (one - e(-2.0 * w))
        }
    };
    (upper, lower)
}

/// First-order force on one mirror,
/// F⁽¹⁾[ω] = (λ₀ f[ω] / 4i) (∫_ω^Λ dω′/2π B₁(ω′) + ∫_0^Λ dω′/2π B₂(ω′)).
pub fn force1(
    cfg: &CavityConfig,
    p: &ModulationProfile,
    mirror: Mirror,
    omega: f64,
    spec: &QuadratureSpec,
) -> Result<ForceValue, ForceError> {
    check_omega(cfg, omega)?;
    if omega < 0.0 {
        return Ok(force1(cfg, p, mirror, -omega, spec)?.conj());
    }
    if cfg.lambda0() == 0.0 {
        return Ok(ForceValue::ZERO);
    }
    let cutoff = cfg.cutoff();
    // The brackets are O(1) on a range of length Λ; ask for no more than
    // rounding allows.
    let mut s = cfg.hinted(spec);
    s.abs_tol = s.abs_tol.max(s.rel_tol * cutoff);
    let (upper, lower) = brackets1(mirror, omega, cfg.length());
    let a: IntegralResult<Complex64> = integrate_1d(upper, omega, cutoff, &s)?;
    let b: IntegralResult<Complex64> = integrate_1d(lower, 0.0, cutoff, &s)?;
    let front = p.fourier(omega) / Complex64::new(0.0, 4.0 * 2.0 * PI);
    let lambda0 = cfg.lambda0();
    Ok(ForceValue {
        value: front * (a.value + b.value) * lambda0,
        error_estimate: front.norm() * (a.error_estimate + b.error_estimate) * lambda0,
        scale: front.norm() * (a.abs_integral + b.abs_integral) * lambda0,
    })
}

/// Labels of the second-order terms: three per mirror.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Force2Term {
    L1,
    L2,
    L3,
    R1,
    R2,
    R3,
}

impl Force2Term {
    pub const ALL: [Self; 6] = [Self::L1, Self::L2, Self::L3, Self::R1, Self::R2, Self::R3];

    pub fn mirror(&self) -> Mirror {
        match self {
            Self::L1 | Self::L2 | Self::L3 => Mirror::Left,
            _ => Mirror::Right,
        }
    }

    pub fn for_mirror(mirror: Mirror) -> [Self; 3] {
        match mirror {
            Mirror::Left => [Self::L1, Self::L2, Self::L3],
            Mirror::Right => [Self::R1, Self::R2, Self::R3],
        }
    }
}

/// Integration region of a term: `(outer ω′ range, inner ω″ range)`.
pub fn term_region(term: Force2Term, omega: f64, cutoff: f64) -> Rectangle {
    let full = (-cutoff, cutoff);
    let half = (0.0, cutoff);
    match term {
        Force2Term::L1 | Force2Term::R1 => Rectangle::new(full, half),
        Force2Term::L2 | Force2Term::R3 => Rectangle::new(half, full),
        Force2Term::L3 => Rectangle::new((0.0, omega), full),
        Force2Term::R2 => Rectangle::new((omega, cutoff), full),
    }
}

/// Coefficient in front of a term's double integral (dω′/2π dω″/2π
/// included), with λ₀² left out.
pub fn term_prefactor(term: Force2Term, p: &ModulationProfile, omega: f64, length: f64) -> Complex64 {
    let c = 1.0 / (4.0 * PI * PI);
    match term {
        Force2Term::L1 => -0.25 * c * p.fourier(omega) * Complex64::cis(omega * length),
        Force2Term::R1 => 0.25 * c * p.fourier(omega),
        Force2Term::L2 | Force2Term::R2 => Complex64::new(-0.125 * c, 0.0),
        Force2Term::L3 | Force2Term::R3 => Complex64::new(0.125 * c, 0.0),
    }
}

/// Integrand of a term, without its prefactor. Every 1/ω′, 1/ω″ and
/// 1/(ω′-ω) sits next to a factor that vanishes there, and those pairs are
/// evaluated in a regularised form.
pub fn term_integrand(
    term: Force2Term,
    p: &ModulationProfile,
    omega: f64,
    length: f64,
) -> impl Fn(f64, f64) -> Complex64 + '_ {
    let l = length;
    let e = move |x: f64| Complex64::cis(x * l);
    let opo = move |x: f64, s: f64| one_minus_phase_over(x, l, s);
    let sin_sq4 = move |x: f64| 4.0 * (x * l).sin().powi(2);
    move |wp: f64, wpp: f64| match term {
        Force2Term::L1 => p.fourier(wp - wpp) * (l * guarded_sinc_sq(wpp * l)),
        Force2Term::R1 => {
            p.fourier(wp - wpp) * (l * guarded_sinc_sq(wpp * l) * (1.0 - sin_sq4(wp) * sin_sq4(omega - wp)))
        }
        Force2Term::L2 => {
            let f = p.fourier(omega - wp - wpp) * p.fourier(wp + wpp);
            f * (e(omega) * opo(wpp, 1.0) * opo(wp, -1.0) + e(omega - 2.0 * wp + 2.0 * wpp) * opo(wp, 1.0) * opo(wpp, -1.0))
        }
        Force2Term::L3 => {
            let x = wp - omega;
            let f = p.fourier(wp - wpp) * p.fourier(omega - wp + wpp);
            f * (e(omega) * opo(wpp, 1.0) * opo(x, 1.0)
                - e(4.0 * wp + 2.0 * wpp - 3.0 * omega) * opo(wpp, -1.0) * opo(x, -1.0))
        }
        Force2Term::R2 => {
            let y = omega - wp;
            let f = p.fourier(wp - wpp) * p.fourier(omega - wp + wpp);
            f * (e(2.0 * (wp + wpp)) * opo(wpp, -1.0) * opo(y, 1.0)
                - (e(2.0 * y) * one_minus_phase(wp * l, 1.0) * opo(wpp, 1.0) * opo(y, 1.0)
                    + opo(wpp, 1.0) * opo(y, -1.0)))
        }
        Force2Term::R3 => {
            let f = p.fourier(omega - wp - wpp) * p.fourier(wp + wpp);
            f * (e(2.0 * (omega - wp + wpp)) * opo(wp, 1.0) * opo(wpp, -1.0)
                + e(2.0 * wp) * one_minus_phase((omega - wp) * l, 1.0) * opo(wp, 1.0) * opo(wpp, 1.0)
                + opo(wp, -1.0) * opo(wpp, 1.0))
        }
    }
}

fn outer_points(p: &ModulationProfile, omega: f64, cutoff: f64) -> Vec<f64> {
    [0.0, omega, cutoff, -cutoff, omega + cutoff, omega - cutoff]
        .iter()
        .flat_map(|&shift| peak_points(p, shift, 1.0))
        .collect()
}

fn inner_points(term: Force2Term, p: &ModulationProfile, omega: f64, wp: f64) -> Vec<f64> {
    let shifts: &[f64] = match term {
        Force2Term::L1 | Force2Term::R1 => &[wp],
        Force2Term::L2 | Force2Term::R3 => &[omega - wp, -wp],
        Force2Term::L3 | Force2Term::R2 => &[wp, wp - omega],
    };
    let mut pts: Vec<f64> = shifts.iter().flat_map(|&s| peak_points(p, s, 1.0)).collect();
    pts.push(0.0);
    pts
}

/// One second-order term: the integral with prefactor and λ₀² applied.
pub fn force2_term(
    cfg: &CavityConfig,
    p: &ModulationProfile,
    term: Force2Term,
    omega: f64,
    spec: &QuadratureSpec,
) -> Result<ForceValue, ForceError> {
    check_omega(cfg, omega)?;
    if omega < 0.0 {
        return Ok(force2_term(cfg, p, term, -omega, spec)?.conj());
    }
    let lambda_sq = cfg.lambda0() * cfg.lambda0();
    let region = term_region(term, omega, cfg.cutoff());
    if lambda_sq == 0.0 || region.x.0 == region.x.1 {
        return Ok(ForceValue::ZERO);
    }
    let s = cfg.hinted(spec);
    let outer = outer_points(p, omega, cfg.cutoff());
    let r: IntegralResult<Complex64> = integrate_2d_with_points(
        term_integrand(term, p, omega, cfg.length()),
        region,
        &outer,
        |wp| inner_points(term, p, omega, wp),
        &s,
    )?;
    let front = term_prefactor(term, p, omega, cfg.length());
    Ok(ForceValue {
        value: front * r.value * lambda_sq,
        error_estimate: front.norm() * r.error_estimate * lambda_sq,
        scale: front.norm() * r.abs_integral * lambda_sq,
    })
}

/// Second-order force on one mirror with its per-term breakdown.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Force2Breakdown {
    pub mirror: Mirror,
    pub omega: f64,
    pub terms: Vec<(Force2Term, ForceValue)>,
}

impl Force2Breakdown {
    pub fn total(&self) -> ForceValue {
        self.terms.iter().fold(ForceValue::ZERO, |acc, (_, v)| ForceValue {
            value: acc.value + v.value,
            error_estimate: acc.error_estimate + v.error_estimate,
            scale: acc.scale + v.scale,
        })
    }

    pub fn term(&self, t: Force2Term) -> Option<ForceValue> {
        self.terms.iter().find(|(k, _)| *k == t).map(|(_, v)| *v)
    }
}

pub fn force2(
    cfg: &CavityConfig,
    p: &ModulationProfile,
    mirror: Mirror,
    omega: f64,
    spec: &QuadratureSpec,
) -> Result<Force2Breakdown, ForceError> {
    let terms = Force2Term::for_mirror(mirror)
        .iter()
        .map(|&t| force2_term(cfg, p, t, omega, spec).map(|v| (t, v)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Force2Breakdown { mirror, omega, terms })
}

fn force_at(
    cfg: &CavityConfig,
    p: &ModulationProfile,
    mirror: Mirror,
    order: ForceOrder,
    omega: f64,
    spec: &QuadratureSpec,
) -> Result<ForceValue, ForceError> {
    match order {
        ForceOrder::Zeroth => Ok(ForceValue::ZERO),
        ForceOrder::First => force1(cfg, p, mirror, omega, spec),
        ForceOrder::Second => Ok(force2(cfg, p, mirror, omega, spec)?.total()),
        ForceOrder::Summed => {
            let a = force1(cfg, p, mirror, omega, spec)?;
            let b = force2(cfg, p, mirror, omega, spec)?.total();
            Ok(ForceValue {
                value: a.value + b.value,
                error_estimate: a.error_estimate + b.error_estimate,
                scale: a.scale + b.scale,
            })
        }
    }
}

/// Force on both mirrors at one order, sampled on a grid symmetric about 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForceSpectrum {
    order: ForceOrder,
    frequencies: Vec<f64>,
    left: Vec<ForceValue>,
    right: Vec<ForceValue>,
    cutoff: f64,
}

impl ForceSpectrum {
    pub fn order(&self) -> ForceOrder {
        self.order
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn mirror(&self, mirror: Mirror) -> &[ForceValue] {
        match mirror {
            Mirror::Left => &self.left,
            Mirror::Right => &self.right,
        }
    }

    /// F[ω] = F[ω, -L] + F[ω, 0].
    pub fn total(&self) -> Vec<Complex64> {
        self.left.iter().zip(&self.right).map(|(a, b)| a.value + b.value).collect()
    }

    /// Magnitude scale of the total at each frequency.
    pub fn scale(&self) -> Vec<f64> {
        self.left.iter().zip(&self.right).map(|(a, b)| a.scale + b.scale).collect()
    }

    pub fn zero_index(&self) -> Option<usize> {
        self.frequencies.iter().position(|w| *w == 0.0)
    }

    /// Pointwise sum of two spectra on the same grid.
    pub fn summed(&self, other: &Self) -> Result<Self, ForceError> {
        if self.frequencies != other.frequencies {
            return Err(ForceError::NotSymmetric);
        }
        let add = |a: &[ForceValue], b: &[ForceValue]| {
            a.iter()
                .zip(b)
                .map(|(x, y)| ForceValue {
                    value: x.value + y.value,
                    error_estimate: x.error_estimate + y.error_estimate,
                    scale: x.scale + y.scale,
                })
                .collect()
        };
        Ok(Self {
            order: ForceOrder::Summed,
            frequencies: self.frequencies.clone(),
            left: add(&self.left, &other.left),
            right: add(&self.right, &other.right),
            cutoff: self.cutoff,
        })
    }
}

fn check_symmetric(grid: &[f64]) -> Result<(), ForceError> {
    if grid.is_empty() {
        return Err(ForceError::Empty);
    }
    let n = grid.len();
    let symmetric = (0..n).all(|k| {
        let (a, b) = (grid[k], -grid[n - 1 - k]);
        (a - b).abs() <= 1e-12 * a.abs().max(1.0)
    });
    if !symmetric || !grid.contains(&0.0) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ForceError::NotSymmetric);
    }
    Ok(())
}

/// Force spectrum at one order. Points with ω ≥ 0 are computed in parallel;
/// the rest follow from F[-ω] = conj F[ω].
pub fn force_spectrum(
    cfg: &CavityConfig,
    p: &ModulationProfile,
    grid: &[f64],
    order: ForceOrder,
    spec: &QuadratureSpec,
) -> Result<ForceSpectrum, ForceError> {
    check_symmetric(grid)?;
    let n = grid.len();
    let mid = n / 2;
    let computed: Vec<Result<(ForceValue, ForceValue), PointFailure>> = grid[mid..]
        .par_iter()
        .map(|&w| {
            let get = |m| force_at(cfg, p, m, order, w, spec);
            get(Mirror::Left).and_then(|l| Ok((l, get(Mirror::Right)?))).map_err(|e| PointFailure {
                omega: w,
                message: e.to_string(),
            })
        })
        .collect();
    let failures: Vec<PointFailure> = computed.iter().filter_map(|r| r.as_ref().err().cloned()).collect();
    if !failures.is_empty() {
        return Err(ForceError::Points(failures));
    }
    let half: Vec<(ForceValue, ForceValue)> = computed.into_iter().map(|r| r.unwrap()).collect();
    let mut left = Vec::with_capacity(n);
    let mut right = Vec::with_capacity(n);
    for (l, r) in half[1..].iter().rev() {
        left.push(l.conj());
        right.push(r.conj());
    }
    for (l, r) in &half {
        left.push(*l);
        right.push(*r);
    }
    Ok(ForceSpectrum {
        order,
        frequencies: grid.to_vec(),
        left,
        right,
        cutoff: cfg.cutoff(),
    })
}

/// First- and second-order spectra, stored separately.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TotalForceSpectrum {
    pub first: ForceSpectrum,
    pub second: ForceSpectrum,
}

impl TotalForceSpectrum {
    pub fn summed(&self) -> ForceSpectrum {
        self.first.summed(&self.second).expect("orders share one grid")
    }
}

pub fn total_force_spectrum(
    cfg: &CavityConfig,
    p: &ModulationProfile,
    grid: &[f64],
    spec: &QuadratureSpec,
) -> Result<TotalForceSpectrum, ForceError> {
    Ok(TotalForceSpectrum {
        first: force_spectrum(cfg, p, grid, ForceOrder::First, spec)?,
        second: force_spectrum(cfg, p, grid, ForceOrder::Second, spec)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSignal {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Grid spacing exceeds π/(4 max|t|); values may be aliased.
    pub alias_risk: bool,
}

/// Total force in time, F(t) = ∫dω/2π F[ω] e^{-iωt}, by the trapezoid rule
/// over the sampled band.
pub fn time_domain(fs: &ForceSpectrum, times: &[f64]) -> Result<TimeSignal, ForceError> {
    transform_to_time(fs.frequencies(), &fs.total(), times)
}

/// The inverse transform used by [`time_domain`], for any sampled spectrum.
pub fn transform_to_time(frequencies: &[f64], values: &[Complex64], times: &[f64]) -> Result<TimeSignal, ForceError> {
    if frequencies.len() < 2 || values.len() != frequencies.len() {
        return Err(ForceError::Empty);
    }
    let spacing = frequencies.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let t_max = times.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let alias_risk = t_max > 0.0 && spacing > PI / (4.0 * t_max);
    if alias_risk {
        log::warn!("force grid spacing {spacing} exceeds π/(4·{t_max}); time-domain values may be aliased");
    }
    let raw: Vec<Complex64> = times
        .par_iter()
        .map(|&t| {
            let g = |k: usize| values[k] * Complex64::cis(-frequencies[k] * t);
            let sum: Complex64 = (1..frequencies.len())
                .map(|k| (g(k - 1) + g(k)) * (0.5 * (frequencies[k] - frequencies[k - 1])))
                .sum();
            sum / (2.0 * PI)
        })
        .collect();
    let re_max = raw.iter().fold(0.0f64, |m, z| m.max(z.re.abs()));
    let im_max = raw.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
    if im_max > 1e-6 * re_max && im_max > 0.0 {
        return Err(ForceError::ImaginaryResidue {
            residue: if re_max > 0.0 { im_max / re_max } else { f64::INFINITY },
        });
    }
    Ok(TimeSignal {
        times: times.to_vec(),
        values: raw.iter().map(|z| z.re).collect(),
        alias_risk,
    })
}

/// ∫dt F(t) = F[0], the real part of the total at ω = 0.
pub fn impulse(fs: &ForceSpectrum) -> Result<f64, ForceError> {
    let k = fs.zero_index().ok_or(ForceError::NotSymmetric)?;
    let total = fs.total()[k];
    let scale = fs.scale()[k].max(total.re.abs());
    if total.im.abs() > 1e-9 * scale {
        log::warn!(
            "impulse has imaginary residue {:e} against scale {:e}",
            total.im,
            scale
        );
    }
    Ok(total.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scattering::{dirichlet_kernel0, local_mirror_matrix, MirrorCoupling};

    fn setup(lambda0: f64) -> (CavityConfig, ModulationProfile) {
        (
            CavityConfig::new(1.0, lambda0, 10.0 * PI, Default::default()).unwrap(),
            ModulationProfile::damped_cosine(3.0, 5.0).unwrap(),
        )
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1.0)
    }

    #[test]
    fn eta_conjugates_dirichlet_mirror_into_cavity_kernel() {
        let cfg = CavityConfig::dirichlet(1.3, 0.01).unwrap();
        let eta = EtaMatrix;
        let mirror = local_mirror_matrix(MirrorCoupling::Infinite, 0.7).unwrap();
        for w in [-2.0, 0.0, 0.7, 5.1] {
            let m = eta.phase(w, cfg.length()) * mirror * eta.phase(-w, cfg.length());
            let s0 = dirichlet_kernel0(&cfg, w);
            assert!((m - s0).norm() < 1e-14, "ω = {w}");
        }
        assert_eq!(eta.trace_weight(&eta.matrix()), Complex64::new(2.0, 0.0));
    }

    #[test]
    fn brackets_match_simplified_forms() {
        let l = 1.0;
        for &w in &[0.0, 0.4, 2.3] {
            let a = Complex64::cis(w * l);
            let (lu, ll) = brackets1(Mirror::Left, w, l);
            let (ru, rl) = brackets1(Mirror::Right, w, l);
            for &u in &[0.1, 1.7, 9.3] {
                let z = Complex64::cis(2.0 * u * l);
                let one = Complex64::new(1.0, 0.0);
                assert!(close(lu(u), 2.0 * z / a - one - a, 1e-14));
                assert!(close(ll(u), a - a / z - one / (a * z) + one / a, 1e-14));
                assert!(close(ru(u), a * a / z - z / (a * a), 1e-14));
                assert!(close(rl(u), a * a / z - a * a + one - z, 1e-14));
            }
        }
    }

    #[test]
    fn zero_coupling_gives_zero_force() {
        let (cfg, p) = setup(0.0);
        let spec = cfg.quadrature_spec();
        for m in [Mirror::Left, Mirror::Right] {
            assert_eq!(force1(&cfg, &p, m, 0.5, &spec).unwrap().value, ZERO);
            assert_eq!(force2(&cfg, &p, m, 0.5, &spec).unwrap().total().value, ZERO);
            assert_eq!(force0(&cfg, &p, m, 0.5), ZERO);
        }
    }

    #[test]
    fn first_order_is_linear_in_coupling() {
        let (cfg, p) = setup(0.01);
        let cfg2 = cfg.with_lambda0(0.02).unwrap();
        let spec = cfg.quadrature_spec();
        for m in [Mirror::Left, Mirror::Right] {
            let a = force1(&cfg, &p, m, 1.1, &spec).unwrap().value;
            let b = force1(&cfg2, &p, m, 1.1, &spec).unwrap().value;
            assert_eq!(b, a * 2.0);
        }
    }

    #[test]
    fn first_order_impulse_cancels() {
        let p = ModulationProfile::damped_cosine(3.0, 50.0).unwrap();
        for cutoff in [10.0 * PI, 10.25 * PI, 25.0 * PI] {
            let cfg = CavityConfig::new(1.0, 0.01, cutoff, Default::default()).unwrap();
            let spec = cfg.quadrature_spec();
            let l = force1(&cfg, &p, Mirror::Left, 0.0, &spec).unwrap();
            let r = force1(&cfg, &p, Mirror::Right, 0.0, &spec).unwrap();
            let scale = l.scale.max(r.scale);
            assert!((l.value + r.value).norm() <= 1e-8 * scale, "Λ = {cutoff}");
        }
    }

    #[test]
    fn first_order_vanishes_with_spectrum() {
        let cfg = CavityConfig::new(1.0, 0.01, 10.0 * PI, Default::default()).unwrap();
        let p = ModulationProfile::gaussian(3.0, 20.0).unwrap();
        // f[0] underflows for a narrow Gaussian pulse far from its centre.
        let v = force1(&cfg, &p, Mirror::Right, 0.0, &cfg.quadrature_spec()).unwrap();
        assert_eq!(v.value, ZERO);
    }

    #[test]
    fn rejects_frequency_above_cutoff() {
        let (cfg, p) = setup(0.01);
        let spec = cfg.quadrature_spec();
        assert!(force1(&cfg, &p, Mirror::Left, 40.0, &spec).is_err());
        assert!(force1(&cfg, &p, Mirror::Left, f64::NAN, &spec).is_err());
    }

    #[test]
    fn negative_frequency_is_conjugate() {
        let (cfg, p) = setup(0.01);
        let spec = cfg.quadrature_spec();
        let a = force1(&cfg, &p, Mirror::Right, 0.8, &spec).unwrap().value;
        let b = force1(&cfg, &p, Mirror::Right, -0.8, &spec).unwrap().value;
        assert_eq!(a, b.conj());
    }

    /// The unsimplified second-order integrands, divisions and all.
    fn literal(term: Force2Term, p: &ModulationProfile, w: f64, l: f64, wp: f64, wpp: f64) -> Complex64 {
        let e = |x: f64| Complex64::cis(x * l);
        let one = Complex64::new(1.0, 0.0);
        let two = Complex64::new(2.0, 0.0);
        let f = |x: f64| p.fourier(x);
        let s = |x: f64| two - e(2.0 * x) - e(-2.0 * x);
        match term {
            Force2Term::L1 => s(wpp) * f(wp - wpp) / wpp,
            Force2Term::R1 => f(wp - wpp) * (s(wpp) / wpp - s(wp) * s(wpp) * s(w - wp) / wpp),
            Force2Term::L2 => {
                f(w - wp - wpp)
                    * f(wp + wpp)
                    * (e(w) * (one - e(2.0 * wpp)) * (one - e(-2.0 * wp)) / (wp * wpp)
                        + e(w - 2.0 * wp + 2.0 * wpp) * (e(2.0 * wp) - one) * (e(-2.0 * wpp) - one) / (wp * wpp))
            }
            Force2Term::L3 => {
                f(wp - wpp)
                    * f(w - wp + wpp)
                    * (e(w) * (one - e(2.0 * wpp)) * (one - e(2.0 * (wp - w))) / (wpp * (wp - w))
                        - e(4.0 * wp + 2.0 * wpp - 3.0 * w) * (e(-2.0 * wpp) - one) * (e(-2.0 * (wp - w)) - one)
                            / (wpp * (wp - w)))
            }
            Force2Term::R2 => {
                let d = wpp * (w - wp);
                f(wp - wpp)
                    * f(w - wp + wpp)
                    * (e(2.0 * (wp + wpp)) * (e(-2.0 * wpp) - one) * (e(-2.0 * (wp - w)) - one) / d
                        - (e(2.0 * (w - wp)) * (one - e(2.0 * wp)) * (one - e(2.0 * wpp)) * (one - e(2.0 * (w - wp)))
                            + (one - e(2.0 * wpp)) * (one - e(-2.0 * (w - wp))))
                            / d)
            }
            Force2Term::R3 => {
                let d = wp * wpp;
                f(w - wp - wpp)
                    * f(wp + wpp)
                    * (e(2.0 * (w - wp + wpp)) * (e(2.0 * wp) - one) * (e(-2.0 * wpp) - one) / d
                        + (e(2.0 * wp) * (one - e(2.0 * (w - wp))) * (one - e(2.0 * wp)) * (one - e(2.0 * wpp))
                            + (one - e(-2.0 * wp)) * (one - e(2.0 * wpp)))
                            / d)
            }
        }
    }

    #[test]
    fn regularised_integrands_match_literal_forms() {
        let p = ModulationProfile::damped_cosine(3.0, 5.0).unwrap();
        let l = 1.3;
        for term in Force2Term::ALL {
            for &w in &[0.0, 0.9, 3.2] {
                let g = term_integrand(term, &p, w, l);
                for &(wp, wpp) in &[(0.37, 1.21), (-2.5, 0.8), (4.1, -3.3), (2.9, 0.013)] {
                    let got = g(wp, wpp);
                    let want = literal(term, &p, w, l, wp, wpp);
                    assert!((got - want).norm() <= 1e-11 * want.norm().max(1e-3), "{term:?} ω={w} ({wp},{wpp})");
                }
            }
        }
    }

    #[test]
    fn regularised_integrands_are_finite_at_singular_lines() {
        let p = ModulationProfile::damped_cosine(3.0, 5.0).unwrap();
        for term in Force2Term::ALL {
            let g = term_integrand(term, &p, 1.5, 1.0);
            for &(wp, wpp) in &[(0.0, 0.0), (1.5, 0.0), (0.0, 2.0), (1.5, 1.0)] {
                assert!(g(wp, wpp).is_finite(), "{term:?} at ({wp},{wpp})");
            }
            let near = g(1.5 + 1e-9, 1e-9);
            let at = g(1.5, 0.0);
            assert!((near - at).norm() < 1e-6 * at.norm().max(1.0), "{term:?}");
        }
    }

    #[test]
    fn order_numbers() {
        assert_eq!(ForceOrder::from_number(1).unwrap(), ForceOrder::First);
        assert_eq!(ForceOrder::from_number(2).unwrap(), ForceOrder::Second);
        assert!(ForceOrder::from_number(0).is_err());
        assert!(ForceOrder::from_number(3).is_err());
    }

    #[test]
    fn spectrum_reality_and_zero_order() {
        let (cfg, p) = setup(0.01);
        let grid = [-1.0, -0.5, 0.0, 0.5, 1.0];
        let spec = cfg.quadrature_spec();
        let fs = force_spectrum(&cfg, &p, &grid, ForceOrder::First, &spec).unwrap();
        let tot = fs.total();
        for k in 0..grid.len() {
            assert_eq!(tot[k], tot[grid.len() - 1 - k].conj());
        }
        let zero = force_spectrum(&cfg, &p, &grid, ForceOrder::Zeroth, &spec).unwrap();
        assert!(zero.total().iter().all(|z| *z == ZERO));
        assert_eq!(impulse(&zero).unwrap(), 0.0);
        assert!(force_spectrum(&cfg, &p, &[0.0, 0.5], ForceOrder::First, &spec).is_err());
        assert!(force_spectrum(&cfg, &p, &[-1.0, 1.0], ForceOrder::First, &spec).is_err());
    }

    #[test]
    fn zero_spectrum_zero_signal() {
        let freqs: Vec<f64> = (-10..=10).map(|k| k as f64 * 0.1).collect();
        let s = transform_to_time(&freqs, &vec![ZERO; freqs.len()], &[0.0, 1.0, 2.0]).unwrap();
        assert!(s.values.iter().all(|v| *v == 0.0));
        assert!(!s.alias_risk);
        let s = transform_to_time(&freqs, &vec![ZERO; freqs.len()], &[100.0]).unwrap();
        assert!(s.alias_risk);
    }

    #[test]
    fn odd_imaginary_spectrum_is_rejected_when_not_hermitian() {
        let freqs: Vec<f64> = (-10..=10).map(|k| k as f64 * 0.1).collect();
        let vals: Vec<Complex64> = freqs.iter().map(|_| Complex64::new(0.0, 1.0)).collect();
        assert!(matches!(
            transform_to_time(&freqs, &vals, &[0.0]),
            Err(ForceError::ImaginaryResidue { .. })
        ));
    }
}
