//! Adaptive Gauss-Kronrod integration for the oscillatory, Lorentzian-peaked
//! integrands that appear in the spectrum and force formulas.
//!
//! The engine is a global-adaptive G10/K21 scheme. Panels are bisected one at
//! a time, always the panel with the largest error estimate (lowest position
//! wins ties), so the subdivision sequence is a pure function of the inputs.
//! Singularities are never handled here: callers rewrite removable ones with
//! [`guarded_sinc_sq`], [`sinc`] and [`one_minus_phase_over`].

use std::cell::Cell;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Kronrod abscissae on [-1, 1], positive half, descending; the last entry is the centre.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_136_239_925,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// 10-point Gauss weights for the odd-indexed Kronrod abscissae.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Cap on the number of initial panels generated from the oscillation hint.
const MAX_INITIAL_PANELS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Initial panels are no wider than a quarter of this period.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oscillation_period_hint: Option<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_subdivisions: 2000,
            oscillation_period_hint: None,
        }
    }
}

impl QuadratureSpec {
    pub fn new(rel_tol: f64, abs_tol: f64, max_subdivisions: usize) -> Result<Self, QuadratureError> {
        let spec = Self {
            rel_tol,
            abs_tol,
            max_subdivisions,
            oscillation_period_hint: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), QuadratureError> {
        if !(self.rel_tol >= 1e-14) || !self.rel_tol.is_finite() {
            return Err(QuadratureError::InvalidSpec(format!(
                "rel_tol must be >= 1e-14, got {}",
                self.rel_tol
            )));
        }
        if !(self.abs_tol > 0.0) || !self.abs_tol.is_finite() {
            return Err(QuadratureError::InvalidSpec(format!(
                "abs_tol must be positive, got {}",
                self.abs_tol
            )));
        }
        if self.max_subdivisions < 1 {
            return Err(QuadratureError::InvalidSpec("max_subdivisions must be >= 1".into()));
        }
        if let Some(h) = self.oscillation_period_hint {
            if !(h > 0.0) || !h.is_finite() {
                return Err(QuadratureError::InvalidSpec(format!(
                    "oscillation_period_hint must be positive, got {h}"
                )));
            }
        }
        Ok(())
    }

    pub fn with_hint(mut self, period: f64) -> Self {
        self.oscillation_period_hint = Some(period);
        self
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_max_subdivisions(mut self, n: usize) -> Self {
        self.max_subdivisions = n;
        self
    }

    /// Tolerance handed to the inner pass of a nested integral.
    fn inner(&self) -> Self {
        Self {
            rel_tol: (self.rel_tol / 10.0).max(1e-14),
            abs_tol: self.abs_tol / 10.0,
            ..*self
        }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralResult<T> {
    pub value: T,
    pub error_estimate: f64,
    pub subdivisions_used: usize,
    /// Estimate of the integral of |f|, the natural magnitude scale of the result.
    pub abs_integral: f64,
    /// Physical cutoff used as the upper limit, when the range was cut.
    pub cutoff: Option<f64>,
}

impl<T: QuadValue> IntegralResult<T> {
    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> IntegralResult<U> {
        IntegralResult {
            value: f(self.value),
            error_estimate: self.error_estimate,
            subdivisions_used: self.subdivisions_used,
            abs_integral: self.abs_integral,
            cutoff: self.cutoff,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("empty integration range [{a}, {b}]")]
    EmptyRange { a: f64, b: f64 },
    #[error("non-finite integration bound [{a}, {b}]")]
    NonFiniteBound { a: f64, b: f64 },
    #[error("integrand is not finite at x = {x}")]
    NonFiniteIntegrand { x: f64 },
    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(String),
    #[error(
        "tolerance not reached after {subdivisions} subdivisions \
         (best value {value}, error estimate {error_estimate:e})"
    )]
    ToleranceNotReached {
        value: Complex64,
        error_estimate: f64,
        subdivisions: usize,
    },
}

impl QuadratureError {
    /// Best available value when the only failure was the tolerance.
    pub fn best_value(&self) -> Option<Complex64> {
        match self {
            Self::ToleranceNotReached { value, .. } => Some(*value),
            _ => None,
        }
    }
}

/// Values the engine can integrate: real or complex, plus the error-carrying
/// wrapper used by nested passes.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    const ZERO: Self;
    fn magnitude(&self) -> f64;
    fn is_finite_value(&self) -> bool;
    fn to_complex(&self) -> Complex64;
    /// Error already committed by an inner integration, integrated along with the value.
    fn carried_error(&self) -> f64 {
        0.0
    }
}

impl QuadValue for f64 {
    const ZERO: Self = 0.0;
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
    fn to_complex(&self) -> Complex64 {
        Complex64::new(*self, 0.0)
    }
}

impl QuadValue for Complex64 {
    const ZERO: Self = Complex64::new(0.0, 0.0);
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn is_finite_value(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn to_complex(&self) -> Complex64 {
        *self
    }
}

/// Inner-integral value paired with its error estimate.
#[derive(Debug, Clone, Copy)]
struct Tracked<T> {
    value: T,
    error: f64,
}

impl<T: QuadValue> Add for Tracked<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            value: self.value + rhs.value,
            error: self.error + rhs.error,
        }
    }
}

impl<T: QuadValue> Sub for Tracked<T> {
    type Output = Self;
    // The error channel only ever accumulates.
    fn sub(self, rhs: Self) -> Self {
        Self {
            value: self.value - rhs.value,
            error: self.error + rhs.error,
        }
    }
}

impl<T: QuadValue> Mul<f64> for Tracked<T> {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Self {
            value: self.value * rhs,
            error: self.error * rhs.abs(),
        }
    }
}

impl<T: QuadValue> QuadValue for Tracked<T> {
    const ZERO: Self = Tracked {
        value: T::ZERO,
        error: 0.0,
    };
    fn magnitude(&self) -> f64 {
        self.value.magnitude()
    }
    fn is_finite_value(&self) -> bool {
        self.value.is_finite_value() && self.error.is_finite()
    }
    fn to_complex(&self) -> Complex64 {
        self.value.to_complex()
    }
    fn carried_error(&self) -> f64 {
        self.error
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
    abs_integral: f64,
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

fn gauss_kronrod<T, F>(f: &F, a: f64, b: f64) -> Result<Panel<T>, QuadratureError>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |x: f64| -> Result<T, QuadratureError> {
        let v = f(x);
        if v.is_finite_value() {
            Ok(v)
        } else {
            Err(QuadratureError::NonFiniteIntegrand { x })
        }
    };

    let f_centre = eval(centre)?;
    let mut kronrod = f_centre * WGK[10];
    let mut gauss = T::ZERO;
    let mut res_abs = WGK[10] * f_centre.magnitude();
    let mut fv = [(T::ZERO, T::ZERO); 10];
    for (j, slot) in fv.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let lo = eval(centre - dx)?;
        let hi = eval(centre + dx)?;
        let sum = lo + hi;
        kronrod = kronrod + sum * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + sum * WG[j / 2];
        }
        res_abs += WGK[j] * (lo.magnitude() + hi.magnitude());
        *slot = (lo, hi);
    }

    let mean = kronrod * 0.5;
    let mut res_asc = WGK[10] * (f_centre - mean).magnitude();
    for (j, (lo, hi)) in fv.iter().enumerate() {
        res_asc += WGK[j] * ((*lo - mean).magnitude() + (*hi - mean).magnitude());
    }

    let scale = half.abs();
    let raw = ((kronrod - gauss) * half).magnitude();
    let carried = (kronrod * scale).carried_error();
    Ok(Panel {
        a,
        b,
        value: kronrod * half,
        error: rescale_error(raw, res_abs * scale, res_asc * scale) + carried,
        abs_integral: res_abs * scale,
    })
}

fn check_range(a: f64, b: f64) -> Result<(), QuadratureError> {
    if !a.is_finite() || !b.is_finite() {
        return Err(QuadratureError::NonFiniteBound { a, b });
    }
    if !(a < b) {
        return Err(QuadratureError::EmptyRange { a, b });
    }
    Ok(())
}

/// Panel edges: the sorted interior breakpoints, then a uniform split of each
/// piece so that no panel exceeds a quarter of the oscillation hint.
fn initial_edges(a: f64, b: f64, points: &[f64], spec: &QuadratureSpec) -> Vec<f64> {
    let mut knots: Vec<f64> = points
        .iter()
        .copied()
        .filter(|p| p.is_finite() && *p > a && *p < b)
        .collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * (1.0 + x.abs()));

    let mut coarse = Vec::with_capacity(knots.len() + 2);
    coarse.push(a);
    coarse.extend(knots);
    coarse.push(b);

    let max_width = spec.oscillation_period_hint.map(|p| p / 4.0);
    let mut edges = vec![a];
    let budget = MAX_INITIAL_PANELS.max(coarse.len());
    for w in coarse.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let pieces = match max_width {
            Some(mw) => (((hi - lo) / mw).ceil() as usize).clamp(1, budget),
            None => 1,
        };
        for k in 1..pieces {
            edges.push(lo + (hi - lo) * k as f64 / pieces as f64);
        }
        edges.push(hi);
    }
    edges
}

/// Outcome of an adaptive pass; `converged` is false when the subdivision
/// budget ran out or every remaining panel hit the roundoff floor.
struct Outcome<T> {
    result: IntegralResult<T>,
    converged: bool,
}

impl<T: QuadValue> Outcome<T> {
    fn into_result(self) -> Result<IntegralResult<T>, QuadratureError> {
        if self.converged {
            Ok(self.result)
        } else {
            Err(QuadratureError::ToleranceNotReached {
                value: self.result.value.to_complex(),
                error_estimate: self.result.error_estimate,
                subdivisions: self.result.subdivisions_used,
            })
        }
    }
}

fn adaptive<T, F>(
    f: &F,
    a: f64,
    b: f64,
    points: &[f64],
    spec: &QuadratureSpec,
) -> Result<Outcome<T>, QuadratureError>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    spec.validate()?;
    check_range(a, b)?;

    let edges = initial_edges(a, b, points, spec);
    let mut panels = Vec::with_capacity(edges.len() + spec.max_subdivisions.min(4096));
    for w in edges.windows(2) {
        panels.push(gauss_kronrod(f, w[0], w[1])?);
    }

    let mut bisections = 0usize;
    // Panels too narrow to split further; their error is final.
    let mut frozen = vec![false; panels.len()];
    loop {
        let value = sum_values(&panels);
        let error: f64 = panels.iter().map(|p| p.error).sum();
        if error <= spec.target(value.magnitude()) {
            return Ok(finish(panels, bisections, error, true));
        }

        let worst = panels
            .iter()
            .enumerate()
            .filter(|(i, _)| !frozen[*i])
            .fold(None::<(usize, f64)>, |best, (i, p)| match best {
                Some((_, e)) if e >= p.error => best,
                _ => Some((i, p.error)),
            });

        let Some((idx, _)) = worst else {
            return Ok(finish(panels, bisections, error, false));
        };
        if bisections >= spec.max_subdivisions {
            return Ok(finish(panels, bisections, error, false));
        }

        let p = panels[idx];
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) || (p.b - p.a) <= 64.0 * f64::EPSILON * p.a.abs().max(p.b.abs()) {
            frozen[idx] = true;
            continue;
        }
        let left = gauss_kronrod(f, p.a, mid)?;
        let right = gauss_kronrod(f, mid, p.b)?;
        panels[idx] = left;
        panels.push(right);
        frozen.push(false);
        bisections += 1;
    }
}

fn sum_values<T: QuadValue>(panels: &[Panel<T>]) -> T {
    panels.iter().fold(T::ZERO, |acc, p| acc + p.value)
}

fn finish<T: QuadValue>(mut panels: Vec<Panel<T>>, bisections: usize, error: f64, converged: bool) -> Outcome<T> {
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    Outcome {
        result: IntegralResult {
            value: sum_values(&panels),
            error_estimate: error,
            subdivisions_used: bisections,
            abs_integral: panels.iter().map(|p| p.abs_integral).sum(),
            cutoff: None,
        },
        converged,
    }
}

/// Integral of `f` over the finite range `[a, b]`.
pub fn integrate_1d<T, F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<IntegralResult<T>, QuadratureError>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    adaptive(&f, a, b, &[], spec)?.into_result()
}

/// Like [`integrate_1d`], with known features (peak centres, kinks) used as
/// initial panel edges. Points outside `(a, b)` are ignored.
pub fn integrate_1d_with_points<T, F>(
    f: F,
    a: f64,
    b: f64,
    points: &[f64],
    spec: &QuadratureSpec,
) -> Result<IntegralResult<T>, QuadratureError>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    adaptive(&f, a, b, points, spec)?.into_result()
}

/// Integral of `f` over `[a, cutoff]`, where the cutoff is a physical
/// frequency bound (the mirrors' plasma frequency) rather than a truncation
/// of a convergent tail. The cutoff is recorded on the result.
pub fn integrate_semi_infinite<T, F>(
    f: F,
    a: f64,
    cutoff: f64,
    spec: &QuadratureSpec,
) -> Result<IntegralResult<T>, QuadratureError>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    integrate_semi_infinite_with_points(f, a, cutoff, &[], spec)
}

pub fn integrate_semi_infinite_with_points<T, F>(
    f: F,
    a: f64,
    cutoff: f64,
    points: &[f64],
    spec: &QuadratureSpec,
) -> Result<IntegralResult<T>, QuadratureError>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    if !(cutoff > 0.0) {
        return Err(QuadratureError::InvalidSpec(format!("cutoff must be positive, got {cutoff}")));
    }
    let mut r = adaptive(&f, a, cutoff, points, spec)?.into_result()?;
    r.cutoff = Some(cutoff);
    Ok(r)
}

/// Integration rectangle `[x0, x1] x [y0, y1]`; `x` is the outer variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rectangle {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl Rectangle {
    pub fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        Self { x, y }
    }
}

/// Double integral over a rectangle by nested adaptive passes.
pub fn integrate_2d<T, F>(f: F, region: Rectangle, spec: &QuadratureSpec) -> Result<IntegralResult<T>, QuadratureError>
where
    T: QuadValue,
    F: Fn(f64, f64) -> T,
{
    integrate_2d_with_points(f, region, &[], |_| Vec::new(), spec)
}

/// Nested integral with feature points: `outer_points` for the outer
/// variable, and `inner_points(x)` for the inner variable at fixed `x`.
///
/// The inner pass runs at a tenth of the outer tolerances. Each inner error
/// estimate is integrated alongside the inner value, so the returned error
/// is the outer estimate plus the integrated inner error.
pub fn integrate_2d_with_points<T, F, P>(
    f: F,
    region: Rectangle,
    outer_points: &[f64],
    inner_points: P,
    spec: &QuadratureSpec,
) -> Result<IntegralResult<T>, QuadratureError>
where
    T: QuadValue,
    F: Fn(f64, f64) -> T,
    P: Fn(f64) -> Vec<f64>,
{
    spec.validate()?;
    check_range(region.x.0, region.x.1)?;
    check_range(region.y.0, region.y.1)?;

    let inner_spec = spec.inner();
    let inner_failed = Cell::new(false);
    let inner_subdivisions = Cell::new(0usize);
    let hard_failure: Cell<Option<f64>> = Cell::new(None);

    let outer = |x: f64| -> Tracked<T> {
        let pts = inner_points(x);
        match adaptive(&|y| f(x, y), region.y.0, region.y.1, &pts, &inner_spec) {
            Ok(o) => {
                if !o.converged {
                    inner_failed.set(true);
                }
                inner_subdivisions.set(inner_subdivisions.get() + o.result.subdivisions_used);
                Tracked {
                    value: o.result.value,
                    error: o.result.error_estimate,
                }
            }
            Err(_) => {
                hard_failure.set(Some(x));
                Tracked {
                    value: T::ZERO,
                    error: 0.0,
                }
            }
        }
    };

    let outcome = adaptive(&outer, region.x.0, region.x.1, outer_points, spec)?;
    if let Some(x) = hard_failure.get() {
        return Err(QuadratureError::NonFiniteIntegrand { x });
    }
    let r = outcome.result;
    Outcome {
        result: IntegralResult {
            value: r.value.value,
            error_estimate: r.error_estimate,
            subdivisions_used: r.subdivisions_used + inner_subdivisions.get(),
            abs_integral: r.abs_integral,
            cutoff: None,
        },
        converged: outcome.converged && !inner_failed.get(),
    }
    .into_result()
}

/// `4 sin²(x) / x`, with the Taylor form `4x(1 - x²/3)` for `|x| < 1e-4`.
pub fn guarded_sinc_sq(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        4.0 * x * (1.0 - x * x / 3.0)
    } else {
        let s = x.sin();
        4.0 * s * s / x
    }
}

/// `sin(x) / x`, equal to 1 at the origin.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `(1 - e^{2 i s x L}) / x` for `s = ±1`, finite at `x = 0` (limit `-2 i s L`).
///
/// Uses `1 - e^{2iy} = -2i e^{iy} sin y`, which also keeps the numerator free
/// of cancellation near the cavity resonances.
pub fn one_minus_phase_over(x: f64, length: f64, sign: f64) -> Complex64 {
    let y = x * length;
    Complex64::new(0.0, -2.0 * sign * length) * Complex64::cis(sign * y) * sinc(y)
}

/// `1 - e^{2 i s y}` in the cancellation-free product form.
pub fn one_minus_phase(y: f64, sign: f64) -> Complex64 {
    Complex64::new(0.0, -2.0 * sign) * Complex64::cis(sign * y) * y.sin()
}
