use std::f64::consts::PI;

use casimir_core::modulation::SampledWindow;
use casimir_core::quadrature::{integrate_1d, integrate_1d_with_points};
use casimir_core::validation::simpson;
use casimir_core::{ModulationProfile, QuadratureSpec};
use proptest::prelude::*;

/// Real transform of an even real profile, 2∫₀^∞ f(t) cos(ωt) dt, by Simpson.
fn numeric_even_transform(f: impl Fn(f64) -> f64 + Sync, omega: f64, t_max: f64, panels: usize) -> f64 {
    2.0 * simpson(|t| f(t) * (omega * t).cos(), 0.0, t_max, panels).unwrap()
}

#[test]
fn damped_cosine_transform_matches_numeric_integral() {
    let p = ModulationProfile::damped_cosine(0.0, 3.0).unwrap();
    let closed = p.fourier(0.0);
    assert!((closed.re - 6.0).abs() < 1e-14 && closed.im == 0.0);
    let numeric = numeric_even_transform(|t| p.eval_time(t), 0.0, 120.0, 200_000);
    assert!((numeric - 6.0).abs() < 1e-9, "{numeric}");

    let p = ModulationProfile::damped_cosine(10.0, 100.0).unwrap();
    let closed = p.fourier(10.0).re;
    assert!((closed - (100.0 + 100.0 / (1.0 + 4e6))).abs() < 1e-10);
    let numeric = numeric_even_transform(|t| p.eval_time(t), 10.0, 4000.0, 4_000_000);
    assert!(((numeric - closed) / closed).abs() < 1e-8, "{numeric} vs {closed}");

    // Off the peak as well.
    let numeric = numeric_even_transform(|t| p.eval_time(t), 9.97, 4000.0, 4_000_000);
    assert!(((numeric - p.fourier(9.97).re) / numeric).abs() < 1e-8);
}

#[test]
fn gaussian_transform_matches_numeric_integral() {
    let p = ModulationProfile::gaussian(4.0, 1.5).unwrap();
    for w in [0.0, 1.0, 3.5, 4.0, 6.0] {
        let numeric = numeric_even_transform(|t| p.eval_time(t), w, 20.0, 200_000);
        let closed = p.fourier(w);
        assert!((numeric - closed.re).abs() < 1e-12, "ω = {w}: {numeric} vs {}", closed.re);
        assert_eq!(closed.im, 0.0);
    }
}

#[test]
fn damped_cosine_time_examples() {
    let p = ModulationProfile::damped_cosine(2.0, 5.0).unwrap();
    assert_eq!(p.eval_time(0.0), 1.0);
    for t in [151.0, -151.0, 400.0, -1e4] {
        assert!(p.eval_time(t).abs() < 1e-12);
    }
}

fn gaussian_window(dt: f64) -> SampledWindow {
    let n = (12.0 / dt).round() as usize;
    let pairs: Vec<(f64, f64)> = (0..=n)
        .map(|k| {
            let t = -6.0 + k as f64 * dt;
            (t, (-t * t).exp() * (3.0 * t).cos())
        })
        .collect();
    SampledWindow::from_pairs(&pairs).unwrap()
}

#[test]
fn sampled_window_plancherel() {
    let w = gaussian_window(0.01);
    let p = ModulationProfile::SampledWindow(w);
    // ∫ e^{-2t²} cos²(3t) dt over the real line.
    let energy = 0.5 * (PI / 2.0).sqrt() * (1.0 + (-4.5f64).exp());
    let spec = QuadratureSpec::default();
    let spectral = integrate_1d_with_points(|x: f64| p.fourier(x).norm_sqr(), -40.0, 40.0, &[-3.0, 0.0, 3.0], &spec)
        .unwrap()
        .value
        / (2.0 * PI);
    assert!(((spectral - energy) / energy).abs() < 1e-6, "{spectral} vs {energy}");
}

#[test]
fn sampled_window_transform_approaches_continuous_one() {
    let p = ModulationProfile::SampledWindow(gaussian_window(0.005));
    // Closed form of ∫ e^{-t²} cos(3t) e^{iωt} dt.
    let exact = |w: f64| 0.5 * PI.sqrt() * ((-(w - 3.0).powi(2) / 4.0).exp() + (-(w + 3.0).powi(2) / 4.0).exp());
    for w in [0.0, 1.0, 3.0, 5.0] {
        let z = p.fourier(w);
        assert!((z.re - exact(w)).abs() < 1e-10, "ω = {w}");
        assert!(z.im.abs() < 1e-10);
    }
}

#[test]
fn monochromatic_concentration() {
    // ΩT = 10³.
    let (omega, t) = (10.0, 100.0);
    let p = ModulationProfile::damped_cosine(omega, t).unwrap();
    let spec = QuadratureSpec::default();
    let mass = |a: f64, b: f64| {
        integrate_1d_with_points(|x: f64| p.fourier(x).norm_sqr(), a, b, &[omega], &spec)
            .unwrap()
            .value
    };
    let near = mass(omega - 10.0 / t, omega + 10.0 / t);
    let total = mass(0.0, 1e4);
    assert!(near / total >= 0.99, "{}", near / total);
    // Lorentzian-squared mass inside ±10 widths: (10/101 + atan 10)/(π/2).
    assert!((near / total - (10.0 / 101.0 + 10f64.atan()) / (PI / 2.0)).abs() < 1e-4);
}

#[test]
fn sampled_window_support() {
    let w = gaussian_window(0.1);
    let p = ModulationProfile::SampledWindow(w);
    assert_eq!(p.eval_time(-6.5), 0.0);
    assert_eq!(p.eval_time(7.0), 0.0);
    assert!((p.eval_time(0.0) - 1.0).abs() < 1e-15);
}

fn profiles() -> impl Strategy<Value = ModulationProfile> {
    prop_oneof![
        (0.0f64..20.0, 0.1f64..200.0).prop_map(|(o, t)| ModulationProfile::damped_cosine(o, t).unwrap()),
        (0.0f64..20.0, 0.1f64..50.0).prop_map(|(o, s)| ModulationProfile::gaussian(o, s).unwrap()),
        (0.5f64..5.0, prop::collection::vec(-1.0f64..1.0, 2..60)).prop_map(|(h, v)| {
            let step = 2.0 * h / (v.len() - 1) as f64;
            ModulationProfile::SampledWindow(SampledWindow::new(-h, step, v).unwrap())
        }),
    ]
}

proptest! {
    #[test]
    fn reality_symmetry(p in profiles(), w in -50.0f64..50.0) {
        let a = p.fourier(-w);
        let b = p.fourier(w).conj();
        prop_assert!((a - b).norm() <= 1e-12 * (1.0 + b.norm()));
    }

    #[test]
    fn amplitude_bounded(p in profiles(), t in -1e3f64..1e3) {
        prop_assert!(p.eval_time(t).abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn damped_cosine_transform_is_lorentzian_pair(o in 0.0f64..20.0, t in 0.1f64..200.0, w in -40.0f64..40.0) {
        let p = ModulationProfile::damped_cosine(o, t).unwrap();
        let l = |x: f64| t / (1.0 + t * t * x * x);
        prop_assert!((p.fourier(w).re - (l(w - o) + l(w + o))).abs() <= 1e-12 * (1.0 + t));
    }
}

#[test]
fn engine_and_simpson_agree_on_window_energy() {
    let p = ModulationProfile::SampledWindow(gaussian_window(0.01));
    let a = simpson(|t| p.eval_time(t).powi(2), -6.0, 6.0, 120_000).unwrap();
    let b = integrate_1d(|t: f64| p.eval_time(t).powi(2), -6.0, 6.0, &QuadratureSpec::default().with_hint(0.04))
        .unwrap()
        .value;
    assert!((a - b).abs() < 1e-9);
}
