//! Local mirror scattering and the perturbative global kernels of the cavity
//! with a Dirichlet left mirror.
//!
//! Matrices act on column vectors (φ, ψ) of right- and left-moving
//! amplitudes. The global kernels are callables so that quadrature can
//! evaluate them at arbitrary frequencies. Only the Dirichlet limit has a
//! global series; finite g exists only as [`MirrorScattering`].

use nalgebra::Matrix2;
use num_complex::Complex64;
use thiserror::Error;

use crate::config::{CavityConfig, ConfigError};
use crate::modulation::ModulationProfile;
use crate::quadrature::{one_minus_phase, one_minus_phase_over};

pub type Matrix2c = Matrix2<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScatteringError {
    #[error("the δ-mirror S-matrix is undefined at ω = 0 for finite coupling g = {g}")]
    ZeroFrequency { g: f64 },
    #[error("mirror coupling must be non-negative, got {0}")]
    NegativeCoupling(f64),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Coupling strength of a static δ mirror.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MirrorCoupling {
    Finite(f64),
    /// g → ∞, the Dirichlet mirror.
    Infinite,
}

/// Transparency s± and reflectivity r± of a δ mirror,
/// s = ω/(ω − ig), r = ig/(ω − ig), identical from both sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MirrorScattering {
    coupling: MirrorCoupling,
}

impl MirrorScattering {
    pub fn new(coupling: MirrorCoupling) -> Result<Self, ScatteringError> {
        if let MirrorCoupling::Finite(g) = coupling {
            if !(g >= 0.0) {
                return Err(ScatteringError::NegativeCoupling(g));
            }
        }
        Ok(Self { coupling })
    }

    fn check(&self, omega: f64) -> Result<f64, ScatteringError> {
        match self.coupling {
            MirrorCoupling::Finite(g) if omega == 0.0 => Err(ScatteringError::ZeroFrequency { g }),
            MirrorCoupling::Finite(g) => Ok(g),
            MirrorCoupling::Infinite => Ok(f64::INFINITY),
        }
    }

    pub fn s_plus(&self, omega: f64) -> Result<Complex64, ScatteringError> {
        let g = self.check(omega)?;
        if g.is_infinite() {
            return Ok(ZERO);
        }
        Ok(Complex64::new(omega, 0.0) / Complex64::new(omega, -g))
    }

    pub fn s_minus(&self, omega: f64) -> Result<Complex64, ScatteringError> {
        self.s_plus(omega)
    }

    pub fn r_plus(&self, omega: f64) -> Result<Complex64, ScatteringError> {
        let g = self.check(omega)?;
        if g.is_infinite() {
            return Ok(-ONE);
        }
        Ok(Complex64::new(0.0, g) / Complex64::new(omega, -g))
    }

    pub fn r_minus(&self, omega: f64) -> Result<Complex64, ScatteringError> {
        self.r_plus(omega)
    }

    /// `[[s₊, r₊], [r₋, s₋]]`.
    pub fn matrix(&self, omega: f64) -> Result<Matrix2c, ScatteringError> {
        Ok(Matrix2c::new(
            self.s_plus(omega)?,
            self.r_plus(omega)?,
            self.r_minus(omega)?,
            self.s_minus(omega)?,
        ))
    }
}

pub fn local_mirror_matrix(coupling: MirrorCoupling, omega: f64) -> Result<Matrix2c, ScatteringError> {
    MirrorScattering::new(coupling)?.matrix(omega)
}

/// Zeroth-order kernel with a Dirichlet left mirror:
/// `[[0, -e^{2iωL}], [-e^{-2iωL}, 0]]`.
pub fn dirichlet_kernel0(cfg: &CavityConfig, omega: f64) -> Matrix2c {
    let phase = Complex64::cis(2.0 * omega * cfg.length());
    Matrix2c::new(ZERO, -phase, -phase.conj(), ZERO)
}

/// Global kernels S₀[ω], S₁[ω,ω′], S₂[ω,ω′,ω″] of the modulated cavity.
///
/// S₁ and S₂ only have an upper-right entry: everything produced by the
/// modulation leaves through the right mirror.
#[derive(Debug, Clone, Copy)]
pub struct ScatteringKernels<'a> {
    cfg: &'a CavityConfig,
    profile: &'a ModulationProfile,
}

impl<'a> ScatteringKernels<'a> {
    pub fn new(cfg: &'a CavityConfig, profile: &'a ModulationProfile) -> Result<Self, ScatteringError> {
        cfg.require_dirichlet()?;
        Ok(Self { cfg, profile })
    }

    pub fn config(&self) -> &CavityConfig {
        self.cfg
    }

    pub fn profile(&self) -> &ModulationProfile {
        self.profile
    }

    pub fn order0(&self, omega: f64) -> Matrix2c {
        dirichlet_kernel0(self.cfg, omega)
    }

    /// Upper-right entry of S₁:
    /// `-(iλ₀ (1 - e^{2iωL}) / 2ω) f[ω - ω′] (1 - e^{-2iω′L})`.
    ///
    /// The factor `(1 - e^{2iωL})/ω` is evaluated in its regularised form,
    /// so ω = 0 returns the continuous limit.
    pub fn kernel1(&self, omega: f64, omega_p: f64) -> Complex64 {
        let l = self.cfg.length();
        let lambda0 = self.cfg.lambda0();
        if lambda0 == 0.0 {
            return ZERO;
        }
        let front = one_minus_phase_over(omega, l, 1.0);
        let back = one_minus_phase(omega_p * l, -1.0);
        Complex64::new(0.0, -0.5 * lambda0) * front * self.profile.fourier(omega - omega_p) * back
    }

    /// Upper-right entry of S₂:
    /// `-(λ₀² (1 - e^{2iωL})(1 - e^{2iω′L}) / 4ωω′) f[ω - ω′] f[ω′ - ω″] (1 - e^{-2iω″L})`.
    pub fn kernel2(&self, omega: f64, omega_p: f64, omega_pp: f64) -> Complex64 {
        let l = self.cfg.length();
        let lambda0 = self.cfg.lambda0();
        if lambda0 == 0.0 {
            return ZERO;
        }
        let front = one_minus_phase_over(omega, l, 1.0) * one_minus_phase_over(omega_p, l, 1.0);
        let back = one_minus_phase(omega_pp * l, -1.0);
        let f = self.profile.fourier(omega - omega_p) * self.profile.fourier(omega_p - omega_pp);
        front * f * back * (-0.25 * lambda0 * lambda0)
    }

    pub fn order1(&self, omega: f64, omega_p: f64) -> Matrix2c {
        Matrix2c::new(ZERO, self.kernel1(omega, omega_p), ZERO, ZERO)
    }

    pub fn order2(&self, omega: f64, omega_p: f64, omega_pp: f64) -> Matrix2c {
        Matrix2c::new(ZERO, self.kernel2(omega, omega_p, omega_pp), ZERO, ZERO)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::LeftCoupling;
    use std::f64::consts::PI;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    fn is_unitary(m: &Matrix2c, tol: f64) -> bool {
        let p = m * m.adjoint();
        close(p[(0, 0)], ONE, tol) && close(p[(1, 1)], ONE, tol) && p[(0, 1)].norm() <= tol && p[(1, 0)].norm() <= tol
    }

    fn cfg(lambda0: f64) -> CavityConfig {
        CavityConfig::dirichlet(1.0, lambda0).unwrap()
    }

    #[test]
    fn transparent_mirror() {
        let m = local_mirror_matrix(MirrorCoupling::Finite(0.0), 3.0).unwrap();
        assert_eq!(m[(0, 0)], ONE);
        assert_eq!(m[(0, 1)], ZERO);
        assert_eq!(m[(1, 0)], ZERO);
        assert_eq!(m[(1, 1)], ONE);
    }

    #[test]
    fn dirichlet_mirror_has_half_wave_loss() {
        for &w in &[0.0, 1.0, -7.5] {
            let m = local_mirror_matrix(MirrorCoupling::Infinite, w).unwrap();
            assert_eq!(m[(0, 0)], ZERO);
            assert_eq!(m[(0, 1)], -ONE);
            assert_eq!(m[(1, 0)], -ONE);
        }
    }

    #[test]
    fn unit_coupling_at_unit_frequency() {
        let s = MirrorScattering::new(MirrorCoupling::Finite(1.0)).unwrap();
        assert!(close(s.s_plus(1.0).unwrap(), Complex64::new(0.5, 0.5), 1e-15));
        assert!(close(s.r_plus(1.0).unwrap(), Complex64::new(-0.5, 0.5), 1e-15));
        assert!((s.s_plus(1.0).unwrap().norm_sqr() - 0.5).abs() < 1e-15);
        assert!((s.r_minus(1.0).unwrap().norm_sqr() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn finite_coupling_rejects_zero_frequency() {
        assert!(matches!(
            local_mirror_matrix(MirrorCoupling::Finite(2.0), 0.0),
            Err(ScatteringError::ZeroFrequency { .. })
        ));
        assert!(MirrorScattering::new(MirrorCoupling::Finite(-1.0)).is_err());
    }

    #[test]
    fn kernel0_values() {
        let c = cfg(0.1);
        let m = dirichlet_kernel0(&c, 0.0);
        assert_eq!(m[(0, 1)], -ONE);
        assert_eq!(m[(1, 0)], -ONE);
        let m = dirichlet_kernel0(&c, PI / 2.0);
        assert!(close(m[(0, 1)], ONE, 1e-15));
        assert!(close(m[(1, 0)], ONE, 1e-15));
        assert_eq!(m[(0, 0)], ZERO);
    }

    #[test]
    fn kernels_need_dirichlet_left_mirror() {
        let c = CavityConfig::new(1.0, 0.1, 100.0, LeftCoupling::FiniteG(3.0)).unwrap();
        let p = ModulationProfile::damped_cosine(3.0, 10.0).unwrap();
        assert!(ScatteringKernels::new(&c, &p).is_err());
    }

    #[test]
    fn kernel1_matches_literal_formula() {
        let c = CavityConfig::dirichlet(1.3, 0.2).unwrap();
        let p = ModulationProfile::damped_cosine(3.0, 4.0).unwrap();
        let k = ScatteringKernels::new(&c, &p).unwrap();
        let l = c.length();
        for &(w, wp) in &[(0.7, -1.1), (2.9, 0.4), (5.5, -3.3)] {
            let literal = -Complex64::new(0.0, 0.2) * (ONE - Complex64::cis(2.0 * w * l)) / (2.0 * w)
                * p.fourier(w - wp)
                * (ONE - Complex64::cis(-2.0 * wp * l));
            assert!(close(k.kernel1(w, wp), literal, 1e-13 * literal.norm().max(1.0)));
        }
    }

    #[test]
    fn kernel2_matches_literal_formula() {
        let c = CavityConfig::dirichlet(0.8, 0.3).unwrap();
        let p = ModulationProfile::gaussian(2.0, 1.5).unwrap();
        let k = ScatteringKernels::new(&c, &p).unwrap();
        let l = c.length();
        for &(w, wp, wpp) in &[(0.7, -1.1, 0.3), (2.9, 0.4, -2.0), (5.5, -3.3, 1.0)] {
            let literal = -(ONE - Complex64::cis(2.0 * w * l)) * (ONE - Complex64::cis(2.0 * wp * l)) * 0.09
                / (4.0 * w * wp)
                * p.fourier(w - wp)
                * p.fourier(wp - wpp)
                * (ONE - Complex64::cis(-2.0 * wpp * l));
            assert!(close(k.kernel2(w, wp, wpp), literal, 1e-13 * literal.norm().max(1.0)));
        }
    }

    #[test]
    fn kernel_limits_at_zero_frequency_are_finite() {
        let c = cfg(0.5);
        let p = ModulationProfile::damped_cosine(2.0, 3.0).unwrap();
        let k = ScatteringKernels::new(&c, &p).unwrap();
        // (1 - e^{2iωL})/ω → -2iL.
        let expected = Complex64::new(0.0, -0.25) * Complex64::new(0.0, -2.0) * p.fourier(-1.2) * one_minus_phase(1.2, -1.0);
        assert!(close(k.kernel1(0.0, 1.2), expected, 1e-14));
        assert!(k.kernel2(0.0, 0.0, 0.7).is_finite());
    }

    #[test]
    fn kernel1_zero_at_resonances() {
        let c = cfg(0.01);
        let p = ModulationProfile::damped_cosine(3.0, 20.0).unwrap();
        let k = ScatteringKernels::new(&c, &p).unwrap();
        assert!(k.kernel1(PI, 2.3).norm() < 1e-14);
        assert!(k.kernel1(1.9, -PI).norm() < 1e-14);
        assert!(k.kernel2(2.0 * PI, 0.4, 1.0).norm() < 1e-14);
        assert!(k.kernel2(1.0, 3.0 * PI, 1.0).norm() < 1e-14);
    }

    #[test]
    fn no_modulation_no_kernels() {
        let c = cfg(0.0);
        let p = ModulationProfile::damped_cosine(3.0, 20.0).unwrap();
        let k = ScatteringKernels::new(&c, &p).unwrap();
        assert_eq!(k.kernel1(1.0, -2.0), ZERO);
        assert_eq!(k.kernel2(1.0, -2.0, 0.5), ZERO);
    }

    #[test]
    fn upper_right_only() {
        let c = cfg(0.1);
        let p = ModulationProfile::damped_cosine(3.0, 20.0).unwrap();
        let k = ScatteringKernels::new(&c, &p).unwrap();
        let m1 = k.order1(1.2, -1.7);
        let m2 = k.order2(1.2, 0.4, -1.7);
        for m in [m1, m2] {
            assert_eq!(m[(0, 0)], ZERO);
            assert_eq!(m[(1, 0)], ZERO);
            assert_eq!(m[(1, 1)], ZERO);
        }
        assert_ne!(m1[(0, 1)], ZERO);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn local_matrix_is_unitary(g in 0.0f64..50.0, w in prop_oneof![-40.0f64..-1e-3, 1e-3f64..40.0]) {
                let s = MirrorScattering::new(MirrorCoupling::Finite(g)).unwrap();
                let (sp, rp) = (s.s_plus(w).unwrap(), s.r_plus(w).unwrap());
                prop_assert!((sp.norm_sqr() + rp.norm_sqr() - 1.0).abs() < 1e-12);
                prop_assert!((sp * rp.conj() + rp * sp.conj()).norm() < 1e-12);
                prop_assert!(is_unitary(&s.matrix(w).unwrap(), 1e-12));
            }

            #[test]
            fn kernel0_is_unitary(w in -200.0f64..200.0, l in 0.1f64..5.0) {
                let c = CavityConfig::dirichlet(l, 0.1).unwrap();
                prop_assert!(is_unitary(&dirichlet_kernel0(&c, w), 1e-12));
            }

            #[test]
            fn kernel1_conjugation(w in 0.05f64..20.0, wp in -20.0f64..20.0) {
                let c = cfg(0.3);
                let p = ModulationProfile::damped_cosine(2.5, 6.0).unwrap();
                let k = ScatteringKernels::new(&c, &p).unwrap();
                let lhs = k.kernel1(-w, wp);
                let rhs = k.kernel1(w, -wp).conj();
                prop_assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm().max(1e-3));
                let m = k.order0(-w);
                let n = k.order0(w);
                prop_assert!((m[(0, 1)] - n[(0, 1)].conj()).norm() < 1e-14);
            }

            #[test]
            fn kernel1_resonance_zeros(n in 1u32..=10, wp in -30.0f64..30.0) {
                let c = cfg(0.01);
                let p = ModulationProfile::damped_cosine(3.0, 20.0).unwrap();
                let k = ScatteringKernels::new(&c, &p).unwrap();
                prop_assert!(k.kernel1(n as f64 * PI, wp).norm() < 1e-14);
            }

            #[test]
            fn lambda_scaling(w in 0.05f64..20.0, wp in -20.0f64..20.0, wpp in -20.0f64..20.0) {
                let p = ModulationProfile::damped_cosine(2.5, 6.0).unwrap();
                let (c1, c2) = (cfg(0.1), cfg(0.2));
                let (k1, k2) = (ScatteringKernels::new(&c1, &p).unwrap(), ScatteringKernels::new(&c2, &p).unwrap());
                let a = k1.kernel1(w, wp);
                prop_assert!((k2.kernel1(w, wp) - a * 2.0).norm() <= 1e-15 * a.norm());
                let b = k1.kernel2(w, wp, wpp);
                prop_assert!((k2.kernel2(w, wp, wpp) - b * 4.0).norm() <= 1e-15 * b.norm());
            }
        }
    }
}
