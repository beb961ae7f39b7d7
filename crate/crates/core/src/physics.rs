//! Pointwise two-level physics of a Doppler-broadened vapor.
//!
//! Frequencies are carried in Hz and converted to angular units only inside
//! the Lorentzian arguments. Object beams propagate along −z and the probe
//! along +z, so an object beam detuned by `δ` burns a hole at `v_z = −λδ`
//! while the probe at detuning `δ` reads the class `v_z = +λδ`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::IntensityGrid;

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380649e-23;

/// Unified atomic mass unit, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Mass of a ⁸⁷Rb atom, kg.
pub const RB87_MASS: f64 = 86.909_180_527 * ATOMIC_MASS_UNIT;

/// Atomic species and vapor cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasParams {
    /// kg
    pub atom_mass: f64,
    /// m
    pub wavelength: f64,
    /// Natural linewidth as a FWHM in Hz (Γ/2π).
    pub natural_linewidth_fwhm: f64,
    /// K
    pub temperature: f64,
    /// Dimensionless product `n·σ₀·L` of density, peak cross-section and length.
    pub depth_scale: f64,
    /// m
    pub cell_length: f64,
}

impl Default for GasParams {
    /// ⁸⁷Rb D2 line in a 10 cm cell at 25 °C.
    fn default() -> Self {
        GasParams {
            atom_mass: RB87_MASS,
            wavelength: 780e-9,
            natural_linewidth_fwhm: 5.75e6,
            temperature: 298.15,
            depth_scale: 120.0,
            cell_length: 0.1,
        }
    }
}

impl GasParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("atom_mass", self.atom_mass),
            ("wavelength", self.wavelength),
            ("natural_linewidth_fwhm", self.natural_linewidth_fwhm),
            ("temperature", self.temperature),
            ("depth_scale", self.depth_scale),
            ("cell_length", self.cell_length),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(name, format!("must be finite and > 0, got {value}")));
            }
        }
        let sigma = doppler_sigma(self);
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::invalid("temperature", "Doppler width is not finite"));
        }
        Ok(())
    }

    /// k = 2π/λ, rad/m.
    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// Γ in rad/s.
    pub fn gamma_angular(&self) -> f64 {
        2.0 * PI * self.natural_linewidth_fwhm
    }

    /// Natural half-width expressed as a velocity, Γ/(2k) in m/s.
    pub fn half_linewidth_velocity(&self) -> f64 {
        0.5 * self.gamma_angular() / self.wavenumber()
    }
}

/// An object beam: detuning from the stationary-atom resonance and a
/// transverse profile in units of the saturation intensity.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectBeam {
    /// Hz, ν_p − ν_o.
    pub detuning: f64,
    pub intensity: IntensityGrid,
}

impl ObjectBeam {
    pub fn new(detuning: f64, intensity: IntensityGrid) -> Result<Self> {
        if !detuning.is_finite() {
            return Err(Error::invalid("detuning", "must be finite"));
        }
        Ok(ObjectBeam {
            detuning,
            intensity,
        })
    }
}

/// One-dimensional Maxwell distribution of the longitudinal velocity, s/m.
pub fn maxwell_pdf(v_z: f64, gas: &GasParams) -> f64 {
    let kt = BOLTZMANN * gas.temperature;
    (gas.atom_mass / (2.0 * PI * kt)).sqrt() * (-gas.atom_mass * v_z * v_z / (2.0 * kt)).exp()
}

/// sqrt(k_B·T/m), m/s.
pub fn doppler_sigma(gas: &GasParams) -> f64 {
    (BOLTZMANN * gas.temperature / gas.atom_mass).sqrt()
}

/// Doppler FWHM of the absorption line in Hz.
pub fn doppler_fwhm(gas: &GasParams) -> f64 {
    doppler_sigma(gas) * (8.0 * 2f64.ln()).sqrt() / gas.wavelength
}

/// Normalized Lorentzian `(Γ²/4) / (Δ² + Γ²/4)`, both arguments in rad/s.
pub fn lorentzian_weight(angular_detuning: f64, gamma_angular: f64) -> Result<f64> {
    if !(gamma_angular > 0.0) {
        return Err(Error::invalid("gamma_angular", format!("must be > 0, got {gamma_angular}")));
    }
    Ok(lorentzian_unchecked(angular_detuning, gamma_angular))
}

#[inline]
pub(crate) fn lorentzian_unchecked(angular_detuning: f64, gamma_angular: f64) -> f64 {
    let hw2 = 0.25 * gamma_angular * gamma_angular;
    hw2 / (angular_detuning * angular_detuning + hw2)
}

/// Doppler-shifted detuning of an object beam seen by an atom moving at
/// `v_z`, rad/s.
#[inline]
pub(crate) fn object_angular_detuning(beam_detuning: f64, v_z: f64, gas: &GasParams) -> f64 {
    2.0 * PI * beam_detuning + gas.wavenumber() * v_z
}

/// Doppler-shifted detuning of the counter-propagating probe, rad/s.
#[inline]
pub(crate) fn probe_angular_detuning(probe_detuning: f64, v_z: f64, gas: &GasParams) -> f64 {
    2.0 * PI * probe_detuning - gas.wavenumber() * v_z
}

/// Saturation term contributed by one object beam to the atoms at `v_z`.
pub fn saturation_factor(s_pixel: f64, beam_detuning: f64, v_z: f64, gas: &GasParams) -> Result<f64> {
    if !(s_pixel >= 0.0) {
        return Err(Error::invalid("s_pixel", format!("must be >= 0, got {s_pixel}")));
    }
    let weight = lorentzian_weight(
        object_angular_detuning(beam_detuning, v_z, gas),
        gas.gamma_angular(),
    )?;
    Ok(s_pixel * weight)
}

/// Steady-state ground/excited population difference at `v_z`, as a
/// fraction of `n`. `beams` holds `(s, detuning_hz)` pairs; saturation terms
/// of overlapping beams add in the denominator.
pub fn population_difference(v_z: f64, beams: &[(f64, f64)], gas: &GasParams) -> Result<f64> {
    let mut saturation = 0.0;
    for &(s, detuning) in beams {
        saturation += saturation_factor(s, detuning, v_z, gas)?;
    }
    Ok(maxwell_pdf(v_z, gas) / (1.0 + saturation))
}

/// Velocity class resonant with an object beam at `beam_detuning`, m/s.
pub fn velocity_of_object_detuning(beam_detuning: f64, gas: &GasParams) -> f64 {
    -(gas.wavelength * beam_detuning)
}

/// Velocity class read out by the probe at `probe_detuning`, m/s.
pub fn probe_resonant_velocity(probe_detuning: f64, gas: &GasParams) -> f64 {
    gas.wavelength * probe_detuning
}

/// Longitudinal momentum of the tomographic section at `probe_detuning`,
/// kg·m/s. Computed as `m · (λ·δν)` so it equals `m` times the resonant
/// velocity exactly.
pub fn momentum_of_detuning(probe_detuning: f64, gas: &GasParams) -> f64 {
    gas.atom_mass * probe_resonant_velocity(probe_detuning, gas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn rb() -> GasParams {
        GasParams::default()
    }

    #[test]
    fn maxwell_peak_matches_closed_form() {
        // sqrt(m / (2π k_B T)) with m = 1.44316e-25 kg, T = 298.15 K
        assert_relative_eq!(maxwell_pdf(0.0, &rb()), 2.362e-3, max_relative = 5e-4);
        let rounded_mass = GasParams {
            atom_mass: 1.443e-25,
            ..rb()
        };
        assert_relative_eq!(maxwell_pdf(0.0, &rounded_mass), 2.362e-3, max_relative = 5e-4);
    }

    #[test]
    fn maxwell_tails_and_symmetry() {
        let gas = rb();
        assert_eq!(maxwell_pdf(1e6, &gas), 0.0);
        assert_eq!(maxwell_pdf(-1e6, &gas), 0.0);
        assert_eq!(maxwell_pdf(100.0, &gas), maxwell_pdf(-100.0, &gas));
    }

    #[test]
    fn maxwell_is_normalized() {
        let gas = rb();
        let sigma = doppler_sigma(&gas);
        let n = 400_000;
        let (a, b) = (-8.0 * sigma, 8.0 * sigma);
        let h = (b - a) / n as f64;
        let mut sum = 0.5 * (maxwell_pdf(a, &gas) + maxwell_pdf(b, &gas));
        for i in 1..n {
            sum += maxwell_pdf(a + i as f64 * h, &gas);
        }
        assert!((sum * h - 1.0).abs() < 1e-9, "residual {}", sum * h - 1.0);
    }

    #[test]
    fn lorentzian_landmarks() {
        let g = 2.0 * PI * 5.75e6;
        assert_eq!(lorentzian_weight(0.0, g).unwrap(), 1.0);
        assert_relative_eq!(lorentzian_weight(g / 2.0, g).unwrap(), 0.5, max_relative = 1e-15);
        assert_relative_eq!(lorentzian_weight(-g / 2.0, g).unwrap(), 0.5, max_relative = 1e-15);
        assert_relative_eq!(lorentzian_weight(g, g).unwrap(), 0.2, max_relative = 1e-15);
        assert!(lorentzian_weight(1.0, 0.0).is_err());
        assert!(lorentzian_weight(1.0, -1.0).is_err());
    }

    #[test]
    fn saturation_factor_cases() {
        let gas = rb();
        let d = 23e6;
        let v_res = -gas.wavelength * d;
        assert_relative_eq!(saturation_factor(1.0, d, v_res, &gas).unwrap(), 1.0, max_relative = 1e-12);
        assert_eq!(saturation_factor(0.0, d, 17.0, &gas).unwrap(), 0.0);
        // k v = Γ/2
        let v = gas.wavelength * gas.natural_linewidth_fwhm / 2.0;
        assert_relative_eq!(saturation_factor(4.0, 0.0, v, &gas).unwrap(), 2.0, max_relative = 1e-12);
        assert!(saturation_factor(-0.1, 0.0, 0.0, &gas).is_err());
    }

    #[test]
    fn population_difference_cases() {
        let gas = rb();
        assert_eq!(population_difference(12.0, &[], &gas).unwrap(), maxwell_pdf(12.0, &gas));
        let v = velocity_of_object_detuning(10e6, &gas);
        assert_relative_eq!(
            population_difference(v, &[(1.0, 10e6)], &gas).unwrap(),
            maxwell_pdf(v, &gas) / 2.0,
            max_relative = 1e-12
        );
        assert!(population_difference(0.0, &[(-1.0, 0.0)], &gas).is_err());
    }

    #[test]
    fn three_beam_cross_terms_at_rest() {
        // Lorentzian weight of a beam 40 MHz away, evaluated by hand:
        // (Γ/2)² / (Δ² + (Γ/2)²) with Γ/2 = 2.875 MHz, Δ = 40 MHz.
        let expected_leak = 2.875f64.powi(2) / (40f64.powi(2) + 2.875f64.powi(2));
        let gas = rb();
        let own = saturation_factor(2.0, 0.0, 0.0, &gas).unwrap();
        for d in [-40e6, 40e6] {
            let cross = saturation_factor(2.0, d, 0.0, &gas).unwrap();
            assert_relative_eq!(cross / own, expected_leak, max_relative = 1e-12);
            assert!(cross / own < 5.2e-3);
        }
        let beams = [(2.0, -40e6), (2.0, 0.0), (2.0, 40e6)];
        let total = population_difference(0.0, &beams, &gas).unwrap();
        let f0 = maxwell_pdf(0.0, &gas);
        assert_relative_eq!(total, f0 / (1.0 + 2.0 * (1.0 + 2.0 * expected_leak)), max_relative = 1e-12);
    }

    #[test]
    fn kinematics_at_forty_megahertz() {
        let gas = rb();
        assert!((velocity_of_object_detuning(40e6, &gas) + 31.2).abs() < 0.05);
        assert!((velocity_of_object_detuning(-40e6, &gas) - 31.2).abs() < 0.05);
        assert_eq!(velocity_of_object_detuning(0.0, &gas), 0.0);
        assert!((probe_resonant_velocity(-40e6, &gas) + 31.2).abs() < 0.05);
        assert_eq!(probe_resonant_velocity(0.0, &gas), 0.0);
        assert_eq!(probe_resonant_velocity(17e6, &gas), -velocity_of_object_detuning(17e6, &gas));
    }

    #[test]
    fn momentum_values() {
        let gas = rb();
        assert_eq!(momentum_of_detuning(0.0, &gas), 0.0);
        assert_relative_eq!(momentum_of_detuning(40e6, &gas), 4.50e-24, max_relative = 2e-3);
        let (a, b) = (10e6, -25e6);
        assert_relative_eq!(
            momentum_of_detuning(a, &gas) + momentum_of_detuning(b, &gas),
            momentum_of_detuning(a + b, &gas),
            max_relative = 1e-14
        );
    }

    #[test]
    fn doppler_width() {
        let gas = rb();
        assert_relative_eq!(doppler_sigma(&gas), 168.9, max_relative = 5e-4);
        let hot = GasParams {
            temperature: 4.0 * gas.temperature,
            ..gas
        };
        assert_relative_eq!(doppler_sigma(&hot), 2.0 * doppler_sigma(&gas), max_relative = 1e-15);
        assert_relative_eq!(doppler_fwhm(&gas), 510e6, max_relative = 2e-3);
    }

    #[test]
    fn gas_validation() {
        assert!(rb().validate().is_ok());
        let bad = GasParams {
            temperature: 0.0,
            ..rb()
        };
        assert!(bad.validate().is_err());
        let bad = GasParams {
            depth_scale: f64::NAN,
            ..rb()
        };
        assert!(bad.validate().is_err());
    }

    proptest! {
        #[test]
        fn lorentzian_is_even(x in -1e10f64..1e10, g in 1e3f64..1e9) {
            prop_assert_eq!(lorentzian_weight(x, g).unwrap(), lorentzian_weight(-x, g).unwrap());
        }

        #[test]
        fn population_bounded_by_maxwell(
            v in -600.0f64..600.0,
            s in proptest::collection::vec(0.0f64..20.0, 0..4),
            d in proptest::collection::vec(-200e6f64..200e6, 4),
        ) {
            let gas = GasParams::default();
            let beams: Vec<_> = s.iter().copied().zip(d.iter().copied()).collect();
            let p = population_difference(v, &beams, &gas).unwrap();
            let f = maxwell_pdf(v, &gas);
            prop_assert!(p > 0.0 && p <= f);
            if s.iter().all(|&x| x == 0.0) {
                prop_assert_eq!(p, f);
            }
        }

        #[test]
        fn population_non_increasing_in_s(
            v in -400.0f64..400.0,
            s in 0.0f64..10.0,
            extra in 0.0f64..10.0,
            d in -100e6f64..100e6,
            other in (0.0f64..5.0, -100e6f64..100e6),
        ) {
            let gas = GasParams::default();
            let lo = population_difference(v, &[(s, d), other], &gas).unwrap();
            let hi = population_difference(v, &[(s + extra, d), other], &gas).unwrap();
            prop_assert!(hi <= lo);
        }

        #[test]
        fn probe_and_object_velocities_mirror(d in -1e9f64..1e9) {
            let gas = GasParams::default();
            prop_assert_eq!(probe_resonant_velocity(d, &gas), -velocity_of_object_detuning(d, &gas));
        }
    }
}
