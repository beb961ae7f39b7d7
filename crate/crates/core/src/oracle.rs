//! Brute-force references for the production quadrature.
//!
//! Everything here evaluates the absorption integrand pointwise through the
//! physics functions on a uniform midpoint grid. Node placement deliberately
//! differs from the composite trapezoid grid in [`crate::medium`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::medium::{build_velocity_grid_with, AbsorptionKernel, GridResolution};
use crate::physics::{
    doppler_sigma, lorentzian_unchecked, maxwell_pdf, population_difference,
    probe_angular_detuning, probe_resonant_velocity, GasParams,
};

/// Seed of the fixed parameter sample used by [`validate_report`] and CI.
#[allow(clippy::unusual_byte_groupings)]
pub const SAMPLE_SEED: u64 = 0x5EED_0F_CA7;
pub const SAMPLE_COUNT: usize = 200;

pub const QUADRATURE_TOLERANCE: f64 = 1e-6;
pub const MAXWELL_TOLERANCE: f64 = 1e-9;
/// Hz
pub const MIRROR_TOLERANCE: f64 = 1e6;
/// Hz
pub const MIRROR_SCAN_STEP: f64 = 0.5e6;
/// Accepted band for the step/half-step Richardson ratio of a second-order rule.
pub const RICHARDSON_BAND: (f64, f64) = (2.0, 8.0);
/// Relative change allowed when halving the oracle step over the full span.
pub const HALVING_TOLERANCE: f64 = 1e-8;

/// Default oracle step, `Γ/(50k)`, m/s.
pub fn default_step(gas: &GasParams) -> f64 {
    gas.gamma_angular() / (50.0 * gas.wavenumber())
}

/// Largest admissible oracle step, `Γ/(10k)`, m/s.
pub fn max_step(gas: &GasParams) -> f64 {
    gas.gamma_angular() / (10.0 * gas.wavenumber())
}

/// Composite midpoint rule on `[a, b]` with the largest uniform step ≤ `step`.
pub fn midpoint(a: f64, b: f64, step: f64, f: impl Fn(f64) -> f64) -> f64 {
    let n = ((b - a) / step).ceil().max(1.0) as usize;
    midpoint_n(a, b, n, f)
}

fn midpoint_n(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / n as f64;
    let mut sum = 0.0;
    for i in 0..n {
        sum += f(a + (i as f64 + 0.5) * h);
    }
    sum * h
}

fn integrand<'a>(
    beams: &'a [(f64, f64)],
    probe_detuning: f64,
    gas: &'a GasParams,
) -> impl Fn(f64) -> f64 + 'a {
    let gamma = gas.gamma_angular();
    move |v| {
        // s-values are validated by the caller
        let pop = population_difference(v, beams, gas).unwrap_or(f64::NAN);
        pop * lorentzian_unchecked(probe_angular_detuning(probe_detuning, v, gas), gamma)
    }
}

fn check_inputs(pixel_s: &[f64], beam_detunings: &[f64]) -> Result<Vec<(f64, f64)>> {
    if pixel_s.len() != beam_detunings.len() {
        return Err(Error::LengthMismatch {
            what: "pixel saturation parameters",
            expected: beam_detunings.len(),
            found: pixel_s.len(),
        });
    }
    if let Some(bad) = pixel_s.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
        return Err(Error::invalid("s_pixel", format!("must be finite and >= 0, got {bad}")));
    }
    Ok(pixel_s.iter().copied().zip(beam_detunings.iter().copied()).collect())
}

/// Reference `α·L` by a uniform midpoint sum over `[−span·σ_v, +span·σ_v]`.
pub fn brute_force_alpha(
    pixel_s: &[f64],
    beam_detunings: &[f64],
    probe_detuning: f64,
    gas: &GasParams,
    step: f64,
    span: f64,
) -> Result<f64> {
    gas.validate()?;
    if !(step > 0.0) || step > max_step(gas) {
        return Err(Error::invalid(
            "step",
            format!("must lie in (0, Γ/(10k)] = (0, {}] m/s, got {step}", max_step(gas)),
        ));
    }
    if !(span >= 8.0 && span.is_finite()) {
        return Err(Error::invalid("span", format!("must be >= 8 Doppler widths, got {span}")));
    }
    let beams = check_inputs(pixel_s, beam_detunings)?;
    let half = span * doppler_sigma(gas);
    let integral = midpoint(-half, half, step, integrand(&beams, probe_detuning, gas));
    Ok(gas.depth_scale * integral)
}

/// Oracle at the default step and an 8σ span.
pub fn reference_alpha(pixel_s: &[f64], beam_detunings: &[f64], probe_detuning: f64, gas: &GasParams) -> Result<f64> {
    brute_force_alpha(pixel_s, beam_detunings, probe_detuning, gas, default_step(gas), 8.0)
}

/// Trapezoid estimate of `∫ f(v) dv − 1` over ±8σ_v with 400 000 intervals.
pub fn maxwell_normalization_residual(gas: &GasParams) -> f64 {
    let half = 8.0 * doppler_sigma(gas);
    let n = 400_000;
    let h = 2.0 * half / n as f64;
    let mut sum = 0.5 * (maxwell_pdf(-half, gas) + maxwell_pdf(half, gas));
    for i in 1..n {
        sum += maxwell_pdf(-half + i as f64 * h, gas);
    }
    sum * h - 1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelfConvergence {
    /// (I_h − I_{h/2}) / (I_{h/2} − I_{h/4}) on a half-line whose lower end
    /// sits on the probe Lorentzian's flank.
    pub richardson_ratio: f64,
    /// |I_h − I_{h/2}| / |I_{h/2}| over the full ±8σ span.
    pub full_span_halving_change: f64,
}

/// Step-halving study of the oracle itself.
///
/// Over the full span the integrand and its derivatives vanish at both ends,
/// so the midpoint rule converges faster than any power of the step and the
/// differences sink to rounding. The second-order term is isolated on
/// `[v_probe + 10·Γ/(2k), 8σ_v]`, where the integrand's slope at the lower
/// end is nonzero.
pub fn self_convergence(
    pixel_s: &[f64],
    beam_detunings: &[f64],
    probe_detuning: f64,
    gas: &GasParams,
) -> Result<SelfConvergence> {
    gas.validate()?;
    let beams = check_inputs(pixel_s, beam_detunings)?;
    let f = integrand(&beams, probe_detuning, gas);
    let h = default_step(gas);
    let sigma = doppler_sigma(gas);

    let a = probe_resonant_velocity(probe_detuning, gas) + 10.0 * gas.half_linewidth_velocity();
    let b = 8.0 * sigma;
    if !(a < b) {
        return Err(Error::invalid("probe_detuning", "probe resonance lies beyond the oracle span"));
    }
    let n = ((b - a) / h).ceil() as usize;
    let i1 = midpoint_n(a, b, n, &f);
    let i2 = midpoint_n(a, b, 2 * n, &f);
    let i4 = midpoint_n(a, b, 4 * n, &f);
    let richardson_ratio = (i1 - i2) / (i2 - i4);

    let n_full = ((2.0 * b) / h).ceil() as usize;
    let full1 = midpoint_n(-b, b, n_full, &f);
    let full2 = midpoint_n(-b, b, 2 * n_full, &f);
    Ok(SelfConvergence {
        richardson_ratio,
        full_span_halving_change: ((full1 - full2) / full2).abs(),
    })
}

/// One point of a quadrature comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureSample {
    pub pixel_s: Vec<f64>,
    pub beam_detunings: Vec<f64>,
    pub probe_detuning: f64,
}

/// Random saturation parameters in `[0, 10)` for the given beams and a
/// probe uniform in ±150 MHz.
pub fn samples_for_beams(seed: u64, count: usize, beam_detunings: &[f64]) -> Vec<QuadratureSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| QuadratureSample {
            pixel_s: beam_detunings.iter().map(|_| rng.random_range(0.0..10.0)).collect(),
            beam_detunings: beam_detunings.to_vec(),
            probe_detuning: rng.random_range(-150e6..150e6),
        })
        .collect()
}

/// Random beam sets as well: zero to three beams with detunings in ±100 MHz.
pub fn randomized_samples(seed: u64, count: usize) -> Vec<QuadratureSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let beams = rng.random_range(0..=3usize);
            QuadratureSample {
                pixel_s: (0..beams).map(|_| rng.random_range(0.0..10.0)).collect(),
                beam_detunings: (0..beams).map(|_| rng.random_range(-100e6..100e6)).collect(),
                probe_detuning: rng.random_range(-150e6..150e6),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureComparison {
    pub samples: usize,
    pub max_relative_error: f64,
    pub worst: Option<QuadratureSample>,
}

/// Production kernel versus oracle on every sample.
pub fn compare_quadrature(
    gas: &GasParams,
    samples: &[QuadratureSample],
    resolution: GridResolution,
) -> Result<QuadratureComparison> {
    let errors = samples
        .par_iter()
        .map(|s| {
            let vgrid = build_velocity_grid_with(gas, &s.beam_detunings, s.probe_detuning, resolution);
            let production = AbsorptionKernel::new(gas, &s.beam_detunings, s.probe_detuning, &vgrid)
                .evaluate(&s.pixel_s)?;
            let oracle = reference_alpha(&s.pixel_s, &s.beam_detunings, s.probe_detuning, gas)?;
            Ok(((production - oracle) / oracle).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut worst = None;
    let mut max_relative_error = 0.0;
    for (i, &e) in errors.iter().enumerate() {
        // NaN counts as a failure
        if !(e <= max_relative_error) {
            max_relative_error = e;
            worst = Some(i);
        }
    }
    Ok(QuadratureComparison {
        samples: samples.len(),
        max_relative_error,
        worst: worst.map(|i| samples[i].clone()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MirrorCheck {
    /// Hz
    pub beam_detuning: f64,
    pub peak_s: f64,
    /// Probe detuning of the deepest hole, Hz.
    pub hole_at: f64,
    pub pass: bool,
}

/// Scans the probe across a single unmasked beam's hole and locates the
/// largest bleaching `OD_off − OD_on`.
pub fn mirror_check(gas: &GasParams, beam_detuning: f64, peak_s: f64, resolution: GridResolution) -> Result<MirrorCheck> {
    let reach = beam_detuning.abs() + 20e6;
    let steps = (2.0 * reach / MIRROR_SCAN_STEP).round() as usize;
    let bleach = (0..=steps)
        .into_par_iter()
        .map(|i| {
            let probe = -reach + i as f64 * MIRROR_SCAN_STEP;
            let vgrid = build_velocity_grid_with(gas, &[beam_detuning], probe, resolution);
            let kernel = AbsorptionKernel::new(gas, &[beam_detuning], probe, &vgrid);
            Ok((probe, kernel.unsaturated() - kernel.evaluate(&[peak_s])?))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let (hole_at, _) = bleach
        .iter()
        .copied()
        .fold((f64::NAN, f64::NEG_INFINITY), |best, p| if p.1 > best.1 { p } else { best });
    Ok(MirrorCheck {
        beam_detuning,
        peak_s,
        hole_at,
        pass: (hole_at + beam_detuning).abs() <= MIRROR_TOLERANCE,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances {
    pub quadrature_relative: f64,
    pub maxwell_residual: f64,
    pub mirror_hz: f64,
    pub richardson_band: (f64, f64),
    pub full_span_halving: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub seed: u64,
    pub quadrature: QuadratureComparison,
    pub maxwell_normalization_residual: f64,
    pub mirror: Vec<MirrorCheck>,
    pub self_convergence: SelfConvergence,
    pub tolerances: Tolerances,
    pub pass: bool,
}

/// Checks the production quadrature against the oracle for one gas and beam
/// set. `beams` holds `(detuning_hz, peak_s)`; with no beams only the
/// unsaturated profile is sampled and the mirror check is skipped.
pub fn validate_report(gas: &GasParams, beams: &[(f64, f64)], resolution: GridResolution) -> Result<ValidationReport> {
    gas.validate()?;
    let detunings: Vec<f64> = beams.iter().map(|b| b.0).collect();
    let samples = samples_for_beams(SAMPLE_SEED, SAMPLE_COUNT, &detunings);
    let quadrature = compare_quadrature(gas, &samples, resolution)?;
    let maxwell = maxwell_normalization_residual(gas);
    let mirror = beams
        .iter()
        .map(|&(d, s)| mirror_check(gas, d, s, resolution))
        .collect::<Result<Vec<_>>>()?;
    let convergence = self_convergence(&[], &[], -40e6, gas)?;

    let tolerances = Tolerances {
        quadrature_relative: QUADRATURE_TOLERANCE,
        maxwell_residual: MAXWELL_TOLERANCE,
        mirror_hz: MIRROR_TOLERANCE,
        richardson_band: RICHARDSON_BAND,
        full_span_halving: HALVING_TOLERANCE,
    };
    let pass = quadrature.max_relative_error < QUADRATURE_TOLERANCE
        && maxwell.abs() < MAXWELL_TOLERANCE
        && mirror.iter().all(|m| m.pass)
        && (RICHARDSON_BAND.0..=RICHARDSON_BAND.1).contains(&convergence.richardson_ratio)
        && convergence.full_span_halving_change < HALVING_TOLERANCE;
    Ok(ValidationReport {
        seed: SAMPLE_SEED,
        quadrature,
        maxwell_normalization_residual: maxwell,
        mirror,
        self_convergence: convergence,
        tolerances,
        pass,
    })
}
