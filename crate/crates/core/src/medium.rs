//! Probe absorption of the hole-burned vapor.
//!
//! The absorption integral runs over the longitudinal velocity axis. The
//! integrand is a broad Maxwellian multiplied by narrow Lorentzian features
//! (the probe line and one saturation hole per object beam), so the axis is
//! discretized by a piecewise-uniform composite trapezoid rule: a coarse
//! backbone over the Doppler profile with nested bands of doubling spacing
//! around every feature. Inside a uniform band the trapezoid rule converges
//! geometrically for this analytic integrand; the residual error comes from
//! the spacing jumps at band edges, which sit far out on the Lorentzian tails.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{ensure_same_dims, Canvas, Grid};
use crate::physics::{
    doppler_sigma, lorentzian_unchecked, maxwell_pdf, object_angular_detuning,
    probe_angular_detuning, probe_resonant_velocity, velocity_of_object_detuning, GasParams,
    ObjectBeam,
};

/// Minimum velocity span in Doppler widths on each side of zero.
pub const SPAN_SIGMAS: f64 = 6.0;
/// Minimum coverage around every hole center, in natural half-widths `Γ/(2k)`.
pub const HOLE_MARGIN_HALF_WIDTHS: f64 = 30.0;
/// Innermost band half-width around each feature, in natural half-widths.
pub const FINE_BAND_HALF_WIDTHS: f64 = 100.0;
/// Innermost band spacing, in natural half-widths (i.e. `Γ/(10k)`).
pub const FINE_SPACING_HALF_WIDTHS: f64 = 0.2;
/// Backbone spacing in Doppler widths.
pub const BACKBONE_SPACING_SIGMAS: f64 = 1.0 / 50.0;

/// Spacing multiplier for the velocity grid; `1.0` is the production setting.
/// Values below one refine, values above coarsen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridResolution {
    pub scale: f64,
}

impl Default for GridResolution {
    fn default() -> Self {
        GridResolution { scale: 1.0 }
    }
}

impl GridResolution {
    pub fn new(scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::invalid("grid scale", format!("must be finite and > 0, got {scale}")));
        }
        Ok(GridResolution { scale })
    }
}

/// Quadrature nodes and trapezoid weights over `v_z`, m/s.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl VelocityGrid {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn span(&self) -> (f64, f64) {
        (self.nodes[0], self.nodes[self.nodes.len() - 1])
    }

    /// Largest node spacing among intervals that intersect `[center − radius, center + radius]`.
    pub fn max_spacing_near(&self, center: f64, radius: f64) -> f64 {
        self.nodes
            .windows(2)
            .filter(|w| w[1] >= center - radius && w[0] <= center + radius)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&v, &w)| w * f(v))
            .sum()
    }
}

/// Velocity grid with the production resolution.
pub fn build_velocity_grid(gas: &GasParams, beam_detunings: &[f64], probe_detuning: f64) -> VelocityGrid {
    build_velocity_grid_with(gas, beam_detunings, probe_detuning, GridResolution::default())
}

pub fn build_velocity_grid_with(
    gas: &GasParams,
    beam_detunings: &[f64],
    probe_detuning: f64,
    resolution: GridResolution,
) -> VelocityGrid {
    let sigma = doppler_sigma(gas);
    let hw = gas.half_linewidth_velocity();
    let fine = FINE_SPACING_HALF_WIDTHS * hw * resolution.scale;
    let backbone = BACKBONE_SPACING_SIGMAS * sigma * resolution.scale;
    let band0 = FINE_BAND_HALF_WIDTHS * hw;

    // hole centers plus the probe's resonant class
    let mut features: Vec<f64> = beam_detunings
        .iter()
        .map(|&d| velocity_of_object_detuning(d, gas))
        .collect();
    features.push(probe_resonant_velocity(probe_detuning, gas));

    let margin = HOLE_MARGIN_HALF_WIDTHS * hw;
    let mut lo = -SPAN_SIGMAS * sigma;
    let mut hi = SPAN_SIGMAS * sigma;
    for &c in &features {
        lo = lo.min(c - margin);
        hi = hi.max(c + margin);
    }

    // Nested bands: level k has half-width band0·2^k and spacing fine·2^k,
    // stopping once the spacing would reach the backbone.
    let mut levels = Vec::new();
    let mut spacing = fine;
    let mut half_width = band0;
    while spacing < backbone {
        levels.push((half_width, spacing));
        spacing *= 2.0;
        half_width *= 2.0;
    }

    let spacing_at = |x: f64| -> f64 {
        let mut h = backbone;
        for &c in &features {
            let d = (x - c).abs();
            if let Some(&(_, s)) = levels.iter().find(|(w, _)| d <= *w) {
                h = h.min(s);
            }
        }
        h
    };

    let mut breaks = vec![lo, hi];
    for &c in &features {
        for &(w, _) in &levels {
            for edge in [c - w, c + w] {
                if edge > lo && edge < hi {
                    breaks.push(edge);
                }
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    let min_len = 1e-6 * fine;
    breaks.dedup_by(|b, a| *b - *a < min_len);
    if let Some(last) = breaks.last_mut() {
        *last = hi;
    }

    let mut nodes = vec![lo];
    let mut weights = vec![0.0];
    for seg in breaks.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let h = spacing_at(0.5 * (a + b));
        let n = ((b - a) / h).ceil().max(1.0) as usize;
        let step = (b - a) / n as f64;
        *weights.last_mut().unwrap() += 0.5 * step;
        for i in 1..=n {
            let v = if i == n { b } else { a + i as f64 * step };
            nodes.push(v);
            weights.push(if i == n { 0.5 * step } else { step });
        }
    }
    VelocityGrid { nodes, weights }
}

/// Precomputed velocity tables for one probe detuning and beam set.
///
/// `α·L` depends on a pixel only through its per-beam saturation parameters,
/// so one kernel serves every pixel of a frame.
#[derive(Debug, Clone)]
pub struct AbsorptionKernel {
    depth_scale: f64,
    beam_detunings: Vec<f64>,
    /// w_i · f(v_i) · L_probe(v_i)
    base: Vec<f64>,
    /// Object-beam Lorentzian weights, node-major: `[i * beams + j]`.
    beam_weights: Vec<f64>,
}

impl AbsorptionKernel {
    pub fn new(gas: &GasParams, beam_detunings: &[f64], probe_detuning: f64, vgrid: &VelocityGrid) -> Self {
        let gamma = gas.gamma_angular();
        let nb = beam_detunings.len();
        let mut base = Vec::with_capacity(vgrid.len());
        let mut beam_weights = Vec::with_capacity(vgrid.len() * nb);
        for (&v, &w) in vgrid.nodes().iter().zip(vgrid.weights()) {
            let probe = lorentzian_unchecked(probe_angular_detuning(probe_detuning, v, gas), gamma);
            base.push(w * maxwell_pdf(v, gas) * probe);
            for &d in beam_detunings {
                beam_weights.push(lorentzian_unchecked(object_angular_detuning(d, v, gas), gamma));
            }
        }
        AbsorptionKernel {
            depth_scale: gas.depth_scale,
            beam_detunings: beam_detunings.to_vec(),
            base,
            beam_weights,
        }
    }

    pub fn beam_count(&self) -> usize {
        self.beam_detunings.len()
    }

    /// Optical density `α·L` for one pixel's saturation parameters.
    pub fn evaluate(&self, pixel_s: &[f64]) -> Result<f64> {
        let nb = self.beam_count();
        if pixel_s.len() != nb {
            return Err(Error::LengthMismatch {
                what: "pixel saturation parameters",
                expected: nb,
                found: pixel_s.len(),
            });
        }
        if let Some(bad) = pixel_s.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
            return Err(Error::invalid("s_pixel", format!("must be finite and >= 0, got {bad}")));
        }
        Ok(self.evaluate_unchecked(pixel_s))
    }

    /// Unsaturated optical density at this probe detuning.
    pub fn unsaturated(&self) -> f64 {
        self.depth_scale * self.base.iter().sum::<f64>()
    }

    fn evaluate_unchecked(&self, pixel_s: &[f64]) -> f64 {
        let nb = pixel_s.len();
        if nb == 0 || pixel_s.iter().all(|&s| s == 0.0) {
            return self.unsaturated();
        }
        let mut sum = 0.0;
        for (i, &b) in self.base.iter().enumerate() {
            let row = &self.beam_weights[i * nb..(i + 1) * nb];
            let mut saturation = 0.0;
            for (s, l) in pixel_s.iter().zip(row) {
                saturation += s * l;
            }
            sum += b / (1.0 + saturation);
        }
        self.depth_scale * sum
    }
}

/// Optical density `α·L` at `probe_detuning` for a pixel illuminated with
/// saturation parameters `pixel_s` by beams at `beam_detunings`.
pub fn absorption_coefficient(
    pixel_s: &[f64],
    beam_detunings: &[f64],
    probe_detuning: f64,
    gas: &GasParams,
    vgrid: &VelocityGrid,
) -> Result<f64> {
    if pixel_s.len() != beam_detunings.len() {
        return Err(Error::LengthMismatch {
            what: "pixel saturation parameters",
            expected: beam_detunings.len(),
            found: pixel_s.len(),
        });
    }
    AbsorptionKernel::new(gas, beam_detunings, probe_detuning, vgrid).evaluate(pixel_s)
}

/// Optical density over the transverse frame at one probe detuning.
#[derive(Debug, Clone, PartialEq)]
pub struct OdMap {
    pub grid: Grid<f64>,
    /// Hz
    pub probe_detuning: f64,
    /// m
    pub pixel_pitch: f64,
}

fn check_beams(canvas: &Canvas, beams: &[ObjectBeam]) -> Result<()> {
    canvas.validate()?;
    for beam in beams {
        ensure_same_dims(canvas.dims(), beam.intensity.dims())?;
        if beam.intensity.pixel_pitch() != canvas.pixel_pitch {
            return Err(Error::invalid(
                "pixel_pitch",
                format!(
                    "beam grid pitch {} differs from canvas pitch {}",
                    beam.intensity.pixel_pitch(),
                    canvas.pixel_pitch
                ),
            ));
        }
    }
    Ok(())
}

/// Per-pixel optical densities with the production velocity grid.
pub fn od_map(canvas: &Canvas, beams: &[ObjectBeam], probe_detuning: f64, gas: &GasParams) -> Result<OdMap> {
    od_map_with(canvas, beams, probe_detuning, gas, GridResolution::default())
}

pub fn od_map_with(
    canvas: &Canvas,
    beams: &[ObjectBeam],
    probe_detuning: f64,
    gas: &GasParams,
    resolution: GridResolution,
) -> Result<OdMap> {
    let (_, on) = od_maps_off_on(canvas, beams, probe_detuning, gas, resolution)?;
    Ok(on)
}

/// Optical densities without and with the object beams, sharing one velocity
/// grid so the two frames differ only through saturation.
pub(crate) fn od_maps_off_on(
    canvas: &Canvas,
    beams: &[ObjectBeam],
    probe_detuning: f64,
    gas: &GasParams,
    resolution: GridResolution,
) -> Result<(OdMap, OdMap)> {
    gas.validate()?;
    check_beams(canvas, beams)?;
    if !probe_detuning.is_finite() {
        return Err(Error::invalid("probe_detuning", "must be finite"));
    }
    let detunings: Vec<f64> = beams.iter().map(|b| b.detuning).collect();
    let vgrid = build_velocity_grid_with(gas, &detunings, probe_detuning, resolution);
    let kernel = AbsorptionKernel::new(gas, &detunings, probe_detuning, &vgrid);

    let (w, h) = canvas.dims();
    let off = OdMap {
        grid: Grid::filled(w, h, kernel.unsaturated()),
        probe_detuning,
        pixel_pitch: canvas.pixel_pitch,
    };

    // Memoize on the exact bit pattern of the per-pixel s-vector; masks are
    // few-leveled so most frames reduce to a handful of evaluations.
    let npix = w * h;
    let mut index_of: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
    let mut keys: Vec<Vec<f64>> = Vec::new();
    let mut pixel_key = Vec::with_capacity(npix);
    for p in 0..npix {
        let s: Vec<f64> = beams.iter().map(|b| b.intensity.as_slice()[p]).collect();
        let bits: Vec<u64> = s.iter().map(|x| x.to_bits()).collect();
        let next = keys.len();
        let idx = *index_of.entry(bits).or_insert_with(|| {
            keys.push(s);
            next
        });
        pixel_key.push(idx);
    }
    let values: Vec<f64> = keys.par_iter().map(|s| kernel.evaluate_unchecked(s)).collect();
    let on = OdMap {
        grid: Grid::from_vec(w, h, pixel_key.iter().map(|&k| values[k]).collect())?,
        probe_detuning,
        pixel_pitch: canvas.pixel_pitch,
    };
    Ok((off, on))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::IntensityGrid;
    use crate::physics::{maxwell_pdf, population_difference};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn rb() -> GasParams {
        GasParams::default()
    }

    /// Pointwise reference on a uniform fine midpoint grid, written against
    /// the physics functions rather than the kernel tables.
    fn dense_reference(pixel_s: &[f64], detunings: &[f64], probe: f64, gas: &GasParams) -> f64 {
        let sigma = doppler_sigma(gas);
        let h = gas.half_linewidth_velocity() / 40.0;
        let n = (16.0 * sigma / h).ceil() as usize;
        let a = -8.0 * sigma;
        let beams: Vec<(f64, f64)> = pixel_s.iter().copied().zip(detunings.iter().copied()).collect();
        let g = gas.gamma_angular();
        let mut sum = 0.0;
        for i in 0..n {
            let v = a + (i as f64 + 0.5) * h;
            let pop = population_difference(v, &beams, gas).unwrap();
            sum += pop * lorentzian_unchecked(probe_angular_detuning(probe, v, gas), g);
        }
        gas.depth_scale * sum * h
    }

    #[test]
    fn grid_covers_span_and_refines_near_features() {
        let gas = rb();
        let sigma = doppler_sigma(&gas);
        let hw = gas.half_linewidth_velocity();
        let g = build_velocity_grid(&gas, &[], 0.0);
        let (lo, hi) = g.span();
        assert!(lo <= -6.0 * sigma && hi >= 6.0 * sigma);
        assert!(g.max_spacing_near(0.0, 10.0 * hw) <= 0.2 * hw * (1.0 + 1e-12));
        assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
        assert!(g.weights().iter().all(|&w| w > 0.0));
        assert!(g.max_spacing_near(-5.0 * sigma, 0.0) <= sigma / 50.0 * (1.0 + 1e-12));
    }

    #[test]
    fn grid_refines_at_mirrored_hole_centers() {
        let gas = rb();
        let hw = gas.half_linewidth_velocity();
        let g = build_velocity_grid(&gas, &[-40e6, 0.0, 40e6], 25e6);
        for center in [31.2, 0.0, -31.2, gas.wavelength * 25e6] {
            assert!(g.max_spacing_near(center, 10.0 * hw) <= 0.2 * hw * (1.0 + 1e-12));
        }
        // a hole far in the wing still gets its margin
        let far = build_velocity_grid(&gas, &[2.0e9], 0.0);
        let c = velocity_of_object_detuning(2.0e9, &gas);
        assert!(far.span().0 <= c - 30.0 * hw);
    }

    #[test]
    fn grid_is_deterministic() {
        let gas = rb();
        let a = build_velocity_grid(&gas, &[40e6, -13e6], 7e6);
        let b = build_velocity_grid(&gas, &[40e6, -13e6], 7e6);
        assert_eq!(a, b);
    }

    #[test]
    fn grid_integrates_maxwell_to_one() {
        let gas = rb();
        let g = build_velocity_grid(&gas, &[40e6], -3e6);
        let total = g.integrate(|v| maxwell_pdf(v, &gas));
        // band-edge spacing jumps on the Gaussian slope dominate this residual
        assert!((total - 1.0).abs() < 5e-6, "{total}");
    }

    #[test]
    fn unsaturated_resonant_od_is_two() {
        let gas = rb();
        let g = build_velocity_grid(&gas, &[], 0.0);
        let od = absorption_coefficient(&[], &[], 0.0, &gas, &g).unwrap();
        let doppler_limit = gas.depth_scale * maxwell_pdf(0.0, &gas) * gas.wavelength * gas.gamma_angular() / 4.0;
        assert_relative_eq!(od, doppler_limit, max_relative = 2e-2);
        assert_relative_eq!(od, 2.0, max_relative = 2e-2);
        assert_relative_eq!(od, dense_reference(&[], &[], 0.0, &gas), max_relative = 1e-7);
    }

    #[test]
    fn unsaturated_profile_tracks_maxwell() {
        let gas = rb();
        let od0 = absorption_coefficient(&[], &[], 0.0, &gas, &build_velocity_grid(&gas, &[], 0.0)).unwrap();
        let f0 = maxwell_pdf(0.0, &gas);
        for mhz in [-100.0, -60.0, -20.0, 10.0, 50.0, 100.0] {
            let d = mhz * 1e6;
            let od = absorption_coefficient(&[], &[], d, &gas, &build_velocity_grid(&gas, &[], d)).unwrap();
            let ratio = maxwell_pdf(gas.wavelength * d, &gas) / f0;
            assert_relative_eq!(od / od0, ratio, max_relative = 1e-2);
        }
    }

    #[test]
    fn unsaturated_profile_is_symmetric() {
        let gas = rb();
        for mhz in [3.0, 40.0, 170.0, 555.0] {
            let d = mhz * 1e6;
            let p = absorption_coefficient(&[], &[], d, &gas, &build_velocity_grid(&gas, &[], d)).unwrap();
            let m = absorption_coefficient(&[], &[], -d, &gas, &build_velocity_grid(&gas, &[], -d)).unwrap();
            assert_relative_eq!(p, m, max_relative = 1e-9);
        }
    }

    #[test]
    fn hole_appears_at_mirrored_probe_detuning() {
        let gas = rb();
        let eval = |s: f64, probe: f64| {
            let g = build_velocity_grid(&gas, &[40e6], probe);
            absorption_coefficient(&[s], &[40e6], probe, &gas, &g).unwrap()
        };
        let dip = eval(0.0, -40e6) - eval(2.0, -40e6);
        assert!(dip > 0.1, "dip {dip}");
        // Reading the hole 80 MHz away samples the tail of a Lorentzian whose
        // half-width is the natural one plus the power-broadened hole's.
        let same_side = eval(0.0, 40e6) - eval(2.0, 40e6);
        let w = 0.5 * gas.natural_linewidth_fwhm * (1.0 + 3f64.sqrt());
        let tail = w * w / (80e6 * 80e6 + w * w);
        assert!(same_side > 0.0);
        assert_relative_eq!(same_side / dip, tail, max_relative = 2e-2);
        assert!(same_side < 1e-2 * dip, "{same_side} vs {dip}");
    }

    #[test]
    fn kernel_matches_dense_reference_with_holes() {
        let gas = rb();
        let det = [40e6, 0.0, -40e6];
        for (s, probe) in [([2.0, 2.0, 2.0], -40e6), ([0.5, 7.0, 0.0], 0.0), ([1.0, 0.0, 3.0], 12e6)] {
            let g = build_velocity_grid(&gas, &det, probe);
            let od = absorption_coefficient(&s, &det, probe, &gas, &g).unwrap();
            assert_relative_eq!(od, dense_reference(&s, &det, probe, &gas), max_relative = 1e-7);
        }
    }

    #[test]
    fn refinement_convergence() {
        let gas = rb();
        let det = [40e6, 0.0, -40e6];
        for probe in [-40e6, 0.0, 17e6] {
            let coarse = build_velocity_grid_with(&gas, &det, probe, GridResolution::default());
            let fine = build_velocity_grid_with(&gas, &det, probe, GridResolution::new(0.5).unwrap());
            let a = absorption_coefficient(&[2.0, 1.0, 4.0], &det, probe, &gas, &coarse).unwrap();
            let b = absorption_coefficient(&[2.0, 1.0, 4.0], &det, probe, &gas, &fine).unwrap();
            assert!(((a - b) / b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn rejects_mismatched_lengths_and_negative_s() {
        let gas = rb();
        let g = build_velocity_grid(&gas, &[0.0], 0.0);
        assert!(matches!(
            absorption_coefficient(&[1.0, 2.0], &[0.0], 0.0, &gas, &g),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(absorption_coefficient(&[-1.0], &[0.0], 0.0, &gas, &g).is_err());
    }

    fn canvas() -> Canvas {
        Canvas::new(6, 4, 50e-6).unwrap()
    }

    #[test]
    fn zero_beams_give_uniform_unsaturated_map() {
        let gas = rb();
        let c = canvas();
        let beam = ObjectBeam::new(40e6, IntensityGrid::uniform(c, 0.0).unwrap()).unwrap();
        let map = od_map(&c, &[beam], -40e6, &gas).unwrap();
        let first = map.grid.as_slice()[0];
        assert!(map.grid.as_slice().iter().all(|&v| v == first));
        let g = build_velocity_grid(&gas, &[40e6], -40e6);
        assert_eq!(first, absorption_coefficient(&[0.0], &[40e6], -40e6, &gas, &g).unwrap());
    }

    #[test]
    fn half_plane_mask_bleaches_left_side() {
        let gas = rb();
        let c = canvas();
        let values = Grid::from_fn(c.width, c.height, |_, col| if col < c.width / 2 { 2.0 } else { 0.0 });
        let beam = ObjectBeam::new(25e6, IntensityGrid::new(values, c.pixel_pitch).unwrap()).unwrap();
        let map = od_map(&c, &[beam], -25e6, &gas).unwrap();
        for row in map.grid.rows() {
            let (left, right) = row.split_at(c.width / 2);
            let max_left = left.iter().copied().fold(f64::MIN, f64::max);
            let min_right = right.iter().copied().fold(f64::MAX, f64::min);
            assert!(max_left < min_right);
        }
    }

    #[test]
    fn od_map_rejects_dimension_mismatch() {
        let gas = rb();
        let c = canvas();
        let other = Canvas::new(5, 4, 50e-6).unwrap();
        let beam = ObjectBeam::new(0.0, IntensityGrid::uniform(other, 1.0).unwrap()).unwrap();
        assert!(matches!(od_map(&c, &[beam], 0.0, &gas), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn pixel_order_does_not_change_values() {
        let gas = rb();
        let c = canvas();
        let values = Grid::from_fn(c.width, c.height, |r, col| 0.3 * (r * c.width + col) as f64);
        let beam = ObjectBeam::new(0.0, IntensityGrid::new(values.clone(), c.pixel_pitch).unwrap()).unwrap();
        let map = od_map(&c, &[beam], 0.0, &gas).unwrap();
        let g = build_velocity_grid(&gas, &[0.0], 0.0);
        let kernel = AbsorptionKernel::new(&gas, &[0.0], 0.0, &g);
        for p in (0..values.as_slice().len()).rev() {
            let direct = kernel.evaluate(&[values.as_slice()[p]]).unwrap();
            assert_eq!(direct.to_bits(), map.grid.as_slice()[p].to_bits());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn od_non_increasing_in_each_s(
            s in proptest::collection::vec(0.0f64..8.0, 3),
            bump in 0.0f64..8.0,
            which in 0usize..3,
            probe in -120e6f64..120e6,
        ) {
            let gas = GasParams::default();
            let det = [35e6, -5e6, -50e6];
            let g = build_velocity_grid(&gas, &det, probe);
            let k = AbsorptionKernel::new(&gas, &det, probe, &g);
            let mut up = s.clone();
            up[which] += bump;
            let a = k.evaluate(&s).unwrap();
            let b = k.evaluate(&up).unwrap();
            prop_assert!(b <= a);
            prop_assert!(b > 0.0);
            prop_assert!(a <= k.unsaturated());
        }
    }
}
