//! Probe detection chain: transmitted frames, ΔOD tomograms and scans.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{ensure_same_dims, Canvas, Grid, IntensityGrid};
use crate::medium::{od_maps_off_on, GridResolution, OdMap};
use crate::physics::{momentum_of_detuning, probe_resonant_velocity, GasParams, ObjectBeam};

/// Default detection floor as a fraction of the probe's peak intensity.
pub const DEFAULT_FLOOR_FRACTION: f64 = 1e-6;

/// Everything needed to form frames: the vapor, the object beams and the
/// probe.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub gas: GasParams,
    pub canvas: Canvas,
    pub beams: Vec<ObjectBeam>,
    /// Incident probe intensity (arbitrary units, far below saturation).
    pub probe: IntensityGrid,
    /// Pixels transmitting less than `floor_fraction × max(probe)` are invalid.
    pub floor_fraction: f64,
    pub resolution: GridResolution,
}

impl Experiment {
    /// Uniform unit probe, default floor and production grid resolution.
    pub fn new(gas: GasParams, canvas: Canvas, beams: Vec<ObjectBeam>) -> Result<Self> {
        let probe = IntensityGrid::uniform(canvas, 1.0)?;
        let exp = Experiment {
            gas,
            canvas,
            beams,
            probe,
            floor_fraction: DEFAULT_FLOOR_FRACTION,
            resolution: GridResolution::default(),
        };
        exp.validate()?;
        Ok(exp)
    }

    pub fn with_probe(mut self, probe: IntensityGrid) -> Result<Self> {
        self.probe = probe;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.gas.validate()?;
        self.canvas.validate()?;
        ensure_same_dims(self.canvas.dims(), self.probe.dims())?;
        if self.probe.pixel_pitch() != self.canvas.pixel_pitch {
            return Err(Error::invalid("probe", "pixel pitch differs from the canvas"));
        }
        for beam in &self.beams {
            ensure_same_dims(self.canvas.dims(), beam.intensity.dims())?;
        }
        if !(self.floor_fraction > 0.0 && self.floor_fraction.is_finite()) {
            return Err(Error::invalid("floor", format!("must be > 0, got {}", self.floor_fraction)));
        }
        if !(self.probe.max_value() > 0.0) {
            return Err(Error::invalid("probe", "profile has no light"));
        }
        Ok(())
    }

    /// Absolute detection floor in probe intensity units.
    pub fn floor(&self) -> f64 {
        self.floor_fraction * self.probe.max_value()
    }

    pub fn beam_detunings(&self) -> Vec<f64> {
        self.beams.iter().map(|b| b.detuning).collect()
    }
}

/// `I_out = I_in · exp(−OD)` pixel by pixel.
pub fn transmit(probe: &IntensityGrid, od: &OdMap) -> Result<IntensityGrid> {
    let values = probe.values().zip_map(&od.grid, |i, d| i * (-d).exp())?;
    IntensityGrid::new(values, probe.pixel_pitch())
}

/// ΔOD values with a validity mask. Invalid pixels hold 0.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaOd {
    pub values: Grid<f64>,
    pub valid: Grid<bool>,
}

/// `ΔOD = −ln(I_on / I_off)` from two detector frames; pixels where either
/// frame is below `floor` are marked invalid.
pub fn delta_od(i_on: &IntensityGrid, i_off: &IntensityGrid, floor: f64) -> Result<DeltaOd> {
    if !(floor > 0.0 && floor.is_finite()) {
        return Err(Error::invalid("floor", format!("must be finite and > 0, got {floor}")));
    }
    i_on.ensure_same_canvas(i_off)?;
    let valid = i_on.values().zip_map(i_off.values(), |&on, &off| on >= floor && off >= floor)?;
    let values = i_on
        .values()
        .zip_map(i_off.values(), |&on, &off| if on >= floor && off >= floor { -(on / off).ln() } else { 0.0 })?;
    Ok(DeltaOd { values, valid })
}

/// ΔOD section of the phase-space pattern at one probe detuning.
#[derive(Debug, Clone, PartialEq)]
pub struct Tomogram {
    pub delta_od: Grid<f64>,
    pub valid: Grid<bool>,
    /// Hz
    pub probe_detuning: f64,
    /// m/s
    pub resolved_velocity: f64,
    /// kg·m/s
    pub momentum: f64,
    /// m
    pub pixel_pitch: f64,
}

impl Tomogram {
    pub fn dims(&self) -> (usize, usize) {
        self.delta_od.dims()
    }

    pub fn valid_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.delta_od
            .as_slice()
            .iter()
            .zip(self.valid.as_slice())
            .filter(|(_, &ok)| ok)
            .map(|(&v, _)| v)
    }

    /// Horizontally flipped copy, as seen after a reflecting beam splitter.
    pub fn mirrored(&self) -> Tomogram {
        Tomogram {
            delta_od: mirror_transform(&self.delta_od),
            valid: mirror_transform(&self.valid),
            ..self.clone()
        }
    }
}

/// Simulates the off/on frame pair and reconstructs ΔOD.
///
/// The reconstructed values are `OD_off − OD_on`, which is what
/// `−ln(I_on/I_off)` measures; the incident profile only decides validity.
pub fn tomogram(experiment: &Experiment, probe_detuning: f64) -> Result<Tomogram> {
    experiment.validate()?;
    let (off, on) = od_maps_off_on(
        &experiment.canvas,
        &experiment.beams,
        probe_detuning,
        &experiment.gas,
        experiment.resolution,
    )?;
    let i_off = transmit(&experiment.probe, &off)?;
    let i_on = transmit(&experiment.probe, &on)?;
    let floor = experiment.floor();
    let valid = i_on.values().zip_map(i_off.values(), |&a, &b| a >= floor && b >= floor)?;
    let diff = off.grid.zip_map(&on.grid, |a, b| a - b)?;
    let delta_od = diff.zip_map(&valid, |&d, &ok| if ok { d } else { 0.0 })?;
    Ok(Tomogram {
        delta_od,
        valid,
        probe_detuning,
        resolved_velocity: probe_resonant_velocity(probe_detuning, &experiment.gas),
        momentum: momentum_of_detuning(probe_detuning, &experiment.gas),
        pixel_pitch: experiment.canvas.pixel_pitch,
    })
}

/// Tomograms ordered by strictly increasing probe detuning.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TomogramStack {
    tomograms: Vec<Tomogram>,
}

impl TomogramStack {
    pub fn new(tomograms: Vec<Tomogram>) -> Result<Self> {
        for pair in tomograms.windows(2) {
            if !(pair[1].probe_detuning > pair[0].probe_detuning) {
                return Err(Error::invalid("detunings", "stack must be strictly increasing in detuning"));
            }
            ensure_same_dims(pair[0].dims(), pair[1].dims())?;
            if pair[0].pixel_pitch != pair[1].pixel_pitch {
                return Err(Error::invalid("pixel_pitch", "stack members disagree"));
            }
        }
        Ok(TomogramStack { tomograms })
    }

    pub fn tomograms(&self) -> &[Tomogram] {
        &self.tomograms
    }

    pub fn len(&self) -> usize {
        self.tomograms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tomograms.is_empty()
    }

    pub fn momenta(&self) -> Vec<f64> {
        self.tomograms.iter().map(|t| t.momentum).collect()
    }
}

fn check_increasing(detunings: &[f64]) -> Result<()> {
    if detunings.iter().any(|d| !d.is_finite()) {
        return Err(Error::invalid("detunings", "must be finite"));
    }
    if detunings.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("detunings", "must be strictly increasing without duplicates"));
    }
    Ok(())
}

/// One tomogram per detuning.
pub fn scan(experiment: &Experiment, detunings: &[f64]) -> Result<TomogramStack> {
    check_increasing(detunings)?;
    let tomograms = detunings
        .par_iter()
        .map(|&d| tomogram(experiment, d))
        .collect::<Result<Vec<_>>>()?;
    TomogramStack::new(tomograms)
}

/// Mean probe transmittance `I_on / I_r` over pixels the probe illuminates
/// above the floor, for each detuning.
pub fn transmittance_curve(experiment: &Experiment, detunings: &[f64]) -> Result<Vec<(f64, f64)>> {
    if detunings.is_empty() {
        return Err(Error::invalid("detunings", "at least one detuning is required"));
    }
    check_increasing(detunings)?;
    experiment.validate()?;
    let floor = experiment.floor();
    detunings
        .par_iter()
        .map(|&d| {
            let (_, on) = od_maps_off_on(&experiment.canvas, &experiment.beams, d, &experiment.gas, experiment.resolution)?;
            let i_on = transmit(&experiment.probe, &on)?;
            let mut sum = 0.0;
            let mut count = 0usize;
            for (&incident, &out) in experiment.probe.as_slice().iter().zip(i_on.as_slice()) {
                if incident >= floor {
                    sum += out / incident;
                    count += 1;
                }
            }
            Ok((d, sum / count as f64))
        })
        .collect()
}

/// Left–right reflection of a grid.
pub fn mirror_transform<T: Clone>(grid: &Grid<T>) -> Grid<T> {
    let w = grid.width();
    Grid::from_fn(w, grid.height(), |row, col| grid.get(row, w - 1 - col).clone())
}
