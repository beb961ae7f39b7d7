use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ensure_same_dims, Canvas, Grid, IntensityGrid};

/// Centered Gaussian with `peak_s` at the frame center and `peak_s·e⁻²` at
/// radius `waist` (m).
pub fn gaussian_profile(canvas: Canvas, waist: f64, peak_s: f64) -> Result<IntensityGrid> {
    canvas.validate()?;
    if !(waist.is_finite() && waist > 0.0) {
        return Err(Error::invalid("waist", format!("must be finite and > 0, got {waist}")));
    }
    if !(peak_s.is_finite() && peak_s >= 0.0) {
        return Err(Error::invalid("peak_s", format!("must be finite and >= 0, got {peak_s}")));
    }
    let values = Grid::from_fn(canvas.width, canvas.height, |row, col| {
        let (x, y) = canvas.offset_from_center(row, col);
        peak_s * (-2.0 * (x * x + y * y) / (waist * waist)).exp()
    });
    IntensityGrid::new(values, canvas.pixel_pitch)
}

/// Elementwise product of a beam with a transmittance mask. The result
/// keeps the beam's pitch.
pub fn apply_mask(beam: &IntensityGrid, mask: &IntensityGrid) -> Result<IntensityGrid> {
    ensure_same_dims(beam.dims(), mask.dims())?;
    let values = beam.values().zip_map(mask.values(), |b, m| b * m)?;
    IntensityGrid::new(values, beam.pixel_pitch())
}

/// Axis-aligned rectangle in fractions of the frame, `[x0, x1) × [y0, y1)`,
/// `y` growing downward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    fn validate(&self, name: &'static str) -> Result<()> {
        let inside = |v: f64| (0.0..=1.0).contains(&v);
        if !(inside(self.x0) && inside(self.x1) && inside(self.y0) && inside(self.y1)) {
            return Err(Error::invalid(name, format!("{self:?} leaves the unit frame")));
        }
        if !(self.x0 < self.x1 && self.y0 < self.y1) {
            return Err(Error::invalid(name, format!("{self:?} has no area")));
        }
        Ok(())
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }
}

/// Two stacked neutral-density filters. Where they overlap the densities add.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NdLayout {
    pub nd_a: f64,
    pub rect_a: Rect,
    pub nd_b: f64,
    pub rect_b: Rect,
}

impl Default for NdLayout {
    /// ND 0.3 over the left half and ND 0.6 over the bottom half, leaving
    /// quadrants of ND 0, 0.3, 0.6 and 0.9.
    fn default() -> Self {
        NdLayout {
            nd_a: 0.3,
            rect_a: Rect {
                x0: 0.0,
                y0: 0.0,
                x1: 0.5,
                y1: 1.0,
            },
            nd_b: 0.6,
            rect_b: Rect {
                x0: 0.0,
                y0: 0.5,
                x1: 1.0,
                y1: 1.0,
            },
        }
    }
}

impl NdLayout {
    pub fn validate(&self) -> Result<()> {
        for (name, nd) in [("nd_a", self.nd_a), ("nd_b", self.nd_b)] {
            if !(nd.is_finite() && nd >= 0.0) {
                return Err(Error::invalid(name, format!("must be finite and >= 0, got {nd}")));
            }
        }
        self.rect_a.validate("rect_a")?;
        self.rect_b.validate("rect_b")
    }

    /// Neutral densities of regions R1 (clear), R2 (filter a), R3 (filter b)
    /// and R4 (overlap).
    pub fn region_nds(&self) -> [f64; 4] {
        [0.0, self.nd_a, self.nd_b, self.nd_a + self.nd_b]
    }

    /// Transmittances of R1..R4; stacked filters multiply.
    pub fn region_transmittances(&self) -> [f64; 4] {
        let ta = 10f64.powf(-self.nd_a);
        let tb = 10f64.powf(-self.nd_b);
        [1.0, ta, tb, ta * tb]
    }

    /// Region index (0..4) at a fractional frame position.
    pub fn region_at(&self, x: f64, y: f64) -> usize {
        match (self.rect_a.contains(x, y), self.rect_b.contains(x, y)) {
            (false, false) => 0,
            (true, false) => 1,
            (false, true) => 2,
            (true, true) => 3,
        }
    }

    /// Region index of every pixel, sampled at pixel centers.
    pub fn region_map(&self, width: usize, height: usize) -> Grid<usize> {
        Grid::from_fn(width, height, |row, col| {
            self.region_at((col as f64 + 0.5) / width as f64, (row as f64 + 0.5) / height as f64)
        })
    }
}

/// Transmittance mask of an ND layout.
pub fn nd_composite(layout: &NdLayout, canvas: Canvas) -> Result<IntensityGrid> {
    layout.validate()?;
    canvas.validate()?;
    let t = layout.region_transmittances();
    let values = layout.region_map(canvas.width, canvas.height).map(|&r| t[r]);
    IntensityGrid::transmittance(values, canvas.pixel_pitch)
}
