//! Rectangular pixel grids shared by masks, beams, OD maps and detector frames.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major 2D array. Index `(row, col)`; `row` runs over `height`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Clone> Grid<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Grid {
            width,
            height,
            data: vec![value; width * height],
        }
    }
}

impl<T> Grid<T> {
    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::LengthMismatch {
                what: "grid data",
                expected: width * height,
                found: data.len(),
            });
        }
        Ok(Grid {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                data.push(f(row, col));
            }
        }
        Grid {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// `(width, height)`
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> &T {
        &self.data[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: T) {
        self.data[row * self.width + col] = value;
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        // chunks_exact(0) panics; an empty grid simply has no rows
        self.data.chunks(self.width.max(1)).take(self.height)
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn zip_map<U, V>(&self, other: &Grid<U>, mut f: impl FnMut(&T, &U) -> V) -> Result<Grid<V>> {
        ensure_same_dims(self.dims(), other.dims())?;
        Ok(Grid {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }
}

pub(crate) fn ensure_same_dims(expected: (usize, usize), found: (usize, usize)) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Transverse frame geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Canvas {
    pub width: usize,
    pub height: usize,
    /// m
    pub pixel_pitch: f64,
}

impl Canvas {
    pub fn new(width: usize, height: usize, pixel_pitch: f64) -> Result<Self> {
        let canvas = Canvas {
            width,
            height,
            pixel_pitch,
        };
        canvas.validate()?;
        Ok(canvas)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::invalid(
                "canvas",
                format!("width and height must be >= 1, got {}x{}", self.width, self.height),
            ));
        }
        if !(self.pixel_pitch.is_finite() && self.pixel_pitch > 0.0) {
            return Err(Error::invalid("pixel_pitch", "must be finite and > 0"));
        }
        Ok(())
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Physical offset of pixel `(row, col)` from the frame center, m, as `(x, y)`.
    pub fn offset_from_center(&self, row: usize, col: usize) -> (f64, f64) {
        let x = (col as f64 + 0.5 - self.width as f64 / 2.0) * self.pixel_pitch;
        let y = (row as f64 + 0.5 - self.height as f64 / 2.0) * self.pixel_pitch;
        (x, y)
    }
}

/// Non-negative finite values on a canvas. Beams hold saturation parameters;
/// masks hold transmittances in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityGrid {
    canvas: Canvas,
    values: Grid<f64>,
}

impl IntensityGrid {
    pub fn new(values: Grid<f64>, pixel_pitch: f64) -> Result<Self> {
        let canvas = Canvas::new(values.width(), values.height(), pixel_pitch)?;
        if let Some(bad) = values.as_slice().iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::invalid("intensity", format!("values must be finite and >= 0, got {bad}")));
        }
        Ok(IntensityGrid { canvas, values })
    }

    /// Like [`IntensityGrid::new`] but additionally requires every value ≤ 1.
    pub fn transmittance(values: Grid<f64>, pixel_pitch: f64) -> Result<Self> {
        if let Some(bad) = values.as_slice().iter().find(|v| **v > 1.0) {
            return Err(Error::invalid("transmittance", format!("values must be <= 1, got {bad}")));
        }
        Self::new(values, pixel_pitch)
    }

    pub fn uniform(canvas: Canvas, value: f64) -> Result<Self> {
        canvas.validate()?;
        Self::new(Grid::filled(canvas.width, canvas.height, value), canvas.pixel_pitch)
    }

    pub fn canvas(&self) -> Canvas {
        self.canvas
    }

    pub fn dims(&self) -> (usize, usize) {
        self.canvas.dims()
    }

    pub fn pixel_pitch(&self) -> f64 {
        self.canvas.pixel_pitch
    }

    pub fn values(&self) -> &Grid<f64> {
        &self.values
    }

    pub fn as_slice(&self) -> &[f64] {
        self.values.as_slice()
    }

    pub fn max_value(&self) -> f64 {
        self.as_slice().iter().copied().fold(0.0, f64::max)
    }

    /// Multiplies every value by `factor` (≥ 0).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor >= 0.0) {
            return Err(Error::invalid("scale", format!("must be finite and >= 0, got {factor}")));
        }
        Ok(IntensityGrid {
            canvas: self.canvas,
            values: self.values.map(|v| v * factor),
        })
    }

    pub(crate) fn ensure_same_canvas(&self, other: &IntensityGrid) -> Result<()> {
        ensure_same_dims(self.dims(), other.dims())?;
        if self.pixel_pitch() != other.pixel_pitch() {
            return Err(Error::invalid(
                "pixel_pitch",
                format!("grids disagree: {} vs {}", self.pixel_pitch(), other.pixel_pitch()),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_negative_and_non_finite() {
        let g = Grid::from_vec(2, 1, vec![1.0, -0.5]).unwrap();
        assert!(IntensityGrid::new(g, 1e-5).is_err());
        let g = Grid::from_vec(1, 1, vec![f64::INFINITY]).unwrap();
        assert!(IntensityGrid::new(g, 1e-5).is_err());
        let g = Grid::from_vec(1, 1, vec![1.5]).unwrap();
        assert!(IntensityGrid::new(g.clone(), 1e-5).is_ok());
        assert!(IntensityGrid::transmittance(g, 1e-5).is_err());
    }

    #[test]
    fn rejects_zero_size_and_bad_pitch() {
        assert!(Canvas::new(0, 4, 1e-5).is_err());
        assert!(Canvas::new(4, 4, 0.0).is_err());
        assert!(Grid::<f64>::from_vec(2, 2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn row_major_layout() {
        let g = Grid::from_fn(3, 2, |r, c| r * 10 + c);
        assert_eq!(g.as_slice(), &[0, 1, 2, 10, 11, 12]);
        assert_eq!(*g.get(1, 2), 12);
        let rows: Vec<_> = g.rows().collect();
        assert_eq!(rows, vec![&[0, 1, 2][..], &[10, 11, 12][..]]);
    }

    #[test]
    fn zip_map_checks_dims() {
        let a = Grid::filled(2, 2, 1.0);
        let b = Grid::filled(2, 3, 1.0);
        assert!(matches!(a.zip_map(&b, |x, y| x + y), Err(Error::DimensionMismatch { .. })));
    }
}
