//! Binary letter masks drawn from a handful of strokes.
//!
//! Strokes live in a square box `[-1, 1]²` (y down) fitted to the shorter
//! side of the frame. The letters share the frame, so their strokes are laid
//! out to cross rather than run along each other; that keeps the pairwise
//! correlation of the three masks small.

use crate::error::{Error, Result};
use crate::grid::{Canvas, Grid, IntensityGrid};

/// Letters with a built-in stroke layout.
pub const GLYPHS: [char; 3] = ['A', 'C', 'T'];

const STROKE_HALF_WIDTH: f64 = 0.06;

type Segment = ((f64, f64), (f64, f64));

fn strokes(letter: char) -> Option<Vec<Segment>> {
    match letter.to_ascii_uppercase() {
        'A' => Some(vec![
            ((-0.6, 0.8), (0.0, -0.65)),
            ((0.0, -0.65), (0.6, 0.8)),
            ((-0.33, 0.2), (0.33, 0.2)),
        ]),
        'C' => {
            // arc of radius 0.6 open toward +x
            let n = 48;
            let (start, end) = (40f64.to_radians(), 320f64.to_radians());
            let point = |i: usize| {
                let t = start + (end - start) * i as f64 / n as f64;
                (0.6 * t.cos(), 0.6 * t.sin())
            };
            Some((0..n).map(|i| (point(i), point(i + 1))).collect())
        }
        'T' => Some(vec![((-0.7, -0.8), (0.7, -0.8)), ((0.0, -0.8), (0.0, 0.8))]),
        _ => None,
    }
}

fn distance_to_segment(p: (f64, f64), seg: &Segment) -> f64 {
    let ((ax, ay), (bx, by)) = *seg;
    let (dx, dy) = (bx - ax, by - ay);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - ax) * dx + (p.1 - ay) * dy) / len2).clamp(0.0, 1.0)
    };
    let (cx, cy) = (ax + t * dx - p.0, ay + t * dy - p.1);
    (cx * cx + cy * cy).sqrt()
}

/// Transmittance mask with the letter transparent (1) on an opaque (0) field.
pub fn glyph_mask(letter: char, canvas: Canvas) -> Result<IntensityGrid> {
    canvas.validate()?;
    let segments = strokes(letter).ok_or_else(|| {
        Error::invalid("glyph", format!("no stroke layout for {letter:?}; available: {GLYPHS:?}"))
    })?;
    let half = canvas.width.min(canvas.height) as f64 / 2.0;
    let values = Grid::from_fn(canvas.width, canvas.height, |row, col| {
        let u = (col as f64 + 0.5 - canvas.width as f64 / 2.0) / half;
        let v = (row as f64 + 0.5 - canvas.height as f64 / 2.0) / half;
        let hit = segments.iter().any(|s| distance_to_segment((u, v), s) <= STROKE_HALF_WIDTH);
        if hit {
            1.0
        } else {
            0.0
        }
    });
    IntensityGrid::transmittance(values, canvas.pixel_pitch)
}
