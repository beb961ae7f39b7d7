use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Csv,
    Pgm16,
}

/// Tomogram coordinates carried into the PGM sidecar.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GridAnnotation {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe_detuning_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resonant_velocity_m_per_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub momentum_kg_m_per_s: Option<f64>,
}

/// JSON metadata written next to a 16-bit PGM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub width: usize,
    pub height: usize,
    /// Value mapped to sample 0.
    pub min: f64,
    /// Value mapped to sample 65535; equals `min` for constant grids.
    pub max: f64,
    /// Non-finite pixels, written as sample 0.
    pub invalid_pixels: usize,
    #[serde(flatten)]
    pub annotation: GridAnnotation,
}

fn ensure_nonempty(grid: &Grid<f64>) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("grid", "cannot export an empty grid"));
    }
    Ok(())
}

/// Row-major decimal values, comma separated, LF line endings. Values use
/// the shortest representation that parses back to the same bits.
pub fn encode_csv(grid: &Grid<f64>) -> Result<String> {
    ensure_nonempty(grid)?;
    let mut out = String::new();
    for row in grid.rows() {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{v}").unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

/// Binary P5 PGM with maxval 65535, min–max normalized over finite values.
pub fn encode_pgm16(grid: &Grid<f64>, annotation: GridAnnotation) -> Result<(Vec<u8>, Sidecar)> {
    ensure_nonempty(grid)?;
    let finite = grid.as_slice().iter().copied().filter(|v| v.is_finite());
    let (min, max) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let (min, max) = if min.is_finite() { (min, max) } else { (0.0, 0.0) };
    let range = max - min;
    let mut bytes = format!("P5\n{} {}\n65535\n", grid.width(), grid.height()).into_bytes();
    let mut invalid_pixels = 0;
    for &v in grid.as_slice() {
        let sample = if !v.is_finite() {
            invalid_pixels += 1;
            0
        } else if range > 0.0 {
            ((v - min) / range * 65535.0).round() as u16
        } else {
            0
        };
        bytes.extend_from_slice(&sample.to_be_bytes());
    }
    let sidecar = Sidecar {
        width: grid.width(),
        height: grid.height(),
        min,
        max,
        invalid_pixels,
        annotation,
    };
    Ok((bytes, sidecar))
}

/// Path of the JSON sidecar for a PGM written at `path`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes `grid` to `path`. For `Pgm16` a JSON sidecar goes next to it with
/// the extension replaced by `.json`.
pub fn export_grid(grid: &Grid<f64>, path: impl AsRef<Path>, format: ExportFormat, annotation: GridAnnotation) -> Result<()> {
    let path = path.as_ref();
    match format {
        ExportFormat::Csv => write_file(path, encode_csv(grid)?.as_bytes()),
        ExportFormat::Pgm16 => {
            let (bytes, sidecar) = encode_pgm16(grid, annotation)?;
            write_file(path, &bytes)?;
            let json = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes") + "\n";
            write_file(&sidecar_path(path), json.as_bytes())
        }
    }
}

/// Parses a grid written by [`encode_csv`].
pub fn read_csv(path: impl AsRef<Path>) -> Result<Grid<f64>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |reason: String| Error::Format {
        path: path.to_path_buf(),
        reason,
    };
    let mut data = Vec::new();
    let mut width = None;
    let mut height = 0;
    for (line_no, line) in text.lines().enumerate() {
        let row = line
            .split(',')
            .map(|field| field.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| bad(format!("line {}: {e}", line_no + 1)))?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(bad(format!("line {} has {} fields, expected {w}", line_no + 1, row.len())))
            }
            _ => {}
        }
        data.extend(row);
        height += 1;
    }
    let width = width.ok_or_else(|| bad("no rows".into()))?;
    Grid::from_vec(width, height, data)
}

/// Two-column curve CSV with a header row.
pub fn encode_curve_csv(points: &[(f64, f64)]) -> String {
    let mut out = String::from("detuning_hz,transmittance\n");
    for (d, t) in points {
        writeln!(out, "{d},{t}").unwrap();
    }
    out
}

pub fn write_curve_csv(path: impl AsRef<Path>, points: &[(f64, f64)]) -> Result<()> {
    write_file(path.as_ref(), encode_curve_csv(points).as_bytes())
}
