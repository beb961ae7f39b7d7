use std::path::Path;

use image::{DynamicImage, ImageReader};

use crate::error::{Error, Result};
use crate::grid::{Grid, IntensityGrid};

/// Reads an 8- or 16-bit single-channel PGM or PNG as a linear transmittance
/// mask: sample / full-scale, no gamma.
pub fn load_mask(path: impl AsRef<Path>, pixel_pitch: f64) -> Result<IntensityGrid> {
    let path = path.as_ref();
    let unsupported = |reason: String| Error::UnsupportedImage {
        path: path.to_path_buf(),
        reason,
    };
    let reader = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    match reader.format() {
        Some(image::ImageFormat::Png) | Some(image::ImageFormat::Pnm) => {}
        other => return Err(unsupported(format!("expected PGM or PNG, detected {other:?}"))),
    }
    let image = reader.decode().map_err(|e| unsupported(e.to_string()))?;
    let (width, height) = (image.width() as usize, image.height() as usize);
    if width == 0 || height == 0 {
        return Err(unsupported("zero-size image".into()));
    }
    let values: Vec<f64> = match image {
        DynamicImage::ImageLuma8(buf) => buf.into_raw().into_iter().map(|v| v as f64 / 255.0).collect(),
        DynamicImage::ImageLuma16(buf) => buf.into_raw().into_iter().map(|v| v as f64 / 65535.0).collect(),
        other => {
            return Err(unsupported(format!(
                "expected single-channel 8/16-bit samples, found {:?}",
                other.color()
            )))
        }
    };
    IntensityGrid::transmittance(Grid::from_vec(width, height, values)?, pixel_pitch)
}
