//! Object masks and beam profiles in, grids and curves out.

mod export;
mod glyph;
mod mask;
mod profile;

pub use export::{
    encode_csv, encode_curve_csv, encode_pgm16, export_grid, read_csv, sidecar_path, write_curve_csv, ExportFormat,
    GridAnnotation, Sidecar,
};
pub use glyph::{glyph_mask, GLYPHS};
pub use mask::load_mask;
pub use profile::{apply_mask, gaussian_profile, nd_composite, NdLayout, Rect};
