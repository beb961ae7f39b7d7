//! Scenario files: a sectioned TOML description of gas, frame, object beams,
//! probe and outputs.
//!
//! ```toml
//! [gas]                      # every key optional; Rb-87 D2 at room temperature
//! linewidth_mhz = 5.75
//! temperature_k = 298.15
//!
//! [canvas]
//! width = 128
//! height = 128
//! pitch_um = 50.0
//!
//! [[beam]]
//! detuning_mhz = 40.0
//! peak_s = 2.0               # default 2
//! pattern = "glyph:C"        # or: open, nd, half-plane; or mask = "c.pgm"
//!
//! [probe]
//! profile = "uniform"        # or gaussian with waist_mm
//!
//! [output]
//! directory = "out"
//! formats = ["csv", "pgm16"]
//! ```
//!
//! Relative paths are resolved against the scenario file's directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Canvas, IntensityGrid};
use crate::imaging::{Experiment, DEFAULT_FLOOR_FRACTION};
use crate::medium::GridResolution;
use crate::objects::{apply_mask, gaussian_profile, glyph_mask, load_mask, nd_composite, ExportFormat, NdLayout};
use crate::physics::{GasParams, ObjectBeam};

pub const DEFAULT_PEAK_S: f64 = 2.0;
pub const DEFAULT_CANVAS: (usize, usize) = (256, 256);
pub const DEFAULT_PITCH_UM: f64 = 50.0;
/// Minimum beam separation in natural linewidths.
pub const MIN_SEPARATION_LINEWIDTHS: f64 = 3.0;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(default)]
    allow_close_beams: bool,
    #[serde(default)]
    gas: RawGas,
    #[serde(default)]
    canvas: RawCanvas,
    #[serde(default)]
    beam: Vec<RawBeam>,
    #[serde(default)]
    probe: RawProbe,
    #[serde(default)]
    output: RawOutput,
    #[serde(default)]
    numerics: RawNumerics,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGas {
    atom_mass_kg: Option<f64>,
    wavelength_nm: Option<f64>,
    linewidth_mhz: Option<f64>,
    temperature_k: Option<f64>,
    depth_scale: Option<f64>,
    cell_length_m: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCanvas {
    width: Option<usize>,
    height: Option<usize>,
    pitch_um: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBeam {
    detuning_mhz: f64,
    peak_s: Option<f64>,
    mask: Option<PathBuf>,
    pattern: Option<String>,
    waist_mm: Option<f64>,
    nd_a: Option<f64>,
    nd_b: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProbe {
    profile: Option<String>,
    waist_mm: Option<f64>,
    floor: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    directory: Option<PathBuf>,
    formats: Option<Vec<ExportFormat>>,
    mirror: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNumerics {
    grid_scale: Option<f64>,
}

/// Transverse structure imprinted on an object beam.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ObjectPattern {
    Open,
    Glyph { letter: char },
    Nd { layout: NdLayout },
    /// Left half transparent.
    HalfPlane,
    Mask { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeamSpec {
    pub detuning_hz: f64,
    pub peak_s: f64,
    pub pattern: ObjectPattern,
    /// Gaussian envelope waist (m); `None` for a flat-top beam.
    pub waist_m: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase", tag = "profile")]
pub enum ProbeProfile {
    Uniform,
    Gaussian { waist_m: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeSpec {
    #[serde(flatten)]
    pub profile: ProbeProfile,
    /// Detection floor as a fraction of peak probe intensity.
    pub floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputSpec {
    /// Not echoed into manifests: where artifacts land does not affect them.
    #[serde(skip)]
    pub directory: PathBuf,
    pub formats: Vec<ExportFormat>,
    pub mirror: bool,
}

/// Fully resolved scenario in SI units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub gas: GasParams,
    pub canvas: Canvas,
    pub beams: Vec<BeamSpec>,
    pub probe: ProbeSpec,
    pub output: OutputSpec,
    pub allow_close_beams: bool,
    pub grid_scale: f64,
}

fn invalid(path: &Path, message: impl Into<String>) -> Error {
    Error::Scenario {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Reads and validates a scenario file.
pub fn parse_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    parse_scenario_str(&text, path, base)
}

/// Parses scenario text; `base` anchors relative paths and `origin` names
/// the source in diagnostics.
pub fn parse_scenario_str(text: &str, origin: &Path, base: &Path) -> Result<Scenario> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| invalid(origin, e.to_string().trim_end()))?;
    resolve(raw, origin, base)
}

fn resolve(raw: RawScenario, origin: &Path, base: &Path) -> Result<Scenario> {
    let scenario_err = |e: Error| match e {
        Error::InvalidParameter { name, reason } => invalid(origin, format!("{name}: {reason}")),
        other => other,
    };

    let defaults = GasParams::default();
    let g = raw.gas;
    let gas = GasParams {
        atom_mass: g.atom_mass_kg.unwrap_or(defaults.atom_mass),
        wavelength: g.wavelength_nm.map_or(defaults.wavelength, |nm| nm / 1e9),
        natural_linewidth_fwhm: g.linewidth_mhz.map_or(defaults.natural_linewidth_fwhm, |m| m * 1e6),
        temperature: g.temperature_k.unwrap_or(defaults.temperature),
        depth_scale: g.depth_scale.unwrap_or(defaults.depth_scale),
        cell_length: g.cell_length_m.unwrap_or(defaults.cell_length),
    };
    gas.validate().map_err(scenario_err)?;

    let canvas = Canvas::new(
        raw.canvas.width.unwrap_or(DEFAULT_CANVAS.0),
        raw.canvas.height.unwrap_or(DEFAULT_CANVAS.1),
        raw.canvas.pitch_um.unwrap_or(DEFAULT_PITCH_UM) / 1e6,
    )
    .map_err(scenario_err)?;

    let mut beams = Vec::with_capacity(raw.beam.len());
    for (i, b) in raw.beam.into_iter().enumerate() {
        let which = format!("beam {}", i + 1);
        let detuning_hz = b.detuning_mhz * 1e6;
        if !detuning_hz.is_finite() {
            return Err(invalid(origin, format!("{which}: detuning_mhz must be finite")));
        }
        let peak_s = b.peak_s.unwrap_or(DEFAULT_PEAK_S);
        if !(peak_s.is_finite() && peak_s >= 0.0) {
            return Err(invalid(origin, format!("{which}: peak_s must be finite and >= 0, got {peak_s}")));
        }
        let waist_m = match b.waist_mm {
            Some(w) if !(w.is_finite() && w > 0.0) => {
                return Err(invalid(origin, format!("{which}: waist_mm must be > 0, got {w}")))
            }
            w => w.map(|mm| mm / 1e3),
        };
        let is_nd = b.pattern.as_deref() == Some("nd");
        if !is_nd && (b.nd_a.is_some() || b.nd_b.is_some()) {
            return Err(invalid(origin, format!("{which}: nd_a/nd_b only apply to pattern = \"nd\"")));
        }
        let pattern = match (b.mask, b.pattern) {
            (Some(_), Some(_)) => return Err(invalid(origin, format!("{which}: give either mask or pattern, not both"))),
            (Some(mask), None) => {
                let resolved = base.join(&mask);
                if !resolved.is_file() {
                    return Err(invalid(origin, format!("{which}: mask file {} does not exist", resolved.display())));
                }
                ObjectPattern::Mask { path: resolved }
            }
            (None, None) => ObjectPattern::Open,
            (None, Some(p)) => parse_pattern(&p, b.nd_a, b.nd_b).map_err(|m| invalid(origin, format!("{which}: {m}")))?,
        };
        beams.push(BeamSpec {
            detuning_hz,
            peak_s,
            pattern,
            waist_m,
        });
    }

    if !raw.allow_close_beams {
        let min_sep = MIN_SEPARATION_LINEWIDTHS * gas.natural_linewidth_fwhm;
        for i in 0..beams.len() {
            for j in (i + 1)..beams.len() {
                let sep = (beams[i].detuning_hz - beams[j].detuning_hz).abs();
                if sep < min_sep {
                    return Err(invalid(
                        origin,
                        format!(
                            "beams {} and {} are {:.3} MHz apart; separation must be at least {} linewidths ({:.3} MHz) \
                             unless allow_close_beams = true",
                            i + 1,
                            j + 1,
                            sep / 1e6,
                            MIN_SEPARATION_LINEWIDTHS,
                            min_sep / 1e6
                        ),
                    ));
                }
            }
        }
    }

    let profile = match raw.probe.profile.as_deref() {
        None | Some("uniform") => {
            if raw.probe.waist_mm.is_some() {
                return Err(invalid(origin, "probe: waist_mm needs profile = \"gaussian\""));
            }
            ProbeProfile::Uniform
        }
        Some("gaussian") => match raw.probe.waist_mm {
            Some(w) if w.is_finite() && w > 0.0 => ProbeProfile::Gaussian { waist_m: w / 1e3 },
            _ => return Err(invalid(origin, "probe: gaussian profile needs waist_mm > 0")),
        },
        Some(other) => return Err(invalid(origin, format!("probe: unknown profile {other:?} (uniform, gaussian)"))),
    };
    let floor = raw.probe.floor.unwrap_or(DEFAULT_FLOOR_FRACTION);
    if !(floor.is_finite() && floor > 0.0 && floor < 1.0) {
        return Err(invalid(origin, format!("probe: floor must lie in (0, 1), got {floor}")));
    }

    let formats = raw.output.formats.unwrap_or_else(|| vec![ExportFormat::Csv, ExportFormat::Pgm16]);
    if formats.is_empty() {
        return Err(invalid(origin, "output: formats must not be empty"));
    }
    let output = OutputSpec {
        directory: base.join(raw.output.directory.unwrap_or_else(|| PathBuf::from("out"))),
        formats,
        mirror: raw.output.mirror.unwrap_or(false),
    };

    let grid_scale = raw.numerics.grid_scale.unwrap_or(1.0);
    GridResolution::new(grid_scale).map_err(scenario_err)?;

    Ok(Scenario {
        gas,
        canvas,
        beams,
        probe: ProbeSpec { profile, floor },
        output,
        allow_close_beams: raw.allow_close_beams,
        grid_scale,
    })
}

fn parse_pattern(text: &str, nd_a: Option<f64>, nd_b: Option<f64>) -> std::result::Result<ObjectPattern, String> {
    match text {
        "open" => Ok(ObjectPattern::Open),
        "half-plane" => Ok(ObjectPattern::HalfPlane),
        "nd" => {
            let d = NdLayout::default();
            let layout = NdLayout {
                nd_a: nd_a.unwrap_or(d.nd_a),
                nd_b: nd_b.unwrap_or(d.nd_b),
                ..d
            };
            layout.validate().map_err(|e| e.to_string())?;
            Ok(ObjectPattern::Nd { layout })
        }
        _ => {
            let letter = text
                .strip_prefix("glyph:")
                .and_then(|l| {
                    let mut chars = l.chars();
                    chars.next().filter(|_| chars.next().is_none())
                })
                .ok_or_else(|| format!("unknown pattern {text:?} (open, half-plane, nd, glyph:<letter>)"))?;
            Ok(ObjectPattern::Glyph {
                letter: letter.to_ascii_uppercase(),
            })
        }
    }
}

impl BeamSpec {
    /// Transmittance of the object in front of this beam.
    pub fn object_mask(&self, canvas: Canvas) -> Result<IntensityGrid> {
        match &self.pattern {
            ObjectPattern::Open => IntensityGrid::uniform(canvas, 1.0),
            ObjectPattern::Glyph { letter } => glyph_mask(*letter, canvas),
            ObjectPattern::Nd { layout } => nd_composite(layout, canvas),
            ObjectPattern::HalfPlane => {
                let values = crate::grid::Grid::from_fn(canvas.width, canvas.height, |_, col| {
                    if 2 * col < canvas.width {
                        1.0
                    } else {
                        0.0
                    }
                });
                IntensityGrid::transmittance(values, canvas.pixel_pitch)
            }
            ObjectPattern::Mask { path } => {
                let mask = load_mask(path, canvas.pixel_pitch)?;
                if mask.dims() != canvas.dims() {
                    return Err(Error::DimensionMismatch {
                        expected: canvas.dims(),
                        found: mask.dims(),
                    });
                }
                Ok(mask)
            }
        }
    }

    /// Saturation-parameter map of this beam after its object.
    pub fn intensity(&self, canvas: Canvas) -> Result<IntensityGrid> {
        let envelope = match self.waist_m {
            Some(w) => gaussian_profile(canvas, w, self.peak_s)?,
            None => IntensityGrid::uniform(canvas, self.peak_s)?,
        };
        apply_mask(&envelope, &self.object_mask(canvas)?)
    }
}

impl Scenario {
    pub fn resolution(&self) -> GridResolution {
        GridResolution::new(self.grid_scale).expect("validated at parse time")
    }

    /// Probe incident intensity, peak 1.
    pub fn probe_profile(&self) -> Result<IntensityGrid> {
        match self.probe.profile {
            ProbeProfile::Uniform => IntensityGrid::uniform(self.canvas, 1.0),
            ProbeProfile::Gaussian { waist_m } => gaussian_profile(self.canvas, waist_m, 1.0),
        }
    }

    /// Builds beams and probe for simulation; loads any mask files.
    pub fn experiment(&self) -> Result<Experiment> {
        let beams = self
            .beams
            .iter()
            .map(|b| ObjectBeam::new(b.detuning_hz, b.intensity(self.canvas)?))
            .collect::<Result<Vec<_>>>()?;
        let mut exp = Experiment::new(self.gas, self.canvas, beams)?.with_probe(self.probe_profile()?)?;
        exp.floor_fraction = self.probe.floor;
        exp.resolution = self.resolution();
        exp.validate()?;
        Ok(exp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Scenario> {
        parse_scenario_str(text, Path::new("test.toml"), Path::new("/base"))
    }

    #[test]
    fn minimal_file_gets_defaults() {
        let s = parse("[[beam]]\ndetuning_mhz = 0\n[probe]\n").unwrap();
        assert_eq!(s.gas, GasParams::default());
        assert_eq!(s.gas.natural_linewidth_fwhm, 5.75e6);
        assert_eq!(s.gas.temperature, 298.15);
        assert_eq!(s.gas.depth_scale, 120.0);
        assert_eq!(s.beams[0].peak_s, 2.0);
        assert_eq!(s.beams[0].pattern, ObjectPattern::Open);
        assert_eq!(s.probe.profile, ProbeProfile::Uniform);
        assert_eq!(s.canvas.dims(), DEFAULT_CANVAS);
        assert_eq!(s.output.directory, Path::new("/base/out"));
        assert_eq!(s.grid_scale, 1.0);
    }

    #[test]
    fn units_are_converted() {
        let s = parse(
            "[gas]\nwavelength_nm = 795\nlinewidth_mhz = 6\n[canvas]\nwidth = 8\nheight = 4\npitch_um = 10\n\
             [[beam]]\ndetuning_mhz = -40\nwaist_mm = 2\npattern = \"glyph:t\"\n\
             [probe]\nprofile = \"gaussian\"\nwaist_mm = 3\nfloor = 1e-4\n",
        )
        .unwrap();
        assert_eq!(s.gas.wavelength, 795e-9);
        assert_eq!(s.gas.natural_linewidth_fwhm, 6e6);
        assert_eq!(s.canvas.pixel_pitch, 10e-6);
        assert_eq!(s.beams[0].detuning_hz, -40e6);
        assert_eq!(s.beams[0].waist_m, Some(2e-3));
        assert_eq!(s.beams[0].pattern, ObjectPattern::Glyph { letter: 'T' });
        assert_eq!(s.probe.profile, ProbeProfile::Gaussian { waist_m: 3e-3 });
        assert_eq!(s.probe.floor, 1e-4);
    }

    #[test]
    fn close_beams_need_override() {
        let text = "[[beam]]\ndetuning_mhz = 0\n[[beam]]\ndetuning_mhz = 2\n";
        let err = parse(text).unwrap_err().to_string();
        assert!(err.contains("linewidths"), "{err}");
        let ok = parse(&format!("allow_close_beams = true\n{text}")).unwrap();
        assert_eq!(ok.beams.len(), 2);
        assert!(parse("[[beam]]\ndetuning_mhz = 0\n[[beam]]\ndetuning_mhz = 17.25\n").is_ok());
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse("[gas]\ntemprature_k = 300\n").unwrap_err().to_string();
        assert!(err.contains("temprature_k"), "{err}");
        let err = parse("colour = 1\n").unwrap_err().to_string();
        assert!(err.contains("colour"), "{err}");
    }

    #[test]
    fn syntax_error_reports_line() {
        let err = parse("[gas]\n\ntemperature_k = = 3\n").unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn invalid_values_rejected() {
        for text in [
            "[gas]\ntemperature_k = -1\n",
            "[canvas]\nwidth = 0\n",
            "[[beam]]\ndetuning_mhz = 0\npeak_s = -1\n",
            "[[beam]]\ndetuning_mhz = 0\npattern = \"spiral\"\n",
            "[[beam]]\ndetuning_mhz = 0\npattern = \"open\"\nnd_a = 1\n",
            "[[beam]]\ndetuning_mhz = 0\nmask = \"m.pgm\"\npattern = \"open\"\n",
            "[probe]\nprofile = \"gaussian\"\n",
            "[probe]\nfloor = 0\n",
            "[output]\nformats = []\n",
            "[output]\nformats = [\"tiff\"]\n",
            "[numerics]\ngrid_scale = 0\n",
        ] {
            assert!(matches!(parse(text), Err(Error::Scenario { .. })), "{text}");
        }
    }

    #[test]
    fn missing_mask_file_rejected_at_parse() {
        let err = parse("[[beam]]\ndetuning_mhz = 0\nmask = \"nowhere.pgm\"\n").unwrap_err().to_string();
        assert!(err.contains("nowhere.pgm"), "{err}");
    }

    #[test]
    fn experiment_applies_patterns() {
        let s = parse(
            "[canvas]\nwidth = 8\nheight = 8\n[[beam]]\ndetuning_mhz = 0\npattern = \"half-plane\"\npeak_s = 3\n\
             [[beam]]\ndetuning_mhz = 40\npattern = \"nd\"\nnd_a = 1\n",
        )
        .unwrap();
        let exp = s.experiment().unwrap();
        let half = exp.beams[0].intensity.values();
        assert_eq!(*half.get(3, 0), 3.0);
        assert_eq!(*half.get(3, 7), 0.0);
        let nd = exp.beams[1].intensity.values();
        assert_eq!(*nd.get(0, 7), 2.0);
        assert!((nd.get(0, 0) - 0.2).abs() < 1e-12);
    }
}
