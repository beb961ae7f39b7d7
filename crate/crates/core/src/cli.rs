//! Command-line front end.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::Error;
use crate::grid::Grid;
use crate::imaging::{scan, tomogram, transmittance_curve, Tomogram};
use crate::objects::{encode_csv, encode_curve_csv, encode_pgm16, ExportFormat, GridAnnotation};
use crate::oracle::validate_report;
use crate::scenario::{parse_scenario, Scenario};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

/// Upper bound on detunings generated from a range.
pub const MAX_RANGE_POINTS: usize = 100_000;

#[derive(Debug, Parser)]
#[command(name = "phasetomo", version, about = "Phase-space tomography of a hole-burned Doppler-broadened vapor")]
pub struct Cli {
    /// Worker threads (output does not depend on this).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// ΔOD tomogram at one probe detuning.
    Tomogram {
        scenario: PathBuf,
        /// Probe detuning, Hz (suffixes kHz, MHz, GHz accepted).
        #[arg(long, value_parser = parse_frequency, allow_hyphen_values = true)]
        detuning: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Tomograms over a detuning range.
    Scan {
        scenario: PathBuf,
        #[command(flatten)]
        range: RangeArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Mean probe transmittance over a detuning range.
    Curve {
        scenario: PathBuf,
        #[command(flatten)]
        range: RangeArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Cross-check the quadrature against the brute-force oracle.
    Validate {
        scenario: PathBuf,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output directory (overrides the scenario's).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flip tomograms left–right before export.
    #[arg(long)]
    pub mirror: bool,
}

#[derive(Debug, Args)]
pub struct RangeArgs {
    #[arg(long, value_parser = parse_frequency, allow_hyphen_values = true)]
    pub from: f64,
    #[arg(long, value_parser = parse_frequency, allow_hyphen_values = true)]
    pub to: f64,
    #[arg(long, value_parser = parse_frequency)]
    pub step: f64,
}

/// Parses `40e6`, `-40MHz`, `1.5 GHz`, `500kHz`, `10Hz` into Hz.
pub fn parse_frequency(text: &str) -> Result<f64, String> {
    let t = text.trim();
    let lower = t.to_ascii_lowercase();
    let (number, scale) = [("ghz", 1e9), ("mhz", 1e6), ("khz", 1e3), ("hz", 1.0)]
        .iter()
        .find_map(|&(suffix, scale)| lower.strip_suffix(suffix).map(|n| (n.trim_end(), scale)))
        .unwrap_or((lower.as_str(), 1.0));
    let value: f64 = number.parse().map_err(|_| format!("not a frequency: {text:?}"))?;
    let hz = value * scale;
    if !hz.is_finite() {
        return Err(format!("frequency must be finite: {text:?}"));
    }
    Ok(hz)
}

/// `from, from + step, …` up to and including `to`. A step longer than the
/// range yields `from` alone.
pub fn detuning_points(from: f64, to: f64, step: f64) -> Result<Vec<f64>, String> {
    if !(step > 0.0) {
        return Err(format!("--step must be > 0, got {step}"));
    }
    if from > to {
        return Err(format!("--from ({from}) must not exceed --to ({to})"));
    }
    let last = ((to - from) / step + 1e-9).floor();
    if last >= MAX_RANGE_POINTS as f64 {
        return Err(format!("range would produce more than {MAX_RANGE_POINTS} points"));
    }
    Ok((0..=last as usize).map(|i| from + i as f64 * step).collect())
}

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io { .. } | Error::UnsupportedImage { .. } | Error::Format { .. } => EXIT_IO,
            _ => EXIT_VALIDATION,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: String) -> Failure {
    Failure {
        code: EXIT_VALIDATION,
        message,
    }
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n as usize).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command)),
            Err(e) => Err(usage(format!("cannot start {n} threads: {e}"))),
        },
        None => dispatch(cli.command),
    };
    match outcome {
        Ok(lines) => {
            for line in lines {
                println!("{line}");
            }
            EXIT_OK
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(command: Command) -> Result<Vec<String>, Failure> {
    match command {
        Command::Tomogram {
            scenario,
            detuning,
            output,
        } => {
            let sc = parse_scenario(&scenario)?;
            let exp = sc.experiment()?;
            let t = tomogram(&exp, detuning)?;
            let mirror = output.mirror || sc.output.mirror;
            let mut files = Vec::new();
            let entry = tomogram_artifacts(&t, &stem(None, detuning), &sc.output.formats, mirror, &mut files);
            let manifest = Manifest {
                command: "tomogram",
                version: env!("CARGO_PKG_VERSION"),
                mirror,
                scenario: &sc,
                tomograms: vec![entry],
                curve: None,
            };
            files.push(manifest_file(&manifest));
            commit(&out_dir(&sc, &output), &files)
        }
        Command::Scan { scenario, range, output } => {
            let sc = parse_scenario(&scenario)?;
            let points = detuning_points(range.from, range.to, range.step).map_err(usage)?;
            let exp = sc.experiment()?;
            let stack = scan(&exp, &points)?;
            let mirror = output.mirror || sc.output.mirror;
            let mut files = Vec::new();
            let entries = stack
                .tomograms()
                .iter()
                .enumerate()
                .map(|(i, t)| tomogram_artifacts(t, &stem(Some(i), t.probe_detuning), &sc.output.formats, mirror, &mut files))
                .collect();
            let manifest = Manifest {
                command: "scan",
                version: env!("CARGO_PKG_VERSION"),
                mirror,
                scenario: &sc,
                tomograms: entries,
                curve: None,
            };
            files.push(manifest_file(&manifest));
            commit(&out_dir(&sc, &output), &files)
        }
        Command::Curve { scenario, range, output } => {
            let sc = parse_scenario(&scenario)?;
            let points = detuning_points(range.from, range.to, range.step).map_err(usage)?;
            let exp = sc.experiment()?;
            let curve = transmittance_curve(&exp, &points)?;
            let mut files = vec![("curve.csv".to_string(), encode_curve_csv(&curve).into_bytes())];
            let manifest = Manifest {
                command: "curve",
                version: env!("CARGO_PKG_VERSION"),
                mirror: false,
                scenario: &sc,
                tomograms: vec![],
                curve: Some(CurveEntry {
                    file: "curve.csv".into(),
                    points: curve.len(),
                    from_hz: range.from,
                    to_hz: range.to,
                    step_hz: range.step,
                }),
            };
            files.push(manifest_file(&manifest));
            commit(&out_dir(&sc, &output), &files)
        }
        Command::Validate { scenario, report } => {
            let sc = parse_scenario(&scenario)?;
            let beams: Vec<(f64, f64)> = sc.beams.iter().map(|b| (b.detuning_hz, b.peak_s)).collect();
            let r = validate_report(&sc.gas, &beams, sc.resolution())?;
            let json = serde_json::to_string_pretty(&r).expect("report serializes") + "\n";
            let mut lines = Vec::new();
            match report {
                Some(path) => {
                    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
                    let name = path
                        .file_name()
                        .ok_or_else(|| usage(format!("--report {} has no file name", path.display())))?
                        .to_string_lossy()
                        .into_owned();
                    lines.extend(commit(dir, &[(name, json.into_bytes())])?);
                }
                None => lines.push(json.trim_end().to_string()),
            }
            if r.pass {
                Ok(lines)
            } else {
                for line in lines {
                    println!("{line}");
                }
                Err(Failure {
                    code: EXIT_NUMERICAL,
                    message: format!(
                        "validation failed: max relative error {:.3e} (tolerance {:.0e}), richardson ratio {:.3}",
                        r.quadrature.max_relative_error, r.tolerances.quadrature_relative, r.self_convergence.richardson_ratio
                    ),
                })
            }
        }
    }
}

fn out_dir(sc: &Scenario, output: &OutputArgs) -> PathBuf {
    output.out.clone().unwrap_or_else(|| sc.output.directory.clone())
}

fn stem(index: Option<usize>, detuning: f64) -> String {
    let mut s = String::from("tomogram_");
    if let Some(i) = index {
        write!(s, "{i:03}_").unwrap();
    }
    write!(s, "{:+.3}MHz", detuning / 1e6).unwrap();
    s
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'static str,
    version: &'static str,
    mirror: bool,
    scenario: &'a Scenario,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    tomograms: Vec<TomogramEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    curve: Option<CurveEntry>,
}

#[derive(Serialize)]
struct TomogramEntry {
    probe_detuning_hz: f64,
    resonant_velocity_m_per_s: f64,
    momentum_kg_m_per_s: f64,
    invalid_pixels: usize,
    files: Vec<String>,
}

#[derive(Serialize)]
struct CurveEntry {
    file: String,
    points: usize,
    from_hz: f64,
    to_hz: f64,
    step_hz: f64,
}

fn manifest_file(m: &Manifest) -> (String, Vec<u8>) {
    let json = serde_json::to_string_pretty(m).expect("manifest serializes") + "\n";
    ("manifest.json".into(), json.into_bytes())
}

/// Renders one tomogram; invalid pixels are exported as NaN.
fn tomogram_artifacts(
    t: &Tomogram,
    stem: &str,
    formats: &[ExportFormat],
    mirror: bool,
    files: &mut Vec<(String, Vec<u8>)>,
) -> TomogramEntry {
    let t = if mirror { t.mirrored() } else { t.clone() };
    let grid: Grid<f64> = t
        .delta_od
        .zip_map(&t.valid, |&v, &ok| if ok { v } else { f64::NAN })
        .expect("tomogram grids share dimensions");
    let annotation = GridAnnotation {
        probe_detuning_hz: Some(t.probe_detuning),
        resonant_velocity_m_per_s: Some(t.resolved_velocity),
        momentum_kg_m_per_s: Some(t.momentum),
    };
    let mut names = Vec::new();
    for format in formats {
        match format {
            ExportFormat::Csv => {
                let name = format!("{stem}.csv");
                files.push((name.clone(), encode_csv(&grid).expect("tomogram is non-empty").into_bytes()));
                names.push(name);
            }
            ExportFormat::Pgm16 => {
                let (bytes, sidecar) = encode_pgm16(&grid, annotation).expect("tomogram is non-empty");
                let (pgm, json) = (format!("{stem}.pgm"), format!("{stem}.json"));
                files.push((pgm.clone(), bytes));
                let side = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes") + "\n";
                files.push((json.clone(), side.into_bytes()));
                names.push(pgm);
                names.push(json);
            }
        }
    }
    TomogramEntry {
        probe_detuning_hz: t.probe_detuning,
        resonant_velocity_m_per_s: t.resolved_velocity,
        momentum_kg_m_per_s: t.momentum,
        invalid_pixels: t.valid.as_slice().iter().filter(|&&ok| !ok).count(),
        files: names,
    }
}

/// Writes all files or none: each is staged under a temporary name and
/// renamed into place once every write has succeeded.
fn commit(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<Vec<String>, Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut staged: Vec<(PathBuf, PathBuf)> = Vec::with_capacity(files.len());
    let cleanup = |paths: &[PathBuf]| {
        for p in paths {
            let _ = std::fs::remove_file(p);
        }
    };
    for (name, bytes) in files {
        let tmp = dir.join(format!(".{name}.partial"));
        if let Err(e) = std::fs::write(&tmp, bytes) {
            let mut leftovers: Vec<PathBuf> = staged.iter().map(|(t, _)| t.clone()).collect();
            leftovers.push(tmp.clone());
            cleanup(&leftovers);
            return Err(Error::io(tmp, e).into());
        }
        staged.push((tmp, dir.join(name)));
    }
    let mut written = Vec::with_capacity(staged.len());
    for (i, (tmp, dst)) in staged.iter().enumerate() {
        if let Err(e) = std::fs::rename(tmp, dst) {
            let leftovers: Vec<PathBuf> = staged[i..].iter().map(|(t, _)| t.clone()).chain(written.iter().cloned()).collect();
            cleanup(&leftovers);
            return Err(Error::io(dst, e).into());
        }
        written.push(dst.clone());
    }
    Ok(written.iter().map(|p| p.display().to_string()).collect())
}
