//! File formats: CSV/WAV signals, TFR matrices with a JSON sidecar, raw
//! binary grids, branch maps and estimator fields.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so
//! identical inputs give byte-identical files.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::Field;
use crate::grid::{FrequencyBand, TfGrid, TfKind};
use crate::signal::Signal;
use crate::window::GaussianWindowSpec;

/// Relative tolerance on the spacing of CSV time stamps.
pub const SPACING_TOLERANCE: f64 = 1e-6;

fn input_err(path: &Path, msg: impl std::fmt::Display) -> Error {
    Error::Input(format!("{}: {msg}", path.display()))
}

/// Reads `time_s,real[,imag]`. The sample rate comes from the time stamps,
/// which must be strictly uniform.
pub fn read_signal_csv(path: &Path) -> Result<Signal> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| input_err(path, e))?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| input_err(path, e))?
        .iter()
        .map(str::to_ascii_lowercase)
        .collect();
    let complex = match header.as_slice() {
        [t, r] if t == "time_s" && r == "real" => false,
        [t, r, i] if t == "time_s" && r == "real" && i == "imag" => true,
        _ => return Err(input_err(path, "header must be `time_s,real` or `time_s,real,imag`")),
    };
    let mut times = Vec::new();
    let mut samples = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| input_err(path, e))?;
        let field = |i: usize| -> Result<f64> {
            let raw = rec
                .get(i)
                .ok_or_else(|| input_err(path, format!("row {}: missing column {i}", line + 2)))?;
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| input_err(path, format!("row {}: `{raw}` is not a finite number", line + 2)))
        };
        times.push(field(0)?);
        samples.push(Complex64::new(field(1)?, if complex { field(2)? } else { 0.0 }));
    }
    if times.len() < 2 {
        return Err(input_err(path, "need at least two samples"));
    }
    let step = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    if step.is_nan() || step <= 0.0 {
        return Err(input_err(path, "time stamps must increase"));
    }
    for (i, w) in times.windows(2).enumerate() {
        if ((w[1] - w[0]) - step).abs() > SPACING_TOLERANCE * step {
            return Err(input_err(
                path,
                format!("non-uniform spacing between rows {} and {}", i + 2, i + 3),
            ));
        }
    }
    Signal::with_start(samples, 1.0 / step, times[0])
}

pub fn write_signal_csv(path: &Path, s: &Signal) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "time_s,real,imag")?;
    for (n, z) in s.samples().iter().enumerate() {
        writeln!(w, "{},{},{}", s.time_of(n), z.re, z.im)?;
    }
    w.flush()?;
    Ok(())
}

/// First channel of a PCM (16/24/32-bit) or float32 WAV file, scaled to
/// `[-1, 1)`, as a real-valued signal.
pub fn read_wav(path: &Path) -> Result<Signal> {
    let mut rdr = hound::WavReader::open(path).map_err(|e| input_err(path, e))?;
    let spec = rdr.spec();
    let channels = spec.channels as usize;
    let raw: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Float, 32) => rdr
            .samples::<f32>()
            .map(|v| v.map(f64::from))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| input_err(path, e))?,
        (hound::SampleFormat::Int, bits @ (16 | 24 | 32)) => {
            let scale = 2f64.powi(i32::from(bits) - 1);
            rdr.samples::<i32>()
                .map(|v| v.map(|x| f64::from(x) / scale))
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| input_err(path, e))?
        }
        (fmt, bits) => return Err(input_err(path, format!("unsupported WAV encoding {fmt:?} {bits}-bit"))),
    };
    let first: Vec<f64> = raw.iter().step_by(channels.max(1)).copied().collect();
    if first.is_empty() {
        return Err(input_err(path, "no samples"));
    }
    Signal::from_real(&first, f64::from(spec.sample_rate))
}

/// Dispatches on the extension: `.wav` or CSV otherwise.
pub fn read_signal(path: &Path) -> Result<Signal> {
    let is_wav = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("wav"));
    if is_wav {
        read_wav(path)
    } else {
        read_signal_csv(path)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixFormat {
    Csv,
    Bin,
}

impl std::str::FromStr for MatrixFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(MatrixFormat::Csv),
            "bin" => Ok(MatrixFormat::Bin),
            _ => Err(crate::error::invalid(
                "format",
                format!("unknown format `{s}` (expected csv|bin)"),
            )),
        }
    }
}

/// Describes an exported matrix. CSV rows run from the highest frequency
/// down; binary data is row-major in the same order, `(re, im)` pairs of
/// little-endian f64.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub kind: String,
    pub format: MatrixFormat,
    pub data_file: String,
    pub fs: f64,
    pub n_fft: usize,
    pub beta: f64,
    pub window_half_len: usize,
    pub band: FrequencyBand,
    pub n_freq: usize,
    pub n_time: usize,
    pub time_range_s: [f64; 2],
    pub freq_range_rad_s: [f64; 2],
    pub row_order: String,
    /// Chirp-rate boundary in effect, echoed for every export.
    pub boundary: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<String>,
}

impl Sidecar {
    fn for_grid(g: &TfGrid, kind: &str, format: MatrixFormat, data_file: String, boundary: f64) -> Self {
        Self {
            kind: kind.to_owned(),
            format,
            data_file,
            fs: g.fs(),
            n_fft: g.n_fft,
            beta: g.window.beta,
            window_half_len: g.window.half_len,
            band: g.band,
            n_freq: g.n_freq(),
            n_time: g.n_time(),
            time_range_s: [g.time_axis_s[0], *g.time_axis_s.last().unwrap()],
            freq_range_rad_s: [g.freq_axis_rad_s[0], *g.freq_axis_rad_s.last().unwrap()],
            row_order: "frequency-descending".into(),
            boundary,
            values: None,
        }
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Input(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn write_report_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_json(path, value)
}

fn write_matrix_csv<T: std::fmt::Display>(
    path: &Path,
    rows: usize,
    cols: usize,
    at: impl Fn(usize, usize) -> T,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for k in (0..rows).rev() {
        for n in 0..cols {
            if n > 0 {
                w.write_all(b",")?;
            }
            write!(w, "{}", at(k, n))?;
        }
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Writes `<stem>.csv` (magnitudes) or `<stem>.bin` (complex values) plus
/// `<stem>.json`, returning every path written.
pub fn write_tfr(dir: &Path, stem: &str, g: &TfGrid, format: MatrixFormat, boundary: f64) -> Result<Vec<PathBuf>> {
    let data = dir.join(format!(
        "{stem}.{}",
        if format == MatrixFormat::Csv { "csv" } else { "bin" }
    ));
    match format {
        MatrixFormat::Csv => write_matrix_csv(&data, g.n_freq(), g.n_time(), |k, n| g.values[[k, n]].norm())?,
        MatrixFormat::Bin => {
            let mut w = BufWriter::new(File::create(&data)?);
            for k in (0..g.n_freq()).rev() {
                for n in 0..g.n_time() {
                    let z = g.values[[k, n]];
                    w.write_all(&z.re.to_le_bytes())?;
                    w.write_all(&z.im.to_le_bytes())?;
                }
            }
            w.flush()?;
        }
    }
    let mut side = Sidecar::for_grid(g, g.kind.as_str(), format, file_name(&data), boundary);
    side.values = Some(
        if format == MatrixFormat::Csv {
            "magnitude"
        } else {
            "complex"
        }
        .into(),
    );
    let json = dir.join(format!("{stem}.json"));
    write_json(&json, &side)?;
    Ok(vec![data, json])
}

fn parse_kind(s: &str) -> Result<TfKind> {
    use TfKind::*;
    [Stft, Set, Tet, Stet, Stet2, DStftT, DStftW]
        .into_iter()
        .find(|k| k.as_str() == s)
        .ok_or_else(|| Error::Input(format!("unknown grid kind `{s}`")))
}

/// Loads a binary export through its sidecar.
pub fn read_tfr_bin(sidecar: &Path) -> Result<TfGrid> {
    let side: Sidecar =
        serde_json::from_reader(BufReader::new(File::open(sidecar)?)).map_err(|e| input_err(sidecar, e))?;
    if side.format != MatrixFormat::Bin {
        return Err(input_err(sidecar, "only binary exports carry complex values"));
    }
    let data = sidecar.with_file_name(&side.data_file);
    let mut bytes = Vec::new();
    File::open(&data)?.read_to_end(&mut bytes)?;
    if bytes.len() != side.n_freq * side.n_time * 16 {
        return Err(input_err(
            &data,
            format!(
                "expected {} bytes, found {}",
                side.n_freq * side.n_time * 16,
                bytes.len()
            ),
        ));
    }
    let f = |i: usize| f64::from_le_bytes(bytes[8 * i..8 * i + 8].try_into().unwrap());
    let values = Array2::from_shape_fn((side.n_freq, side.n_time), |(k, n)| {
        let i = 2 * ((side.n_freq - 1 - k) * side.n_time + n);
        Complex64::new(f(i), f(i + 1))
    });
    let window = GaussianWindowSpec::with_half_len(side.beta, side.fs, side.window_half_len, true)?;
    let d_omega = 2.0 * std::f64::consts::PI * side.fs / side.n_fft as f64;
    Ok(TfGrid {
        values,
        time_axis_s: (0..side.n_time)
            .map(|n| side.time_range_s[0] + n as f64 / side.fs)
            .collect(),
        freq_axis_rad_s: (0..side.n_freq)
            .map(|k| side.band.signed_bin(side.n_fft, k) as f64 * d_omega)
            .collect(),
        window,
        n_fft: side.n_fft,
        band: side.band,
        kind: parse_kind(&side.kind)?,
    })
}

/// Branch map as a CSV of 0 (frequency rule), 1 (time rule), −1 (masked),
/// in the same orientation as the TFR export.
pub fn write_branch_map(
    dir: &Path,
    stem: &str,
    g: &TfGrid,
    branch: &Array2<i8>,
    boundary: f64,
) -> Result<Vec<PathBuf>> {
    let data = dir.join(format!("{stem}.csv"));
    write_matrix_csv(&data, branch.nrows(), branch.ncols(), |k, n| branch[[k, n]])?;
    let mut side = Sidecar::for_grid(g, "branch", MatrixFormat::Csv, file_name(&data), boundary);
    side.values = Some("branch: 0=SET, 1=TET, -1=masked".into());
    let json = dir.join(format!("{stem}.json"));
    write_json(&json, &side)?;
    Ok(vec![data, json])
}

/// Real-valued estimator field; masked pixels are written as `NaN`.
pub fn write_field(
    dir: &Path,
    stem: &str,
    g: &TfGrid,
    field: &Field,
    label: &str,
    boundary: f64,
) -> Result<Vec<PathBuf>> {
    let data = dir.join(format!("{stem}.csv"));
    write_matrix_csv(&data, g.n_freq(), g.n_time(), |k, n| {
        field.get(k, n).unwrap_or(f64::NAN)
    })?;
    let mut side = Sidecar::for_grid(g, label, MatrixFormat::Csv, file_name(&data), boundary);
    side.values = Some(format!("{label}; NaN where masked"));
    let json = dir.join(format!("{stem}.json"));
    write_json(&json, &side)?;
    Ok(vec![data, json])
}

/// Two-column CSV with a header.
pub fn write_xy_csv(path: &Path, header: (&str, &str), rows: impl IntoIterator<Item = (f64, f64)>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{},{}", header.0, header.1)?;
    for (x, y) in rows {
        writeln!(w, "{x},{y}")?;
    }
    w.flush()?;
    Ok(())
}
