//! The four subcommands. Each writes into `--out` and finishes with a
//! manifest over everything it wrote.

use std::path::{Path, PathBuf};

use serde::Serialize;
use stet::estimators::ChirpRateRule;
use stet::io::{
    read_signal, write_branch_map, write_field, write_report_json, write_signal_csv, write_tfr, write_xy_csv,
    MatrixFormat,
};
use stet::metrics::{snr_sweep, ConcentrationReport, SweepPoint};
use stet::signal::add_noise;
use stet::transforms::Diagnostics;
use stet::window::DEFAULT_WINDOW_FRACTION;
use stet::{Analysis, AnalysisConfig, Execution, FrequencyBand, GaussianWindowSpec, Method, Signal};

use crate::error::CliError;
use crate::manifest::{self, sha256_file};
use crate::recipe::{Component, Recipe};
use crate::{
    AnalysisArgs, AnalyzeArgs, Band, ChirpRule, Format, MethodArg, MetricsArgs, ReconstructArgs, SourceArgs, SynthArgs,
};

/// Where the analysed samples came from.
#[derive(Debug, Serialize)]
struct InputEcho {
    #[serde(skip_serializing_if = "Option::is_none")]
    file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sha256: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    recipe: Option<Recipe>,
    #[serde(skip_serializing_if = "Option::is_none")]
    noise_snr_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    noise_seed: Option<u64>,
    fs: f64,
    n_samples: usize,
    start_time_s: f64,
}

fn recipe(src: &SourceArgs) -> Result<Option<Recipe>, CliError> {
    let mut components = Vec::new();
    for s in &src.tone {
        components.push(Component::parse_tone(s)?);
    }
    for s in &src.lfm {
        components.push(Component::parse_lfm(s)?);
    }
    for s in &src.impulse {
        components.push(Component::parse_impulse(s)?);
    }
    if components.is_empty() {
        return Ok(None);
    }
    if !(src.fs.is_finite() && src.fs > 0.0) {
        return Err(CliError::config(format!("--fs must be positive, got {}", src.fs)));
    }
    if !(src.dur.is_finite() && src.dur > 0.0) {
        return Err(CliError::config(format!("--dur must be positive, got {}", src.dur)));
    }
    Ok(Some(Recipe {
        components,
        fs: src.fs,
        duration_s: src.dur,
    }))
}

fn load(src: &SourceArgs) -> Result<(Signal, InputEcho), CliError> {
    let recipe = recipe(src)?;
    let (clean, file, sha256) = match (&src.input, &recipe) {
        (Some(_), Some(_)) => return Err(CliError::config("give either --input or a recipe, not both")),
        (None, None) => return Err(CliError::config("no input: give --input or --tone/--lfm/--impulse")),
        (Some(path), None) => {
            let (_, hash) = sha256_file(path)?;
            (read_signal(path)?, Some(path.display().to_string()), Some(hash))
        }
        (None, Some(r)) => (r.signal()?, None, None),
    };
    let signal = match src.noise_snr {
        Some(snr) => add_noise(&clean, snr, src.seed)?,
        None => clean,
    };
    let echo = InputEcho {
        file,
        sha256,
        recipe,
        noise_snr_db: src.noise_snr,
        noise_seed: src.noise_snr.map(|_| src.seed),
        fs: signal.sample_rate_hz(),
        n_samples: signal.len(),
        start_time_s: signal.start_time_s(),
    };
    Ok((signal, echo))
}

fn out_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::input(format!("{}: {e}", dir.display())))
}

#[derive(Debug, Serialize)]
struct WindowEcho {
    source: &'static str,
    beta_s2: f64,
    sigma_ms: f64,
    half_len: usize,
    length: usize,
}

/// Every analysis parameter after defaults are applied.
#[derive(Debug, Serialize)]
struct ResolvedParams {
    window: WindowEcho,
    n_fft: usize,
    n_fft_source: &'static str,
    band: FrequencyBand,
    gamma: f64,
    boundary_rad_s2: f64,
    boundary_source: &'static str,
    freq_tolerance_rad_s: f64,
    time_tolerance_s: f64,
    chirp_rule: ChirpRateRule,
    execution: Execution,
}

fn config(args: &AnalysisArgs, s: &Signal) -> Result<(AnalysisConfig, &'static str), CliError> {
    let fs = s.sample_rate_hz();
    let (window, source) = match (args.beta, args.sigma_ms) {
        (Some(beta), _) => (GaussianWindowSpec::new(beta, fs)?, "beta"),
        (None, Some(ms)) => (GaussianWindowSpec::from_sigma_ms(ms, fs)?, "sigma-ms"),
        (None, None) => (
            GaussianWindowSpec::spanning(DEFAULT_WINDOW_FRACTION, s.len(), fs)?,
            "default",
        ),
    };
    let n_fft = args.nfft.unwrap_or_else(|| window.default_n_fft());
    if let Some(b) = args.boundary {
        if !(b.is_finite() && b > 0.0) {
            return Err(CliError::config(format!("--boundary must be positive, got {b}")));
        }
    }
    let mut cfg = AnalysisConfig::new(window, n_fft)
        .with_band(match args.band {
            Band::Full => FrequencyBand::Full,
            Band::Positive => FrequencyBand::Positive,
        })
        .with_gamma(args.gamma)
        .with_boundary(args.boundary)
        .with_execution(if args.sequential {
            Execution::Sequential
        } else {
            Execution::default()
        });
    cfg.estimators.chirp_rule = match args.chirp_rule {
        ChirpRule::Dual => ChirpRateRule::Dual,
        ChirpRule::TimeRatio => ChirpRateRule::TimeRatio,
    };
    Ok((cfg, source))
}

fn analyse(args: &AnalysisArgs, s: &Signal) -> Result<(Analysis, ResolvedParams), CliError> {
    let (cfg, source) = config(args, s)?;
    let a = Analysis::run(s, &cfg)?;
    let ext = a.resolved_extraction()?;
    let params = ResolvedParams {
        window: WindowEcho {
            source,
            beta_s2: cfg.window.beta,
            sigma_ms: cfg.window.sigma_s() * 1e3,
            half_len: cfg.window.half_len,
            length: cfg.window.len(),
        },
        n_fft: cfg.stft.n_fft,
        n_fft_source: if args.nfft.is_some() { "flag" } else { "default" },
        band: cfg.stft.band,
        gamma: cfg.estimators.gamma,
        boundary_rad_s2: ext.boundary,
        boundary_source: if args.boundary.is_some() { "flag" } else { "default" },
        freq_tolerance_rad_s: ext.freq_tolerance,
        time_tolerance_s: ext.time_tolerance,
        chirp_rule: cfg.estimators.chirp_rule,
        execution: cfg.execution(),
    };
    Ok((a, params))
}

fn method(m: MethodArg) -> Method {
    match m {
        MethodArg::Stft => Method::Stft,
        MethodArg::Set => Method::Set,
        MethodArg::Tet => Method::Tet,
        MethodArg::Stet => Method::Stet,
        MethodArg::Stet2 => Method::Stet2,
    }
}

fn finish<P: Serialize>(
    dir: &Path,
    command: &str,
    input: &InputEcho,
    params: &P,
    files: &[PathBuf],
) -> Result<String, CliError> {
    manifest::write(dir, command, input, params, files)?;
    Ok(format!(
        "{command}: wrote {} files to {}",
        files.len() + 1,
        dir.display()
    ))
}

pub fn synth(args: &SynthArgs) -> Result<String, CliError> {
    if args.source.input.is_some() {
        return Err(CliError::config("synth takes a recipe, not --input"));
    }
    let (s, echo) = load(&args.source)?;
    out_dir(&args.out)?;
    let path = args.out.join("signal.csv");
    write_signal_csv(&path, &s)?;
    finish(&args.out, "synth", &echo, &(), &[path])
}

#[derive(Debug, Serialize)]
struct AnalyzeParams<'a> {
    method: Method,
    format: MatrixFormat,
    fields: bool,
    #[serde(flatten)]
    analysis: &'a ResolvedParams,
}

pub fn analyze(args: &AnalyzeArgs) -> Result<String, CliError> {
    let (s, echo) = load(&args.source)?;
    let (a, params) = analyse(&args.analysis, &s)?;
    let m = method(args.method);
    let format = match args.format {
        Format::Csv => MatrixFormat::Csv,
        Format::Bin => MatrixFormat::Bin,
    };
    out_dir(&args.out)?;
    let boundary = params.boundary_rad_s2;
    let out = a.transform(m)?;
    let mut files = write_tfr(&args.out, m.as_str(), &out.grid, format, boundary)?;
    if let Some(branch) = &out.branch {
        files.extend(write_branch_map(&args.out, "branch", &out.grid, branch, boundary)?);
    }
    if let Some(d) = out.diagnostics {
        let path = args.out.join("diagnostics.json");
        write_report_json::<Diagnostics>(&path, &d)?;
        files.push(path);
    }
    if args.fields {
        let f = &a.fields;
        let v = a.stft();
        files.extend(write_field(
            &args.out,
            "omega_hat",
            v,
            &f.omega_hat,
            "omega_hat_rad_s",
            boundary,
        )?);
        files.extend(write_field(&args.out, "t_hat", v, &f.t_hat, "t_hat_s", boundary)?);
        files.extend(write_field(
            &args.out,
            "chirp_rate",
            v,
            &f.chirp_rate,
            "chirp_rate_rad_s2",
            boundary,
        )?);
    }
    let params = AnalyzeParams {
        method: m,
        format,
        fields: args.fields,
        analysis: &params,
    };
    finish(&args.out, "analyze", &echo, &params, &files)
}

#[derive(Debug, Serialize)]
struct MetricsParams<'a> {
    method: Method,
    renyi_order: f64,
    points: usize,
    snr_sweep_db: &'a [f64],
    sweep_seed: u64,
    #[serde(flatten)]
    analysis: &'a ResolvedParams,
}

fn finite(what: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::numeric(format!("{what} is not finite")))
    }
}

pub fn metrics(args: &MetricsArgs) -> Result<String, CliError> {
    if !(args.renyi_order.is_finite() && args.renyi_order > 1.0) {
        return Err(CliError::config(format!(
            "--renyi-order must exceed 1, got {}",
            args.renyi_order
        )));
    }
    let (s, echo) = load(&args.source)?;
    let (a, params) = analyse(&args.analysis, &s)?;
    let m = method(args.method);
    let grid = a.transform(m)?.grid;
    let report = ConcentrationReport::measure(&grid, args.renyi_order, args.points)?;
    finite("Rényi entropy", report.renyi_entropy)?;
    out_dir(&args.out)?;
    let mut files = vec![args.out.join("metrics.json"), args.out.join("energy_curve.csv")];
    write_report_json(&files[0], &report)?;
    write_xy_csv(
        &files[1],
        ("coefficients", "energy_fraction"),
        report
            .normalized_energy
            .iter()
            .map(|p| (p.coefficient_count as f64, p.energy_fraction)),
    )?;
    if !args.snr_sweep.is_empty() {
        let sweep: Vec<SweepPoint> = snr_sweep(&s, &args.snr_sweep, m, args.source.seed, &a.config)?;
        for p in &sweep {
            finite("swept Rényi entropy", p.renyi_entropy)?;
        }
        let (json, csv) = (args.out.join("sweep.json"), args.out.join("sweep.csv"));
        write_report_json(&json, &sweep)?;
        write_xy_csv(
            &csv,
            ("snr_db", "renyi_entropy"),
            sweep.iter().map(|p| (p.snr_db, p.renyi_entropy)),
        )?;
        files.extend([json, csv]);
    }
    let params = MetricsParams {
        method: m,
        renyi_order: args.renyi_order,
        points: args.points,
        snr_sweep_db: &args.snr_sweep,
        sweep_seed: args.source.seed,
        analysis: &params,
    };
    finish(&args.out, "metrics", &echo, &params, &files)
}

#[derive(Debug, Serialize)]
struct ReconstructReport {
    reference: String,
    #[serde(flatten)]
    report: stet::reconstruct::ReconstructionReport,
}

pub fn reconstruct(args: &ReconstructArgs) -> Result<String, CliError> {
    let (s, echo) = load(&args.source)?;
    let reference = match &args.reference {
        Some(p) => read_signal(p)?,
        None => s.clone(),
    };
    if reference.len() != s.len() {
        return Err(CliError::input(format!(
            "reference has {} samples, input has {}",
            reference.len(),
            s.len()
        )));
    }
    let (a, params) = analyse(&args.analysis, &s)?;
    let r = a.reconstruct()?;
    let report = r.report(&reference)?;
    if report.interior_snr_db.is_nan() {
        return Err(CliError::numeric(
            "interior SNR is undefined (empty interior or zero reference)",
        ));
    }
    out_dir(&args.out)?;
    let mut files = Vec::new();
    for (name, sig) in [("s1.csv", &r.s1), ("s2.csv", &r.s2), ("total.csv", &r.total)] {
        let path = args.out.join(name);
        write_signal_csv(&path, sig)?;
        files.push(path);
    }
    let path = args.out.join("report.json");
    let described = ReconstructReport {
        reference: args
            .reference
            .as_ref()
            .map_or("input".into(), |p| p.display().to_string()),
        report,
    };
    write_report_json(&path, &described)?;
    files.push(path);
    let summary = finish(&args.out, "reconstruct", &echo, &params, &files)?;
    Ok(format!("{summary}; interior SNR {:.2} dB", report.interior_snr_db))
}
