//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always reach the terminal.
//! Oracles here are written from the closed forms, independent of the
//! library's own oracle helpers. Criteria in `KNOWN_RED` are reported but do
//! not fail the run; every other FAIL does.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use stet::corpus::{SurrogateCorpus, ToneImpulse};
use stet::io::{write_branch_map, write_tfr, MatrixFormat};
use stet::metrics::{coefficients_for_fraction, renyi_entropy, snr_sweep_methods, DEFAULT_RENYI_ORDER};
use stet::reconstruct::interior_snr_db;
use stet::signal::{add_noise, mix, synth_harmonic, synth_impulse, synth_lfm};
use stet::stft::{stft, stft_dt, stft_dw, StftConfig};
use stet::transforms::{BRANCH_SET, BRANCH_TET};
use stet::*;

/// Noise robustness: the second-order transform's entropy rises with SNR on
/// the surrogate corpus. Analysis in the repository README.
const KNOWN_RED: &[usize] = &[9];

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion<'a> = (&'a str, Box<dyn Fn() -> Outcome + 'a>);

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn median(mut v: Vec<f64>) -> f64 {
    assert!(!v.is_empty(), "median of an empty set");
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Interior, above-threshold pixels of an analysis.
fn valid_pixels(a: &Analysis) -> Vec<(usize, usize)> {
    let g = a.stft();
    let frames = g.interior_frames();
    a.fields
        .mask
        .indexed_iter()
        .filter(|&((_, n), &ok)| ok && frames.contains(&n))
        .map(|(kn, _)| kn)
        .collect()
}

fn gaussian_gain(beta: f64) -> f64 {
    (2.0 * PI * beta).sqrt()
}

// Linear-chirp sweep shared by criteria 3–6.
const SWEEP_FS: f64 = 4000.0;
const SWEEP_DUR: f64 = 0.5;
const SWEEP_BETA: f64 = 1e-4;
const SWEEP_NFFT: usize = 1024;
const SWEEP_B: f64 = 2.0 * PI * 500.0;
const SWEEP_MULTIPLES: [f64; 5] = [0.1, 0.5, 1.0, 2.0, 10.0];

fn c0() -> f64 {
    SWEEP_BETA.powf(-2.0 / 3.0)
}

fn sweep_config() -> AnalysisConfig {
    let w = GaussianWindowSpec::new(SWEEP_BETA, SWEEP_FS).unwrap();
    AnalysisConfig::new(w, SWEEP_NFFT).with_band(FrequencyBand::Positive)
}

fn sweep_analysis(amplitude: f64, c: f64) -> Analysis {
    let s = synth_lfm(amplitude, 0.3, SWEEP_B, c, SWEEP_DUR, SWEEP_FS).unwrap();
    Analysis::run(&s, &sweep_config()).unwrap()
}

fn closed_form_magnitudes() -> Outcome {
    let (fs, beta, a, w0) = (1000.0, 1e-4, 1.3, 2.0 * PI * 100.0);
    let win = GaussianWindowSpec::new(beta, fs).unwrap();
    let check = |s: &Signal, band: FrequencyBand, oracle: &dyn Fn(f64, f64) -> f64| {
        let g = stft(s, &win, &StftConfig::new(512).with_band(band)).unwrap();
        let floor = 1e-3 * g.max_abs();
        let mut worst: f64 = 0.0;
        for ((k, n), z) in g.values.indexed_iter() {
            if g.is_interior(n) && z.norm() > floor {
                let want = oracle(g.time_axis_s[n], g.freq_axis_rad_s[k]);
                worst = worst.max((z.norm() - want).abs() / want);
            }
        }
        worst
    };
    let tone = synth_harmonic(a, w0, 1.0, fs).unwrap();
    let tone_err = check(&tone, FrequencyBand::Positive, &|_, w| {
        a * gaussian_gain(beta) * (-0.5 * beta * (w - w0).powi(2)).exp()
    });
    let (weight, t0) = (0.02, 0.5);
    let imp = synth_impulse(weight, t0, 1.0, fs).unwrap();
    let imp_err = check(&imp, FrequencyBand::Full, &|t, _| {
        weight * (-(t - t0).powi(2) / (2.0 * beta)).exp()
    });
    outcome(
        tone_err < 1e-3 && imp_err < 1e-3,
        format!("max relative error tone {tone_err:.2e}, impulse {imp_err:.2e}"),
    )
}

fn estimator_exactness() -> Outcome {
    let (fs, d, w0, t0) = (1000.0, 1.0, 2.0 * PI * 120.0, 0.5);
    let win = GaussianWindowSpec::new(1e-4, fs).unwrap();
    let cfg = AnalysisConfig::new(win, 512).with_band(FrequencyBand::Full);
    let tone = Analysis::run(&synth_harmonic(1.0, w0, d, fs).unwrap(), &cfg).unwrap();
    let imp = Analysis::run(&synth_impulse(0.01, t0, d, fs).unwrap(), &cfg).unwrap();
    let (dw, dt) = (tone.stft().delta_omega(), tone.stft().dt());
    let worst = |a: &Analysis, f: &dyn Fn(&Analysis, usize, usize) -> f64| {
        valid_pixels(a).into_iter().map(|(k, n)| f(a, k, n)).fold(0.0, f64::max)
    };
    let tone_if = worst(&tone, &|a, k, n| (a.fields.omega_hat.get(k, n).unwrap() - w0).abs()) / dw;
    let tone_gd = worst(&tone, &|a, k, n| {
        (a.fields.t_hat.get(k, n).unwrap() - a.fields.time_axis_s[n]).abs()
    }) / dt;
    let imp_if = worst(&imp, &|a, k, n| {
        (a.fields.omega_hat.get(k, n).unwrap() - a.fields.freq_axis_rad_s[k]).abs()
    }) / dw;
    let imp_gd = worst(&imp, &|a, k, n| (a.fields.t_hat.get(k, n).unwrap() - t0).abs()) / dt;
    let pass = [tone_if, tone_gd, imp_if, imp_gd].iter().all(|&e| e < 0.1);
    outcome(
        pass,
        format!(
            "worst error in grid steps: tone IF {tone_if:.1e}, tone GD {tone_gd:.1e}, impulse IF {imp_if:.1e}, impulse GD {imp_gd:.1e}"
        ),
    )
}

fn error_laws() -> Outcome {
    let beta = SWEEP_BETA;
    let mut ok = true;
    let mut detail = Vec::new();
    let mut log_c = Vec::new();
    let mut log_ratio = Vec::new();
    for m in SWEEP_MULTIPLES {
        let c = m * c0();
        let a = sweep_analysis(1.0, c);
        let dw = a.stft().delta_omega();
        let denom = 1.0 + beta * beta * c * c;
        let (mut if_ratio, mut gd_ratio, mut cross) = (Vec::new(), Vec::new(), Vec::new());
        for (k, n) in valid_pixels(&a) {
            let (t, w) = (a.fields.time_axis_s[n], a.fields.freq_axis_rad_s[k]);
            let off = w - SWEEP_B - c * t;
            if off.abs() < dw {
                continue;
            }
            let e_if = (a.fields.omega_hat.get(k, n).unwrap() - (SWEEP_B + c * t)).abs();
            let e_gd = (a.fields.t_hat.get(k, n).unwrap() - (w - SWEEP_B) / c).abs();
            if_ratio.push(e_if / (off.abs() * beta * beta * c * c / denom));
            gd_ratio.push(e_gd / (off.abs() / (c.abs() * denom)));
            cross.push(e_if / e_gd);
        }
        let (ri, rg, rc) = (median(if_ratio), median(gd_ratio), median(cross));
        ok &= (ri - 1.0).abs() <= 0.05 && (rg - 1.0).abs() <= 0.05;
        log_c.push(c.ln());
        log_ratio.push(rc.ln());
        detail.push(format!("{m}c0: IF {ri:.3} GD {rg:.3}"));
    }
    // Least-squares line through (ln c, ln e_ω/e_t); the crossing is where it hits 0.
    let n = log_c.len() as f64;
    let (mx, my) = (log_c.iter().sum::<f64>() / n, log_ratio.iter().sum::<f64>() / n);
    let sxy: f64 = log_c.iter().zip(&log_ratio).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = log_c.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let crossing = (mx - my / slope).exp();
    let factor = crossing / c0();
    ok &= (1.0 / 1.2..=1.2).contains(&factor);
    outcome(
        ok,
        format!(
            "median measured/predicted {}; error curves cross at {factor:.3}·β^(-2/3) (slope {slope:.2})",
            detail.join(", ")
        ),
    )
}

fn chirp_rate_estimator() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for m in SWEEP_MULTIPLES {
        let c = m * c0();
        let a = sweep_analysis(1.0, c);
        let g = a.stft();
        let strong = 0.5 * g.max_abs();
        let est: Vec<f64> = valid_pixels(&a)
            .into_iter()
            .filter(|&(k, n)| g.values[[k, n]].norm() >= strong)
            .filter_map(|(k, n)| a.fields.chirp_rate.get(k, n))
            .collect();
        let rel = median(est) / c - 1.0;
        ok &= rel.abs() <= 0.05;
        detail.push(format!("{m}c0 {:+.1e}", rel));
    }
    let (fs, t0) = (1000.0, 0.5);
    let win = GaussianWindowSpec::new(1e-4, fs).unwrap();
    let cfg = AnalysisConfig::new(win, 512).with_band(FrequencyBand::Full);
    let imp = Analysis::run(&synth_impulse(0.01, t0, 1.0, fs).unwrap(), &cfg).unwrap();
    let col = imp.stft().nearest_column(t0).unwrap();
    let ridge: Vec<f64> = (0..imp.stft().n_freq())
        .filter_map(|k| imp.fields.chirp_rate.get(k, col))
        .collect();
    let infinite = ridge.iter().filter(|c| c.is_infinite()).count();
    ok &= !ridge.is_empty() && infinite == ridge.len();
    outcome(
        ok,
        format!(
            "median relative error {}; impulse ridge {infinite}/{} pixels infinite",
            detail.join(", "),
            ridge.len()
        ),
    )
}

fn branch_routing() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for (m, expect) in [
        (0.5, Method::Set),
        (-0.5, Method::Set),
        (2.0, Method::Tet),
        (-2.0, Method::Tet),
    ] {
        let a = sweep_analysis(1.0, m * c0().abs());
        let stet = a.stet().unwrap().grid;
        let single = a.transform(expect).unwrap().grid;
        let pixels = valid_pixels(&a);
        let compared = pixels.len();
        let differ = pixels
            .into_iter()
            .filter(|&(k, n)| stet.values[[k, n]] != single.values[[k, n]])
            .count();
        ok &= differ == 0 && compared > 0;
        detail.push(format!("{m}c0 vs {}: {differ}/{compared} differ", expect.as_str()));
    }
    outcome(ok, detail.join(", "))
}

fn second_order_exactness() -> Outcome {
    let amp = 1.5;
    let beta = SWEEP_BETA;
    let margin = 3.0 * beta.sqrt();
    // Frequency rule below the boundary: one ridge pixel per column.
    let c = 0.5 * c0();
    let a = sweep_analysis(amp, c);
    let e = a.stet2().unwrap();
    let g = &e.grid;
    let (dw, dt) = (g.delta_omega(), g.dt());
    let (mut pos_set, mut mag_set, mut cols) = (0.0f64, 0.0f64, 0usize);
    for n in g.interior_frames() {
        let Some(k) = (0..g.n_freq())
            .filter(|&k| e.branch[[k, n]] == BRANCH_SET)
            .max_by(|&x, &y| g.values[[x, n]].norm().total_cmp(&g.values[[y, n]].norm()))
        else {
            continue;
        };
        let ridge = SWEEP_B + c * g.time_axis_s[n];
        pos_set = pos_set.max((g.freq_axis_rad_s[k] - ridge).abs() / dw);
        mag_set = mag_set.max((g.values[[k, n]].norm() / amp - 1.0).abs());
        cols += 1;
    }
    // Time rule above the boundary: one ridge pixel per row.
    let c = 10.0 * c0();
    let a = sweep_analysis(amp, c);
    let e = a.stet2().unwrap();
    let g = &e.grid;
    let frames = g.interior_frames();
    let (t_lo, t_hi) = (
        g.time_axis_s[frames.start] + margin,
        g.time_axis_s[frames.end - 1] - margin,
    );
    let want = amp * (2.0 * PI / c).sqrt();
    let (mut pos_tet, mut mag_tet, mut rows) = (0.0f64, 0.0f64, 0usize);
    for k in 0..g.n_freq() {
        let ridge = (g.freq_axis_rad_s[k] - SWEEP_B) / c;
        if !(t_lo..=t_hi).contains(&ridge) {
            continue;
        }
        let Some(n) = frames
            .clone()
            .filter(|&n| e.branch[[k, n]] == BRANCH_TET)
            .max_by(|&x, &y| g.values[[k, x]].norm().total_cmp(&g.values[[k, y]].norm()))
        else {
            continue;
        };
        pos_tet = pos_tet.max((g.time_axis_s[n] - ridge).abs() / dt);
        mag_tet = mag_tet.max((g.values[[k, n]].norm() / want - 1.0).abs());
        rows += 1;
    }
    let pass = cols > 1000
        && rows > 50
        && pos_set <= 0.5 + 1e-9
        && pos_tet <= 0.5 + 1e-9
        && mag_set <= 0.05
        && mag_tet <= 0.05;
    outcome(
        pass,
        format!(
            "frequency rule: {cols} columns, offset ≤ {pos_set:.3}Δω, magnitude error ≤ {mag_set:.1e}; time rule: {rows} rows, offset ≤ {pos_tet:.3}Δt, magnitude error ≤ {mag_tet:.1e}"
        ),
    )
}

fn corpus_entropies() -> (Vec<(Method, f64, usize)>, f64) {
    let corpus = SurrogateCorpus::default();
    let a = Analysis::run(&corpus.signal().unwrap(), &corpus.analysis_config().unwrap()).unwrap();
    let rows = Method::ALL
        .into_iter()
        .map(|m| {
            let g = a.transform(m).unwrap().grid;
            (
                m,
                renyi_entropy(&g, DEFAULT_RENYI_ORDER).unwrap(),
                coefficients_for_fraction(&g, 0.95).unwrap(),
            )
        })
        .collect();
    (rows, DEFAULT_RENYI_ORDER)
}

fn lookup(rows: &[(Method, f64, usize)], m: Method) -> (f64, usize) {
    let r = rows.iter().find(|r| r.0 == m).unwrap();
    (r.1, r.2)
}

fn entropy_ordering(rows: &[(Method, f64, usize)]) -> Outcome {
    let h = |m| lookup(rows, m).0;
    let (h2, h1, hs, ht, hv) = (
        h(Method::Stet2),
        h(Method::Stet),
        h(Method::Set),
        h(Method::Tet),
        h(Method::Stft),
    );
    let gaps = [h1 - h2, hs.min(ht) - h1, hv - hs.min(ht)];
    outcome(
        gaps.iter().all(|&g| g >= 0.1),
        format!("bits: STET2 {h2:.2}, STET {h1:.2}, SET {hs:.2}, TET {ht:.2}, STFT {hv:.2}"),
    )
}

fn concentration_curve(rows: &[(Method, f64, usize)]) -> Outcome {
    let n = |m| lookup(rows, m).1;
    let n2 = n(Method::Stet2);
    let others = [Method::Set, Method::Tet, Method::Stft].map(n);
    outcome(
        others.iter().all(|&o| n2 < o),
        format!(
            "coefficients for 95% energy: STET2 {n2}, SET {}, TET {}, STFT {}",
            others[0], others[1], others[2]
        ),
    )
}

fn noise_robustness() -> Outcome {
    let corpus = SurrogateCorpus::default();
    let snrs = [-5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0];
    let methods = [Method::Stft, Method::Set, Method::Tet, Method::Stet2];
    let table = snr_sweep_methods(
        &corpus.signal().unwrap(),
        &snrs,
        &methods,
        2024,
        &corpus.analysis_config().unwrap(),
    )
    .unwrap();
    let h2: Vec<f64> = table.iter().map(|row| row[3].renyi_entropy).collect();
    let minimum = table
        .iter()
        .all(|row| row[..3].iter().all(|p| row[3].renyi_entropy < p.renyi_entropy));
    let rises: Vec<f64> = h2.windows(2).map(|w| w[1] - w[0]).filter(|&d| d > 0.0).collect();
    let monotone = rises.is_empty() || (rises.len() == 1 && rises[0] <= 0.05);
    let trace: Vec<String> = h2.iter().map(|h| format!("{h:.2}")).collect();
    outcome(
        monotone && minimum,
        format!(
            "STET2 bits over {:?} dB: {}; minimum at every level: {minimum}; rises: {}",
            snrs,
            trace.join(" "),
            rises.len()
        ),
    )
}

fn branch_fraction(s: &Signal, cfg: &AnalysisConfig, label: i8) -> f64 {
    let r = Analysis::run(s, cfg).unwrap().reconstruct().unwrap();
    let (e1, e2) = (r.s1.energy(), r.s2.energy());
    if label == BRANCH_SET {
        e1 / (e1 + e2)
    } else {
        e2 / (e1 + e2)
    }
}

fn reconstruction() -> Outcome {
    let fixture = ToneImpulse::default();
    let s = fixture.signal().unwrap();
    let cfg = fixture.analysis_config().unwrap();
    let r = Analysis::run(&s, &cfg).unwrap().reconstruct().unwrap();
    let snr = interior_snr_db(&s, &r.total, &r.interior_mask).unwrap();
    let (fs, d) = (fixture.fs, fixture.duration_s());
    let c0 = cfg.window.chirp_boundary();
    let singles = [
        ("tone", fixture.parts().unwrap().0, BRANCH_SET),
        ("impulse", fixture.parts().unwrap().1, BRANCH_TET),
        (
            "slow chirp",
            synth_lfm(1.0, 0.0, 2.0 * PI * 150.0, 0.5 * c0, d, fs).unwrap(),
            BRANCH_SET,
        ),
        (
            "fast chirp",
            synth_lfm(1.0, 0.0, 2.0 * PI * 50.0, 1.5 * c0, d, fs).unwrap(),
            BRANCH_TET,
        ),
    ];
    let fractions: Vec<(&str, f64)> = singles
        .iter()
        .map(|(name, s, label)| (*name, branch_fraction(s, &cfg, *label)))
        .collect();
    let pass = snr >= 10.0 && fractions.iter().all(|f| f.1 >= 0.95);
    let detail: Vec<String> = fractions
        .iter()
        .map(|(n, f)| format!("{n} {:.1}%", 100.0 * f))
        .collect();
    outcome(
        pass,
        format!(
            "tone+impulse interior SNR {snr:.2} dB; correct-branch energy: {}",
            detail.join(", ")
        ),
    )
}

fn derivative_transforms() -> Outcome {
    let (fs, d) = (1000.0, 1.024);
    let win = GaussianWindowSpec::new(1e-4, fs).unwrap();
    let cfg = StftConfig::new(512).with_band(FrequencyBand::Full);
    let (a1, b1, c1) = (0.3, 2.0 * PI * 150.0, 0.5 * win.chirp_boundary());
    let (a2, b2) = (1.1, 2.0 * PI * 330.0);
    // Band-limited mixture synthesised at a continuous time shift h.
    let shifted = |h: f64| {
        mix(&[
            synth_lfm(1.0, a1 + b1 * h + 0.5 * c1 * h * h, b1 + c1 * h, c1, d, fs).unwrap(),
            synth_lfm(0.7, a2 + b2 * h, b2, 0.0, d, fs).unwrap(),
        ])
        .unwrap()
    };
    let s = shifted(0.0);
    let v = stft(&s, &win, &cfg).unwrap();
    let floor = 1e-3 * v.max_abs();
    let mask = |k: usize, n: usize| v.is_interior(n) && v.values[[k, n]].norm() > floor;
    let worst = |fd: &dyn Fn(usize, usize) -> Complex64, exact: &TfGrid| {
        let mut worst: f64 = 0.0;
        for ((k, n), z) in exact.values.indexed_iter() {
            if mask(k, n) {
                worst = worst.max((fd(k, n) - z).norm() / z.norm());
            }
        }
        worst
    };
    let ht = 1e-6;
    let (vp, vm) = (
        stft(&shifted(ht), &win, &cfg).unwrap(),
        stft(&shifted(-ht), &win, &cfg).unwrap(),
    );
    let err_t = worst(
        &|k, n| (vp.values[[k, n]] - vm.values[[k, n]]) / (2.0 * ht),
        &stft_dt(&s, &win, &cfg).unwrap(),
    );
    // V(t, ω±h) = e^{±i·h·t}·V[s·e^{∓i·h·τ}](t, ω).
    let hw = 1e-3;
    let modulated = |h: f64| {
        let samples = s
            .samples()
            .iter()
            .enumerate()
            .map(|(i, z)| z * Complex64::from_polar(1.0, -h * s.time_of(i)))
            .collect();
        stft(&s.with_samples(samples).unwrap(), &win, &cfg).unwrap()
    };
    let (wp, wm) = (modulated(hw), modulated(-hw));
    let err_w = worst(
        &|k, n| {
            let t = v.time_axis_s[n];
            (Complex64::from_polar(1.0, hw * t) * wp.values[[k, n]]
                - Complex64::from_polar(1.0, -hw * t) * wm.values[[k, n]])
                / (2.0 * hw)
        },
        &stft_dw(&s, &win, &cfg).unwrap(),
    );
    outcome(
        err_t < 1e-3 && err_w < 1e-3,
        format!("max relative deviation from centred differences: time {err_t:.1e}, frequency {err_w:.1e}"),
    )
}

fn export_all(dir: &Path, cfg: &AnalysisConfig) {
    let corpus = SurrogateCorpus::default();
    let s = add_noise(&corpus.signal().unwrap(), 10.0, 77).unwrap();
    let a = Analysis::run(&s, cfg).unwrap();
    let boundary = a.resolved_extraction().unwrap().boundary;
    for m in Method::ALL {
        let out = a.transform(m).unwrap();
        for format in [MatrixFormat::Csv, MatrixFormat::Bin] {
            write_tfr(dir, &format!("{}_{format:?}", m.as_str()), &out.grid, format, boundary).unwrap();
        }
        if let Some(branch) = &out.branch {
            write_branch_map(dir, &format!("{}_branch", m.as_str()), &out.grid, branch, boundary).unwrap();
        }
    }
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let cfg = SurrogateCorpus::default().analysis_config().unwrap();
    let mut runs = Vec::new();
    let modes = [Execution::default(), Execution::default(), Execution::Sequential];
    for mode in &modes {
        let dir = tempfile::tempdir().unwrap();
        export_all(dir.path(), &cfg.with_execution(*mode));
        runs.push(dir_bytes(dir.path()));
    }
    let same = runs.windows(2).all(|w| w[0] == w[1]);
    outcome(
        same && !runs[0].is_empty(),
        format!(
            "{} files per run, {} runs ({:?}) byte-identical: {same}",
            runs[0].len(),
            runs.len(),
            modes
        ),
    )
}

fn main() -> ExitCode {
    let mut out = std::io::stdout().lock();
    let (rows, _) = corpus_entropies();
    let criteria: Vec<Criterion> = vec![
        ("closed-form STFT magnitudes", Box::new(closed_form_magnitudes)),
        ("estimator exactness", Box::new(estimator_exactness)),
        ("estimator error laws and boundary", Box::new(error_laws)),
        ("chirp-rate estimator", Box::new(chirp_rate_estimator)),
        ("branch routing", Box::new(branch_routing)),
        ("second-order ridge exactness", Box::new(second_order_exactness)),
        ("entropy ordering", Box::new(|| entropy_ordering(&rows))),
        ("concentration curve", Box::new(|| concentration_curve(&rows))),
        ("noise robustness", Box::new(noise_robustness)),
        ("reconstruction", Box::new(reconstruction)),
        ("derivative transforms", Box::new(derivative_transforms)),
        ("determinism", Box::new(determinism)),
    ];
    let mut unexpected = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = i + 1;
        let start = std::time::Instant::now();
        let o = run();
        let secs = start.elapsed().as_secs_f64();
        let known = KNOWN_RED.contains(&id);
        let tag = match (o.pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        writeln!(out, "criterion {id:>2} {tag}: {name}: {} [{secs:.1} s]", o.detail).unwrap();
        if !o.pass && !known {
            unexpected.push(id);
        }
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        writeln!(out, "unexpected failures: {unexpected:?}").unwrap();
        ExitCode::FAILURE
    }
}
