#![allow(dead_code)]

use stet::signal::{mix, synth_harmonic, synth_impulse, synth_lfm};
use stet::*;

pub const FS: f64 = 1000.0;
pub const BETA: f64 = 1e-4;
pub const TAU: f64 = 2.0 * std::f64::consts::PI;

pub fn window() -> GaussianWindowSpec {
    GaussianWindowSpec::new(BETA, FS).unwrap()
}

pub fn boundary() -> f64 {
    BETA.powf(-2.0 / 3.0)
}

pub fn config(band: FrequencyBand) -> AnalysisConfig {
    AnalysisConfig::new(window(), 512).with_band(band)
}

pub fn analyse(s: &Signal) -> Analysis {
    Analysis::run(s, &config(FrequencyBand::Full)).unwrap()
}

pub fn tone(amplitude: f64, hz: f64) -> Signal {
    synth_harmonic(amplitude, TAU * hz, 1.0, FS).unwrap()
}

pub fn impulse(weight: f64, t0: f64) -> Signal {
    synth_impulse(weight, t0, 1.0, FS).unwrap()
}

pub fn chirp(amplitude: f64, hz: f64, rate: f64) -> Signal {
    synth_lfm(amplitude, 0.4, TAU * hz, rate, 1.0, FS).unwrap()
}

pub fn tone_and_impulse() -> Signal {
    mix(&[tone(1.0, 200.0), impulse(0.02, 0.5)]).unwrap()
}

/// Interior pixels above the validity threshold.
pub fn valid_interior(a: &Analysis) -> Vec<(usize, usize)> {
    let frames = a.stft().interior_frames();
    a.fields
        .mask
        .indexed_iter()
        .filter(|&((_, n), &ok)| ok && frames.contains(&n))
        .map(|(kn, _)| kn)
        .collect()
}

pub fn median(mut v: Vec<f64>) -> f64 {
    assert!(!v.is_empty());
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

/// `‖a − b‖ / ‖b‖` over samples where `mask` holds.
pub fn relative_rms(a: &Signal, b: &Signal, mask: &[bool]) -> f64 {
    let (mut err, mut norm) = (0.0, 0.0);
    for ((x, y), &m) in a.samples().iter().zip(b.samples()).zip(mask) {
        if m {
            err += (x - y).norm_sqr();
            norm += y.norm_sqr();
        }
    }
    (err / norm).sqrt()
}

pub fn masked_energy(s: &Signal, mask: &[bool]) -> f64 {
    s.samples()
        .iter()
        .zip(mask)
        .filter(|p| *p.1)
        .map(|p| p.0.norm_sqr())
        .sum()
}
