//! Uniformly sampled complex signals, the synthetic test models (tone,
//! impulse, linear chirp), noise injection and analytic conversion.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{invalid, Error, Result};

/// A uniformly sampled complex time series.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<Complex64>,
    sample_rate_hz: f64,
    start_time_s: f64,
}

impl Signal {
    pub fn new(samples: Vec<Complex64>, sample_rate_hz: f64) -> Result<Self> {
        Self::with_start(samples, sample_rate_hz, 0.0)
    }

    pub fn with_start(samples: Vec<Complex64>, sample_rate_hz: f64, start_time_s: f64) -> Result<Self> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(invalid(
                "sample_rate_hz",
                format!("must be positive and finite, got {sample_rate_hz}"),
            ));
        }
        if samples.is_empty() {
            return Err(invalid("samples", "signal must contain at least one sample"));
        }
        if !start_time_s.is_finite() {
            return Err(invalid("start_time_s", "must be finite"));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
            start_time_s,
        })
    }

    /// Builds a signal from real samples (zero imaginary part).
    pub fn from_real(samples: &[f64], sample_rate_hz: f64) -> Result<Self> {
        Self::new(
            samples.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            sample_rate_hz,
        )
    }

    pub fn zeros(len: usize, sample_rate_hz: f64) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); len], sample_rate_hz)
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn start_time_s(&self) -> f64 {
        self.start_time_s
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate_hz
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    /// Absolute time of sample `n`.
    pub fn time_of(&self, n: usize) -> f64 {
        self.start_time_s + n as f64 / self.sample_rate_hz
    }

    /// Mean power `Σ|s|²/N`.
    pub fn power(&self) -> f64 {
        self.energy() / self.samples.len() as f64
    }

    /// Sample-domain energy `Σ|s|²`.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_real(&self) -> bool {
        self.samples.iter().all(|z| z.im == 0.0)
    }

    /// Same grid, new samples.
    pub fn with_samples(&self, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != self.samples.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} samples, got {}",
                self.samples.len(),
                samples.len()
            )));
        }
        Ok(Self {
            samples,
            sample_rate_hz: self.sample_rate_hz,
            start_time_s: self.start_time_s,
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|z| z * factor).collect(),
            ..self.clone()
        }
    }

    fn same_grid(&self, other: &Signal) -> bool {
        self.samples.len() == other.samples.len()
            && self.sample_rate_hz == other.sample_rate_hz
            && self.start_time_s == other.start_time_s
    }
}

fn sample_count(duration_s: f64, fs: f64) -> Result<usize> {
    if !(fs.is_finite() && fs > 0.0) {
        return Err(invalid("fs", format!("must be positive, got {fs}")));
    }
    if !(duration_s.is_finite() && duration_s > 0.0) {
        return Err(invalid("duration_s", format!("must be positive, got {duration_s}")));
    }
    let n = (duration_s * fs).round() as usize;
    if n == 0 {
        return Err(invalid("duration_s", "record shorter than one sample"));
    }
    Ok(n)
}

fn check_amplitude(amplitude: f64) -> Result<()> {
    if !(amplitude.is_finite() && amplitude >= 0.0) {
        return Err(invalid(
            "amplitude",
            format!("must be finite and non-negative, got {amplitude}"),
        ));
    }
    Ok(())
}

/// Complex tone `A·exp(i·omega0·t)`.
pub fn synth_harmonic(amplitude: f64, omega0: f64, duration_s: f64, fs: f64) -> Result<Signal> {
    check_amplitude(amplitude)?;
    let n = sample_count(duration_s, fs)?;
    if !(omega0.is_finite() && omega0.abs() < PI * fs) {
        return Err(invalid(
            "omega0",
            format!("|omega0| must stay below pi*fs = {:.3} rad/s", PI * fs),
        ));
    }
    let samples = (0..n)
        .map(|k| {
            let t = k as f64 / fs;
            Complex64::from_polar(amplitude, omega0 * t)
        })
        .collect();
    Signal::new(samples, fs)
}

/// Discrete unit-area impulse: a single sample of height `amplitude·fs` at
/// index `round(t0·fs)`, so that `Σ s·Δt = amplitude`.
pub fn synth_impulse(amplitude: f64, t0_s: f64, duration_s: f64, fs: f64) -> Result<Signal> {
    let n = sample_count(duration_s, fs)?;
    if !amplitude.is_finite() {
        return Err(invalid("amplitude", "must be finite"));
    }
    if !(t0_s.is_finite() && t0_s >= 0.0 && t0_s < duration_s) {
        return Err(invalid(
            "t0_s",
            format!("impulse time {t0_s} s outside [0, {duration_s}) s"),
        ));
    }
    let idx = (t0_s * fs).round() as usize;
    if idx >= n {
        return Err(invalid(
            "t0_s",
            format!("impulse time {t0_s} s rounds past the last sample"),
        ));
    }
    let mut samples = vec![Complex64::new(0.0, 0.0); n];
    samples[idx] = Complex64::new(amplitude * fs, 0.0);
    Signal::new(samples, fs)
}

/// Linear chirp `A·exp(i(a + b·t + c·t²/2))`; instantaneous frequency `b + c·t`.
pub fn synth_lfm(amplitude: f64, a: f64, b: f64, c: f64, duration_s: f64, fs: f64) -> Result<Signal> {
    check_amplitude(amplitude)?;
    let n = sample_count(duration_s, fs)?;
    if !(a.is_finite() && b.is_finite() && c.is_finite()) {
        return Err(invalid("lfm", "phase coefficients must be finite"));
    }
    let limit = PI * fs;
    // IF is linear, so the extremes sit at the first and last sample.
    for k in [0, n - 1] {
        let t = k as f64 / fs;
        let omega = b + c * t;
        if !(omega > 0.0 && omega < limit) {
            return Err(Error::FrequencyOutOfBand {
                time_s: t,
                omega,
                limit,
            });
        }
    }
    let samples = (0..n)
        .map(|k| {
            let t = k as f64 / fs;
            Complex64::from_polar(amplitude, a + b * t + 0.5 * c * t * t)
        })
        .collect();
    Signal::new(samples, fs)
}

/// Elementwise sum of signals sharing one sampling grid.
pub fn mix(signals: &[Signal]) -> Result<Signal> {
    let (first, rest) = signals
        .split_first()
        .ok_or_else(|| invalid("signals", "nothing to mix"))?;
    let mut out = first.samples.clone();
    for s in rest {
        if !first.same_grid(s) {
            return Err(Error::GridMismatch(format!(
                "cannot mix {} samples @ {} Hz with {} samples @ {} Hz",
                first.len(),
                first.sample_rate_hz,
                s.len(),
                s.sample_rate_hz
            )));
        }
        for (o, z) in out.iter_mut().zip(&s.samples) {
            *o += z;
        }
    }
    first.with_samples(out)
}

/// Circular complex white Gaussian noise scaled so that the realised
/// noise power sits exactly `snr_db` below the signal power.
pub fn noise_for(s: &Signal, snr_db: f64, seed: u64) -> Result<Vec<Complex64>> {
    if !snr_db.is_finite() {
        return Err(invalid("snr_db", "must be finite"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noise: Vec<Complex64> = (0..s.len())
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        })
        .collect();
    let raw_power = noise.iter().map(|z| z.norm_sqr()).sum::<f64>() / noise.len() as f64;
    let target = s.power() / 10f64.powf(snr_db / 10.0);
    let gain = if raw_power > 0.0 {
        (target / raw_power).sqrt()
    } else {
        0.0
    };
    for z in &mut noise {
        *z *= gain;
    }
    Ok(noise)
}

pub fn add_noise(s: &Signal, snr_db: f64, seed: u64) -> Result<Signal> {
    let noise = noise_for(s, snr_db, seed)?;
    s.with_samples(s.samples.iter().zip(noise).map(|(a, b)| a + b).collect())
}

/// One-sided-spectrum analytic signal of the real part of `s`.
///
/// The full record is transformed; positive bins are doubled, negative bins
/// zeroed, DC and (for even lengths) Nyquist are kept at unit weight. The
/// imaginary part of the input is ignored, so the real part is preserved.
pub fn to_analytic(s: &Signal) -> Signal {
    let n = s.len();
    let mut buf: Vec<Complex64> = s.samples.iter().map(|z| Complex64::new(z.re, 0.0)).collect();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    for (k, z) in buf.iter_mut().enumerate() {
        let weight = if k == 0 || (n.is_multiple_of(2) && k == half) {
            1.0
        } else if k < n.div_ceil(2) {
            2.0
        } else {
            0.0
        };
        *z *= weight;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    for z in &mut buf {
        *z *= scale;
    }
    Signal {
        samples: buf,
        ..s.clone()
    }
}
