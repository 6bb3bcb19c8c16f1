//! Multicomponent test signal: a tone, an impulse train and two crossing
//! chirps, one either side of the chirp-rate boundary.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::FrequencyBand;
use crate::pipeline::AnalysisConfig;
use crate::signal::{mix, synth_harmonic, synth_impulse, synth_lfm, Signal};
use crate::window::{GaussianWindowSpec, DEFAULT_WINDOW_FRACTION};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Chirp {
    pub amplitude: f64,
    pub phase: f64,
    pub omega0: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateCorpus {
    pub fs: f64,
    pub len: usize,
    pub beta: f64,
    pub n_fft: usize,
    pub tone_amplitude: f64,
    pub tone_omega: f64,
    /// Integral weight of each impulse.
    pub impulse_weight: f64,
    pub impulse_times_s: Vec<f64>,
    /// Rate below the boundary.
    pub slow_chirp: Chirp,
    /// Rate above the boundary.
    pub fast_chirp: Chirp,
}

impl Default for SurrogateCorpus {
    fn default() -> Self {
        let fs = 1000.0;
        let beta: f64 = 1e-4;
        let c0 = beta.powf(-2.0 / 3.0);
        Self {
            fs,
            len: 1024,
            beta,
            n_fft: 512,
            tone_amplitude: 1.0,
            tone_omega: 2.0 * std::f64::consts::PI * 400.0,
            impulse_weight: 0.05,
            impulse_times_s: vec![0.2, 0.45, 0.7, 0.95],
            slow_chirp: Chirp {
                amplitude: 1.0,
                phase: 0.0,
                omega0: 2.0 * std::f64::consts::PI * 150.0,
                rate: 0.25 * c0,
            },
            fast_chirp: Chirp {
                amplitude: 1.0,
                phase: 0.5,
                omega0: 2.0 * std::f64::consts::PI * 350.0,
                rate: -4.0 * c0,
            },
        }
    }
}

impl SurrogateCorpus {
    pub fn duration_s(&self) -> f64 {
        self.len as f64 / self.fs
    }

    pub fn window(&self) -> Result<GaussianWindowSpec> {
        GaussianWindowSpec::new(self.beta, self.fs)
    }

    pub fn analysis_config(&self) -> Result<AnalysisConfig> {
        Ok(AnalysisConfig::new(self.window()?, self.n_fft).with_band(FrequencyBand::Full))
    }

    pub fn signal(&self) -> Result<Signal> {
        let d = self.duration_s();
        let mut parts = vec![synth_harmonic(self.tone_amplitude, self.tone_omega, d, self.fs)?];
        for &t0 in &self.impulse_times_s {
            parts.push(synth_impulse(self.impulse_weight, t0, d, self.fs)?);
        }
        for ch in [self.slow_chirp, self.fast_chirp] {
            parts.push(synth_lfm(ch.amplitude, ch.phase, ch.omega0, ch.rate, d, self.fs)?);
        }
        mix(&parts)
    }
}

/// One tone and one impulse of comparable energy: the smallest signal that
/// needs both branches. The window follows the command-line default: it
/// spans [`DEFAULT_WINDOW_FRACTION`] of the record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToneImpulse {
    pub fs: f64,
    pub len: usize,
    pub beta: f64,
    pub n_fft: usize,
    pub tone_amplitude: f64,
    pub tone_omega: f64,
    pub impulse_weight: f64,
    pub impulse_time_s: f64,
}

impl Default for ToneImpulse {
    fn default() -> Self {
        let (fs, len) = (1000.0, 1024);
        let w = GaussianWindowSpec::spanning(DEFAULT_WINDOW_FRACTION, len, fs).expect("fixed parameters are valid");
        Self {
            fs,
            len,
            beta: w.beta,
            n_fft: w.default_n_fft(),
            tone_amplitude: 1.0,
            tone_omega: 2.0 * std::f64::consts::PI * 200.0,
            impulse_weight: 0.02,
            impulse_time_s: 0.5,
        }
    }
}

impl ToneImpulse {
    pub fn duration_s(&self) -> f64 {
        self.len as f64 / self.fs
    }

    pub fn analysis_config(&self) -> Result<AnalysisConfig> {
        let w = GaussianWindowSpec::new(self.beta, self.fs)?;
        Ok(AnalysisConfig::new(w, self.n_fft).with_band(FrequencyBand::Full))
    }

    /// `(tone, impulse)`.
    pub fn parts(&self) -> Result<(Signal, Signal)> {
        let d = self.duration_s();
        Ok((
            synth_harmonic(self.tone_amplitude, self.tone_omega, d, self.fs)?,
            synth_impulse(self.impulse_weight, self.impulse_time_s, d, self.fs)?,
        ))
    }

    pub fn signal(&self) -> Result<Signal> {
        let (tone, impulse) = self.parts()?;
        mix(&[tone, impulse])
    }
}
