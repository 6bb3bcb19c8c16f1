//! Complex time-frequency grids with physical axes.

use std::f64::consts::PI;
use std::ops::Range;

use ndarray::Array2;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::window::GaussianWindowSpec;

/// What a grid holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TfKind {
    #[serde(rename = "STFT")]
    Stft,
    #[serde(rename = "SET")]
    Set,
    #[serde(rename = "TET")]
    Tet,
    #[serde(rename = "STET")]
    Stet,
    #[serde(rename = "STET2")]
    Stet2,
    #[serde(rename = "dSTFT_t")]
    DStftT,
    #[serde(rename = "dSTFT_w")]
    DStftW,
}

impl TfKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TfKind::Stft => "STFT",
            TfKind::Set => "SET",
            TfKind::Tet => "TET",
            TfKind::Stet => "STET",
            TfKind::Stet2 => "STET2",
            TfKind::DStftT => "dSTFT_t",
            TfKind::DStftW => "dSTFT_w",
        }
    }
}

/// Which FFT bins become grid rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrequencyBand {
    /// `[0, π·fs)`, `n_fft/2` rows. Enough for analytic signals.
    Positive,
    /// `[-π·fs, π·fs)`, `n_fft` rows. Needed for broadband complex input
    /// (a discrete impulse has a two-sided spectrum).
    #[default]
    Full,
}

impl FrequencyBand {
    pub fn rows(self, n_fft: usize) -> usize {
        match self {
            FrequencyBand::Positive => n_fft / 2,
            FrequencyBand::Full => n_fft,
        }
    }

    /// Signed bin number (in units of Δω) of grid row `k`.
    pub fn signed_bin(self, n_fft: usize, k: usize) -> isize {
        match self {
            FrequencyBand::Positive => k as isize,
            FrequencyBand::Full => k as isize - (n_fft / 2) as isize,
        }
    }

    /// FFT output index of grid row `k`.
    pub fn fft_index(self, n_fft: usize, k: usize) -> usize {
        self.signed_bin(n_fft, k).rem_euclid(n_fft as isize) as usize
    }
}

/// Complex matrix `[n_freq × n_time]` over uniform time and frequency axes.
#[derive(Debug, Clone, PartialEq)]
pub struct TfGrid {
    pub values: Array2<Complex64>,
    pub time_axis_s: Vec<f64>,
    pub freq_axis_rad_s: Vec<f64>,
    pub window: GaussianWindowSpec,
    pub n_fft: usize,
    pub band: FrequencyBand,
    pub kind: TfKind,
}

impl TfGrid {
    pub fn n_freq(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_time(&self) -> usize {
        self.values.ncols()
    }

    pub fn fs(&self) -> f64 {
        self.window.fs
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.window.fs
    }

    /// Frequency step `2π·fs/n_fft` in rad/s.
    pub fn delta_omega(&self) -> f64 {
        2.0 * PI * self.window.fs / self.n_fft as f64
    }

    /// Frames whose window lies entirely inside the record.
    pub fn interior_frames(&self) -> Range<usize> {
        let h = self.window.half_len;
        let n = self.n_time();
        if n > 2 * h {
            h..n - h
        } else {
            0..0
        }
    }

    pub fn is_interior(&self, n: usize) -> bool {
        self.interior_frames().contains(&n)
    }

    /// Same axes, new values and kind.
    pub fn with_values(&self, values: Array2<Complex64>, kind: TfKind) -> Self {
        debug_assert_eq!(values.dim(), self.values.dim());
        Self {
            values,
            time_axis_s: self.time_axis_s.clone(),
            freq_axis_rad_s: self.freq_axis_rad_s.clone(),
            window: self.window,
            n_fft: self.n_fft,
            band: self.band,
            kind,
        }
    }

    pub fn zeros_like(&self, kind: TfKind) -> Self {
        self.with_values(Array2::zeros(self.values.dim()), kind)
    }

    pub fn energy(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn nonzero_count(&self) -> usize {
        self.values.iter().filter(|z| z.norm_sqr() > 0.0).count()
    }

    pub fn same_axes(&self, other: &TfGrid) -> bool {
        self.values.dim() == other.values.dim()
            && self.time_axis_s == other.time_axis_s
            && self.freq_axis_rad_s == other.freq_axis_rad_s
    }

    /// Row whose frequency is nearest to `omega`.
    pub fn nearest_row(&self, omega: f64) -> Option<usize> {
        let w0 = *self.freq_axis_rad_s.first()?;
        let k = ((omega - w0) / self.delta_omega()).round();
        (k >= 0.0 && (k as usize) < self.n_freq()).then_some(k as usize)
    }

    /// Column whose time is nearest to `t`.
    pub fn nearest_column(&self, t: f64) -> Option<usize> {
        let t0 = *self.time_axis_s.first()?;
        let n = ((t - t0) * self.fs()).round();
        (n >= 0.0 && (n as usize) < self.n_time()).then_some(n as usize)
    }
}
