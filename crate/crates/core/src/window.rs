//! Gaussian analysis window `g(t) = exp(-t²/(2β))` and the derivative and
//! time-weighted variants used to build the derivative STFTs.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Largest tolerated window value at the truncation edge.
pub const DEFAULT_TAIL: f64 = 1e-8;

/// Fraction of the record spanned by the window when none is given.
pub const DEFAULT_WINDOW_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianWindowSpec {
    /// Variance parameter in s².
    pub beta: f64,
    /// Truncation radius in samples; the window has `2·half_len + 1` taps.
    pub half_len: usize,
    /// Sample rate in Hz.
    pub fs: f64,
}

impl GaussianWindowSpec {
    /// Window truncated where `g` first drops to [`DEFAULT_TAIL`].
    pub fn new(beta: f64, fs: f64) -> Result<Self> {
        Self::with_tail(beta, fs, DEFAULT_TAIL)
    }

    /// Window truncated where `g` drops to `tail` (must not exceed [`DEFAULT_TAIL`]).
    pub fn with_tail(beta: f64, fs: f64, tail: f64) -> Result<Self> {
        check(beta, fs)?;
        if !(tail > 0.0 && tail <= DEFAULT_TAIL) {
            return Err(invalid("tail", format!("must lie in (0, {DEFAULT_TAIL}], got {tail}")));
        }
        let radius_s = (2.0 * beta * (1.0 / tail).ln()).sqrt();
        let half_len = (radius_s * fs).ceil().max(1.0) as usize;
        Ok(Self { beta, half_len, fs })
    }

    /// Explicit truncation radius. A radius whose edge value exceeds
    /// [`DEFAULT_TAIL`] is rejected unless `allow_heavy_tail` is set.
    pub fn with_half_len(beta: f64, fs: f64, half_len: usize, allow_heavy_tail: bool) -> Result<Self> {
        check(beta, fs)?;
        if half_len == 0 {
            return Err(invalid("half_len", "must be at least one sample"));
        }
        let spec = Self { beta, half_len, fs };
        if spec.edge_value() > DEFAULT_TAIL && !allow_heavy_tail {
            return Err(invalid(
                "half_len",
                format!(
                    "window edge value {:.3e} exceeds {DEFAULT_TAIL:e}; pass allow_heavy_tail to override",
                    spec.edge_value()
                ),
            ));
        }
        Ok(spec)
    }

    /// `β = σ²` from a standard deviation given in milliseconds.
    pub fn from_sigma_ms(sigma_ms: f64, fs: f64) -> Result<Self> {
        if !(sigma_ms.is_finite() && sigma_ms > 0.0) {
            return Err(invalid("sigma_ms", format!("must be positive, got {sigma_ms}")));
        }
        let sigma = sigma_ms * 1e-3;
        Self::new(sigma * sigma, fs)
    }

    /// Window whose full length is about `fraction` of a `record_len`-sample
    /// record, with the default tail.
    pub fn spanning(fraction: f64, record_len: usize, fs: f64) -> Result<Self> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(invalid("fraction", format!("must lie in (0, 1], got {fraction}")));
        }
        let half_len_s = ((fraction * record_len as f64 - 1.0) / 2.0).max(1.0) / fs;
        let sigma = half_len_s / (2.0 * (1.0 / DEFAULT_TAIL).ln()).sqrt();
        Self::new(sigma * sigma, fs)
    }

    /// Smallest power of two at least four window lengths long.
    pub fn default_n_fft(&self) -> usize {
        (4 * self.len()).next_power_of_two()
    }

    pub fn sigma_s(&self) -> f64 {
        self.beta.sqrt()
    }

    pub fn len(&self) -> usize {
        2 * self.half_len + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.fs
    }

    /// `g` at the truncation edge.
    pub fn edge_value(&self) -> f64 {
        self.eval(self.half_len as f64 / self.fs)
    }

    /// `β^(-2/3)`: the chirp rate (rad/s²) at which the first-order
    /// frequency and time estimators make equal errors.
    pub fn chirp_boundary(&self) -> f64 {
        self.beta.powf(-2.0 / 3.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        (-t * t / (2.0 * self.beta)).exp()
    }

    fn times(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.half_len as isize;
        (-h..=h).map(move |m| m as f64 / self.fs)
    }

    pub fn sample_window(&self) -> Vec<f64> {
        self.times().map(|t| self.eval(t)).collect()
    }

    /// `g'(t) = -(t/β)·g(t)`.
    pub fn sample_dwindow(&self) -> Vec<f64> {
        self.times().map(|t| -t / self.beta * self.eval(t)).collect()
    }

    /// `t·g(t)`.
    pub fn sample_twindow(&self) -> Vec<f64> {
        self.times().map(|t| t * self.eval(t)).collect()
    }

    /// `G(ω) = √(2πβ)·exp(-βω²/2)`.
    pub fn frequency_response(&self, omega: f64) -> f64 {
        (2.0 * PI * self.beta).sqrt() * (-0.5 * self.beta * omega * omega).exp()
    }
}

fn check(beta: f64, fs: f64) -> Result<()> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(invalid("beta", format!("must be positive, got {beta}")));
    }
    if !(fs.is_finite() && fs > 0.0) {
        return Err(invalid("fs", format!("must be positive, got {fs}")));
    }
    Ok(())
}
