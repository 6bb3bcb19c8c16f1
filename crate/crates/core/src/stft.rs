//! Hop-1 STFT with a centred Gaussian window, plus the time and frequency
//! derivative transforms realised through the `g'` and `t·g` windows.
//!
//! Convention: `V(t,ω) = Σ_m s[n+m]·g[m]·exp(-iω·mΔt)·Δt`, i.e. the
//! modulation is referenced to the window centre. Under it
//!
//! ```text
//! ∂V/∂t = iω·V − V[g']      ∂V/∂ω = −i·V[t·g]
//! ```
//!
//! Frames near the record edges are computed with zero padding; see
//! [`TfGrid::interior_frames`].

use std::sync::Arc;

use ndarray::Array2;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::grid::{FrequencyBand, TfGrid, TfKind};
use crate::signal::Signal;
use crate::window::GaussianWindowSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StftConfig {
    pub n_fft: usize,
    pub band: FrequencyBand,
    pub execution: Execution,
}

impl StftConfig {
    pub fn new(n_fft: usize) -> Self {
        Self {
            n_fft,
            band: FrequencyBand::default(),
            execution: Execution::default(),
        }
    }

    pub fn with_band(mut self, band: FrequencyBand) -> Self {
        self.band = band;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }
}

/// The STFT together with its time and frequency derivatives.
#[derive(Debug, Clone)]
pub struct StftTriple {
    pub v: TfGrid,
    pub dt: TfGrid,
    pub dw: TfGrid,
}

struct Plan {
    fft: Arc<dyn Fft<f64>>,
    n_fft: usize,
    n_freq: usize,
    band: FrequencyBand,
    half_len: usize,
    dt: f64,
}

impl Plan {
    fn new(s: &Signal, w: &GaussianWindowSpec, cfg: &StftConfig) -> Result<Self> {
        if (s.sample_rate_hz() - w.fs).abs() > 1e-9 * w.fs {
            return Err(Error::GridMismatch(format!(
                "signal sampled at {} Hz, window built for {} Hz",
                s.sample_rate_hz(),
                w.fs
            )));
        }
        if cfg.n_fft < w.len() {
            return Err(invalid(
                "n_fft",
                format!("{} is shorter than the {}-tap window", cfg.n_fft, w.len()),
            ));
        }
        if s.len() < w.len() {
            return Err(Error::SignalTooShort {
                len: s.len(),
                needed: w.len(),
            });
        }
        let fft = FftPlanner::<f64>::new().plan_fft_forward(cfg.n_fft);
        Ok(Self {
            fft,
            n_fft: cfg.n_fft,
            n_freq: cfg.band.rows(cfg.n_fft),
            band: cfg.band,
            half_len: w.half_len,
            dt: w.dt(),
        })
    }

    /// Windowed, zero-padded FFT of frame `n` for each window in `taps`.
    fn frame<const K: usize>(&self, samples: &[Complex64], n: usize, taps: [&[f64]; K]) -> [Vec<Complex64>; K] {
        let h = self.half_len as isize;
        let len = samples.len() as isize;
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        taps.map(|tap| {
            let mut buf = vec![Complex64::new(0.0, 0.0); self.n_fft];
            for m in -h..=h {
                let idx = n as isize + m;
                if idx < 0 || idx >= len {
                    continue;
                }
                let slot = m.rem_euclid(self.n_fft as isize) as usize;
                buf[slot] = samples[idx as usize] * tap[(m + h) as usize];
            }
            self.fft.process_with_scratch(&mut buf, &mut scratch);
            (0..self.n_freq)
                .map(|k| buf[self.band.fft_index(self.n_fft, k)] * self.dt)
                .collect()
        })
    }
}

fn axes(s: &Signal, w: &GaussianWindowSpec, cfg: &StftConfig) -> (Vec<f64>, Vec<f64>) {
    let time = (0..s.len()).map(|n| s.time_of(n)).collect();
    let d_omega = 2.0 * std::f64::consts::PI * w.fs / cfg.n_fft as f64;
    let freq = (0..cfg.band.rows(cfg.n_fft))
        .map(|k| cfg.band.signed_bin(cfg.n_fft, k) as f64 * d_omega)
        .collect();
    (time, freq)
}

fn assemble(frames: &[Vec<Complex64>], n_freq: usize) -> Array2<Complex64> {
    Array2::from_shape_fn((n_freq, frames.len()), |(k, n)| frames[n][k])
}

fn grid(
    values: Array2<Complex64>,
    axes: &(Vec<f64>, Vec<f64>),
    w: &GaussianWindowSpec,
    cfg: &StftConfig,
    kind: TfKind,
) -> TfGrid {
    TfGrid {
        values,
        time_axis_s: axes.0.clone(),
        freq_axis_rad_s: axes.1.clone(),
        window: *w,
        n_fft: cfg.n_fft,
        band: cfg.band,
        kind,
    }
}

/// Plain STFT.
pub fn stft(s: &Signal, w: &GaussianWindowSpec, cfg: &StftConfig) -> Result<TfGrid> {
    let plan = Plan::new(s, w, cfg)?;
    let g = w.sample_window();
    let frames = cfg.execution.map_range(s.len(), |n| {
        plan.frame(s.samples(), n, [&g]).into_iter().next().unwrap()
    });
    Ok(grid(
        assemble(&frames, plan.n_freq),
        &axes(s, w, cfg),
        w,
        cfg,
        TfKind::Stft,
    ))
}

/// `∂V/∂t` computed from the `g` and `g'` transforms.
pub fn stft_dt(s: &Signal, w: &GaussianWindowSpec, cfg: &StftConfig) -> Result<TfGrid> {
    Ok(stft_triple(s, w, cfg)?.dt)
}

/// `∂V/∂ω` computed from the `t·g` transform.
pub fn stft_dw(s: &Signal, w: &GaussianWindowSpec, cfg: &StftConfig) -> Result<TfGrid> {
    Ok(stft_triple(s, w, cfg)?.dw)
}

/// STFT and both derivative transforms in one pass over the frames.
pub fn stft_triple(s: &Signal, w: &GaussianWindowSpec, cfg: &StftConfig) -> Result<StftTriple> {
    let plan = Plan::new(s, w, cfg)?;
    let (g, dg, tg) = (w.sample_window(), w.sample_dwindow(), w.sample_twindow());
    let ax = axes(s, w, cfg);
    let omegas = &ax.1;
    let frames = cfg.execution.map_range(s.len(), |n| {
        let [v, vd, vt] = plan.frame(s.samples(), n, [&g, &dg, &tg]);
        let dt: Vec<Complex64> = v
            .iter()
            .zip(&vd)
            .zip(omegas)
            .map(|((&v, &vd), &om)| Complex64::new(0.0, om) * v - vd)
            .collect();
        let dw: Vec<Complex64> = vt.iter().map(|&z| Complex64::new(z.im, -z.re)).collect();
        [v, dt, dw]
    });
    let n_freq = plan.n_freq;
    let pick = |i: usize| Array2::from_shape_fn((n_freq, frames.len()), |(k, n)| frames[n][i][k]);
    Ok(StftTriple {
        v: grid(pick(0), &ax, w, cfg, TfKind::Stft),
        dt: grid(pick(1), &ax, w, cfg, TfKind::DStftT),
        dw: grid(pick(2), &ax, w, cfg, TfKind::DStftW),
    })
}

/// Closed-form STFT of `A·exp(i(a + b·t + c·t²/2))` under the Gaussian window
/// (untruncated, continuous time). Test oracle.
pub fn lfm_stft_oracle(amplitude: f64, a: f64, b: f64, c: f64, beta: f64, t: f64, omega: f64) -> Complex64 {
    let one_minus = Complex64::new(1.0, -beta * c);
    let gain = (Complex64::new(2.0 * std::f64::consts::PI * beta, 0.0) / one_minus).sqrt();
    let d = omega - b - c * t;
    let envelope = (Complex64::new(-beta * d * d / 2.0, 0.0) / one_minus).exp();
    let carrier = Complex64::from_polar(1.0, a + b * t + 0.5 * c * t * t);
    gain * amplitude * carrier * envelope
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{synth_harmonic, synth_impulse};
    use std::f64::consts::PI;

    fn setup() -> (GaussianWindowSpec, StftConfig) {
        (GaussianWindowSpec::new(1e-4, 1000.0).unwrap(), StftConfig::new(256))
    }

    #[test]
    fn rejects_short_signal_and_small_fft() {
        let (w, cfg) = setup();
        let s = synth_harmonic(1.0, 100.0, 0.05, 1000.0).unwrap();
        assert!(matches!(stft(&s, &w, &cfg), Err(Error::SignalTooShort { .. })));
        let s = synth_harmonic(1.0, 100.0, 1.0, 1000.0).unwrap();
        assert!(stft(&s, &w, &StftConfig::new(64)).is_err());
    }

    #[test]
    fn zero_signal_gives_zero_grid() {
        let (w, cfg) = setup();
        let s = Signal::zeros(300, 1000.0).unwrap();
        let g = stft(&s, &w, &cfg).unwrap();
        assert!(g.values.iter().all(|z| *z == Complex64::new(0.0, 0.0)));
        assert_eq!(g.kind, TfKind::Stft);
    }

    #[test]
    fn axes_are_uniform() {
        let (w, cfg) = setup();
        let s = synth_harmonic(1.0, 100.0, 0.5, 1000.0).unwrap();
        for band in [FrequencyBand::Positive, FrequencyBand::Full] {
            let g = stft(&s, &w, &cfg.with_band(band)).unwrap();
            let dw = g.delta_omega();
            for pair in g.freq_axis_rad_s.windows(2) {
                assert!((pair[1] - pair[0] - dw).abs() < 1e-9);
            }
            assert!(g.freq_axis_rad_s.iter().all(|&w| w < PI * 1000.0));
            assert_eq!(g.values.dim(), (g.freq_axis_rad_s.len(), g.time_axis_s.len()));
        }
    }

    #[test]
    fn tone_peaks_at_its_frequency() {
        let (w, cfg) = setup();
        let d_omega = 2.0 * PI * 1000.0 / 256.0;
        let omega0 = 20.0 * d_omega;
        let s = synth_harmonic(1.0, omega0, 0.5, 1000.0).unwrap();
        let g = stft(&s, &w, &cfg.with_band(FrequencyBand::Positive)).unwrap();
        let col = g.values.column(250);
        let peak = (0..col.len())
            .max_by(|&a, &b| col[a].norm().total_cmp(&col[b].norm()))
            .unwrap();
        assert_eq!(peak, 20);
    }

    #[test]
    fn impulse_matches_window_profile() {
        let (w, cfg) = setup();
        let s = synth_impulse(1.0, 0.25, 0.5, 1000.0).unwrap();
        let g = stft(&s, &w, &cfg).unwrap();
        for n in 200..300 {
            let expect = w.eval(0.25 - n as f64 / 1000.0);
            for k in (0..g.n_freq()).step_by(17) {
                assert!((g.values[[k, n]].norm() - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn oracle_degenerates_to_tone() {
        let beta = 1e-4;
        let w = GaussianWindowSpec::new(beta, 1000.0).unwrap();
        for (t, om) in [(0.1, 300.0), (0.5, 280.0), (0.9, 350.0)] {
            let z = lfm_stft_oracle(1.3, 0.0, 300.0, 0.0, beta, t, om);
            let expect = Complex64::from_polar(1.3, 300.0 * t) * w.frequency_response(om - 300.0);
            assert!((z - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn oracle_envelope_peaks_on_the_if_line() {
        let (b, c, beta, t) = (600.0, 2000.0, 1e-4, 0.3);
        let peak = b + c * t;
        let at_peak = lfm_stft_oracle(1.0, 0.0, b, c, beta, t, peak).norm();
        for d in [-40.0, -5.0, 5.0, 40.0] {
            assert!(lfm_stft_oracle(1.0, 0.0, b, c, beta, t, peak + d).norm() < at_peak);
        }
    }
}
