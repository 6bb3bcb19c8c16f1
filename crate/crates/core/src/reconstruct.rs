//! Time-domain recovery from a second-order combined transform.
//!
//! Frequency-branch ridge pixels already read `s(t)` after rectification,
//! so the harmonic part is the per-column sum of those pixels. Time-branch
//! ridge pixels read `ŝ(ω)`; each column's kept pixels are inverse
//! transformed and overlap-added around that column's time, which keeps
//! every spectral sample at the time location its GD ridge assigned it.
//! Only interior frames contribute to the time branch: a truncated window
//! biases the estimators there, and a stray spectral sample would spread
//! over `n_fft` output samples.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::grid::TfKind;
use crate::signal::Signal;
use crate::transforms::{Extraction, BRANCH_SET, BRANCH_TET};

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    /// Frequency-branch (harmonic-like) part.
    pub s1: Signal,
    /// Time-branch (impulsive-like) part.
    pub s2: Signal,
    pub total: Signal,
    /// False within one window half-length of either record end.
    pub interior_mask: Vec<bool>,
}

fn check(e: &Extraction) -> Result<()> {
    if e.grid.kind != TfKind::Stet2 {
        return Err(Error::GridMismatch(format!(
            "reconstruction needs an STET2 grid, got {}",
            e.grid.kind.as_str()
        )));
    }
    Ok(())
}

fn signal_on(e: &Extraction, samples: Vec<Complex64>) -> Result<Signal> {
    Signal::with_start(samples, e.grid.fs(), e.grid.time_axis_s[0])
}

pub fn reconstruct_harmonic(e: &Extraction) -> Result<Signal> {
    check(e)?;
    let g = &e.grid;
    let samples = (0..g.n_time())
        .map(|n| {
            (0..g.n_freq())
                .filter(|&k| e.branch[[k, n]] == BRANCH_SET)
                .map(|k| g.values[[k, n]])
                .sum()
        })
        .collect();
    signal_on(e, samples)
}

pub fn reconstruct_impulsive(e: &Extraction) -> Result<Signal> {
    check(e)?;
    let g = &e.grid;
    let (n_fft, n_time) = (g.n_fft, g.n_time());
    let ifft = FftPlanner::<f64>::new().plan_fft_inverse(n_fft);
    let scale = g.fs() / n_fft as f64; // Δω/(2π)
    let half = (n_fft / 2) as isize;
    let columns: Vec<usize> = g
        .interior_frames()
        .filter(|&n| (0..g.n_freq()).any(|k| e.branch[[k, n]] == BRANCH_TET && g.values[[k, n]].norm_sqr() > 0.0))
        .collect();
    let pieces = Execution::default().map_range(columns.len(), |i| {
        let n = columns[i];
        let t_n = g.time_axis_s[n];
        let mut buf = vec![Complex64::new(0.0, 0.0); n_fft];
        for k in 0..g.n_freq() {
            let z = g.values[[k, n]];
            if e.branch[[k, n]] != BRANCH_TET || z.norm_sqr() == 0.0 {
                continue;
            }
            buf[g.band.fft_index(n_fft, k)] += z * Complex64::from_polar(1.0, g.freq_axis_rad_s[k] * t_n);
        }
        ifft.process(&mut buf);
        buf
    });
    let mut out = vec![Complex64::new(0.0, 0.0); n_time];
    for (&n, buf) in columns.iter().zip(&pieces) {
        for m in -half..half {
            let idx = n as isize + m;
            if idx < 0 || idx >= n_time as isize {
                continue;
            }
            out[idx as usize] += buf[m.rem_euclid(n_fft as isize) as usize] * scale;
        }
    }
    signal_on(e, out)
}

pub fn reconstruct(e: &Extraction) -> Result<ReconstructionResult> {
    let s1 = reconstruct_harmonic(e)?;
    let s2 = reconstruct_impulsive(e)?;
    let total = s1.with_samples(s1.samples().iter().zip(s2.samples()).map(|(a, b)| a + b).collect())?;
    let h = e.grid.window.half_len;
    let n = total.len();
    let interior_mask = (0..n).map(|i| i >= h && i + h < n).collect();
    Ok(ReconstructionResult {
        s1,
        s2,
        total,
        interior_mask,
    })
}

/// Interior SNR metrics of a reconstruction against a reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub interior_snr_db: f64,
    pub energy_s1: f64,
    pub energy_s2: f64,
    pub energy_reference: f64,
    pub interior_samples: usize,
}

/// `10·log10(‖ref‖² / ‖ref − est‖²)` over the masked-in samples.
pub fn interior_snr_db(reference: &Signal, estimate: &Signal, mask: &[bool]) -> Result<f64> {
    if reference.len() != estimate.len() || mask.len() != reference.len() {
        return Err(Error::GridMismatch(
            "reference, estimate and mask lengths differ".into(),
        ));
    }
    let (mut sig, mut err) = (0.0, 0.0);
    for ((r, e), &m) in reference.samples().iter().zip(estimate.samples()).zip(mask) {
        if m {
            sig += r.norm_sqr();
            err += (r - e).norm_sqr();
        }
    }
    Ok(10.0 * (sig / err).log10())
}

impl ReconstructionResult {
    pub fn report(&self, reference: &Signal) -> Result<ReconstructionReport> {
        Ok(ReconstructionReport {
            interior_snr_db: interior_snr_db(reference, &self.total, &self.interior_mask)?,
            energy_s1: self.s1.energy(),
            energy_s2: self.s2.energy(),
            energy_reference: reference.energy(),
            interior_samples: self.interior_mask.iter().filter(|&&m| m).count(),
        })
    }
}
