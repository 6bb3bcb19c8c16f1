//! Per-pixel estimators on the STFT grid: instantaneous frequency `ω̂`,
//! group delay `t̂`, their partial derivatives, the local chirp rate, the
//! second-order corrected estimators and the amplitude-rectified STFTs.
//!
//! Every field is a [`Field`]: values plus a validity mask. Masked pixels
//! hold `0.0` and must not be read downstream.

use std::f64::consts::PI;

use ndarray::{Array2, Axis, Zip};
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{zip_map, Execution};
use crate::grid::{TfGrid, TfKind};
use crate::stft::StftTriple;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    /// Pixels with `|V| ≤ gamma·max|V|` are masked.
    pub gamma: f64,
    /// Division guard for the estimator ratios (dimensionless; scaled by β
    /// where the denominator carries s²/rad).
    pub eps_div: f64,
    pub chirp_rule: ChirpRateRule,
    pub execution: Execution,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            gamma: 1e-3,
            eps_div: 1e-6,
            chirp_rule: ChirpRateRule::default(),
            execution: Execution::default(),
        }
    }
}

/// How the local chirp rate is formed from the partials, and which slope
/// the second-order estimators use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChirpRateRule {
    /// `(∂ω̂/∂t)/(∂t̂/∂t)` everywhere; second-order estimates from the
    /// frequency partials ([`if_estimate2`], [`gd_estimate2`]).
    TimeRatio,
    /// The time ratio where `|∂t̂/∂t| ≥ |∂ω̂/∂ω|`, the frequency ratio
    /// `(∂ω̂/∂ω)/(∂t̂/∂ω)` elsewhere ([`chirp_rate_dual`]); second-order
    /// estimates from that rate ([`second_order_with_rate`]).
    #[default]
    Dual,
}

/// Real field with a validity mask.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub values: Array2<f64>,
    pub mask: Array2<bool>,
}

impl Field {
    fn from_options(opts: Array2<Option<f64>>) -> Self {
        Self {
            values: opts.mapv(|v| v.unwrap_or(0.0)),
            mask: opts.mapv(|v| v.is_some()),
        }
    }

    pub fn get(&self, k: usize, n: usize) -> Option<f64> {
        self.mask[[k, n]].then(|| self.values[[k, n]])
    }

    pub fn valid_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

/// Second-order estimate; `fallback` marks pixels that reverted to the
/// first-order estimator because the correction's denominator vanished.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrder {
    pub field: Field,
    pub fallback: Array2<bool>,
}

impl SecondOrder {
    pub fn fallback_count(&self) -> usize {
        Zip::from(&self.fallback)
            .and(&self.field.mask)
            .fold(0, |acc, &f, &m| acc + usize::from(f && m))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partials {
    /// `∂ω̂/∂t`, rad/s².
    pub d_omega_hat_dt: Field,
    /// `∂ω̂/∂ω`, dimensionless.
    pub d_omega_hat_dw: Field,
    /// `∂t̂/∂t`, dimensionless.
    pub d_t_hat_dt: Field,
    /// `∂t̂/∂ω`, s²/rad.
    pub d_t_hat_dw: Field,
}

#[derive(Debug, Clone)]
pub struct EstimatorFields {
    pub omega_hat: Field,
    pub t_hat: Field,
    pub partials: Partials,
    /// rad/s² from [`EstimatorConfig::chirp_rule`]; `+∞` where the
    /// rule's denominator vanishes.
    pub chirp_rate: Field,
    pub omega_hat2: SecondOrder,
    pub t_hat2: SecondOrder,
    /// `|V| > gamma·max|V|`.
    pub mask: Array2<bool>,
    pub gamma: f64,
    pub eps_div: f64,
    pub beta: f64,
    pub time_axis_s: Vec<f64>,
    pub freq_axis_rad_s: Vec<f64>,
}

impl EstimatorFields {
    pub fn compute(triple: &StftTriple, cfg: &EstimatorConfig) -> Result<Self> {
        let exec = cfg.execution;
        let omega_hat = if_estimate(&triple.v, &triple.dt, cfg.gamma, exec)?;
        let t_hat = gd_estimate(&triple.v, &triple.dw, cfg.gamma, exec)?;
        let partials = field_partials(
            &omega_hat,
            &t_hat,
            &triple.v.time_axis_s,
            &triple.v.freq_axis_rad_s,
            exec,
        );
        let chirp = match cfg.chirp_rule {
            ChirpRateRule::TimeRatio => chirp_rate(&partials, cfg.eps_div, exec),
            ChirpRateRule::Dual => chirp_rate_dual(&partials, triple.v.window.beta, cfg.eps_div, exec),
        };
        let beta = triple.v.window.beta;
        let (time_axis, freq_axis) = (&triple.v.time_axis_s, &triple.v.freq_axis_rad_s);
        let (omega_hat2, t_hat2) = match cfg.chirp_rule {
            ChirpRateRule::TimeRatio => (
                if_estimate2_printed(&omega_hat, &t_hat, &partials, time_axis, cfg.eps_div * beta, exec),
                gd_estimate2_printed(&omega_hat, &t_hat, &partials, freq_axis, cfg.eps_div, exec),
            ),
            ChirpRateRule::Dual => second_order_with_rate(&omega_hat, &t_hat, &chirp, time_axis, freq_axis, exec),
        };
        Ok(Self {
            mask: omega_hat.mask.clone(),
            omega_hat,
            t_hat,
            partials,
            chirp_rate: chirp,
            omega_hat2,
            t_hat2,
            gamma: cfg.gamma,
            eps_div: cfg.eps_div,
            beta,
            time_axis_s: triple.v.time_axis_s.clone(),
            freq_axis_rad_s: triple.v.freq_axis_rad_s.clone(),
        })
    }

    pub fn dim(&self) -> (usize, usize) {
        self.mask.dim()
    }
}

/// `|V| > gamma·max|V|`. All false for a zero grid.
pub fn validity_mask(v: &TfGrid, gamma: f64) -> Array2<bool> {
    let threshold = gamma * v.max_abs();
    v.values.mapv(|z| threshold > 0.0 && z.norm() > threshold)
}

fn check_pair(v: &TfGrid, d: &TfGrid, expect: TfKind) -> Result<()> {
    if v.kind != TfKind::Stft || d.kind != expect {
        return Err(Error::GridMismatch(format!(
            "expected (STFT, {}) grids, got ({}, {})",
            expect.as_str(),
            v.kind.as_str(),
            d.kind.as_str()
        )));
    }
    if !v.same_axes(d) {
        return Err(Error::GridMismatch(
            "STFT and derivative grids have different axes".into(),
        ));
    }
    Ok(())
}

/// `ω̂ = Re(∂ₜV / (i·V))` on the validity mask.
pub fn if_estimate(v: &TfGrid, dvt: &TfGrid, gamma: f64, exec: Execution) -> Result<Field> {
    check_pair(v, dvt, TfKind::DStftT)?;
    let mask = validity_mask(v, gamma);
    let opts = zip_map!(exec, Zip::from(&v.values).and(&dvt.values).and(&mask), |&z, &d, &ok| {
        ok.then(|| (d / (Complex64::i() * z)).re).filter(|w| w.is_finite())
    });
    Ok(Field::from_options(opts))
}

/// `t̂ = t − Im(∂_ωV / V)` on the validity mask, clamped to one record
/// length beyond either end of the time axis.
pub fn gd_estimate(v: &TfGrid, dvw: &TfGrid, gamma: f64, exec: Execution) -> Result<Field> {
    check_pair(v, dvw, TfKind::DStftW)?;
    let mask = validity_mask(v, gamma);
    let t = &v.time_axis_s;
    let (t_min, t_max) = (t[0], t[t.len() - 1]);
    let span = t_max - t_min + v.dt();
    let opts = zip_map!(
        exec,
        Zip::indexed(&v.values).and(&dvw.values).and(&mask),
        |(_, n), &z, &d, &ok| {
            ok.then(|| t[n] - (d / z).im)
                .filter(|x| x.is_finite())
                .map(|x| x.clamp(t_min - span, t_max + span))
        }
    );
    Ok(Field::from_options(opts))
}

/// Finite difference of `f` at `i` along one line using only masked-in
/// samples: centred when both neighbours are valid, second-order one-sided
/// when two consecutive neighbours on one side are, otherwise none.
fn stencil(f: impl Fn(usize) -> Option<f64>, i: usize, len: usize, step: f64) -> Option<f64> {
    let here = f(i)?;
    let prev = |d: usize| if i >= d { f(i - d) } else { None };
    let next = |d: usize| if i + d < len { f(i + d) } else { None };
    if let (Some(a), Some(b)) = (prev(1), next(1)) {
        return Some((b - a) / (2.0 * step));
    }
    if let (Some(b1), Some(b2)) = (next(1), next(2)) {
        return Some((-3.0 * here + 4.0 * b1 - b2) / (2.0 * step));
    }
    if let (Some(a1), Some(a2)) = (prev(1), prev(2)) {
        return Some((3.0 * here - 4.0 * a1 + a2) / (2.0 * step));
    }
    None
}

fn diff(field: &Field, axis: Axis, step: f64, exec: Execution) -> Field {
    let (nk, nn) = field.values.dim();
    let opts = zip_map!(exec, Zip::indexed(&field.mask), |(k, n), _| match axis {
        Axis(0) => stencil(|i| field.get(i, n), k, nk, step),
        _ => stencil(|i| field.get(k, i), n, nn, step),
    });
    Field::from_options(opts)
}

/// The four partial derivatives of the estimator fields.
pub fn field_partials(
    omega_hat: &Field,
    t_hat: &Field,
    time_axis: &[f64],
    freq_axis: &[f64],
    exec: Execution,
) -> Partials {
    let dt = if time_axis.len() > 1 {
        time_axis[1] - time_axis[0]
    } else {
        1.0
    };
    let dw = if freq_axis.len() > 1 {
        freq_axis[1] - freq_axis[0]
    } else {
        1.0
    };
    Partials {
        d_omega_hat_dt: diff(omega_hat, Axis(1), dt, exec),
        d_omega_hat_dw: diff(omega_hat, Axis(0), dw, exec),
        d_t_hat_dt: diff(t_hat, Axis(1), dt, exec),
        d_t_hat_dw: diff(t_hat, Axis(0), dw, exec),
    }
}

/// `c = (∂ω̂/∂t)/(∂t̂/∂t)`, `+∞` where `|∂t̂/∂t| ≤ eps_div`.
pub fn chirp_rate(p: &Partials, eps_div: f64, exec: Execution) -> Field {
    let opts = zip_map!(
        exec,
        Zip::from(&p.d_omega_hat_dt.values)
            .and(&p.d_omega_hat_dt.mask)
            .and(&p.d_t_hat_dt.values)
            .and(&p.d_t_hat_dt.mask),
        |&num, &m1, &den, &m2| (m1 && m2).then(|| if den.abs() > eps_div { num / den } else { f64::INFINITY })
    );
    Field::from_options(opts)
}

/// Chirp rate from whichever ratio is better conditioned. For a linear
/// chirp with `D = 1 + β²c²` the partials are `∂ω̂/∂t = c/D`,
/// `∂t̂/∂t = 1/D`, `∂ω̂/∂ω = β²c²/D` and `∂t̂/∂ω = β²c/D`, so both ratios
/// equal `c` and `|∂t̂/∂t| ≥ |∂ω̂/∂ω|` exactly when `β|c| ≤ 1`. The time
/// ratio is `0/0` on an impulse: where an impulse overlaps another
/// component, `∂ω̂/∂t` vanishes by symmetry at the impulse centre while
/// `∂t̂/∂t` does not, and the time ratio reports `c ≈ 0`. The frequency
/// ratio is well-conditioned there. `+∞` where the chosen denominator is at
/// most `eps_div` (`eps_div·β` for `∂t̂/∂ω`).
pub fn chirp_rate_dual(p: &Partials, beta: f64, eps_div: f64, exec: Execution) -> Field {
    let opts = zip_map!(exec, Zip::indexed(&p.d_omega_hat_dt.mask), |(k, n), _| {
        let a1 = p.d_omega_hat_dt.get(k, n)?;
        let a2 = p.d_omega_hat_dw.get(k, n)?;
        let b1 = p.d_t_hat_dt.get(k, n)?;
        let b2 = p.d_t_hat_dw.get(k, n)?;
        let (num, den, eps) = if b1.abs() >= a2.abs() {
            (a1, b1, eps_div)
        } else {
            (a2, b2, eps_div * beta)
        };
        Some(if den.abs() > eps { num / den } else { f64::INFINITY })
    });
    Field::from_options(opts)
}

/// `ω̂ − (t̂ − t)·slope`; `slope` is `None` where the correction is undefined.
fn if_estimate2_parts(
    omega_hat: &Field,
    t_hat: &Field,
    time_axis: &[f64],
    slope: impl Fn(usize, usize) -> Option<f64> + Sync + Send,
    exec: Execution,
) -> SecondOrder {
    let pairs = zip_map!(
        exec,
        Zip::indexed(&omega_hat.mask).and(&omega_hat.values).and(&t_hat.values),
        |(k, n), &ok, &w, &th| {
            if !ok {
                return (None, false);
            }
            match slope(k, n).map(|c| (th - time_axis[n]) * c).filter(|c| c.is_finite()) {
                Some(c) => (Some(w - c), false),
                None => (Some(w), true),
            }
        }
    );
    split(pairs)
}

/// `t̂ + (ω − ω̂)·inverse_slope`.
fn gd_estimate2_parts(
    omega_hat: &Field,
    t_hat: &Field,
    freq_axis: &[f64],
    inverse_slope: impl Fn(usize, usize) -> Option<f64> + Sync + Send,
    exec: Execution,
) -> SecondOrder {
    let pairs = zip_map!(
        exec,
        Zip::indexed(&t_hat.mask).and(&t_hat.values).and(&omega_hat.values),
        |(k, n), &ok, &th, &w| {
            if !ok {
                return (None, false);
            }
            match inverse_slope(k, n)
                .map(|r| r * (freq_axis[k] - w))
                .filter(|c| c.is_finite())
            {
                Some(c) => (Some(th + c), false),
                None => (Some(th), true),
            }
        }
    );
    split(pairs)
}

fn split(pairs: Array2<(Option<f64>, bool)>) -> SecondOrder {
    SecondOrder {
        fallback: pairs.mapv(|(_, f)| f),
        field: Field::from_options(pairs.mapv(|(v, _)| v)),
    }
}

/// `ω̂⁽²⁾ = ω̂ − (t̂ − t)·(∂ω̂/∂ω)/(∂t̂/∂ω)`; falls back to `ω̂` where
/// `|∂t̂/∂ω| ≤ eps_div·β`.
pub fn if_estimate2(fields: &EstimatorFields, exec: Execution) -> SecondOrder {
    if_estimate2_printed(
        &fields.omega_hat,
        &fields.t_hat,
        &fields.partials,
        &fields.time_axis_s,
        fields.eps_div * fields.beta,
        exec,
    )
}

/// `t̂⁽²⁾ = (∂t̂/∂ω)/(∂ω̂/∂ω)·(ω − ω̂) + t̂`; falls back to `t̂` where
/// `|∂ω̂/∂ω| ≤ eps_div`.
pub fn gd_estimate2(fields: &EstimatorFields, freq_axis: &[f64], exec: Execution) -> SecondOrder {
    gd_estimate2_printed(
        &fields.omega_hat,
        &fields.t_hat,
        &fields.partials,
        freq_axis,
        fields.eps_div,
        exec,
    )
}

fn if_estimate2_printed(
    omega_hat: &Field,
    t_hat: &Field,
    p: &Partials,
    time_axis: &[f64],
    guard: f64,
    exec: Execution,
) -> SecondOrder {
    let slope = |k, n| {
        let (dwdw, dtdw) = (p.d_omega_hat_dw.get(k, n)?, p.d_t_hat_dw.get(k, n)?);
        (dtdw.abs() > guard).then(|| dwdw / dtdw)
    };
    if_estimate2_parts(omega_hat, t_hat, time_axis, slope, exec)
}

fn gd_estimate2_printed(
    omega_hat: &Field,
    t_hat: &Field,
    p: &Partials,
    freq_axis: &[f64],
    guard: f64,
    exec: Execution,
) -> SecondOrder {
    let inverse_slope = |k, n| {
        let (dwdw, dtdw) = (p.d_omega_hat_dw.get(k, n)?, p.d_t_hat_dw.get(k, n)?);
        (dwdw.abs() > guard).then(|| dtdw / dwdw)
    };
    gd_estimate2_parts(omega_hat, t_hat, freq_axis, inverse_slope, exec)
}

/// Second-order estimates with the routed chirp rate `c` standing in for
/// both partial ratios: `ω̂⁽²⁾ = ω̂ − (t̂ − t)·c` and
/// `t̂⁽²⁾ = t̂ + (ω − ω̂)/c`. On a linear chirp every ratio equals `c`, so
/// this is exact wherever the printed forms are. The printed IF correction
/// divides `∂ω̂/∂ω` by `∂t̂/∂ω`, both of which vanish on a harmonic, so
/// noise of relative size ε moves it by about `ε/β²` per second of
/// `t̂ − t`; the dual rate takes the time ratio there instead. Falls back
/// to first order where `c` is masked, and `ω̂⁽²⁾` also where `c = ±∞`.
pub fn second_order_with_rate(
    omega_hat: &Field,
    t_hat: &Field,
    chirp_rate: &Field,
    time_axis: &[f64],
    freq_axis: &[f64],
    exec: Execution,
) -> (SecondOrder, SecondOrder) {
    let omega_hat2 = if_estimate2_parts(omega_hat, t_hat, time_axis, |k, n| chirp_rate.get(k, n), exec);
    let t_hat2 = gd_estimate2_parts(
        omega_hat,
        t_hat,
        freq_axis,
        |k, n| chirp_rate.get(k, n).map(f64::recip),
        exec,
    );
    (omega_hat2, t_hat2)
}

/// Multiplier turning the STFT of a linear chirp at frequency offset
/// `u = ω − ω_ridge` from its IF ridge into the signal value:
/// `√((1 − iβc)/(2πβ))·exp(βu²/(2(1 − iβc)))`. On the ridge (`u = 0`)
/// only the square root remains.
pub fn set_rectifier(beta: f64, c: f64, omega_offset: f64) -> Option<Complex64> {
    if !(c.is_finite() && omega_offset.is_finite()) {
        return None;
    }
    let d = Complex64::new(1.0, -beta * c);
    Some((d / (2.0 * PI * beta)).sqrt() * (beta * omega_offset * omega_offset / (2.0 * d)).exp())
}

/// Multiplier turning the STFT of a linear chirp at pixel `(t, ω)` into
/// its spectrum value `ŝ(ω)`, given the time offset `δ = t_ridge − t` of
/// the GD ridge: `√((i + βc)/(βc))·exp(−iωt)·exp((δ²/(2β))·βc/(βc + i))`.
///
/// On the ridge this is the phase term `exp(iω(b − ω)/c)` with
/// `b = ω − c·t`. For `c = ±∞` (an impulse) it reduces to
/// `exp(−iωt)/g(δ)`. `None` where `|βc| ≤ eps`.
pub fn tet_rectifier(beta: f64, c: f64, omega: f64, t: f64, time_offset: f64, eps: f64) -> Option<Complex64> {
    if (beta * c).abs() <= eps || c.is_nan() || !time_offset.is_finite() {
        return None;
    }
    let spread = time_offset * time_offset / (2.0 * beta);
    let (gain, decay) = if c.is_finite() {
        let bc = beta * c;
        (
            (Complex64::new(bc, 1.0) / bc).sqrt(),
            spread * bc / Complex64::new(bc, 1.0),
        )
    } else {
        (Complex64::new(1.0, 0.0), Complex64::new(spread, 0.0))
    };
    Some(gain * Complex64::from_polar(1.0, -omega * t) * decay.exp())
}

/// Amplitude-rectified STFT for the frequency-direction branch. Pixels
/// without a finite chirp rate are zeroed.
pub fn rectify_for_set(v: &TfGrid, fields: &EstimatorFields, exec: Execution) -> TfGrid {
    let beta = fields.beta;
    let values = zip_map!(exec, Zip::indexed(&v.values), |(k, n), &z| {
        fields
            .chirp_rate
            .get(k, n)
            .and_then(|c| set_rectifier(beta, c, 0.0))
            .map_or(Complex64::new(0.0, 0.0), |r| z * r)
    });
    v.with_values(values, v.kind)
}

/// Amplitude- and phase-rectified STFT for the time-direction branch.
/// Pixels with a near-zero chirp rate are zeroed.
pub fn rectify_for_tet(v: &TfGrid, fields: &EstimatorFields, exec: Execution) -> TfGrid {
    let beta = fields.beta;
    let values = zip_map!(exec, Zip::indexed(&v.values), |(k, n), &z| {
        let Some(c) = fields.chirp_rate.get(k, n) else {
            return Complex64::new(0.0, 0.0);
        };
        tet_rectifier(beta, c, v.freq_axis_rad_s[k], v.time_axis_s[n], 0.0, fields.eps_div)
            .map_or(Complex64::new(0.0, 0.0), |r| z * r)
    });
    v.with_values(values, v.kind)
}
