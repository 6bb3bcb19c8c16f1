//! Extraction transforms as per-pixel keep/discard rules over the STFT grid.
//!
//! Coefficients are kept in place, never moved. The frequency-direction rule
//! keeps a pixel when its IF estimate falls within half a bin of the pixel's
//! own frequency; the time-direction rule keeps it when its GD estimate
//! falls within half a sample of the pixel's own time. The combined
//! transforms route every pixel to one rule by comparing its chirp rate to
//! the boundary `β^(-2/3)`.

use std::collections::BTreeSet;

use ndarray::{Array2, Axis, Zip};
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::estimators::{set_rectifier, tet_rectifier, EstimatorFields};
use crate::exec::{zip_map, Execution};
use crate::grid::{TfGrid, TfKind};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ExtractionConfig {
    /// Chirp-rate boundary in rad/s²; `β^(-2/3)` when unset.
    pub boundary: Option<f64>,
    /// Keep band half-width in rad/s; `Δω/2` when unset.
    pub freq_tolerance: Option<f64>,
    /// Keep band half-width in s; `Δt/2` when unset.
    pub time_tolerance: Option<f64>,
    /// Majority-vote the branch map over each 3×3 neighbourhood.
    pub smooth_branches: bool,
    /// Keep every pixel that passes the ridge test instead of only the
    /// strongest crossing within `3σ`; see [`thin_crossings`].
    pub keep_all_crossings: bool,
    pub execution: Execution,
}

/// Extraction parameters with every default filled in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolvedExtraction {
    pub boundary: f64,
    pub freq_tolerance: f64,
    pub time_tolerance: f64,
    pub smooth_branches: bool,
    pub keep_all_crossings: bool,
}

impl ExtractionConfig {
    pub fn resolve(&self, v: &TfGrid) -> Result<ResolvedExtraction> {
        let boundary = self.boundary.unwrap_or_else(|| v.window.chirp_boundary());
        let freq_tolerance = self.freq_tolerance.unwrap_or(v.delta_omega() / 2.0);
        let time_tolerance = self.time_tolerance.unwrap_or(v.dt() / 2.0);
        if !(boundary.is_finite() && boundary > 0.0) {
            return Err(invalid("boundary", format!("must be positive, got {boundary}")));
        }
        if !(freq_tolerance > 0.0 && freq_tolerance <= v.delta_omega() * (1.0 + 1e-12)) {
            return Err(invalid("freq_tolerance", "must lie in (0, Δω]"));
        }
        if !(time_tolerance > 0.0 && time_tolerance <= v.dt() * (1.0 + 1e-12)) {
            return Err(invalid("time_tolerance", "must lie in (0, Δt]"));
        }
        Ok(ResolvedExtraction {
            boundary,
            freq_tolerance,
            time_tolerance,
            smooth_branches: self.smooth_branches,
            keep_all_crossings: self.keep_all_crossings,
        })
    }
}

/// Branch labels as exported: 0 = frequency rule, 1 = time rule, −1 = masked.
pub const BRANCH_SET: i8 = 0;
pub const BRANCH_TET: i8 = 1;
pub const BRANCH_MASKED: i8 = -1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    pub routed_set: usize,
    pub routed_tet: usize,
    pub kept_set: usize,
    pub kept_tet: usize,
    /// Pixels whose second-order estimate reverted to first order.
    pub fallback_if: usize,
    pub fallback_gd: usize,
}

/// A combined transform together with its per-pixel routing.
#[derive(Debug, Clone)]
pub struct Extraction {
    pub grid: TfGrid,
    pub branch: Array2<i8>,
    pub config: ResolvedExtraction,
    pub diagnostics: Diagnostics,
}

impl Extraction {
    /// Grid restricted to one branch.
    pub fn branch_grid(&self, label: i8) -> TfGrid {
        let values = Zip::from(&self.grid.values).and(&self.branch).map_collect(|&z, &b| {
            if b == label {
                z
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        self.grid.with_values(values, self.grid.kind)
    }
}

fn check(v: &TfGrid, fields: &EstimatorFields) -> Result<()> {
    if v.kind != TfKind::Stft {
        return Err(Error::GridMismatch(format!(
            "expected an STFT grid, got {}",
            v.kind.as_str()
        )));
    }
    if v.values.dim() != fields.dim() || v.freq_axis_rad_s != fields.freq_axis_rad_s {
        return Err(Error::GridMismatch(
            "estimator fields were computed on a different grid".into(),
        ));
    }
    Ok(())
}

fn keep_if(exec: Execution, v: &TfGrid, rule: impl Fn(usize, usize) -> bool + Sync + Send) -> Array2<Complex64> {
    zip_map!(exec, Zip::indexed(&v.values), |(k, n), &z| if rule(k, n) {
        z
    } else {
        Complex64::new(0.0, 0.0)
    })
}

fn set_rule(fields: &EstimatorFields, tol: f64, k: usize, n: usize) -> bool {
    fields
        .omega_hat
        .get(k, n)
        .is_some_and(|w| (w - fields.freq_axis_rad_s[k]).abs() <= tol)
}

fn tet_rule(fields: &EstimatorFields, tol: f64, k: usize, n: usize) -> bool {
    fields
        .t_hat
        .get(k, n)
        .is_some_and(|t| (t - fields.time_axis_s[n]).abs() <= tol)
}

/// Frequency-direction extraction: keep `V` where `|ω̂ − ω| ≤ Δω/2`.
pub fn set_transform(v: &TfGrid, fields: &EstimatorFields, cfg: &ExtractionConfig) -> Result<TfGrid> {
    check(v, fields)?;
    let r = cfg.resolve(v)?;
    let values = keep_if(cfg.execution, v, |k, n| set_rule(fields, r.freq_tolerance, k, n));
    Ok(v.with_values(values, TfKind::Set))
}

/// Time-direction extraction: keep `V` where `|t̂ − t| ≤ Δt/2`.
pub fn tet_transform(v: &TfGrid, fields: &EstimatorFields, cfg: &ExtractionConfig) -> Result<TfGrid> {
    check(v, fields)?;
    let r = cfg.resolve(v)?;
    let values = keep_if(cfg.execution, v, |k, n| tet_rule(fields, r.time_tolerance, k, n));
    Ok(v.with_values(values, TfKind::Tet))
}

/// Routes each pixel with a chirp-rate estimate: `|c| ≤ boundary` goes to
/// the frequency rule, everything else (including `+∞`) to the time rule.
pub fn branch_map(fields: &EstimatorFields, boundary: f64, smooth: bool) -> Array2<i8> {
    let raw = Zip::from(&fields.chirp_rate.values)
        .and(&fields.chirp_rate.mask)
        .map_collect(|&c, &ok| match ok {
            false => BRANCH_MASKED,
            true if c.abs() <= boundary => BRANCH_SET,
            true => BRANCH_TET,
        });
    if smooth {
        majority_filter(&raw)
    } else {
        raw
    }
}

fn majority_filter(raw: &Array2<i8>) -> Array2<i8> {
    let (nk, nn) = raw.dim();
    Array2::from_shape_fn((nk, nn), |(k, n)| {
        let own = raw[[k, n]];
        if own == BRANCH_MASKED {
            return own;
        }
        let (mut set, mut tet) = (0, 0);
        for kk in k.saturating_sub(1)..(k + 2).min(nk) {
            for nn2 in n.saturating_sub(1)..(n + 2).min(nn) {
                match raw[[kk, nn2]] {
                    BRANCH_SET => set += 1,
                    BRANCH_TET => tet += 1,
                    _ => {}
                }
            }
        }
        match set.cmp(&tet) {
            std::cmp::Ordering::Greater => BRANCH_SET,
            std::cmp::Ordering::Less => BRANCH_TET,
            std::cmp::Ordering::Equal => own,
        }
    })
}

fn tally(branch: &Array2<i8>, values: &Array2<Complex64>) -> Diagnostics {
    let mut d = Diagnostics::default();
    Zip::from(branch).and(values).for_each(|&b, z| {
        let kept = z.norm_sqr() > 0.0;
        match b {
            BRANCH_SET => {
                d.routed_set += 1;
                d.kept_set += usize::from(kept);
            }
            BRANCH_TET => {
                d.routed_tet += 1;
                d.kept_tet += usize::from(kept);
            }
            _ => {}
        }
    });
    d
}

/// Suppression radius of [`thin_crossings`] in window standard deviations
/// (`σ` in time, `1/σ` in frequency). Two Gaussian windows this far apart
/// overlap by `e^{-9/4} ≈ 0.1`, so closer crossings belong to interfering
/// components.
pub const CROSSING_RADIUS_SIGMAS: f64 = 3.0;

/// Keeps, along each line of one axis, only kept `label` pixels that are
/// the strongest within `radius` steps (non-maximum suppression by `|V|`).
///
/// Lines are rows (`Axis(1)`, time) or columns (`Axis(0)`, frequency).
/// Pixels are visited from strongest to weakest and dropped when a kept
/// pixel already lies within `radius`. One component crosses its own ridge
/// once per line, so extra crossings within a window width come from
/// interference with a neighbour, and the crossing with the largest `|V|`
/// is the one the component dominates. Summing every crossing instead adds
/// the same spectral sample several times. Components further apart than
/// `radius` keep a crossing each, whatever lies between them.
pub fn thin_crossings(
    values: &mut Array2<Complex64>,
    strength: &TfGrid,
    branch: &Array2<i8>,
    label: i8,
    axis: Axis,
    radius: usize,
) {
    let zero = Complex64::new(0.0, 0.0);
    let strength = &strength.values;
    for ((mut line, b), s) in values
        .lanes_mut(axis)
        .into_iter()
        .zip(branch.lanes(axis))
        .zip(strength.lanes(axis))
    {
        let mut candidates: Vec<usize> = (0..line.len()).filter(|&i| b[i] == label && line[i] != zero).collect();
        // stable sort: ties keep the earlier index
        candidates.sort_by(|&x, &y| s[y].norm_sqr().total_cmp(&s[x].norm_sqr()));
        let mut kept = BTreeSet::new();
        for i in candidates {
            if kept.range(i.saturating_sub(radius)..=i + radius).next().is_some() {
                line[i] = zero;
            } else {
                kept.insert(i);
            }
        }
    }
}

/// First-order combined transform: frequency rule below the boundary,
/// time rule above it, summed.
pub fn stet_transform(v: &TfGrid, fields: &EstimatorFields, cfg: &ExtractionConfig) -> Result<Extraction> {
    check(v, fields)?;
    let r = cfg.resolve(v)?;
    let branch = branch_map(fields, r.boundary, r.smooth_branches);
    let values = keep_if(cfg.execution, v, |k, n| match branch[[k, n]] {
        BRANCH_SET => set_rule(fields, r.freq_tolerance, k, n),
        BRANCH_TET => tet_rule(fields, r.time_tolerance, k, n),
        _ => false,
    });
    let diagnostics = tally(&branch, &values);
    Ok(Extraction {
        grid: v.with_values(values, TfKind::Stet),
        branch,
        config: r,
        diagnostics,
    })
}

/// Second-order combined transform. The frequency branch keeps the
/// amplitude-rectified coefficient where `|ω̂⁽²⁾ − ω| ≤ Δω/2`; the time
/// branch keeps the amplitude- and phase-rectified coefficient where
/// `|t̂⁽²⁾ − t| ≤ Δt/2`. Kept values then read `s(t)` and `ŝ(ω)`
/// respectively. Rectifiers are evaluated at the pixel's own offset from
/// the second-order ridge, which makes them exact for linear chirps
/// anywhere inside the tolerance band. A smoothed branch map can route a
/// pixel against its own `c`; the rectifiers then see `c` clamped to the
/// branch's side of the boundary, which keeps the time-rule gain bounded.
/// Unless `keep_all_crossings` is set, each branch then keeps only the
/// strongest crossing within `3σ` along its own axis ([`thin_crossings`]).
pub fn improved_stet_transform(v: &TfGrid, fields: &EstimatorFields, cfg: &ExtractionConfig) -> Result<Extraction> {
    check(v, fields)?;
    let r = cfg.resolve(v)?;
    let branch = branch_map(fields, r.boundary, r.smooth_branches);
    let beta = fields.beta;
    let zero = Complex64::new(0.0, 0.0);
    let mut values = zip_map!(cfg.execution, Zip::indexed(&v.values).and(&branch), |(k, n), &z, &b| {
        let Some(c) = fields.chirp_rate.get(k, n) else {
            return zero;
        };
        match b {
            BRANCH_SET => {
                let Some(w2) = fields.omega_hat2.field.get(k, n) else {
                    return zero;
                };
                let offset = fields.freq_axis_rad_s[k] - w2;
                if offset.abs() > r.freq_tolerance {
                    return zero;
                }
                set_rectifier(beta, c.clamp(-r.boundary, r.boundary), offset).map_or(zero, |rect| z * rect)
            }
            BRANCH_TET => {
                let Some(t2) = fields.t_hat2.field.get(k, n) else {
                    return zero;
                };
                let t = fields.time_axis_s[n];
                if (t2 - t).abs() > r.time_tolerance {
                    return zero;
                }
                let c = if c.abs() < r.boundary {
                    r.boundary.copysign(c)
                } else {
                    c
                };
                tet_rectifier(beta, c, fields.freq_axis_rad_s[k], t, t2 - t, fields.eps_div)
                    .map_or(zero, |rect| z * rect)
            }
            _ => zero,
        }
    });
    if !r.keep_all_crossings {
        let sigma = v.window.sigma_s();
        let radius_t = (CROSSING_RADIUS_SIGMAS * sigma * v.fs()).ceil() as usize;
        let radius_k = (CROSSING_RADIUS_SIGMAS / (sigma * v.delta_omega())).ceil() as usize;
        thin_crossings(&mut values, v, &branch, BRANCH_TET, Axis(1), radius_t);
        thin_crossings(&mut values, v, &branch, BRANCH_SET, Axis(0), radius_k);
    }
    let mut diagnostics = tally(&branch, &values);
    Zip::from(&branch)
        .and(&fields.omega_hat2.fallback)
        .and(&fields.t_hat2.fallback)
        .for_each(|&b, &fi, &fg| {
            diagnostics.fallback_if += usize::from(b == BRANCH_SET && fi);
            diagnostics.fallback_gd += usize::from(b == BRANCH_TET && fg);
        });
    Ok(Extraction {
        grid: v.with_values(values, TfKind::Stet2),
        branch,
        config: r,
        diagnostics,
    })
}
