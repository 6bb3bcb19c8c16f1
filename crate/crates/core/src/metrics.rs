//! Concentration metrics, the noise sweep harness and ridge extraction.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{TfGrid, TfKind};
use crate::pipeline::{Analysis, AnalysisConfig, Method};
use crate::signal::{add_noise, Signal};

/// Rényi order used in every report unless overridden.
pub const DEFAULT_RENYI_ORDER: f64 = 3.0;

fn energies(g: &TfGrid, what: &'static str) -> Result<(Vec<f64>, f64)> {
    let e: Vec<f64> = g.values.iter().map(|z| z.norm_sqr()).collect();
    let total: f64 = e.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::ZeroEnergy(what));
    }
    Ok((e, total))
}

/// `H = log2(Σ p^α) / (1 − α)` with `p = |G|²/Σ|G|²`, in bits.
pub fn renyi_entropy(g: &TfGrid, alpha: f64) -> Result<f64> {
    if !(alpha.is_finite() && alpha > 0.0) || alpha == 1.0 {
        return Err(invalid(
            "alpha",
            format!("Rényi order must be positive and != 1, got {alpha}"),
        ));
    }
    let (e, total) = energies(g, "Rényi entropy")?;
    let s: f64 = e.iter().map(|&v| (v / total).powf(alpha)).sum();
    Ok(s.log2() / (1.0 - alpha))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyPoint {
    pub coefficient_count: usize,
    pub energy_fraction: f64,
}

fn sorted_cumulative(g: &TfGrid, what: &'static str) -> Result<Vec<f64>> {
    let (mut e, total) = energies(g, what)?;
    e.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    Ok(e.into_iter()
        .map(|v| {
            acc += v;
            (acc / total).min(1.0)
        })
        .collect())
}

/// Cumulative energy fraction of the largest coefficients, sampled at
/// `points` evenly spaced counts up to the number of nonzero coefficients.
pub fn normalized_energy_curve(g: &TfGrid, points: usize) -> Result<Vec<EnergyPoint>> {
    if points == 0 {
        return Err(invalid("points", "must be at least 1"));
    }
    let cum = sorted_cumulative(g, "normalized energy")?;
    let nonzero = g.nonzero_count();
    let mut out: Vec<EnergyPoint> = (1..=points)
        .map(|i| ((i * nonzero) as f64 / points as f64).ceil().max(1.0) as usize)
        .map(|count| EnergyPoint {
            coefficient_count: count,
            energy_fraction: cum[count - 1],
        })
        .collect();
    out.dedup_by_key(|p| p.coefficient_count);
    if let Some(last) = out.last_mut() {
        last.energy_fraction = 1.0;
    }
    Ok(out)
}

/// Smallest number of coefficients holding at least `fraction` of the energy.
pub fn coefficients_for_fraction(g: &TfGrid, fraction: f64) -> Result<usize> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(invalid("fraction", "must lie in (0, 1]"));
    }
    let cum = sorted_cumulative(g, "normalized energy")?;
    Ok(cum
        .iter()
        .position(|&f| f >= fraction * (1.0 - 1e-12))
        .map_or(cum.len(), |i| i + 1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub method_tag: TfKind,
    pub renyi_order: f64,
    pub renyi_entropy: f64,
    pub coefficients_for_95: usize,
    pub nonzero_coefficients: usize,
    pub normalized_energy: Vec<EnergyPoint>,
}

impl ConcentrationReport {
    pub fn measure(g: &TfGrid, alpha: f64, points: usize) -> Result<Self> {
        Ok(Self {
            method_tag: g.kind,
            renyi_order: alpha,
            renyi_entropy: renyi_entropy(g, alpha)?,
            coefficients_for_95: coefficients_for_fraction(g, 0.95)?,
            nonzero_coefficients: g.nonzero_count(),
            normalized_energy: normalized_energy_curve(g, points)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub snr_db: f64,
    pub seed: u64,
    pub renyi_entropy: f64,
}

/// Seed of sweep iteration `i`, derived from the master seed (splitmix64).
pub fn derive_seed(master: u64, i: usize) -> u64 {
    let mut z = master.wrapping_add((i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// For each SNR: add noise, run `method`, measure the Rényi entropy.
/// Iteration `i` uses noise seed `derive_seed(seed, i)`.
pub fn snr_sweep(
    clean: &Signal,
    snrs_db: &[f64],
    method: Method,
    seed: u64,
    cfg: &AnalysisConfig,
) -> Result<Vec<SweepPoint>> {
    Ok(snr_sweep_methods(clean, snrs_db, &[method], seed, cfg)?
        .into_iter()
        .map(|row| row[0])
        .collect())
}

/// Sweep several methods over the same noisy realisations; one row per SNR,
/// one column per method.
pub fn snr_sweep_methods(
    clean: &Signal,
    snrs_db: &[f64],
    methods: &[Method],
    seed: u64,
    cfg: &AnalysisConfig,
) -> Result<Vec<Vec<SweepPoint>>> {
    if let Some(bad) = snrs_db.iter().find(|s| !(-20.0..=60.0).contains(*s)) {
        return Err(invalid("snr_db", format!("{bad} dB outside [-20, 60]")));
    }
    let rows = cfg
        .execution()
        .map_range(snrs_db.len(), |i| -> Result<Vec<SweepPoint>> {
            let snr_db = snrs_db[i];
            let s = derive_seed(seed, i);
            let noisy = add_noise(clean, snr_db, s)?;
            let analysis = Analysis::run(&noisy, cfg)?;
            methods
                .iter()
                .map(|&m| {
                    Ok(SweepPoint {
                        snr_db,
                        seed: s,
                        renyi_entropy: renyi_entropy(&analysis.transform(m)?.grid, DEFAULT_RENYI_ORDER)?,
                    })
                })
                .collect()
        });
    rows.into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    /// One frequency per time frame.
    TimeIndexed,
    /// One time per frequency row.
    FrequencyIndexed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RidgePoint {
    pub time_s: f64,
    pub omega_rad_s: f64,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeTrack {
    pub orientation: Orientation,
    pub points: Vec<RidgePoint>,
    /// Chosen index on the free axis, one per point.
    pub indices: Vec<usize>,
}

/// Lower envelope of parabolas: `d[q] = min_p a(q−p)² + f[p]` and its argmin.
fn distance_transform(f: &[f64], a: f64) -> (Vec<f64>, Vec<usize>) {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0f64; n + 1];
    let mut k = 0usize;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    let key = |p: usize| f[p] + a * (p * p) as f64;
    for q in 1..n {
        let s = loop {
            let p = v[k];
            let s = (key(q) - key(p)) / (2.0 * a * (q - p) as f64);
            if s <= z[k] && k > 0 {
                k -= 1;
            } else {
                break s;
            }
        };
        if s <= z[k] {
            // k == 0 and the new parabola dominates everywhere
            v[0] = q;
            z[1] = f64::INFINITY;
            continue;
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    let mut d = vec![0.0; n];
    let mut arg = vec![0usize; n];
    k = 0;
    for q in 0..n {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dq = q as f64 - p as f64;
        d[q] = a * dq * dq + f[p];
        arg[q] = p;
    }
    (d, arg)
}

/// Maximum-energy path by dynamic programming:
/// maximise `Σ log|G| − penalty·(index jump)²` along the orientation axis.
///
/// The track spans the first to last index of the orientation axis that
/// holds any nonzero coefficient. Zero coefficients score as
/// `log(1e-12·max|G|)`.
pub fn extract_ridge(g: &TfGrid, orientation: Orientation, smoothness_penalty: f64) -> Result<RidgeTrack> {
    if !(smoothness_penalty.is_finite() && smoothness_penalty >= 0.0) {
        return Err(invalid("smoothness_penalty", "must be finite and non-negative"));
    }
    let max = g.max_abs();
    if max <= 0.0 {
        return Err(Error::ZeroEnergy("ridge extraction"));
    }
    let floor = 1e-12 * max;
    let (len, width) = match orientation {
        Orientation::TimeIndexed => (g.n_time(), g.n_freq()),
        Orientation::FrequencyIndexed => (g.n_freq(), g.n_time()),
    };
    let at = |i: usize, j: usize| match orientation {
        Orientation::TimeIndexed => g.values[[j, i]],
        Orientation::FrequencyIndexed => g.values[[i, j]],
    };
    let occupied: Vec<usize> = (0..len)
        .filter(|&i| (0..width).any(|j| at(i, j).norm_sqr() > 0.0))
        .collect();
    let (first, last) = (occupied[0], *occupied.last().unwrap());
    let score = |i: usize| -> Vec<f64> { (0..width).map(|j| at(i, j).norm().max(floor).ln()).collect() };

    // cost = −score; minimise cost + penalty·jump²
    let mut acc: Vec<f64> = score(first).iter().map(|s| -s).collect();
    let mut back: Vec<Vec<usize>> = Vec::with_capacity(last - first);
    for i in first + 1..=last {
        let (best, arg) = if smoothness_penalty > 0.0 {
            distance_transform(&acc, smoothness_penalty)
        } else {
            let j = argmin(&acc);
            (vec![acc[j]; width], vec![j; width])
        };
        acc = score(i).iter().zip(&best).map(|(s, b)| b - s).collect();
        back.push(arg);
    }
    let mut path = vec![argmin(&acc)];
    for arg in back.iter().rev() {
        path.push(arg[*path.last().unwrap()]);
    }
    path.reverse();

    let points = path
        .iter()
        .enumerate()
        .map(|(off, &j)| {
            let i = first + off;
            let (k, n) = match orientation {
                Orientation::TimeIndexed => (j, i),
                Orientation::FrequencyIndexed => (i, j),
            };
            RidgePoint {
                time_s: g.time_axis_s[n],
                omega_rad_s: g.freq_axis_rad_s[k],
                magnitude: g.values[[k, n]].norm(),
            }
        })
        .collect();
    Ok(RidgeTrack {
        orientation,
        points,
        indices: path,
    })
}

fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x < v[best] {
            best = i;
        }
    }
    best
}
