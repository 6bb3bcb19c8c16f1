//! Synthetic-signal recipes such as `A=1,b=62.8,c=628`.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use serde::Serialize;
use stet::signal::{mix, synth_harmonic, synth_impulse, synth_lfm};
use stet::Signal;

use crate::error::CliError;

/// One synthetic component, in physical units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Component {
    /// `A·exp(i·omega·t)`.
    Tone { amplitude: f64, omega_rad_s: f64 },
    /// `A·exp(i·(a + b·t + c·t²/2))`.
    Lfm {
        amplitude: f64,
        phase: f64,
        b_rad_s: f64,
        c_rad_s2: f64,
    },
    /// Discrete impulse of weight `A` at the sample nearest `t0`.
    Impulse { amplitude: f64, t0_s: f64 },
}

fn fields(kind: &str, spec: &str, allowed: &[&str]) -> Result<BTreeMap<String, f64>, CliError> {
    let mut out = BTreeMap::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, raw) = part
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("--{kind}: `{part}` is not key=value")))?;
        let key = key.trim();
        if !allowed.contains(&key) {
            return Err(CliError::config(format!(
                "--{kind}: unknown key `{key}` (expected {})",
                allowed.join("|")
            )));
        }
        let value: f64 = raw
            .trim()
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| CliError::config(format!("--{kind}: `{raw}` is not a finite number")))?;
        if out.insert(key.to_owned(), value).is_some() {
            return Err(CliError::config(format!("--{kind}: `{key}` given twice")));
        }
    }
    Ok(out)
}

fn required(kind: &str, map: &BTreeMap<String, f64>, key: &str) -> Result<f64, CliError> {
    map.get(key)
        .copied()
        .ok_or_else(|| CliError::config(format!("--{kind}: missing `{key}`")))
}

impl Component {
    /// `A` (default 1) with `w` in rad/s or `f` in Hz.
    pub fn parse_tone(spec: &str) -> Result<Self, CliError> {
        let m = fields("tone", spec, &["A", "w", "f"])?;
        let omega_rad_s = match (m.get("w"), m.get("f")) {
            (Some(&w), None) => w,
            (None, Some(&f)) => TAU * f,
            _ => return Err(CliError::config("--tone: give exactly one of `w` (rad/s) or `f` (Hz)")),
        };
        Ok(Component::Tone {
            amplitude: m.get("A").copied().unwrap_or(1.0),
            omega_rad_s,
        })
    }

    /// `A` (default 1), phase `a` (default 0), `b` in rad/s, `c` in rad/s².
    pub fn parse_lfm(spec: &str) -> Result<Self, CliError> {
        let m = fields("lfm", spec, &["A", "a", "b", "c"])?;
        Ok(Component::Lfm {
            amplitude: m.get("A").copied().unwrap_or(1.0),
            phase: m.get("a").copied().unwrap_or(0.0),
            b_rad_s: required("lfm", &m, "b")?,
            c_rad_s2: required("lfm", &m, "c")?,
        })
    }

    /// `A` (default 1) and `t0` in s.
    pub fn parse_impulse(spec: &str) -> Result<Self, CliError> {
        let m = fields("impulse", spec, &["A", "t0"])?;
        Ok(Component::Impulse {
            amplitude: m.get("A").copied().unwrap_or(1.0),
            t0_s: required("impulse", &m, "t0")?,
        })
    }

    fn synth(self, duration_s: f64, fs: f64) -> stet::Result<Signal> {
        match self {
            Component::Tone { amplitude, omega_rad_s } => synth_harmonic(amplitude, omega_rad_s, duration_s, fs),
            Component::Lfm {
                amplitude,
                phase,
                b_rad_s,
                c_rad_s2,
            } => synth_lfm(amplitude, phase, b_rad_s, c_rad_s2, duration_s, fs),
            Component::Impulse { amplitude, t0_s } => synth_impulse(amplitude, t0_s, duration_s, fs),
        }
    }
}

/// Components summed over one record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Recipe {
    pub components: Vec<Component>,
    pub fs: f64,
    pub duration_s: f64,
}

impl Recipe {
    pub fn signal(&self) -> Result<Signal, CliError> {
        let parts = self
            .components
            .iter()
            .map(|c| c.synth(self.duration_s, self.fs))
            .collect::<stet::Result<Vec<_>>>()?;
        Ok(mix(&parts)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lfm_recipe_parses_with_defaults() {
        let c = Component::parse_lfm("A=2, b=62.8,c=628").unwrap();
        assert_eq!(
            c,
            Component::Lfm {
                amplitude: 2.0,
                phase: 0.0,
                b_rad_s: 62.8,
                c_rad_s2: 628.0
            }
        );
    }

    #[test]
    fn tone_accepts_hertz_or_radians() {
        let Component::Tone { omega_rad_s, .. } = Component::parse_tone("f=10").unwrap() else {
            panic!()
        };
        assert!((omega_rad_s - TAU * 10.0).abs() < 1e-12);
        assert!(Component::parse_tone("w=1,f=2").is_err());
        assert!(Component::parse_tone("A=1").is_err());
    }

    #[test]
    fn malformed_recipes_are_config_errors() {
        for bad in ["b=1", "b=1,c=x", "b=1,c=2,z=3", "b=1,b=2,c=3", "b"] {
            let e = Component::parse_lfm(bad).unwrap_err();
            assert_eq!(e.code(), 2, "{bad}");
        }
        assert!(Component::parse_impulse("A=1").is_err());
    }
}
