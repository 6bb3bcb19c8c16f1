//! End-to-end analysis: STFT, estimator fields, and any of the transforms
//! computed from them on demand.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::estimators::{EstimatorConfig, EstimatorFields};
use crate::exec::Execution;
use crate::grid::{FrequencyBand, TfGrid};
use crate::reconstruct::{reconstruct, ReconstructionResult};
use crate::signal::Signal;
use crate::stft::{stft_triple, StftConfig, StftTriple};
use crate::transforms::{
    improved_stet_transform, set_transform, stet_transform, tet_transform, Diagnostics, ExtractionConfig,
    ResolvedExtraction,
};
use crate::window::GaussianWindowSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Stft,
    Set,
    Tet,
    Stet,
    Stet2,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Stft, Method::Set, Method::Tet, Method::Stet, Method::Stet2];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Stft => "stft",
            Method::Set => "set",
            Method::Tet => "tet",
            Method::Stet => "stet",
            Method::Stet2 => "stet2",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                invalid(
                    "method",
                    format!("unknown method `{s}` (expected stft|set|tet|stet|stet2)"),
                )
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub window: GaussianWindowSpec,
    pub stft: StftConfig,
    pub estimators: EstimatorConfig,
    pub extraction: ExtractionConfig,
}

impl AnalysisConfig {
    pub fn new(window: GaussianWindowSpec, n_fft: usize) -> Self {
        Self {
            window,
            stft: StftConfig::new(n_fft),
            estimators: EstimatorConfig::default(),
            extraction: ExtractionConfig::default(),
        }
    }

    pub fn with_band(mut self, band: FrequencyBand) -> Self {
        self.stft.band = band;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.estimators.gamma = gamma;
        self
    }

    pub fn with_boundary(mut self, boundary: Option<f64>) -> Self {
        self.extraction.boundary = boundary;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.stft.execution = execution;
        self.estimators.execution = execution;
        self.extraction.execution = execution;
        self
    }

    pub fn execution(&self) -> Execution {
        self.stft.execution
    }
}

/// Output of one method: the grid, plus routing for the combined transforms.
#[derive(Debug, Clone)]
pub struct MethodOutput {
    pub grid: TfGrid,
    pub branch: Option<Array2<i8>>,
    pub diagnostics: Option<Diagnostics>,
}

/// STFT triple and estimator fields of one signal.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub config: AnalysisConfig,
    pub triple: StftTriple,
    pub fields: EstimatorFields,
}

impl Analysis {
    pub fn run(signal: &Signal, config: &AnalysisConfig) -> Result<Self> {
        if !(config.estimators.gamma > 0.0 && config.estimators.gamma < 1.0) {
            return Err(invalid(
                "gamma",
                format!("must lie in (0, 1), got {}", config.estimators.gamma),
            ));
        }
        let triple = stft_triple(signal, &config.window, &config.stft)?;
        let fields = EstimatorFields::compute(&triple, &config.estimators)?;
        Ok(Self {
            config: *config,
            triple,
            fields,
        })
    }

    pub fn stft(&self) -> &TfGrid {
        &self.triple.v
    }

    pub fn resolved_extraction(&self) -> Result<ResolvedExtraction> {
        self.config.extraction.resolve(&self.triple.v)
    }

    pub fn set(&self) -> Result<TfGrid> {
        set_transform(&self.triple.v, &self.fields, &self.config.extraction)
    }

    pub fn tet(&self) -> Result<TfGrid> {
        tet_transform(&self.triple.v, &self.fields, &self.config.extraction)
    }

    pub fn stet(&self) -> Result<crate::transforms::Extraction> {
        stet_transform(&self.triple.v, &self.fields, &self.config.extraction)
    }

    pub fn stet2(&self) -> Result<crate::transforms::Extraction> {
        improved_stet_transform(&self.triple.v, &self.fields, &self.config.extraction)
    }

    pub fn transform(&self, method: Method) -> Result<MethodOutput> {
        let plain = |grid| MethodOutput {
            grid,
            branch: None,
            diagnostics: None,
        };
        Ok(match method {
            Method::Stft => plain(self.triple.v.clone()),
            Method::Set => plain(self.set()?),
            Method::Tet => plain(self.tet()?),
            Method::Stet | Method::Stet2 => {
                let e = if method == Method::Stet {
                    self.stet()?
                } else {
                    self.stet2()?
                };
                MethodOutput {
                    grid: e.grid,
                    branch: Some(e.branch),
                    diagnostics: Some(e.diagnostics),
                }
            }
        })
    }

    pub fn reconstruct(&self) -> Result<ReconstructionResult> {
        reconstruct(&self.stet2()?)
    }
}
