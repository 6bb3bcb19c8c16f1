//! Time-frequency analysis with a Gaussian-window STFT and coefficient
//! extraction along instantaneous-frequency and group-delay ridges.
//!
//! The chain runs: [`stft::stft_triple`] computes the STFT and its time and
//! frequency derivative transforms; [`estimators::EstimatorFields`] turns
//! them into IF, GD and chirp-rate fields; [`transforms`] keeps the ridge
//! coefficients (SET, TET, the chirp-rate routed STET and its second-order
//! rectified variant STET2); [`reconstruct`] recovers time-domain components
//! from STET2; [`metrics`] measures concentration.
//!
//! [`pipeline::Analysis`] wraps the whole chain for one signal.
//!
//! With the default `parallel` feature every per-frame, per-pixel and
//! per-sweep loop can run on rayon; [`Execution::Sequential`] gives
//! bit-identical output on one thread.

pub mod corpus;
pub mod error;
pub mod estimators;
pub mod exec;
pub mod grid;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod reconstruct;
pub mod signal;
pub mod stft;
pub mod transforms;
pub mod window;

pub use error::{Error, Result};
pub use exec::Execution;
pub use grid::{FrequencyBand, TfGrid, TfKind};
pub use pipeline::{Analysis, AnalysisConfig, Method};
pub use signal::Signal;
pub use window::GaussianWindowSpec;

pub use rustfft::num_complex::Complex64;
