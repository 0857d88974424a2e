//! Pseudo-spectral solvers for the h-model and z-model of
//! Rayleigh-Taylor and Kelvin-Helmholtz interface dynamics on the
//! periodic interval `[-π, π)`.
//!
//! The layers build on each other: [`spectral`] provides the grid, the
//! transforms and the Fourier multipliers; [`models`] evaluates the
//! right-hand sides; [`timestepper`] integrates them with adaptive RKF45;
//! [`initcond`] and [`diagnostics`] produce initial data and measurements;
//! [`experiments`] ties everything into declarative, reproducible runs.

pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod initcond;
pub mod models;
pub mod spectral;
pub mod timestepper;

pub use diagnostics::{EnergyRecord, StabilityReport};
pub use error::{DiagnosticsError, GridError, InitError, ModelError, ParamError};
pub use experiments::{
    preset, run, run_ensemble, run_seed, ConfigError, EnsembleResult, ExperimentConfig,
    ExperimentResult, RunStatus, TimeSeriesRecord, PRESET_NAMES,
};
pub use initcond::{Phase, RandomTrigSpec};
pub use models::{HState, ModelKind, PhysParams, ViscosityConfig, ZState};
pub use spectral::{PeriodicGrid, RealField, Spectral, SpectralCoeffs};
pub use timestepper::{IntegrationError, StepController, StepStats, Trajectory};
