//! Declarative experiment configurations, the built-in scenario presets,
//! and the single-run and ensemble drivers.
//!
//! A configuration is a TOML document; unknown keys are rejected so that a
//! misspelled physics parameter never silently falls back to a default.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::ops::ControlFlow;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostics::{amplitude_and_width, asymptotic_gap, curve_spectrum, energy_record};
use crate::error::{InitError, ModelError, ParamError};
use crate::initcond::{random_trig, sine_mode, tilted_interface, Phase, RandomTrigSpec};
use crate::models::{Dynamics, HOptions, ModelKind, PhysParams, ViscosityConfig};
use crate::spectral::{PeriodicGrid, RealField, Spectral};
use crate::timestepper::{integrate_observed, Event, IntegrationError, StepController, StepStats};

/// Acceleration of the rocket rig in simulation units; negative because it
/// acts upwards.
pub const ROCKET_RIG_G: f64 = -9.8 * 2.0 * PI / 0.3;

/// Growth coefficient of the reference mixing law `δ A g t²`.
pub const MIXING_DELTA: f64 = 0.06;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Init(#[from] InitError),
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn invalid(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_string(),
        reason: reason.into(),
    }
}

/// One scalar field of the initial data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Zero,
    Constant {
        value: f64,
    },
    /// `amp·sin(kα)` or `amp·cos(kα)`.
    Mode {
        k: i64,
        amp: f64,
        phase: Phase,
    },
    /// Hilbert transform of a mode, e.g. `2H sin(2α)`.
    HilbertMode {
        k: i64,
        amp: f64,
        phase: Phase,
    },
    /// Seeded Gaussian trigonometric polynomial; the seed comes from the run.
    RandomTrig {
        n: usize,
        target_l2: f64,
        #[serde(default)]
        stream: u64,
    },
    Tilted {
        theta_deg: f64,
    },
    Sum {
        terms: Vec<FieldSpec>,
    },
    /// Grid samples given inline or read from a whitespace/comma separated file.
    Tabulated {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        values: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<PathBuf>,
    },
}

impl FieldSpec {
    fn uses_seed(&self) -> bool {
        match self {
            FieldSpec::RandomTrig { .. } => true,
            FieldSpec::Sum { terms } => terms.iter().any(FieldSpec::uses_seed),
            _ => false,
        }
    }

    pub fn build(&self, sp: &Spectral, seed: u64) -> Result<RealField, ConfigError> {
        let grid = sp.grid();
        Ok(match self {
            FieldSpec::Zero => RealField::zeros(grid),
            FieldSpec::Constant { value } => RealField::constant(grid, *value),
            FieldSpec::Mode { k, amp, phase } => sine_mode(grid, *k, *amp, *phase)?,
            FieldSpec::HilbertMode { k, amp, phase } => {
                sp.hilbert(&sine_mode(grid, *k, *amp, *phase)?)
            }
            FieldSpec::RandomTrig {
                n,
                target_l2,
                stream,
            } => random_trig(
                grid,
                &RandomTrigSpec {
                    n_modes_used: *n,
                    target_l2: *target_l2,
                    seed,
                    stream: *stream,
                },
            )?,
            FieldSpec::Tilted { theta_deg } => tilted_interface(grid, theta_deg.to_radians())?,
            FieldSpec::Sum { terms } => {
                let mut acc = RealField::zeros(grid);
                for t in terms {
                    acc = acc.add(&t.build(sp, seed)?);
                }
                acc
            }
            FieldSpec::Tabulated { values, path } => {
                let values = match (values, path) {
                    (Some(v), None) => v.clone(),
                    (None, Some(p)) => read_samples(p)?,
                    _ => {
                        return Err(invalid(
                            "init.tabulated",
                            "give exactly one of `values` or `path`",
                        ))
                    }
                };
                RealField::new(grid, values).map_err(InitError::from)?
            }
        })
    }
}

fn read_samples(path: &PathBuf) -> Result<Vec<f64>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.clone(),
        source,
    })?;
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| invalid("init.tabulated.path", format!("`{s}` is not a number")))
        })
        .collect()
}

/// Initial data; the variant must match the model's state layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitSpec {
    /// `(h, ϖ)`
    Height { h: FieldSpec, omega: FieldSpec },
    /// `(h, h_t)`
    HeightVelocity { h: FieldSpec, ht: FieldSpec },
    /// `(δz₁, z₂, ϖ)`
    Curve {
        dz1: FieldSpec,
        z2: FieldSpec,
        omega: FieldSpec,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    Timeseries,
    Snapshots,
    Spectrum,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_outputs() -> Vec<OutputKind> {
    vec![OutputKind::Timeseries, OutputKind::Snapshots]
}

fn default_blowup() -> f64 {
    1e6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub model: ModelKind,
    pub grid_n: usize,
    pub phys: PhysParams,
    #[serde(default)]
    pub visc: ViscosityConfig,
    /// Keep the cubic term that the discretized h-model drops.
    #[serde(default)]
    pub cubic: bool,
    pub t_end: f64,
    /// Uniform diagnostic sampling step, in addition to `sample_times`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_interval: Option<f64>,
    #[serde(default)]
    pub sample_times: Vec<f64>,
    /// Times at which full fields (and spectra) are kept.
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<OutputKind>,
    /// `|h|` or `|z₂|` beyond which the run is stopped as a blow-up.
    #[serde(default = "default_blowup")]
    pub blowup_amplitude: f64,
    #[serde(default)]
    pub stepper: StepController,
    pub init: InitSpec,
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(s).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("experiment configs always serialize")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.grid_n < 4 || !self.grid_n.is_power_of_two() {
            return Err(invalid(
                "grid_n",
                format!("must be a power of two >= 4, got {}", self.grid_n),
            ));
        }
        self.phys.validate()?;
        self.visc.validate()?;
        self.stepper.validate().map_err(|r| invalid("stepper", r))?;
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(invalid("t_end", "must be positive and finite"));
        }
        if let Some(dt) = self.sample_interval {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(invalid("sample_interval", "must be positive"));
            }
        }
        for (field, times) in [
            ("sample_times", &self.sample_times),
            ("snapshot_times", &self.snapshot_times),
        ] {
            if let Some(t) = times.iter().find(|t| !(**t >= 0.0 && **t <= self.t_end)) {
                return Err(invalid(field, format!("{t} lies outside [0, t_end]")));
            }
        }
        if self.seeds.is_empty() {
            return Err(invalid("seeds", "at least one seed is required"));
        }
        if self.blowup_amplitude.is_nan() || self.blowup_amplitude <= 0.0 {
            return Err(invalid("blowup_amplitude", "must be positive"));
        }
        let ok = matches!(
            (self.model, &self.init),
            (
                ModelKind::HSystem | ModelKind::HLinear,
                InitSpec::Height { .. }
            ) | (
                ModelKind::HWave,
                InitSpec::Height { .. } | InitSpec::HeightVelocity { .. }
            ) | (ModelKind::ZSystem, InitSpec::Curve { .. })
        );
        if !ok {
            return Err(invalid(
                "init",
                format!("initial data layout does not match model {:?}", self.model),
            ));
        }
        if self.cubic && self.model == ModelKind::ZSystem {
            return Err(invalid("cubic", "only applies to the h-model"));
        }
        Ok(())
    }

    pub fn wants(&self, out: OutputKind) -> bool {
        self.outputs.contains(&out)
    }

    pub fn uses_seed(&self) -> bool {
        match &self.init {
            InitSpec::Height { h, omega } => h.uses_seed() || omega.uses_seed(),
            InitSpec::HeightVelocity { h, ht } => h.uses_seed() || ht.uses_seed(),
            InitSpec::Curve { dz1, z2, omega } => {
                dz1.uses_seed() || z2.uses_seed() || omega.uses_seed()
            }
        }
    }

    /// All diagnostic times: 0, the uniform grid, explicit samples,
    /// snapshots and `t_end`, sorted and deduplicated.
    pub fn sample_grid(&self) -> Vec<f64> {
        let mut times = vec![0.0, self.t_end];
        if let Some(dt) = self.sample_interval {
            let count = (self.t_end / dt * (1.0 + 1e-12)).floor() as usize;
            times.extend((0..=count).map(|i| (i as f64 * dt).min(self.t_end)));
        }
        times.extend_from_slice(&self.sample_times);
        times.extend_from_slice(&self.snapshot_times);
        times.sort_by(f64::total_cmp);
        times.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * self.t_end);
        times
    }
}

/// Initial data evaluated on the grid.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    Height {
        h: RealField,
        omega: RealField,
    },
    HeightVelocity {
        h: RealField,
        ht: RealField,
    },
    Curve {
        dz1: RealField,
        z2: RealField,
        omega: RealField,
    },
}

impl InitialData {
    /// `(h₀, h₁)` for height data, with `h₁ = ½Hϖ₀` when only `ϖ₀` is known.
    pub fn height_pair(&self, sp: &Spectral) -> Option<(RealField, RealField)> {
        match self {
            InitialData::Height { h, omega } => Some((h.clone(), sp.hilbert(omega).scale(0.5))),
            InitialData::HeightVelocity { h, ht } => Some((h.clone(), ht.clone())),
            InitialData::Curve { .. } => None,
        }
    }
}

pub fn initial_data(
    cfg: &ExperimentConfig,
    sp: &Spectral,
    seed: u64,
) -> Result<InitialData, ConfigError> {
    Ok(match &cfg.init {
        InitSpec::Height { h, omega } => InitialData::Height {
            h: h.build(sp, seed)?,
            omega: omega.build(sp, seed)?,
        },
        InitSpec::HeightVelocity { h, ht } => InitialData::HeightVelocity {
            h: h.build(sp, seed)?,
            ht: ht.build(sp, seed)?,
        },
        InitSpec::Curve { dz1, z2, omega } => InitialData::Curve {
            dz1: dz1.build(sp, seed)?,
            z2: z2.build(sp, seed)?,
            omega: omega.build(sp, seed)?,
        },
    })
}

/// One row of `timeseries.csv`; `None` marks an inapplicable diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesRecord {
    pub t: f64,
    pub linf_amplitude: f64,
    pub width: f64,
    pub e1: Option<f64>,
    pub e2: Option<f64>,
    pub e3: Option<f64>,
    pub d1: Option<f64>,
    pub d2: Option<f64>,
    pub d3: Option<f64>,
    /// `min_α A h_t(α, t)`
    pub lambda_min: Option<f64>,
    pub gap_h: Option<f64>,
    pub gap_ht: Option<f64>,
}

impl TimeSeriesRecord {
    pub const COLUMNS: [&'static str; 12] = [
        "t",
        "linf_amplitude",
        "width",
        "e1",
        "e2",
        "e3",
        "d1",
        "d2",
        "d3",
        "lambda_min",
        "gap_h",
        "gap_ht",
    ];

    pub fn cells(&self) -> [Option<f64>; 12] {
        [
            Some(self.t),
            Some(self.linf_amplitude),
            Some(self.width),
            self.e1,
            self.e2,
            self.e3,
            self.d1,
            self.d2,
            self.d3,
            self.lambda_min,
            self.gap_h,
            self.gap_ht,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Snapshot {
    Height {
        h: Vec<f64>,
    },
    /// `z₁ = α + δz₁` and `z₂`.
    Curve {
        z1: Vec<f64>,
        z2: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub record: TimeSeriesRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot: Option<Snapshot>,
    /// `E(k)` for `k = 0..=N/2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    /// Step-size underflow, non-finite state or amplitude cap.
    BlowUp {
        t: f64,
        reason: String,
    },
    Degeneracy {
        t: f64,
        min_metric: f64,
    },
    Failure {
        t: f64,
        reason: String,
    },
}

impl RunStatus {
    pub fn is_completed(&self) -> bool {
        matches!(self, RunStatus::Completed)
    }

    pub fn is_failure(&self) -> bool {
        matches!(self, RunStatus::Failure { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            RunStatus::Completed => "completed",
            RunStatus::BlowUp { .. } => "blow_up",
            RunStatus::Degeneracy { .. } => "degeneracy",
            RunStatus::Failure { .. } => "failure",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub samples: Vec<SampleRecord>,
    pub status: RunStatus,
    pub stats: StepStats,
    /// State at the last sample reached, packed by component.
    #[serde(skip)]
    pub final_state: Vec<f64>,
}

impl ExperimentResult {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.record.t).collect()
    }

    pub fn widths(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.record.width).collect()
    }

    pub fn amplitudes(&self) -> Vec<f64> {
        self.samples
            .iter()
            .map(|s| s.record.linf_amplitude)
            .collect()
    }

    pub fn last_time(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.record.t)
    }

    /// `max |width - δ A g t²|` over samples with `t <= t_max`.
    pub fn growth_deviation(&self, t_max: f64) -> f64 {
        let ag = self.config.phys.atwood() * self.config.phys.g;
        self.samples
            .iter()
            .filter(|s| s.record.t <= t_max * (1.0 + 1e-12))
            .map(|s| (s.record.width - MIXING_DELTA * ag * s.record.t.powi(2)).abs())
            .fold(0.0, f64::max)
    }
}

struct Probe<'a> {
    cfg: &'a ExperimentConfig,
    sp: &'a Spectral,
    snapshot_times: Vec<f64>,
    reference_max: f64,
    h0_mean: f64,
    h1_mean: f64,
}

impl Probe<'_> {
    fn n(&self) -> usize {
        self.sp.grid().len()
    }

    fn component(&self, y: &[f64], i: usize) -> RealField {
        let n = self.n();
        RealField::from_raw(self.sp.grid(), y[i * n..(i + 1) * n].to_vec())
    }

    /// The tracked interface height: `h`, or `z₂` for the z-model.
    fn height_slice<'y>(&self, y: &'y [f64]) -> &'y [f64] {
        let n = self.n();
        match self.cfg.model {
            ModelKind::ZSystem => &y[n..2 * n],
            _ => &y[..n],
        }
    }

    fn velocity(&self, y: &[f64]) -> RealField {
        match self.cfg.model {
            ModelKind::HWave => self.component(y, 1),
            _ => self.sp.hilbert(&self.component(y, 1)).scale(0.5),
        }
    }

    fn is_snapshot(&self, t: f64) -> bool {
        self.snapshot_times
            .iter()
            .any(|s| (s - t).abs() <= 1e-12 * self.cfg.t_end.max(1.0))
    }

    fn record(&self, t: f64, y: &[f64]) -> SampleRecord {
        let height = RealField::from_raw(self.sp.grid(), self.height_slice(y).to_vec());
        let (linf, _) = amplitude_and_width(&height, &height);
        let width = height.max() - self.reference_max;
        let snap = self.is_snapshot(t);
        let mut rec = TimeSeriesRecord {
            t,
            linf_amplitude: linf,
            width,
            e1: None,
            e2: None,
            e3: None,
            d1: None,
            d2: None,
            d3: None,
            lambda_min: None,
            gap_h: None,
            gap_ht: None,
        };
        let mut snapshot = None;
        let mut spectrum = None;
        if self.cfg.model.is_height_model() {
            let ht = self.velocity(y);
            let e = energy_record(self.sp, &height, &ht, &self.cfg.phys, t);
            let a = self.cfg.phys.atwood();
            let (gap_h, gap_ht) = asymptotic_gap(&height, &ht, self.h0_mean, self.h1_mean, t);
            rec.e1 = Some(e.e1);
            rec.e2 = Some(e.e2);
            rec.e3 = Some(e.e3);
            rec.d1 = Some(e.d1);
            rec.d2 = Some(e.d2);
            rec.d3 = Some(e.d3);
            rec.lambda_min = Some(
                ht.values()
                    .iter()
                    .map(|v| a * v)
                    .fold(f64::INFINITY, f64::min),
            );
            rec.gap_h = Some(gap_h);
            rec.gap_ht = Some(gap_ht);
            if snap {
                snapshot = Some(Snapshot::Height {
                    h: height.values().to_vec(),
                });
                if self.cfg.wants(OutputKind::Spectrum) {
                    spectrum = Some(e.spectrum);
                }
            }
        } else if snap {
            let dz1 = self.component(y, 0);
            let z1 = self
                .sp
                .grid()
                .nodes()
                .iter()
                .zip(dz1.values())
                .map(|(a, d)| a + d)
                .collect();
            if self.cfg.wants(OutputKind::Spectrum) {
                spectrum = Some(curve_spectrum(self.sp, &dz1, &height));
            }
            snapshot = Some(Snapshot::Curve {
                z1,
                z2: height.values().to_vec(),
            });
        }
        SampleRecord {
            record: rec,
            snapshot,
            spectrum,
        }
    }
}

fn classify(err: IntegrationError<ModelError>) -> RunStatus {
    match err {
        IntegrationError::StepSizeUnderflow { t, dt, .. } => RunStatus::BlowUp {
            t,
            reason: format!("step size underflow (dt = {dt:e})"),
        },
        IntegrationError::Aborted { t, reason, .. } => RunStatus::BlowUp { t, reason },
        IntegrationError::RhsFailure { t, source, .. } => match source {
            ModelError::DegenerateParameterization { min_metric, .. } => {
                RunStatus::Degeneracy { t, min_metric }
            }
            ModelError::NonFiniteState { term } => RunStatus::BlowUp {
                t,
                reason: format!("non-finite value in `{term}`"),
            },
            other => RunStatus::Failure {
                t,
                reason: other.to_string(),
            },
        },
        IntegrationError::InvalidRequest(reason) => RunStatus::Failure { t: 0.0, reason },
    }
}

fn stats_of(err: &IntegrationError<ModelError>) -> StepStats {
    match err {
        IntegrationError::StepSizeUnderflow { stats, .. }
        | IntegrationError::RhsFailure { stats, .. }
        | IntegrationError::Aborted { stats, .. } => *stats,
        IntegrationError::InvalidRequest(_) => StepStats::default(),
    }
}

/// Runs the experiment with its first seed.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentResult, ConfigError> {
    run_seed(cfg, cfg.seeds[0])
}

/// Runs one seed. Configuration problems are errors; everything that goes
/// wrong during integration is reported in the result's status.
pub fn run_seed(cfg: &ExperimentConfig, seed: u64) -> Result<ExperimentResult, ConfigError> {
    cfg.validate()?;
    let grid = PeriodicGrid::new(cfg.grid_n).map_err(|e| invalid("grid_n", e.to_string()))?;
    let sp = Spectral::new(grid);
    let data = initial_data(cfg, &sp, seed)?;

    let (y0, omega0_integral, h_pair) = match &data {
        InitialData::Height { h, omega } => {
            let y0: Vec<f64> = if cfg.model == ModelKind::HWave {
                let ht = sp.hilbert(omega).scale(0.5);
                [h.values(), ht.values()].concat()
            } else {
                [h.values(), omega.values()].concat()
            };
            (y0, omega.integral(), data.height_pair(&sp))
        }
        InitialData::HeightVelocity { h, ht } => (
            [h.values(), ht.values()].concat(),
            0.0,
            data.height_pair(&sp),
        ),
        InitialData::Curve { dz1, z2, omega } => (
            [dz1.values(), z2.values(), omega.values()].concat(),
            0.0,
            None,
        ),
    };

    let dynamics = Dynamics {
        kind: cfg.model,
        sp: sp.clone(),
        phys: cfg.phys,
        visc: cfg.visc,
        omega0_integral,
        opts: HOptions { cubic: cfg.cubic },
    };
    let (h0_mean, h1_mean) = h_pair
        .as_ref()
        .map_or((0.0, 0.0), |(h0, h1)| (h0.mean(), h1.mean()));
    let mut probe = Probe {
        cfg,
        sp: &sp,
        snapshot_times: cfg.snapshot_times.clone(),
        reference_max: 0.0,
        h0_mean,
        h1_mean,
    };
    probe.reference_max = probe
        .height_slice(&y0)
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);

    let times = cfg.sample_grid();
    let mut samples = Vec::with_capacity(times.len());
    let mut final_state = y0.clone();
    let cap = cfg.blowup_amplitude;
    let outcome = integrate_observed(
        |_t, y: &[f64], dy: &mut [f64]| dynamics.eval(y, dy),
        &y0,
        0.0,
        cfg.t_end,
        &cfg.stepper,
        &times,
        |ev| match ev {
            Event::Sample { t, y } => {
                samples.push(probe.record(t, y));
                final_state.copy_from_slice(y);
                ControlFlow::Continue(())
            }
            Event::Step { y, .. } => {
                let amp = probe
                    .height_slice(y)
                    .iter()
                    .fold(0.0f64, |m, v| m.max(v.abs()));
                if amp > cap {
                    ControlFlow::Break(format!("amplitude {amp:e} exceeds {cap:e}"))
                } else {
                    ControlFlow::Continue(())
                }
            }
        },
    );
    let (status, stats) = match outcome {
        Ok((stats, _)) => (RunStatus::Completed, stats),
        Err(e) => {
            let stats = stats_of(&e);
            (classify(e), stats)
        }
    };
    Ok(ExperimentResult {
        config: cfg.clone(),
        seed,
        samples,
        status,
        stats,
        final_state,
    })
}

/// Per-time statistics over ensemble members that reached that time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub t: f64,
    pub members: usize,
    pub width_mean: f64,
    pub width_min: f64,
    pub width_max: f64,
    pub amplitude_mean: f64,
    pub amplitude_min: f64,
    pub amplitude_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub runs: Vec<ExperimentResult>,
    pub aggregate: Vec<AggregateRow>,
}

/// Runs every seed in parallel. Results keep the seed order, and the
/// aggregate skips runs that ended in a `Failure`.
pub fn run_ensemble(cfg: &ExperimentConfig) -> Result<EnsembleResult, ConfigError> {
    cfg.validate()?;
    let runs = cfg
        .seeds
        .par_iter()
        .map(|&seed| run_seed(cfg, seed))
        .collect::<Result<Vec<_>, _>>()?;
    let aggregate = aggregate(&runs);
    Ok(EnsembleResult { runs, aggregate })
}

pub fn aggregate(runs: &[ExperimentResult]) -> Vec<AggregateRow> {
    // Sample times are identical across seeds, so the bit pattern is a key.
    let mut by_time: BTreeMap<u64, Vec<&TimeSeriesRecord>> = BTreeMap::new();
    for run in runs.iter().filter(|r| !r.status.is_failure()) {
        for s in &run.samples {
            by_time
                .entry(s.record.t.to_bits())
                .or_default()
                .push(&s.record);
        }
    }
    by_time
        .into_iter()
        .map(|(bits, recs)| {
            let n = recs.len() as f64;
            let stat = |f: fn(&TimeSeriesRecord) -> f64| {
                let vals = recs.iter().map(|r| f(r));
                let sum: f64 = vals.clone().sum();
                let min = vals.clone().fold(f64::INFINITY, f64::min);
                let max = vals.fold(f64::NEG_INFINITY, f64::max);
                (sum / n, min, max)
            };
            let (wm, wl, wh) = stat(|r| r.width);
            let (am, al, ah) = stat(|r| r.linf_amplitude);
            AggregateRow {
                t: f64::from_bits(bits),
                members: recs.len(),
                width_mean: wm,
                width_min: wl,
                width_max: wh,
                amplitude_mean: am,
                amplitude_min: al,
                amplitude_max: ah,
            }
        })
        .collect()
}

pub const PRESET_NAMES: &[&str] = &[
    "sim1",
    "sim1_eps008",
    "sim1_n256",
    "sim1_s2",
    "sim2",
    "sim2_linear",
    "sim3",
    "sim4",
    "sim5_h",
    "sim5_h_sigma",
    "sim5_z",
    "sim5_h_matched",
    "sim6_h",
    "sim6_z",
    "sim7",
    "sim7_inviscid",
];

fn phys(g: f64, sigma: f64, rho_plus: f64, rho_minus: f64) -> PhysParams {
    PhysParams {
        g,
        sigma,
        rho_plus,
        rho_minus,
    }
}

fn visc(epsilon: f64, order_s: f64) -> ViscosityConfig {
    ViscosityConfig { epsilon, order_s }
}

fn mode(k: i64, amp: f64, phase: Phase) -> FieldSpec {
    FieldSpec::Mode { k, amp, phase }
}

fn base(
    name: &str,
    model: ModelKind,
    grid_n: usize,
    phys: PhysParams,
    init: InitSpec,
) -> ExperimentConfig {
    ExperimentConfig {
        name: name.to_string(),
        model,
        grid_n,
        phys,
        visc: ViscosityConfig::none(),
        cubic: false,
        t_end: 1.0,
        sample_interval: None,
        sample_times: Vec::new(),
        snapshot_times: Vec::new(),
        seeds: default_seeds(),
        outputs: default_outputs(),
        blowup_amplitude: default_blowup(),
        stepper: StepController::default(),
        init,
    }
}

fn sim1_like(name: &str, grid_n: usize, v: ViscosityConfig) -> ExperimentConfig {
    let init = InitSpec::Height {
        h: mode(3, 1.0, Phase::Sin),
        omega: FieldSpec::HilbertMode {
            k: 2,
            amp: 2.0,
            phase: Phase::Sin,
        },
    };
    ExperimentConfig {
        visc: v,
        t_end: 2.64,
        sample_interval: Some(0.01),
        snapshot_times: vec![0.0, 1.95, 2.4],
        ..base(
            name,
            ModelKind::HSystem,
            grid_n,
            phys(9.8, 0.0, 1.0, 1.5),
            init,
        )
    }
}

fn rocket_rig() -> PhysParams {
    phys(ROCKET_RIG_G, 0.0, 0.66, 1.89)
}

fn random(n: usize, target_l2: f64) -> FieldSpec {
    FieldSpec::RandomTrig {
        n,
        target_l2,
        stream: 0,
    }
}

fn ensemble_seeds() -> Vec<u64> {
    (0..10).collect()
}

/// The built-in scenarios.
pub fn preset(name: &str) -> Result<ExperimentConfig, ConfigError> {
    let cfg = match name {
        "sim1" => sim1_like(name, 128, visc(0.01, 3.0)),
        "sim1_eps008" => sim1_like(name, 128, visc(0.008, 3.0)),
        "sim1_n256" => sim1_like(name, 256, visc(0.008, 3.0)),
        "sim1_s2" => sim1_like(name, 128, visc(0.04, 2.0)),
        "sim2" | "sim2_linear" => {
            let model = if name == "sim2" {
                ModelKind::HSystem
            } else {
                ModelKind::HLinear
            };
            ExperimentConfig {
                phys: phys(9.8, 0.0, 1.23, 1027.0),
                model,
                outputs: vec![
                    OutputKind::Timeseries,
                    OutputKind::Snapshots,
                    OutputKind::Spectrum,
                ],
                visc: visc(0.05, 3.0),
                t_end: 0.77,
                sample_interval: Some(0.005),
                snapshot_times: vec![0.0, 0.2, 0.45, 0.7],
                ..sim1_like(name, 128, visc(0.05, 3.0))
            }
        }
        "sim3" => ExperimentConfig {
            phys: phys(9.8, 0.0, 10.0, 1.0),
            t_end: 0.5,
            sample_interval: Some(0.005),
            snapshot_times: vec![0.0, 0.05, 0.1, 0.15, 0.2],
            ..sim1_like(name, 128, visc(0.05, 3.0))
        },
        "sim4" => {
            let init = InitSpec::HeightVelocity {
                h: mode(1, 0.1, Phase::Cos),
                ht: FieldSpec::Sum {
                    terms: vec![
                        FieldSpec::Constant { value: -1.0 },
                        mode(1, 0.1, Phase::Sin),
                    ],
                },
            };
            ExperimentConfig {
                t_end: 20.0,
                sample_interval: Some(0.05),
                snapshot_times: vec![0.0, 5.0, 10.0, 20.0],
                ..base(name, ModelKind::HWave, 128, phys(9.8, 0.0, 0.0, 1.0), init)
            }
        }
        "sim5_h" => ExperimentConfig {
            visc: visc(0.05, 2.0),
            t_end: 0.165,
            sample_interval: Some(0.001),
            snapshot_times: vec![0.0, 0.02, 0.04, 0.06, 0.08],
            seeds: ensemble_seeds(),
            ..base(
                name,
                ModelKind::HSystem,
                128,
                rocket_rig(),
                InitSpec::Height {
                    h: random(50, PI / 100.0),
                    omega: FieldSpec::Zero,
                },
            )
        },
        "sim5_h_sigma" => ExperimentConfig {
            phys: phys(ROCKET_RIG_G, 0.005, 0.66, 1.89),
            visc: ViscosityConfig::none(),
            init: InitSpec::Height {
                h: random(30, PI / 1000.0),
                omega: FieldSpec::Zero,
            },
            ..preset("sim5_h")?
        },
        "sim5_z" => ExperimentConfig {
            visc: visc(0.01, 2.0),
            t_end: 0.167,
            sample_interval: Some(0.001),
            snapshot_times: vec![0.0, 0.049, 0.099, 0.129, 0.149],
            seeds: ensemble_seeds(),
            ..base(
                name,
                ModelKind::ZSystem,
                512,
                rocket_rig(),
                InitSpec::Curve {
                    dz1: FieldSpec::Zero,
                    z2: random(30, PI / 1000.0),
                    omega: FieldSpec::Zero,
                },
            )
        },
        "sim5_h_matched" => ExperimentConfig {
            model: ModelKind::HSystem,
            visc: visc(0.05, 2.0),
            init: InitSpec::Height {
                h: random(30, PI / 1000.0),
                omega: FieldSpec::Zero,
            },
            ..preset("sim5_z")?
        },
        "sim6_h" | "sim6_z" => {
            let z2 = FieldSpec::Sum {
                terms: vec![
                    FieldSpec::Tilted { theta_deg: 5.7 },
                    random(30, PI / 1000.0),
                ],
            };
            let (model, v, init) = if name == "sim6_h" {
                (
                    ModelKind::HSystem,
                    visc(0.25, 2.0),
                    InitSpec::Height {
                        h: z2,
                        omega: FieldSpec::Zero,
                    },
                )
            } else {
                (
                    ModelKind::ZSystem,
                    visc(0.05, 2.0),
                    InitSpec::Curve {
                        dz1: FieldSpec::Zero,
                        z2,
                        omega: FieldSpec::Zero,
                    },
                )
            };
            ExperimentConfig {
                visc: v,
                t_end: 0.315,
                sample_interval: Some(0.001),
                snapshot_times: vec![0.0, 0.069, 0.139, 0.172, 0.209, 0.22, 0.286],
                seeds: ensemble_seeds(),
                ..base(name, model, 512, rocket_rig(), init)
            }
        }
        "sim7" | "sim7_inviscid" => {
            let eps = if name == "sim7" { 0.01 } else { 0.0 };
            ExperimentConfig {
                visc: visc(eps, 2.0),
                t_end: 0.66,
                sample_interval: Some(0.01),
                snapshot_times: vec![0.0, 0.2, 0.4, 0.6],
                outputs: vec![
                    OutputKind::Timeseries,
                    OutputKind::Snapshots,
                    OutputKind::Spectrum,
                ],
                ..base(
                    name,
                    ModelKind::ZSystem,
                    256,
                    phys(9.8, 0.0, 1.0, 1.0),
                    InitSpec::Curve {
                        dz1: mode(1, -1.0, Phase::Sin),
                        z2: mode(1, 0.5, Phase::Sin),
                        omega: mode(1, 10.0, Phase::Cos),
                    },
                )
            }
        }
        other => return Err(ConfigError::UnknownPreset(other.to_string())),
    };
    Ok(ExperimentConfig {
        name: name.to_string(),
        ..cfg
    })
}
