//! Adaptive Runge-Kutta-Fehlberg 4(5) integration with exact hits on
//! requested sample times.
//!
//! The fourth-order solution is propagated; the difference to the embedded
//! fifth-order solution is the local error estimate. A step is accepted
//! when `max_i |e_i| / (abs_tol + rel_tol·|y_i|) <= 1`.

use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};
use thiserror::Error;

// Fehlberg's tableau.
const C: [f64; 6] = [0.0, 0.25, 3.0 / 8.0, 12.0 / 13.0, 1.0, 0.5];
const A: [[f64; 5]; 6] = [
    [0.0, 0.0, 0.0, 0.0, 0.0],
    [0.25, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 32.0, 9.0 / 32.0, 0.0, 0.0, 0.0],
    [1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0, 0.0, 0.0],
    [439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0, 0.0],
    [
        -8.0 / 27.0,
        2.0,
        -3544.0 / 2565.0,
        1859.0 / 4104.0,
        -11.0 / 40.0,
    ],
];
const B4: [f64; 6] = [
    25.0 / 216.0,
    0.0,
    1408.0 / 2565.0,
    2197.0 / 4104.0,
    -0.2,
    0.0,
];
const B5: [f64; 6] = [
    16.0 / 135.0,
    0.0,
    6656.0 / 12825.0,
    28561.0 / 56430.0,
    -9.0 / 50.0,
    2.0 / 55.0,
];

/// Bounds on the per-step change of `dt`.
const MAX_GROWTH: f64 = 5.0;
const MAX_SHRINK: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepController {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub safety: f64,
}

impl Default for StepController {
    fn default() -> Self {
        Self {
            abs_tol: 1e-8,
            rel_tol: 1e-8,
            dt_init: 1e-4,
            dt_min: 1e-12,
            dt_max: 1e-2,
            safety: 0.9,
        }
    }
}

impl StepController {
    pub fn with_tolerances(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let all = [
            self.abs_tol,
            self.rel_tol,
            self.dt_init,
            self.dt_min,
            self.dt_max,
            self.safety,
        ];
        if all.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err("tolerances and step sizes must be positive and finite".into());
        }
        if !(self.dt_min <= self.dt_init && self.dt_init <= self.dt_max) {
            return Err("need dt_min <= dt_init <= dt_max".into());
        }
        if self.safety >= 1.0 {
            return Err("safety factor must lie in (0, 1)".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: u64,
    pub rejected: u64,
    pub rhs_evals: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub stats: StepStats,
    pub final_dt: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrationError<E> {
    #[error("invalid integration request: {0}")]
    InvalidRequest(String),
    #[error("step size underflow at t = {t}: dt = {dt:e} is below dt_min")]
    StepSizeUnderflow { t: f64, dt: f64, stats: StepStats },
    #[error("right-hand side failed at t = {t}: {source}")]
    RhsFailure { t: f64, source: E, stats: StepStats },
    #[error("aborted at t = {t}: {reason}")]
    Aborted {
        t: f64,
        reason: String,
        stats: StepStats,
    },
}

/// Callback payload: every accepted step, and every sample time reached.
#[derive(Debug, Clone, Copy)]
pub enum Event<'a> {
    Step { t: f64, dt: f64, y: &'a [f64] },
    Sample { t: f64, y: &'a [f64] },
}

/// Integrates `y' = rhs(t, y)` from `t0` to `t_end`, reporting every
/// accepted step and every (sorted, deduplicated) sample time to
/// `observer`. Returning `ControlFlow::Break(reason)` stops the run.
pub fn integrate_observed<E, F, O>(
    mut rhs: F,
    y0: &[f64],
    t0: f64,
    t_end: f64,
    ctrl: &StepController,
    sample_times: &[f64],
    mut observer: O,
) -> Result<(StepStats, f64), IntegrationError<E>>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), E>,
    O: FnMut(Event<'_>) -> ControlFlow<String>,
{
    ctrl.validate().map_err(IntegrationError::InvalidRequest)?;
    if !(t0.is_finite() && t_end.is_finite() && t_end > t0) {
        return Err(IntegrationError::InvalidRequest(format!(
            "need finite t_end > t0 (got {t0} .. {t_end})"
        )));
    }
    let mut samples: Vec<f64> = sample_times.to_vec();
    if samples.iter().any(|s| !(t0..=t_end).contains(s)) {
        return Err(IntegrationError::InvalidRequest(
            "sample times must lie in [t0, t_end]".into(),
        ));
    }
    samples.sort_by(f64::total_cmp);
    samples.dedup();

    let dim = y0.len();
    let mut y = y0.to_vec();
    let mut y_new = vec![0.0; dim];
    let mut stage = vec![0.0; dim];
    let mut k: Vec<Vec<f64>> = (0..6).map(|_| vec![0.0; dim]).collect();
    let mut stats = StepStats::default();

    let mut next = 0;
    while next < samples.len() && samples[next] <= t0 {
        if let ControlFlow::Break(reason) = observer(Event::Sample { t: t0, y: &y }) {
            return Err(IntegrationError::Aborted {
                t: t0,
                reason,
                stats,
            });
        }
        next += 1;
    }

    let mut t = t0;
    let mut dt = ctrl.dt_init;
    while t < t_end {
        let target = samples.get(next).copied().unwrap_or(t_end).min(t_end);
        let clipped = dt >= target - t;
        let h = if clipped { target - t } else { dt };

        for s in 0..6 {
            for i in 0..dim {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += h * A[s][j] * kj[i];
                }
                stage[i] = acc;
            }
            let (_, rest) = k.split_at_mut(s);
            stats.rhs_evals += 1;
            if let Err(source) = rhs(t + C[s] * h, &stage, &mut rest[0]) {
                return Err(IntegrationError::RhsFailure { t, source, stats });
            }
        }

        let mut err: f64 = 0.0;
        for i in 0..dim {
            let mut low = 0.0;
            let mut diff = 0.0;
            for s in 0..6 {
                low += B4[s] * k[s][i];
                diff += (B5[s] - B4[s]) * k[s][i];
            }
            y_new[i] = y[i] + h * low;
            let scale = ctrl.abs_tol + ctrl.rel_tol * y[i].abs().max(y_new[i].abs());
            let ratio = (h * diff).abs() / scale;
            if ratio.is_nan() || !y_new[i].is_finite() {
                err = f64::INFINITY;
            } else {
                err = err.max(ratio);
            }
        }

        if err <= 1.0 {
            stats.accepted += 1;
            t = if clipped { target } else { t + h };
            std::mem::swap(&mut y, &mut y_new);
            let factor = if err == 0.0 {
                MAX_GROWTH
            } else {
                (ctrl.safety * err.powf(-0.2)).clamp(MAX_SHRINK, MAX_GROWTH)
            };
            dt = if clipped {
                // a short step to hit a sample says little about the next one
                if factor < 1.0 {
                    dt.min(h * factor)
                } else {
                    dt
                }
            } else {
                h * factor
            };
            dt = dt.clamp(ctrl.dt_min, ctrl.dt_max);
            if let ControlFlow::Break(reason) = observer(Event::Step { t, dt: h, y: &y }) {
                return Err(IntegrationError::Aborted { t, reason, stats });
            }
            while next < samples.len() && samples[next] <= t {
                if let ControlFlow::Break(reason) = observer(Event::Sample { t, y: &y }) {
                    return Err(IntegrationError::Aborted { t, reason, stats });
                }
                next += 1;
            }
        } else {
            stats.rejected += 1;
            let factor = if err.is_finite() {
                (ctrl.safety * err.powf(-0.2)).clamp(MAX_SHRINK, 1.0)
            } else {
                MAX_SHRINK
            };
            let proposed = h * factor;
            if proposed < ctrl.dt_min {
                return Err(IntegrationError::StepSizeUnderflow {
                    t,
                    dt: proposed,
                    stats,
                });
            }
            dt = proposed.min(ctrl.dt_max);
        }
    }
    Ok((stats, dt))
}

/// Integrates and records the state at `t0`, every sample time, and `t_end`.
pub fn integrate<E, F>(
    rhs: F,
    y0: &[f64],
    t0: f64,
    t_end: f64,
    ctrl: &StepController,
    sample_times: &[f64],
) -> Result<Trajectory, IntegrationError<E>>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), E>,
{
    let mut all = sample_times.to_vec();
    all.push(t0);
    all.push(t_end);
    let mut times = Vec::new();
    let mut states = Vec::new();
    let (stats, final_dt) = integrate_observed(rhs, y0, t0, t_end, ctrl, &all, |ev| {
        if let Event::Sample { t, y } = ev {
            times.push(t);
            states.push(y.to_vec());
        }
        ControlFlow::Continue(())
    })?;
    Ok(Trajectory {
        times,
        states,
        stats,
        final_dt,
    })
}
