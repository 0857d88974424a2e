//! Oracles and helpers shared by the integration tests and the acceptance
//! harness. Each oracle avoids the code path it checks.

#![allow(dead_code)]

use std::f64::consts::PI;

use rtmix::diagnostics::{stability_report, StabilityReport};
use rtmix::models::{Dynamics, HOptions};
use rtmix::timestepper::integrate;
use rtmix::{
    ModelKind, PeriodicGrid, PhysParams, RealField, Spectral, StepController, Trajectory,
    ViscosityConfig,
};

pub fn spectral(n: usize) -> Spectral {
    Spectral::new(PeriodicGrid::new(n).unwrap())
}

pub fn pack(fields: &[&RealField]) -> Vec<f64> {
    fields
        .iter()
        .flat_map(|f| f.values().iter().copied())
        .collect()
}

pub fn component(grid: PeriodicGrid, y: &[f64], i: usize) -> RealField {
    let n = grid.len();
    RealField::new(grid, y[i * n..(i + 1) * n].to_vec()).unwrap()
}

pub fn dynamics(
    kind: ModelKind,
    sp: &Spectral,
    phys: PhysParams,
    visc: ViscosityConfig,
    omega0_integral: f64,
) -> Dynamics {
    Dynamics {
        kind,
        sp: sp.clone(),
        phys,
        visc,
        omega0_integral,
        opts: HOptions::default(),
    }
}

pub fn evolve(
    d: &Dynamics,
    y0: &[f64],
    t_end: f64,
    samples: &[f64],
    ctrl: &StepController,
) -> Trajectory {
    integrate(|_, y, dy| d.eval(y, dy), y0, 0.0, t_end, ctrl, samples)
        .unwrap_or_else(|e| panic!("integration failed: {e}"))
}

/// `A ∫∫ (u(α)-u(β))² (u(α)+u(β)) / (8π sin²((α-β)/2)) dα dβ` by the
/// product trapezoid rule. The integrand is smooth with diagonal limit
/// `8 u'(α)² u(α)`, which `du` supplies in closed form.
pub fn d1_double_integral(
    grid: PeriodicGrid,
    u: impl Fn(f64) -> f64,
    du: impl Fn(f64) -> f64,
    atwood: f64,
) -> f64 {
    let n = grid.len();
    let x = grid.nodes();
    let v: Vec<f64> = x.iter().map(|&a| u(a)).collect();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            sum += if i == j {
                8.0 * du(x[i]).powi(2) * v[i]
            } else {
                let s = ((x[i] - x[j]) / 2.0).sin();
                (v[i] - v[j]).powi(2) * (v[i] + v[j]) / (s * s)
            };
        }
    }
    atwood * sum * grid.dx() * grid.dx() / (8.0 * PI)
}

/// Largest relative deviation of the linearized single-mode run
/// `h₀ = a cos kα, ϖ₀ = 0` (A = -1, g = 1) from `a cos(√k t) cos kα`,
/// sampled over one period.
pub fn linear_dispersion_error(k: i64, amp: f64) -> f64 {
    let sp = spectral(64);
    let g = sp.grid();
    let phys = PhysParams::new(1.0, 0.0, 0.0, 1.0).unwrap();
    assert_eq!(phys.atwood(), -1.0);
    let kf = k as f64;
    let h0 = RealField::from_fn(g, |x| amp * (kf * x).cos());
    let w0 = RealField::zeros(g);
    let d = dynamics(ModelKind::HLinear, &sp, phys, ViscosityConfig::none(), 0.0);
    let omega = kf.sqrt();
    let period = 2.0 * PI / omega;
    let samples: Vec<f64> = (1..=40).map(|i| period * i as f64 / 40.0).collect();
    let ctrl = StepController {
        abs_tol: 1e-16,
        rel_tol: 1e-11,
        ..StepController::default()
    };
    let traj = evolve(&d, &pack(&[&h0, &w0]), period, &samples, &ctrl);
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(t, y)| {
            let h = component(g, y, 0);
            let exact = h0.scale((omega * t).cos());
            h.sub(&exact).linf() / amp
        })
        .fold(0.0, f64::max)
}

/// Observed order of the embedded 4th-order solution on `y' = y`,
/// `t ∈ [0, 4]`, fitted over tolerances `1e-6 .. 1e-9` as the slope of
/// `log(error)` against `log(steps)`.
pub fn rkf45_observed_order() -> (f64, Vec<(f64, u64, f64)>) {
    let rows: Vec<(f64, u64, f64)> = [1e-6, 1e-7, 1e-8, 1e-9]
        .iter()
        .map(|&tol| {
            let ctrl = StepController {
                abs_tol: tol,
                rel_tol: tol,
                dt_init: 1e-3,
                dt_min: 1e-12,
                dt_max: 10.0,
                safety: 0.9,
            };
            let traj = integrate(
                |_, y: &[f64], dy: &mut [f64]| -> Result<(), ()> {
                    dy[0] = y[0];
                    Ok(())
                },
                &[1.0],
                0.0,
                4.0,
                &ctrl,
                &[],
            )
            .unwrap();
            let y = traj.states.last().unwrap()[0];
            let err = (y - 4f64.exp()).abs() / 4f64.exp();
            (tol, traj.stats.accepted, err)
        })
        .collect();
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|&(_, steps, err)| ((steps as f64).ln(), err.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (-sxy / sxx, rows)
}

/// Data `h₀ = a + B cos α`, `h₁ = -1000 + cos(α)/6` with `A = -1, g = 1, σ = 0`.
pub fn b_family_report(a: f64, b: f64) -> StabilityReport {
    let sp = spectral(64);
    let g = sp.grid();
    let h0 = RealField::from_fn(g, |x| a + b * x.cos());
    let h1 = RealField::from_fn(g, |x| -1000.0 + x.cos() / 6.0);
    let p = PhysParams::new(1.0, 0.0, 0.0, 1.0).unwrap();
    stability_report(&sp, &h0, &h1, &p)
}

/// Closed form of the smallness left-hand side for the `B` family:
/// `h₂ = -(B + 1000/6) cos α + cos(2α)/36`.
pub fn b_family_lhs(b: f64) -> f64 {
    PI * ((b + 1000.0 / 6.0).powi(2) + 2.0 / 36f64.powi(2)) + PI / 36.0
}
