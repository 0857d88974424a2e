//! Benchmark fixtures: representative states for each model.

use rtmix::experiments::{initial_data, preset, InitialData};
use rtmix::models::{Dynamics, HOptions};
use rtmix::{PeriodicGrid, RealField, Spectral};

pub fn spectral(n: usize) -> Spectral {
    Spectral::new(PeriodicGrid::new(n).expect("power-of-two grid"))
}

/// A smooth field with energy in every mode of the dealiased band.
pub fn rough_field(sp: &Spectral) -> RealField {
    RealField::from_fn(sp.grid(), |x| {
        (1..=sp.grid().dealias_cutoff())
            .map(|k| (k as f64 * x + 0.3 * k as f64).sin() / (k * k) as f64)
            .sum()
    })
}

/// Model bound to a preset's parameters on an `n`-point grid, with the
/// packed initial state.
pub fn preset_dynamics(name: &str, n: usize) -> (Dynamics, Vec<f64>) {
    let mut cfg = preset(name).expect("known preset");
    cfg.grid_n = n;
    let sp = spectral(n);
    let data = initial_data(&cfg, &sp, cfg.seeds[0]).expect("initial data");
    let (y0, omega0_integral) = match data {
        InitialData::Height { h, omega } => {
            let w0 = omega.integral();
            let mut y = h.into_values();
            y.extend(omega.into_values());
            (y, w0)
        }
        InitialData::HeightVelocity { h, ht } => {
            let mut y = h.into_values();
            y.extend(ht.into_values());
            (y, 0.0)
        }
        InitialData::Curve { dz1, z2, omega } => {
            let mut y = dz1.into_values();
            y.extend(z2.into_values());
            y.extend(omega.into_values());
            (y, 0.0)
        }
    };
    let d = Dynamics {
        kind: cfg.model,
        sp,
        phys: cfg.phys,
        visc: cfg.visc,
        omega0_integral,
        opts: HOptions { cubic: cfg.cubic },
    };
    assert_eq!(d.kind.components() * n, y0.len());
    (d, y0)
}
