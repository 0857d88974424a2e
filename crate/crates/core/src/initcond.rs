//! Initial-data constructors: trigonometric modes, seeded random
//! trigonometric polynomials, and the tilted piecewise-linear interface.
//!
//! Random draws are reproducible across builds and platforms. Each draw uses
//! its own SplitMix64 stream keyed by `(seed, stream)`; standard normals come
//! from the Box-Muller transform, both outputs of a pair used in order. The
//! coefficients are consumed as `a_1, b_1, a_2, b_2, …, a_n, b_n`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::InitError;
use crate::spectral::{PeriodicGrid, RealField};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// SplitMix64 generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Independent stream for draw number `stream` of an experiment seed.
    pub fn for_stream(seed: u64, stream: u64) -> Self {
        Self::new(mix64(seed ^ mix64(stream.wrapping_add(GOLDEN))))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    /// Uniform on `(0, 1]` with 53 random bits.
    pub fn next_open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Standard normal variates by Box-Muller.
#[derive(Debug, Clone)]
pub struct GaussianStream {
    rng: SplitMix64,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(rng: SplitMix64) -> Self {
        Self { rng, spare: None }
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.rng.next_open01();
        let u2 = self.rng.next_open01();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Sin,
    Cos,
}

/// `amp·sin(kα)` or `amp·cos(kα)` sampled on the grid.
pub fn sine_mode(
    grid: PeriodicGrid,
    k: i64,
    amp: f64,
    phase: Phase,
) -> Result<RealField, InitError> {
    let half = grid.nyquist();
    if k.abs() > half {
        return Err(InitError::ModeOutOfBand { k, half });
    }
    let kf = k as f64;
    Ok(match phase {
        Phase::Sin => RealField::from_fn(grid, |a| amp * (kf * a).sin()),
        Phase::Cos => RealField::from_fn(grid, |a| amp * (kf * a).cos()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomTrigSpec {
    /// Highest mode `n` of the polynomial.
    pub n_modes_used: usize,
    /// Discrete `L²` norm of the result.
    pub target_l2: f64,
    pub seed: u64,
    /// Stream index within the seed; equal streams give equal fields.
    pub stream: u64,
}

/// `S·Σ_{j=1..n} (a_j cos jα + b_j sin jα)` with `a_j, b_j ~ N(0, 1)` and
/// `S` fixed so the discrete `L²` norm equals `target_l2`.
pub fn random_trig(grid: PeriodicGrid, spec: &RandomTrigSpec) -> Result<RealField, InitError> {
    let n = spec.n_modes_used;
    if n == 0 || n > grid.len() / 2 || !(spec.target_l2.is_finite() && spec.target_l2 > 0.0) {
        return Err(InitError::RandomSpec);
    }
    let mut gauss = GaussianStream::new(SplitMix64::for_stream(spec.seed, spec.stream));
    let coeffs: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let a = gauss.next_normal();
            let b = gauss.next_normal();
            (a, b)
        })
        .collect();
    let raw = RealField::from_fn(grid, |x| {
        coeffs
            .iter()
            .enumerate()
            .map(|(j, (a, b))| {
                let k = (j + 1) as f64;
                a * (k * x).cos() + b * (k * x).sin()
            })
            .sum()
    });
    let norm = raw.l2();
    if norm == 0.0 {
        return Err(InitError::DegenerateDraw);
    }
    Ok(raw.scale(spec.target_l2 / norm))
}

/// Flat interface tilted by `theta`, periodized as an odd tent:
/// `tanθ(α+π)` on `[-π, -π/2)`, `-tanθ α` on `|α| <= π/2`, `tanθ(α-π)` on `(π/2, π]`.
pub fn tilted_interface(grid: PeriodicGrid, theta: f64) -> Result<RealField, InitError> {
    if theta.is_nan() || theta.abs() >= PI / 2.0 {
        return Err(InitError::Tilt(theta));
    }
    let slope = theta.tan();
    Ok(RealField::from_fn(grid, |x| {
        if x < -PI / 2.0 {
            slope * (x + PI)
        } else if x <= PI / 2.0 {
            -slope * x
        } else {
            slope * (x - PI)
        }
    }))
}
