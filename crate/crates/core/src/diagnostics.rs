//! Measured quantities: Sobolev norms, energies and their dissipation
//! rates, energy spectra, amplitude and mixing width, the stability and
//! smallness conditions, and distance to the homogeneous state.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::DiagnosticsError;
use crate::models::PhysParams;
use crate::spectral::{RealField, Spectral};

/// `‖f‖_s = (2π Σ_k |k|^{2s} |f̂(k)|²)^{1/2}`.
///
/// For `s = 0` this is the full `L²` norm including the mean. For `s != 0`
/// the mean is excluded, which makes negative orders well defined.
pub fn sobolev_norm(sp: &Spectral, f: &RealField, s: f64) -> f64 {
    sobolev_norm_sq(sp, f, s).sqrt()
}

pub fn sobolev_norm_sq(sp: &Spectral, f: &RealField, s: f64) -> f64 {
    let c = sp.dft(f);
    let sum: f64 = c
        .modes()
        .into_iter()
        .filter(|&(k, _)| s == 0.0 || k != 0)
        .map(|(k, v)| {
            let w = if s == 0.0 {
                1.0
            } else {
                (k.unsigned_abs() as f64).powf(2.0 * s)
            };
            w * v.norm_sqr()
        })
        .sum();
    2.0 * PI * sum
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Dissipations {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

/// Instantaneous dissipation rates of the three energy laws:
///
/// ```text
/// D1 = A ∫ Λh_t h_t²
/// D2 = A ∫ h_t ((Λh_t)² + (∂h_t)²)
/// D3 = 2A ∫ h_t (Hh_t)²
/// ```
pub fn dissipations(sp: &Spectral, ht: &RealField, atwood: f64) -> Dissipations {
    if atwood == 0.0 {
        return Dissipations::default();
    }
    let lam = sp.lambda(ht);
    let d = sp.derivative(ht, 1);
    let hil = sp.hilbert(ht);
    let d1 = lam.mul(ht).mul(ht).integral();
    let d2 = ht.mul(&lam.mul(&lam).add(&d.mul(&d))).integral();
    let d3 = ht.mul(&hil).mul(&hil).integral();
    Dissipations {
        d1: atwood * d1,
        d2: atwood * d2,
        d3: 2.0 * atwood * d3,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub t: f64,
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    /// `E(k)` for `k = 0..=N/2`.
    pub spectrum: Vec<f64>,
}

/// Energies and dissipation rates of an h-model state `(h, h_t)`.
///
/// ```text
/// e1 = ‖h_t‖₀²      + σ'‖h‖²_{1.5} - Ag‖h‖²_{0.5}
/// e2 = ‖h_t‖²_{0.5} + σ'‖h‖²₂     - Ag‖h‖²₁
/// e3 = ‖h_t‖²_{-0.5} + σ'‖h‖²₁     - Ag‖h‖²₀
/// ```
///
/// The negative-order norm sees only the zero-mean part of `h_t`.
pub fn energy_record(
    sp: &Spectral,
    h: &RealField,
    ht: &RealField,
    p: &PhysParams,
    t: f64,
) -> EnergyRecord {
    let ag = p.atwood() * p.g;
    let st = p.reduced_tension();
    let n = |f: &RealField, s: f64| sobolev_norm_sq(sp, f, s);
    let d = dissipations(sp, ht, p.atwood());
    EnergyRecord {
        t,
        e1: n(ht, 0.0) + st * n(h, 1.5) - ag * n(h, 0.5),
        e2: n(ht, 0.5) + st * n(h, 2.0) - ag * n(h, 1.0),
        e3: n(ht, -0.5) + st * n(h, 1.0) - ag * n(h, 0.0),
        d1: d.d1,
        d2: d.d2,
        d3: d.d3,
        spectrum: height_spectrum(sp, h, ht, ag),
    }
}

/// `E(k) = |ĥ_t(k)|² - Ag|k||ĥ(k)|²` for `k = 0..=N/2`.
pub fn height_spectrum(sp: &Spectral, h: &RealField, ht: &RealField, ag: f64) -> Vec<f64> {
    let ch = sp.dft(h);
    let ct = sp.dft(ht);
    (0..=sp.grid().nyquist())
        .map(|k| ct.get(k).norm_sqr() - ag * k as f64 * ch.get(k).norm_sqr())
        .collect()
}

/// `E(k) = |δẑ₁(k)|² + |ẑ₂(k)|²` for `k = 0..=N/2`.
pub fn curve_spectrum(sp: &Spectral, dz1: &RealField, z2: &RealField) -> Vec<f64> {
    let c1 = sp.dft(dz1);
    let c2 = sp.dft(z2);
    (0..=sp.grid().nyquist())
        .map(|k| c1.get(k).norm_sqr() + c2.get(k).norm_sqr())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// `λ = min_α A h₁(α)`
    pub lambda_min: f64,
    pub is_stable: bool,
    pub smallness_lhs: f64,
    pub smallness_rhs: f64,
    pub satisfies_thm2: bool,
}

/// Initial acceleration `h₂ = h_tt(·, 0) = AgΛh₀ - σ'Λ³h₀ - A∂(Hh₁ h₁)`.
pub fn initial_acceleration(
    sp: &Spectral,
    h0: &RealField,
    h1: &RealField,
    p: &PhysParams,
) -> RealField {
    let a = p.atwood();
    let mut h2 = sp.lambda(h0).scale(a * p.g);
    if p.sigma != 0.0 {
        h2 = h2.axpy(-p.reduced_tension(), &sp.lambda_pow(h0, 3.0));
    }
    h2.axpy(-a, &sp.derivative(&sp.hilbert(h1).mul(h1), 1))
}

/// Stability (`λ > 0`) and the global-existence smallness condition
/// `‖h₂‖²_{0.5} + ‖h₁‖²₁ + σ'‖h₁‖²₂ < (-h̄₁/5)²` for data `(h₀, h₁)`.
pub fn stability_report(
    sp: &Spectral,
    h0: &RealField,
    h1: &RealField,
    p: &PhysParams,
) -> StabilityReport {
    let a = p.atwood();
    let lambda_min = h1
        .values()
        .iter()
        .map(|v| a * v)
        .fold(f64::INFINITY, f64::min);
    let is_stable = lambda_min > 0.0;
    let h2 = initial_acceleration(sp, h0, h1, p);
    let smallness_lhs = sobolev_norm_sq(sp, &h2, 0.5)
        + sobolev_norm_sq(sp, h1, 1.0)
        + p.reduced_tension() * sobolev_norm_sq(sp, h1, 2.0);
    let h1_mean = h1.mean();
    let smallness_rhs = (h1_mean / 5.0).powi(2);
    StabilityReport {
        lambda_min,
        is_stable,
        smallness_lhs,
        smallness_rhs,
        satisfies_thm2: is_stable && h1_mean < 0.0 && smallness_lhs < smallness_rhs,
    }
}

/// `(max |f|, max f - max f_ref)`.
pub fn amplitude_and_width(field: &RealField, reference: &RealField) -> (f64, f64) {
    (field.linf(), field.max() - reference.max())
}

/// Distance to the homogeneous solution `h̄₀ + h̄₁ t` in the grid sup norm.
pub fn asymptotic_gap(
    h: &RealField,
    ht: &RealField,
    h0_mean: f64,
    h1_mean: f64,
    t: f64,
) -> (f64, f64) {
    let base = h0_mean + h1_mean * t;
    let gap_h = h
        .values()
        .iter()
        .map(|v| (v - base).abs())
        .fold(0.0, f64::max);
    let gap_ht = ht
        .values()
        .iter()
        .map(|v| (v - h1_mean).abs())
        .fold(0.0, f64::max);
    (gap_h, gap_ht)
}

/// Both sides of `‖w‖²_∞ <= ‖w‖₀‖w‖₁ - ‖w‖₀²/π` for zero-mean `w`.
pub fn carlson_check(sp: &Spectral, w: &RealField) -> Result<(f64, f64), DiagnosticsError> {
    let mean = w.mean();
    if mean.abs() > 1e-12 * w.linf().max(1.0) {
        return Err(DiagnosticsError::NonZeroMean(mean));
    }
    let n0 = sobolev_norm(sp, w, 0.0);
    let n1 = sobolev_norm(sp, w, 1.0);
    Ok((w.linf().powi(2), n0 * n1 - n0 * n0 / PI))
}

/// `max_i |width_i - δ A g t_i²|` over the samples.
pub fn growth_deviation(times: &[f64], widths: &[f64], delta: f64, ag: f64) -> f64 {
    times
        .iter()
        .zip(widths)
        .map(|(t, w)| (w - delta * ag * t * t).abs())
        .fold(0.0, f64::max)
}

/// Cumulative trapezoid integral; the first entry is 0.
pub fn cumulative_trapezoid(times: &[f64], values: &[f64]) -> Vec<f64> {
    assert_eq!(times.len(), values.len());
    let mut out = Vec::with_capacity(times.len());
    let mut acc = 0.0;
    for i in 0..times.len() {
        if i > 0 {
            acc += 0.5 * (times[i] - times[i - 1]) * (values[i] + values[i - 1]);
        }
        out.push(acc);
    }
    out
}
