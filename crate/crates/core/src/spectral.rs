//! Periodic collocation grid, discrete Fourier transforms and the Fourier
//! multiplier operators used by every model.
//!
//! Convention: `f(α) = Σ_k f̂(k) e^{ikα}` on `α ∈ [-π, π)`, with the `1/N`
//! factor carried by the forward transform. Coefficients are stored in FFT
//! order: slot `j` holds wavenumber `j` for `j <= N/2` and `j - N` otherwise,
//! so the retained band is `{-N/2+1, …, N/2}`.
//!
//! Operators that involve a derivative or the Hilbert transform annihilate
//! the Nyquist mode `k = N/2`. `H` and `Λ^s` (`s > 0`) annihilate the mean.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::GridError;

/// Uniform grid of `n` nodes `α_j = -π + j·2π/n` covering one period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicGrid {
    n: usize,
}

impl PeriodicGrid {
    pub fn new(n: usize) -> Result<Self, GridError> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(GridError::InvalidSize(n));
        }
        Ok(Self { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -PI + j as f64 * self.dx()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    pub fn nyquist(&self) -> i64 {
        (self.n / 2) as i64
    }

    /// Wavenumber stored in FFT slot `j`.
    pub fn wavenumber(&self, j: usize) -> i64 {
        if j <= self.n / 2 {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }

    /// FFT slot holding wavenumber `k`, if `k` is in the retained band.
    pub fn slot(&self, k: i64) -> Option<usize> {
        let half = self.nyquist();
        if k > half || k <= -half {
            None
        } else if k >= 0 {
            Some(k as usize)
        } else {
            Some((k + self.n as i64) as usize)
        }
    }

    pub fn wavenumbers(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.n).map(move |j| self.wavenumber(j))
    }

    /// Largest cutoff `K` such that products of fields band-limited to
    /// `|k| <= K` alias only into `|k| > K` (the 2/3 rule).
    pub fn dealias_cutoff(&self) -> usize {
        (self.n - 1) / 3
    }
}

/// Collocation samples of a real periodic function.
#[derive(Clone, PartialEq)]
pub struct RealField {
    grid: PeriodicGrid,
    values: Vec<f64>,
}

impl fmt::Debug for RealField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RealField")
            .field("n", &self.grid.n)
            .field("values", &self.values)
            .finish()
    }
}

impl RealField {
    pub fn new(grid: PeriodicGrid, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::LengthMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(GridError::NonFinite);
        }
        Ok(Self { grid, values })
    }

    /// Builds a field without the finiteness check. Used internally for
    /// intermediate results that are checked by the caller.
    pub(crate) fn from_raw(grid: PeriodicGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: PeriodicGrid) -> Self {
        Self::from_raw(grid, vec![0.0; grid.len()])
    }

    pub fn constant(grid: PeriodicGrid, c: f64) -> Self {
        Self::from_raw(grid, vec![c; grid.len()])
    }

    /// Samples `f` at the grid nodes.
    pub fn from_fn(grid: PeriodicGrid, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(grid, grid.nodes().into_iter().map(f).collect())
    }

    pub fn grid(&self) -> PeriodicGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Grid average `(1/N) Σ f_j`.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Trapezoid quadrature of `∫_𝕋 f dα`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx()
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn linf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Discrete `L²` norm `√(Σ f_j² · 2π/N)`.
    pub fn l2(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.dx()).sqrt()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        Self::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    /// `self + c·other`
    pub fn axpy(&self, c: f64, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + c * b)
    }

    /// Pointwise (collocation) product without dealiasing.
    pub fn mul(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn shift_nodes(&self, by: usize) -> Self {
        let n = self.values.len();
        Self::from_raw(
            self.grid,
            (0..n).map(|j| self.values[(j + by) % n]).collect(),
        )
    }
}

/// Fourier coefficients of a real field, in FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoeffs {
    grid: PeriodicGrid,
    coeffs: Vec<Complex64>,
}

impl SpectralCoeffs {
    pub fn grid(&self) -> PeriodicGrid {
        self.grid
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `e^{ikα}`; zero outside the retained band.
    pub fn get(&self, k: i64) -> Complex64 {
        self.grid
            .slot(k)
            .map_or(Complex64::new(0.0, 0.0), |j| self.coeffs[j])
    }

    /// `(k, f̂(k))` pairs for `k = -N/2+1 ..= N/2` in increasing order.
    pub fn modes(&self) -> Vec<(i64, Complex64)> {
        let half = self.grid.nyquist();
        (-half + 1..=half).map(|k| (k, self.get(k))).collect()
    }

    /// Largest Hermitian-symmetry defect `|f̂(-k) - conj f̂(k)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let half = self.grid.nyquist();
        let mut worst = self.get(0).im.abs().max(self.get(half).im.abs());
        for k in 1..half {
            worst = worst.max((self.get(-k) - self.get(k).conj()).norm());
        }
        worst
    }
}

/// Transform workspace for one grid. Cheap to clone; plans are shared.
#[derive(Clone)]
pub struct Spectral {
    grid: PeriodicGrid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Spectral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Spectral")
            .field("grid", &self.grid)
            .finish()
    }
}

impl Spectral {
    pub fn new(grid: PeriodicGrid) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            grid,
            forward: planner.plan_fft_forward(grid.len()),
            inverse: planner.plan_fft_inverse(grid.len()),
        }
    }

    pub fn grid(&self) -> PeriodicGrid {
        self.grid
    }

    fn check(&self, f: &RealField) {
        assert_eq!(
            f.grid, self.grid,
            "field grid does not match transform grid"
        );
    }

    pub fn dft(&self, f: &RealField) -> SpectralCoeffs {
        self.check(f);
        let n = self.grid.len();
        let scale = 1.0 / n as f64;
        // Nodes start at -π, so the sample sequence is shifted by half a
        // period relative to the FFT's implicit origin: f̂(k) picks up e^{ikπ}.
        let mut buf: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        for (j, c) in buf.iter_mut().enumerate() {
            let sign = if self.grid.wavenumber(j) % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            *c *= scale * sign;
        }
        SpectralCoeffs {
            grid: self.grid,
            coeffs: buf,
        }
    }

    /// Inverse transform; the imaginary residue is discarded.
    pub fn idft(&self, c: &SpectralCoeffs) -> RealField {
        assert_eq!(c.grid, self.grid);
        let mut buf = c.coeffs.clone();
        for (j, v) in buf.iter_mut().enumerate() {
            if self.grid.wavenumber(j) % 2 != 0 {
                *v = -*v;
            }
        }
        self.inverse.process(&mut buf);
        RealField::from_raw(self.grid, buf.into_iter().map(|v| v.re).collect())
    }

    /// Applies the multiplier `m(k)` mode by mode.
    pub fn apply_multiplier(&self, f: &RealField, m: impl Fn(i64) -> Complex64) -> RealField {
        let mut c = self.dft(f);
        for (j, v) in c.coeffs.iter_mut().enumerate() {
            *v *= m(self.grid.wavenumber(j));
        }
        self.idft(&c)
    }

    /// Hilbert transform, multiplier `-i·sgn(k)`.
    pub fn hilbert(&self, f: &RealField) -> RealField {
        let nyq = self.grid.nyquist();
        self.apply_multiplier(f, |k| {
            if k == 0 || k == nyq {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, -(k.signum() as f64))
            }
        })
    }

    /// `Λ^s`, multiplier `|k|^s`. `s = 0` is the identity.
    pub fn lambda_pow(&self, f: &RealField, s: f64) -> RealField {
        assert!(s >= 0.0, "Λ^s requires s >= 0");
        if s == 0.0 {
            return f.clone();
        }
        let nyq = self.grid.nyquist();
        self.apply_multiplier(f, |k| {
            if k == 0 || k == nyq {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new((k.unsigned_abs() as f64).powf(s), 0.0)
            }
        })
    }

    pub fn lambda(&self, f: &RealField) -> RealField {
        self.lambda_pow(f, 1.0)
    }

    /// `∂_α^n`, multiplier `(ik)^n`.
    pub fn derivative(&self, f: &RealField, n: u32) -> RealField {
        if n == 0 {
            return f.clone();
        }
        let nyq = self.grid.nyquist();
        self.apply_multiplier(f, |k| {
            if k == nyq {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, k as f64).powu(n)
            }
        })
    }

    /// Fourier projection onto `|k| <= cutoff`.
    pub fn project(&self, f: &RealField, cutoff: usize) -> RealField {
        assert!(
            cutoff as i64 <= self.grid.nyquist(),
            "projection cutoff exceeds N/2"
        );
        let cutoff = cutoff as i64;
        self.apply_multiplier(f, |k| {
            if k.abs() <= cutoff {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Collocation product. With `dealias`, both factors are projected to
    /// the 2/3 band before multiplying and the result is truncated to it.
    pub fn pointwise_product(&self, f: &RealField, g: &RealField, dealias: bool) -> RealField {
        self.check(f);
        self.check(g);
        if !dealias {
            return f.mul(g);
        }
        let k = self.grid.dealias_cutoff();
        let fp = self.project(f, k);
        let gp = self.project(g, k);
        self.project(&fp.mul(&gp), k)
    }
}
