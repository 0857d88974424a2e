//! Right-hand sides of the interface models.
//!
//! All nonlinear products are formed pointwise on the grid; `H`, `Λ` and
//! `∂_α` act in frequency space in the order each equation is written.
//! `⟨f⟩` below is the full-period integral `∫_𝕋 f dα`, not the average.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, ParamError};
use crate::spectral::{RealField, Spectral};

/// Smallest admissible `|∂_α z|²` for the z-model.
pub const METRIC_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysParams {
    /// Signed acceleration; negative means it acts upwards.
    pub g: f64,
    #[serde(default)]
    pub sigma: f64,
    pub rho_plus: f64,
    pub rho_minus: f64,
}

impl PhysParams {
    pub fn new(g: f64, sigma: f64, rho_plus: f64, rho_minus: f64) -> Result<Self, ParamError> {
        let p = Self {
            g,
            sigma,
            rho_plus,
            rho_minus,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        for (name, v) in [
            ("g", self.g),
            ("sigma", self.sigma),
            ("rho_plus", self.rho_plus),
            ("rho_minus", self.rho_minus),
        ] {
            if !v.is_finite() {
                return Err(ParamError::NonFinite(name));
            }
        }
        if self.rho_plus < 0.0 || self.rho_minus <= 0.0 {
            return Err(ParamError::Densities {
                rho_plus: self.rho_plus,
                rho_minus: self.rho_minus,
            });
        }
        if self.sigma < 0.0 {
            return Err(ParamError::Tension(self.sigma));
        }
        Ok(())
    }

    /// `A = (ρ⁺ - ρ⁻)/(ρ⁺ + ρ⁻)`
    pub fn atwood(&self) -> f64 {
        (self.rho_plus - self.rho_minus) / (self.rho_plus + self.rho_minus)
    }

    /// `σ/(ρ⁺ + ρ⁻)`
    pub fn reduced_tension(&self) -> f64 {
        self.sigma / (self.rho_plus + self.rho_minus)
    }
}

/// Artificial viscosity `ε Λ^s` (h-model) or `ε ∂_α²` (z-model).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViscosityConfig {
    pub epsilon: f64,
    #[serde(default = "default_order")]
    pub order_s: f64,
}

fn default_order() -> f64 {
    2.0
}

impl Default for ViscosityConfig {
    fn default() -> Self {
        Self::none()
    }
}

impl ViscosityConfig {
    pub fn new(epsilon: f64, order_s: f64) -> Result<Self, ParamError> {
        let v = Self { epsilon, order_s };
        v.validate()?;
        Ok(v)
    }

    pub fn none() -> Self {
        Self {
            epsilon: 0.0,
            order_s: 2.0,
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if !self.epsilon.is_finite() || self.epsilon < 0.0 {
            return Err(ParamError::Viscosity(self.epsilon));
        }
        if !self.order_s.is_finite() || self.order_s < 2.0 {
            return Err(ParamError::ViscosityOrder(self.order_s));
        }
        Ok(())
    }

    pub fn is_active(&self) -> bool {
        self.epsilon > 0.0
    }
}

/// Extra terms that the discretized system leaves out.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HOptions {
    /// Keep the cubic nonlinearity `∂_α((ϖ/2) ∂_α h Hϖ)` (system form) or
    /// `-Λ(Hh_t ∂_α h h_t)` (wave form).
    pub cubic: bool,
}

/// Height function and vorticity amplitude of the h-model.
#[derive(Debug, Clone, PartialEq)]
pub struct HState {
    pub h: RealField,
    pub omega: RealField,
    /// `⟨ϖ₀⟩ = ∫ ϖ(α, 0) dα`, frozen at initialization.
    pub omega0_integral: f64,
}

impl HState {
    pub fn new(h: RealField, omega: RealField) -> Self {
        assert_eq!(h.grid(), omega.grid());
        let omega0_integral = omega.integral();
        Self {
            h,
            omega,
            omega0_integral,
        }
    }

    /// Interface velocity `h_t = ½ Hϖ`.
    pub fn velocity(&self, sp: &Spectral) -> RealField {
        sp.hilbert(&self.omega).scale(0.5)
    }
}

/// Interface `z(α) = (α + δz₁(α), z₂(α))` with vorticity amplitude `ϖ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZState {
    pub dz1: RealField,
    pub z2: RealField,
    pub omega: RealField,
}

impl ZState {
    pub fn new(dz1: RealField, z2: RealField, omega: RealField) -> Self {
        assert_eq!(dz1.grid(), z2.grid());
        assert_eq!(dz1.grid(), omega.grid());
        Self { dz1, z2, omega }
    }

    /// `|∂_α z|² = (1 + ∂_α δz₁)² + (∂_α z₂)²` at every node.
    pub fn metric(&self, sp: &Spectral) -> RealField {
        let d1 = sp.derivative(&self.dz1, 1);
        let d2 = sp.derivative(&self.z2, 1);
        d1.zip_map(&d2, |a, b| (1.0 + a) * (1.0 + a) + b * b)
    }
}

fn finite(term: &'static str, f: RealField) -> Result<RealField, ModelError> {
    if f.is_finite() {
        Ok(f)
    } else {
        Err(ModelError::NonFiniteState { term })
    }
}

/// Regularized h-model system:
///
/// ```text
/// h_t = ½ Hϖ
/// ϖ_t = 2Ag ∂h + 2σ' ∂³h - ⟨ϖ₀⟩ ∂((ϖ/4π) ∂²h) + (A/4π)⟨ϖ₀⟩ ∂Λϖ
///       - (A/2) Λ(ϖ Hϖ) - ε Λ^s ϖ
/// ```
pub fn h_rhs(
    sp: &Spectral,
    state: &HState,
    p: &PhysParams,
    v: &ViscosityConfig,
    opts: HOptions,
) -> Result<(RealField, RealField), ModelError> {
    let a = p.atwood();
    let w0 = state.omega0_integral;
    let h = &state.h;
    let omega = &state.omega;

    let h_omega = finite("H(omega)", sp.hilbert(omega))?;
    let dh = h_omega.scale(0.5);

    let mut dw = finite("2Ag dh", sp.derivative(h, 1).scale(2.0 * a * p.g))?;
    if p.sigma != 0.0 {
        let t = finite(
            "tension",
            sp.derivative(h, 3).scale(2.0 * p.reduced_tension()),
        )?;
        dw = dw.add(&t);
    }
    if w0 != 0.0 {
        let inner = omega.mul(&sp.derivative(h, 2)).scale(1.0 / (4.0 * PI));
        let t1 = finite(
            "mean-vorticity transport",
            sp.derivative(&inner, 1).scale(-w0),
        )?;
        let t2 = finite(
            "mean-vorticity dispersion",
            sp.derivative(&sp.lambda(omega), 1)
                .scale(a * w0 / (4.0 * PI)),
        )?;
        dw = dw.add(&t1).add(&t2);
    }
    if a != 0.0 {
        let t = finite(
            "Lambda(omega H omega)",
            sp.lambda(&omega.mul(&h_omega)).scale(-0.5 * a),
        )?;
        dw = dw.add(&t);
    }
    if opts.cubic {
        let inner = omega.mul(&sp.derivative(h, 1)).mul(&h_omega).scale(0.5);
        dw = dw.add(&finite("cubic", sp.derivative(&inner, 1))?);
    }
    if v.is_active() {
        let t = finite(
            "viscosity",
            sp.lambda_pow(omega, v.order_s).scale(-v.epsilon),
        )?;
        dw = dw.add(&t);
    }
    Ok((dh, dw))
}

/// Second-order (wave) form of the regularized h-model:
///
/// ```text
/// h_tt = -ε Λ^s h_t + Ag Λh - σ' Λ³h - A ∂(Hh_t h_t)
///        + ⟨ϖ₀⟩ Λ((Hh_t/4π) ∂²h) + (A/4π)⟨ϖ₀⟩ ∂Λh_t
/// ```
pub fn h_wave_rhs(
    sp: &Spectral,
    h: &RealField,
    ht: &RealField,
    p: &PhysParams,
    v: &ViscosityConfig,
    omega0_integral: f64,
    opts: HOptions,
) -> Result<RealField, ModelError> {
    let a = p.atwood();
    let w0 = omega0_integral;

    let mut htt = finite("Ag Lambda h", sp.lambda(h).scale(a * p.g))?;
    if p.sigma != 0.0 {
        let t = finite("tension", sp.lambda_pow(h, 3.0).scale(-p.reduced_tension()))?;
        htt = htt.add(&t);
    }
    let h_ht = finite("H(h_t)", sp.hilbert(ht))?;
    if a != 0.0 {
        let t = finite("d(H h_t h_t)", sp.derivative(&h_ht.mul(ht), 1).scale(-a))?;
        htt = htt.add(&t);
    }
    if w0 != 0.0 {
        let inner = h_ht.mul(&sp.derivative(h, 2)).scale(1.0 / (4.0 * PI));
        let t1 = finite("mean-vorticity transport", sp.lambda(&inner).scale(w0))?;
        let t2 = finite(
            "mean-vorticity dispersion",
            sp.derivative(&sp.lambda(ht), 1).scale(a * w0 / (4.0 * PI)),
        )?;
        htt = htt.add(&t1).add(&t2);
    }
    if opts.cubic {
        let inner = h_ht.mul(&sp.derivative(h, 1)).mul(ht);
        htt = htt.add(&finite("cubic", sp.lambda(&inner).scale(-1.0))?);
    }
    if v.is_active() {
        let t = finite("viscosity", sp.lambda_pow(ht, v.order_s).scale(-v.epsilon))?;
        htt = htt.add(&t);
    }
    Ok(htt)
}

/// Linearized h-model: `h_t = ½ Hϖ`, `ϖ_t = 2Ag ∂h + 2σ' ∂³h`.
pub fn linear_rhs(sp: &Spectral, state: &HState, p: &PhysParams) -> (RealField, RealField) {
    let dh = sp.hilbert(&state.omega).scale(0.5);
    let mut dw = sp.derivative(&state.h, 1).scale(2.0 * p.atwood() * p.g);
    if p.sigma != 0.0 {
        dw = dw.axpy(2.0 * p.reduced_tension(), &sp.derivative(&state.h, 3));
    }
    (dh, dw)
}

/// Regularized z-model with zero pressure jump:
///
/// ```text
/// (δz₁)_t = -½ Hϖ ∂z₂ / |∂z|²        + ε ∂²δz₁
/// (z₂)_t  =  ½ Hϖ (1 + ∂δz₁) / |∂z|² + ε ∂²z₂
/// ϖ_t     = -∂[(A/2) |∂z|⁻² H(ϖ Hϖ) - 2Ag z₂] + ε ∂²ϖ
/// ```
pub fn z_rhs(
    sp: &Spectral,
    state: &ZState,
    p: &PhysParams,
    v: &ViscosityConfig,
) -> Result<(RealField, RealField, RealField), ModelError> {
    let a = p.atwood();
    let d1 = finite("d(dz1)", sp.derivative(&state.dz1, 1))?;
    let d2 = finite("d(z2)", sp.derivative(&state.z2, 1))?;
    let tangent1 = d1.map(|x| 1.0 + x);
    let metric = tangent1.zip_map(&d2, |a, b| a * a + b * b);
    let min_metric = metric.min();
    if min_metric < METRIC_FLOOR {
        return Err(ModelError::DegenerateParameterization {
            min_metric,
            floor: METRIC_FLOOR,
        });
    }
    let h_omega = finite("H(omega)", sp.hilbert(&state.omega))?;
    let half_speed = h_omega.zip_map(&metric, |w, m| 0.5 * w / m);

    let mut ddz1 = half_speed.zip_map(&d2, |s, t| -s * t);
    let mut dz2 = half_speed.mul(&tangent1);

    let mut bracket = state.z2.scale(-2.0 * a * p.g);
    if a != 0.0 {
        let hwhw = sp.hilbert(&state.omega.mul(&h_omega));
        let t = hwhw.zip_map(&metric, |x, m| 0.5 * a * x / m);
        bracket = bracket.add(&t);
    }
    let mut domega = finite("vorticity flux", sp.derivative(&bracket, 1).scale(-1.0))?;

    if v.is_active() {
        let e = v.epsilon;
        ddz1 = ddz1.axpy(e, &sp.derivative(&state.dz1, 2));
        dz2 = dz2.axpy(e, &sp.derivative(&state.z2, 2));
        domega = domega.axpy(e, &sp.derivative(&state.omega, 2));
    }
    Ok((
        finite("dz1_t", ddz1)?,
        finite("z2_t", dz2)?,
        finite("omega_t", domega)?,
    ))
}

/// Which model an experiment integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// `(h, ϖ)` first-order system.
    HSystem,
    /// `(h, h_t)` second-order wave form.
    HWave,
    /// Linearized `(h, ϖ)` system.
    HLinear,
    /// `(δz₁, z₂, ϖ)` general parameterization.
    ZSystem,
}

impl ModelKind {
    pub fn components(self) -> usize {
        match self {
            ModelKind::ZSystem => 3,
            _ => 2,
        }
    }

    pub fn is_height_model(self) -> bool {
        !matches!(self, ModelKind::ZSystem)
    }
}

/// A model bound to its grid and parameters, evaluated on packed state
/// vectors (components concatenated, `N` values each).
#[derive(Debug, Clone)]
pub struct Dynamics {
    pub kind: ModelKind,
    pub sp: Spectral,
    pub phys: PhysParams,
    pub visc: ViscosityConfig,
    pub omega0_integral: f64,
    pub opts: HOptions,
}

impl Dynamics {
    pub fn dim(&self) -> usize {
        self.kind.components() * self.sp.grid().len()
    }

    fn field(&self, y: &[f64], i: usize) -> RealField {
        let n = self.sp.grid().len();
        RealField::from_raw(self.sp.grid(), y[i * n..(i + 1) * n].to_vec())
    }

    pub fn eval(&self, y: &[f64], dy: &mut [f64]) -> Result<(), ModelError> {
        let dim = self.dim();
        if y.len() != dim || dy.len() != dim {
            return Err(ModelError::StateLength {
                expected: dim,
                found: y.len(),
            });
        }
        let n = self.sp.grid().len();
        let mut put = |i: usize, f: &RealField| dy[i * n..(i + 1) * n].copy_from_slice(f.values());
        match self.kind {
            ModelKind::HSystem | ModelKind::HLinear => {
                let state = HState {
                    h: self.field(y, 0),
                    omega: self.field(y, 1),
                    omega0_integral: self.omega0_integral,
                };
                let (dh, dw) = if self.kind == ModelKind::HSystem {
                    h_rhs(&self.sp, &state, &self.phys, &self.visc, self.opts)?
                } else {
                    linear_rhs(&self.sp, &state, &self.phys)
                };
                put(0, &dh);
                put(1, &dw);
            }
            ModelKind::HWave => {
                let h = self.field(y, 0);
                let ht = self.field(y, 1);
                let htt = h_wave_rhs(
                    &self.sp,
                    &h,
                    &ht,
                    &self.phys,
                    &self.visc,
                    self.omega0_integral,
                    self.opts,
                )?;
                put(0, &ht);
                put(1, &htt);
            }
            ModelKind::ZSystem => {
                let state = ZState {
                    dz1: self.field(y, 0),
                    z2: self.field(y, 1),
                    omega: self.field(y, 2),
                };
                let (a, b, c) = z_rhs(&self.sp, &state, &self.phys, &self.visc)?;
                put(0, &a);
                put(1, &b);
                put(2, &c);
            }
        }
        Ok(())
    }
}
