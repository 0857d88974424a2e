use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid size must be an even integer >= 4, got {0}")]
    InvalidSize(usize),
    #[error("expected {expected} samples, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("field contains non-finite samples")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("densities must satisfy rho_plus >= 0, rho_minus > 0 (got {rho_plus}, {rho_minus})")]
    Densities { rho_plus: f64, rho_minus: f64 },
    #[error("surface tension must be non-negative, got {0}")]
    Tension(f64),
    #[error("artificial viscosity must be non-negative, got {0}")]
    Viscosity(f64),
    #[error("artificial viscosity order must be >= 2, got {0}")]
    ViscosityOrder(f64),
    #[error("parameter `{0}` is not finite")]
    NonFinite(&'static str),
}

/// Failure while evaluating a model right-hand side.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("non-finite value in term `{term}`")]
    NonFiniteState { term: &'static str },
    #[error("degenerate parameterization: min |∂z|² = {min_metric:e} below floor {floor:e}")]
    DegenerateParameterization { min_metric: f64, floor: f64 },
    #[error("state vector has length {found}, expected {expected}")]
    StateLength { expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InitError {
    #[error("mode {k} outside the grid band (N/2 = {half})")]
    ModeOutOfBand { k: i64, half: i64 },
    #[error("random draw produced an all-zero trigonometric polynomial")]
    DegenerateDraw,
    #[error("tilt angle {0} rad must satisfy |θ| < π/2")]
    Tilt(f64),
    #[error("random_trig needs 1 <= n <= N/2 and a positive L² target")]
    RandomSpec,
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagnosticsError {
    #[error("Carlson inequality requires a zero-mean field (mean = {0:e})")]
    NonZeroMean(f64),
}
