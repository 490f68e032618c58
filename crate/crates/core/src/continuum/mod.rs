//! Continuum limits of the wall pile-up: equilibrium densities for each
//! scaling regime and the matching internal-stress closures.

mod closed_form;
mod first_critical;
mod second_critical;
mod stress;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::DensityError;
use crate::kernels::KernelError;
use crate::numerics::RootError;
use crate::params::ParamsError;
use crate::scaling::{Regime, ScalingError};

pub use closed_form::{constant_density, head_louat_density, linear_density, unit_constant_density, HeadLouatPrefactor};
pub use first_critical::{solve_first_critical, FirstCriticalSolution};
pub use second_critical::{solve_second_critical, solve_second_critical_scaled, SecondCriticalSolution};
pub use stress::{gcz_stress, internal_stress, truncated_stress, TruncationKernel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContinuumError {
    #[error("invalid integral-solver settings: {0}")]
    Settings(String),
    #[error("parameter `{name}` must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("support length search failed: {0}")]
    Bracketing(#[from] RootError),
    #[error("collocation system is singular")]
    SingularSystem,
    #[error("solution has a negative density {value} at x = {x}")]
    NegativeDensity { x: f64, value: f64 },
    #[error("collocation residual {residual:e} exceeds tolerance {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },
    #[error("density must be positive, found {value} at x = {x}")]
    NonPositiveDensity { x: f64, value: f64 },
    #[error("no internal-stress closure for the {0} regime")]
    UnsupportedRegime(Regime),
    #[error("internal stress needs a dimensional density")]
    NotDimensional,
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Scaling(#[from] ScalingError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Density(#[from] DensityError),
}

/// Discretization controls for the numerical continuum solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegralSolveSettings {
    /// Number of collocation nodes.
    pub grid_size: usize,
    /// Output grid clustering towards `x = 0`: `x_i = L (i/m)^stretch`.
    pub grid_stretch: f64,
    /// Bound on the collocation residual at the nodes.
    pub linear_system_tolerance: f64,
    /// Largest admissible support, as a multiple of the scaling length.
    pub domain_cutoff: f64,
    /// Number of samples in returned fields.
    pub output_points: usize,
    /// Smallest density resolved at the tip of the second critical profile.
    pub density_floor: f64,
}

impl Default for IntegralSolveSettings {
    fn default() -> Self {
        Self {
            grid_size: 128,
            grid_stretch: 2.0,
            linear_system_tolerance: 1e-8,
            domain_cutoff: 3.0,
            output_points: 4001,
            density_floor: 1e-6,
        }
    }
}

impl IntegralSolveSettings {
    pub fn validate(&self) -> Result<(), ContinuumError> {
        let fail = |m: &str| Err(ContinuumError::Settings(m.to_owned()));
        if self.grid_size < 16 {
            return fail("grid_size must be at least 16");
        }
        if !(self.grid_stretch >= 1.0) {
            return fail("grid_stretch must be at least 1");
        }
        if !(self.linear_system_tolerance > 0.0) {
            return fail("linear_system_tolerance must be positive");
        }
        if !(self.domain_cutoff > 1.0) {
            return fail("domain_cutoff must exceed 1");
        }
        if self.output_points < 3 {
            return fail("output_points must be at least 3");
        }
        if !(self.density_floor > 0.0) {
            return fail("density_floor must be positive");
        }
        Ok(())
    }
}

/// `x_i = L (i/(m-1))^stretch`, `i = 0..m`.
pub(crate) fn stretched_grid(length: f64, points: usize, stretch: f64) -> Vec<f64> {
    let last = (points - 1) as f64;
    (0..points).map(|i| length * (i as f64 / last).powf(stretch)).collect()
}
