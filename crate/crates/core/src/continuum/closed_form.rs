use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{stretched_grid, ContinuumError};
use crate::density::{DensityField, Frame};
use crate::params::MaterialParams;
use crate::scaling::{pileup_length, Regime};

/// Amplitude of the inverse-square-root pile-up profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadLouatPrefactor {
    /// `σ/K`, whose profile carries `n/π` walls.
    Nominal,
    /// `πσ/K`, whose profile carries `n` walls; supported by discrete fits.
    MassConsistent,
}

impl HeadLouatPrefactor {
    pub fn value(self, params: &MaterialParams) -> f64 {
        match self {
            HeadLouatPrefactor::Nominal => params.sigma / params.k,
            HeadLouatPrefactor::MassConsistent => PI * params.sigma / params.k,
        }
    }
}

/// `ρ̃(x) = A sqrt((ℓ - x)/x)` on `(0, ℓ]`, `ℓ = 2nK/(π²σ)`, sampled on a
/// square-root clustered grid whose first node is strictly positive.
///
/// The reported mass is the exact integral `A ℓ π / 2`.
pub fn head_louat_density(
    params: &MaterialParams,
    prefactor: HeadLouatPrefactor,
    points: usize,
) -> Result<DensityField, ContinuumError> {
    params.validate()?;
    let length = pileup_length(params, Regime::Subcritical)?;
    let amplitude = prefactor.value(params);
    let grid: Vec<f64> = stretched_grid(length, points.max(3) + 1, 2.0).split_off(1);
    let values = grid
        .iter()
        .map(|&x| amplitude * ((length - x).max(0.0) / x).sqrt())
        .collect();
    let field = DensityField::with_analytic_mass(grid, values, Frame::Dimensional, amplitude * length * PI / 2.0)?;
    Ok(field
        .with_metadata("prefactor", amplitude)
        .with_metadata("nominal_prefactor", HeadLouatPrefactor::Nominal.value(params))
        .with_metadata("mass_consistent_prefactor", HeadLouatPrefactor::MassConsistent.value(params))
        .with_metadata("pileup_length", length))
}

/// `ρ̃(x) = (2n/ℓ²)(ℓ - x)` on `[0, ℓ]`, `ℓ = sqrt(2nKh/(3πσ))`; mass `n`.
pub fn linear_density(params: &MaterialParams, points: usize) -> Result<DensityField, ContinuumError> {
    params.validate()?;
    let length = pileup_length(params, Regime::Intermediate)?;
    let n = params.n_f64();
    let grid = stretched_grid(length, points.max(2), 1.0);
    let values = grid.iter().map(|&x| (2.0 * n / (length * length) * (length - x)).max(0.0)).collect();
    Ok(DensityField::new(grid, values, Frame::Dimensional)?.with_metadata("pileup_length", length))
}

/// `ρ̃ = 1/ℓ` on `[0, ℓ]` with `ℓ` the supercritical pile-up length; mass 1.
pub fn constant_density(params: &MaterialParams, points: usize) -> Result<DensityField, ContinuumError> {
    params.validate()?;
    let length = pileup_length(params, Regime::Supercritical)?;
    let grid = stretched_grid(length, points.max(2), 1.0);
    let values = vec![1.0 / length; grid.len()];
    Ok(DensityField::new(grid, values, Frame::Dimensional)?.with_metadata("pileup_length", length))
}

/// The dimensionless supercritical profile: 1 on `[0, 1]`.
pub fn unit_constant_density(points: usize) -> DensityField {
    let grid = stretched_grid(1.0, points.max(2), 1.0);
    let values = vec![1.0; grid.len()];
    DensityField::new(grid, values, Frame::Dimensionless { length_scale: None }).expect("unit profile is valid")
}
