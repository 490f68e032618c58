//! Second critical regime: the local equilibrium
//! `β³ ∂ρ φ'_eff(β/ρ) / ρ³ = 1` separates into `dx/dρ = β³ φ'_eff(β/ρ)/ρ³`.
//! With `t = β/ρ` the position is `x(t) = β ∫_{t0}^t (-s φ'_eff(s)) ds` and
//! the unit mass condition becomes `β² φ_eff(t0) = 1`.

use serde::Serialize;

use super::{ContinuumError, IntegralSolveSettings};
use crate::density::{DensityField, Frame};
use crate::kernels::KernelEvalPolicy;
use crate::numerics::{brent, GaussLegendre};

#[derive(Debug, Clone, Serialize)]
pub struct SecondCriticalSolution {
    /// Dimensionless, strictly decreasing density with trapezoid mass 1.
    pub density: DensityField,
    pub beta: f64,
    /// Density at the wall.
    pub wall_density: f64,
    /// Right end of the resolved support.
    pub support_length: f64,
    /// Max of `|β³ ∂ρ φ'_eff(β/ρ)/ρ³ - 1|` over the middle 80% of the
    /// support, with finite-difference `∂ρ`.
    pub ode_residual: f64,
}

/// Solution of the second critical equation with `β = 1`.
pub fn solve_second_critical(settings: &IntegralSolveSettings) -> Result<SecondCriticalSolution, ContinuumError> {
    solve_second_critical_scaled(1.0, settings)
}

/// Solution for general `β`, written in the frame where `α = β`.
pub fn solve_second_critical_scaled(
    beta: f64,
    settings: &IntegralSolveSettings,
) -> Result<SecondCriticalSolution, ContinuumError> {
    settings.validate()?;
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(ContinuumError::NonPositive { name: "beta", value: beta });
    }
    let policy = KernelEvalPolicy::default();
    let phi_eff = |t: f64| policy.phi_eff(t).map(|s| s.value);
    let phi_eff_prime = |t: f64| policy.phi_eff_prime(t).map(|s| s.value);

    // β² φ_eff(t0) = 1, with φ_eff decreasing from +∞ to 0
    let target = 1.0 / (beta * beta);
    let mut lo = beta / (6.0 * std::f64::consts::PI).sqrt();
    let mut hi = lo;
    while phi_eff(lo)? < target {
        lo *= 0.5;
    }
    while phi_eff(hi)? > target {
        hi *= 2.0;
    }
    let defect = |t: f64| phi_eff(t).map(|v| v - target).unwrap_or(f64::NAN);
    let t0 = if lo == hi { lo } else { brent(defect, lo, hi, 1e-15, 200)? };
    let wall_density = beta / t0;

    let rule = GaussLegendre::new(10);
    let m = settings.output_points;
    let floor = settings.density_floor.min(0.5 * wall_density);
    let mut grid = vec![0.0];
    let mut values = vec![wall_density];
    let mut t_prev = t0;
    for i in 1..m {
        let rho = wall_density - (wall_density - floor) * i as f64 / (m - 1) as f64;
        let t = beta / rho;
        let mut err = None;
        let dx = rule.integrate(
            |s| match phi_eff_prime(s) {
                Ok(v) => -beta * s * v,
                Err(e) => {
                    err = Some(e);
                    0.0
                }
            },
            t_prev,
            t,
        );
        if let Some(e) = err {
            return Err(e.into());
        }
        let x = grid[grid.len() - 1] + dx;
        // past here the profile is a vertical drop to zero at machine precision
        if !(dx > 4.0 * f64::EPSILON * x) {
            break;
        }
        grid.push(x);
        values.push(rho);
        t_prev = t;
    }

    let raw = DensityField::new(grid, values, Frame::Dimensionless { length_scale: None })?;
    let correction = 1.0 / raw.trapezoid_mass();
    let density = raw.scaled(correction)?;
    let support_length = density.support().1;

    let derivative = density.derivative();
    let mut ode_residual: f64 = 0.0;
    for ((&x, &rho), &d) in density.grid().iter().zip(density.values()).zip(&derivative) {
        if x < 0.1 * support_length || x > 0.9 * support_length {
            continue;
        }
        // residual of the unnormalized profile, which is the exact solution
        let r = rho / correction;
        let lhs = beta.powi(3) * (d / correction) * phi_eff_prime(beta / r)? / r.powi(3);
        ode_residual = ode_residual.max((lhs - 1.0).abs());
    }

    let density = density
        .with_metadata("beta", beta)
        .with_metadata("wall_density", wall_density)
        .with_metadata("mass_correction", correction)
        .with_metadata("tip_density", *raw.values().last().expect("nonempty"))
        .with_metadata("ode_residual", ode_residual);
    Ok(SecondCriticalSolution {
        density,
        beta,
        wall_density,
        support_length,
        ode_residual,
    })
}
