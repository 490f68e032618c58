//! Internal-stress closures evaluated on a sampled dimensional density.
//!
//! The two nonlocal closures are integrated by parts into stress form,
//! `(K/π²) PV ∫ ρ(y)/(x-y) dy` and `(K/h) ∫ φ((x-y)/h) ρ(y) dy`, so that no
//! derivative of a possibly singular profile enters the integral. The
//! integrals use product integration on the piecewise-linear interpolant of
//! the samples; on `[0, x_1]` the density is continued as `ρ_1 sqrt(x_1/y)` for
//! fields singular at the origin and as the constant `ρ_1` otherwise.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::ContinuumError;
use crate::density::{DensityField, Frame};
use crate::kernels::{self, KernelEvalPolicy};
use crate::numerics::GaussLegendre;
use crate::params::MaterialParams;
use crate::scaling::Regime;

/// Pair kernel kept by the nearest-neighbour closure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationKernel {
    Phi,
    Psi,
}

/// Internal stress of `rho` under the closure of `regime`.
pub fn internal_stress(regime: Regime, rho: &DensityField, params: &MaterialParams) -> Result<Vec<f64>, ContinuumError> {
    params.validate()?;
    if rho.frame() != Frame::Dimensional {
        return Err(ContinuumError::NotDimensional);
    }
    let MaterialParams { k, h, .. } = *params;
    match regime {
        Regime::Subcritical => Ok(cauchy_transform(rho).into_iter().map(|v| k / (PI * PI) * v).collect()),
        Regime::FirstCritical => {
            let cauchy = cauchy_transform(rho);
            let regular = regular_transform(rho, h);
            Ok(cauchy
                .into_iter()
                .zip(regular)
                .map(|(c, r)| k / (PI * PI) * c + k / h * r)
                .collect())
        }
        Regime::Intermediate => Ok(rho.derivative().into_iter().map(|d| -k * h / (3.0 * PI) * d).collect()),
        Regime::SecondCritical => {
            require_positive(rho)?;
            let policy = KernelEvalPolicy::default();
            rho.values()
                .iter()
                .zip(rho.derivative())
                .map(|(&r, d)| Ok(k / (h * h) / r.powi(3) * policy.phi_eff_prime(1.0 / (h * r))?.value * d))
                .collect()
        }
        Regime::Supercritical => Err(ContinuumError::UnsupportedRegime(regime)),
    }
}

/// `-∂ρ/ρ`, the closure of the single-slip-plane density-gradient models.
pub fn gcz_stress(rho: &DensityField) -> Result<Vec<f64>, ContinuumError> {
    require_positive(rho)?;
    Ok(rho.values().iter().zip(rho.derivative()).map(|(r, d)| -d / r).collect())
}

/// Nearest-neighbour truncation `(K/h²) ρ^{-3} f'(1/(hρ)) ∂ρ` with `f = φ`
/// or `f = ψ`; the `ψ` version equals `(K/π²)` times [`gcz_stress`].
pub fn truncated_stress(
    rho: &DensityField,
    params: &MaterialParams,
    kernel: TruncationKernel,
) -> Result<Vec<f64>, ContinuumError> {
    params.validate()?;
    require_positive(rho)?;
    let MaterialParams { k, h, .. } = *params;
    rho.values()
        .iter()
        .zip(rho.derivative())
        .map(|(&r, d)| {
            let t = 1.0 / (h * r);
            let fp = match kernel {
                TruncationKernel::Phi => kernels::phi_prime(t)?,
                TruncationKernel::Psi => kernels::psi_prime(t)?,
            };
            Ok(k / (h * h) / r.powi(3) * fp * d)
        })
        .collect()
}

fn require_positive(rho: &DensityField) -> Result<(), ContinuumError> {
    match rho.grid().iter().zip(rho.values()).find(|(_, v)| !(**v > 0.0)) {
        Some((&x, &value)) => Err(ContinuumError::NonPositiveDensity { x, value }),
        None => Ok(()),
    }
}

/// `PV ∫ ρ(y)/(x - y) dy` at every grid node.
fn cauchy_transform(rho: &DensityField) -> Vec<f64> {
    let (y, f) = (rho.grid(), rho.values());
    let a = y[0];
    // ln|d|, with coincident points dropped: their divergences cancel between
    // the two panels meeting at the node
    let log_abs = |d: f64| if d == 0.0 { 0.0 } else { d.abs().ln() };
    y.iter()
        .map(|&x| {
            let mut total = 0.0;
            for j in 0..y.len() - 1 {
                let (ya, yb) = (y[j], y[j + 1]);
                let slope = (f[j + 1] - f[j]) / (yb - ya);
                // linear ρ written about x: ρ(y) = ρ_lin(x) - slope (x - y)
                let at_x = f[j] + slope * (x - ya);
                total += at_x * (log_abs(x - ya) - log_abs(x - yb)) - slope * (yb - ya);
            }
            if a > 0.0 {
                let f1 = f[0];
                if rho.singular_at_origin() {
                    // ∫_0^a sqrt(a/y)/(x - y) dy = sqrt(a/x) [2 ln(√x + √a) - ln(x - a)]
                    let (sx, sa) = (x.sqrt(), a.sqrt());
                    total += f1 * sa / sx * (2.0 * (sx + sa).ln() - log_abs(x - a));
                } else {
                    total += f1 * (log_abs(x) - log_abs(x - a));
                }
            }
            total
        })
        .collect()
}

/// `∫ φ_reg((x - y)/h) ρ(y) dy` with `φ_reg(s) = φ(s) - 1/(π² s)`.
fn regular_transform(rho: &DensityField, h: f64) -> Vec<f64> {
    let rule = GaussLegendre::new(8);
    let (y, f) = (rho.grid(), rho.values());
    let phi_reg = |s: f64| -> f64 {
        if s.abs() < 1e-3 {
            -s / 3.0 + PI * PI * s.powi(3) / 15.0
        } else {
            kernels::phi(s).expect("nonzero") - 1.0 / (PI * PI * s)
        }
    };
    let a = y[0];
    y.iter()
        .map(|&x| {
            let kernel = |yy: f64| phi_reg((x - yy) / h);
            let mut total = 0.0;
            for j in 0..y.len() - 1 {
                let (ya, yb) = (y[j], y[j + 1]);
                let slope = (f[j + 1] - f[j]) / (yb - ya);
                total += rule.integrate(|yy| kernel(yy) * (f[j] + slope * (yy - ya)), ya, yb);
            }
            if a > 0.0 {
                total += if rho.singular_at_origin() {
                    // y = u², ρ = f_1 sqrt(a)/u, dy = 2u du
                    rule.integrate(|u| kernel(u * u) * 2.0 * f[0] * a.sqrt(), 0.0, a.sqrt())
                } else {
                    rule.integrate(|yy| kernel(yy) * f[0], 0.0, a)
                };
            }
            total
        })
        .collect()
}
