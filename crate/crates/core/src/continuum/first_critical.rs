//! First critical regime: the density on `(0, L)` solves
//!
//! ```text
//! c² ∫_0^L φ(c (x - y)) ρ(y) dy = 1,   0 < x < L,   ∫ ρ = 1,
//! ```
//!
//! the stress form of `c ∫ V(c(x-y)) ∂ρ(y) dy + 1 = 0`. Splitting
//! `φ(s) = 1/(π² s) + φ_reg(s)` leaves a Cauchy kernel plus a smooth one. With
//! `y = L(1+t)/2` and `ρ = sqrt((1-t)/(1+t)) g(t)` (unbounded at the wall,
//! vanishing at the tip) the Gauss-Jacobi rule for that weight integrates the
//! Cauchy part exactly at the matching collocation points, so the system for
//! `g` at the nodes is square. The support length `L` is fixed by the mass.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{stretched_grid, ContinuumError, IntegralSolveSettings};
use crate::density::{DensityField, Frame};
use crate::kernels;
use crate::numerics::brent;

#[derive(Debug, Clone, Serialize)]
pub struct FirstCriticalSolution {
    /// Dimensionless density, singular at the origin, mass 1.
    pub density: DensityField,
    pub c: f64,
    pub support_length: f64,
    /// Max residual over the collocation points.
    pub collocation_residual: f64,
    /// Max residual at points halfway between collocation points.
    pub off_node_residual: f64,
    #[serde(skip)]
    rule: Rule,
    #[serde(skip)]
    g: Vec<f64>,
}

impl FirstCriticalSolution {
    /// Residual `c² ∫ φ(c(x-y)) ρ(y) dy - 1` at `x` in `(0, L)`.
    pub fn residual_at(&self, x: f64) -> f64 {
        let tau = 2.0 * x / self.support_length - 1.0;
        self.rule.residual_at(tau, &self.g, self.c, self.support_length)
    }

    /// Density at `x`, zero outside `(0, L]`.
    pub fn density_at(&self, x: f64) -> f64 {
        if !(x > 0.0 && x <= self.support_length) {
            return 0.0;
        }
        let t = 2.0 * x / self.support_length - 1.0;
        jacobi_weight(t) * self.rule.interpolate(t, &self.g)
    }
}

fn jacobi_weight(t: f64) -> f64 {
    ((1.0 - t) / (1.0 + t)).max(0.0).sqrt()
}

/// `φ(s) - 1/(π² s)`.
fn phi_regular(s: f64) -> f64 {
    if s.abs() < 1e-3 {
        let s2 = s * s;
        -s / 3.0 + PI * PI * s * s2 / 15.0
    } else {
        kernels::phi(s).expect("nonzero argument") - 1.0 / (PI * PI * s)
    }
}

#[derive(Debug, Clone, Default)]
struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    collocation: Vec<f64>,
    barycentric: Vec<f64>,
}

impl Rule {
    fn new(size: usize) -> Self {
        let m = (2 * size + 1) as f64;
        let nodes: Vec<f64> = (1..=size).map(|k| (2.0 * k as f64 * PI / m).cos()).collect();
        let weights = nodes.iter().map(|t| 2.0 * (1.0 - t) / m).collect();
        let collocation = (1..=size).map(|j| ((2 * j - 1) as f64 * PI / m).cos()).collect();
        let mut barycentric: Vec<f64> = nodes
            .iter()
            .enumerate()
            .map(|(k, tk)| {
                let prod: f64 = nodes
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != k)
                    .map(|(_, tj)| 2.0 * (tk - tj))
                    .product();
                1.0 / prod
            })
            .collect();
        let scale = barycentric.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        barycentric.iter_mut().for_each(|w| *w /= scale);
        Self {
            nodes,
            weights,
            collocation,
            barycentric,
        }
    }

    fn interpolate(&self, t: f64, g: &[f64]) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for ((tk, wk), gk) in self.nodes.iter().zip(&self.barycentric).zip(g) {
            let d = t - tk;
            if d == 0.0 {
                return *gk;
            }
            num += wk * gk / d;
            den += wk / d;
        }
        num / den
    }

    fn system(&self, c: f64, length: f64) -> DMatrix<f64> {
        let n = self.nodes.len();
        DMatrix::from_fn(n, n, |j, k| {
            let (tau, t) = (self.collocation[j], self.nodes[k]);
            let singular = -(c / PI) * self.weights[k] / (t - tau);
            let regular = 0.5 * length * PI * self.weights[k] * c * c * phi_regular(0.5 * c * length * (tau - t));
            singular + regular
        })
    }

    fn mass(&self, g: &[f64], length: f64) -> f64 {
        0.5 * length * PI * self.weights.iter().zip(g).map(|(w, g)| w * g).sum::<f64>()
    }

    fn solve(&self, c: f64, length: f64) -> Result<Vec<f64>, ContinuumError> {
        let a = self.system(c, length);
        let rhs = DVector::from_element(self.nodes.len(), 1.0);
        let g = a.lu().solve(&rhs).ok_or(ContinuumError::SingularSystem)?;
        Ok(g.iter().copied().collect())
    }

    fn residual_at(&self, tau: f64, g: &[f64], c: f64, length: f64) -> f64 {
        let g_tau = self.interpolate(tau, g);
        // (1/π) PV ∫ w(t) g(t)/(t - τ) dt = -g(τ) + Σ W_k (g_k - g(τ))/(t_k - τ)
        let mut pv = -g_tau;
        let mut regular = 0.0;
        for ((t, w), gk) in self.nodes.iter().zip(&self.weights).zip(g) {
            let d = t - tau;
            if d != 0.0 {
                pv += w * (gk - g_tau) / d;
            }
            regular += w * gk * phi_regular(0.5 * c * length * (tau - t));
        }
        -(c / PI) * pv + 0.5 * length * PI * c * c * regular - 1.0
    }
}

/// Solve the first critical equation for `c = nβ`.
pub fn solve_first_critical(c: f64, settings: &IntegralSolveSettings) -> Result<FirstCriticalSolution, ContinuumError> {
    settings.validate()?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(ContinuumError::NonPositive { name: "c", value: c });
    }
    let rule = Rule::new(settings.grid_size);
    let mass_defect = |length: f64| match rule.solve(c, length) {
        Ok(g) => rule.mass(&g, length) - 1.0,
        Err(_) => f64::NAN,
    };
    // small supports follow the logarithmic-kernel limit L ≈ 2c/π²
    let lower = (0.01 * c / (PI * PI)).min(0.01 * settings.domain_cutoff);
    let length = brent(mass_defect, lower, settings.domain_cutoff, 1e-15, 200)?;
    let g = rule.solve(c, length)?;

    let a = rule.system(c, length);
    let residual_vec = &a * DVector::from_column_slice(&g) - DVector::from_element(g.len(), 1.0);
    let collocation_residual = residual_vec.amax();
    if collocation_residual > settings.linear_system_tolerance {
        return Err(ContinuumError::Residual {
            residual: collocation_residual,
            tolerance: settings.linear_system_tolerance,
        });
    }
    let off_node_residual = rule
        .collocation
        .windows(2)
        .map(|w| rule.residual_at(0.5 * (w[0] + w[1]), &g, c, length).abs())
        .fold(0.0, f64::max);

    let grid: Vec<f64> = stretched_grid(length, settings.output_points + 1, settings.grid_stretch).split_off(1);
    let mut values = Vec::with_capacity(grid.len());
    for &x in &grid {
        let t = 2.0 * x / length - 1.0;
        let v = jacobi_weight(t) * rule.interpolate(t, &g);
        if v < 0.0 {
            return Err(ContinuumError::NegativeDensity { x, value: v });
        }
        values.push(v);
    }
    let mass = rule.mass(&g, length);
    let density = DensityField::with_analytic_mass(grid, values, Frame::Dimensionless { length_scale: None }, mass)?
        .with_metadata("c", c)
        .with_metadata("support_length", length)
        .with_metadata("collocation_residual", collocation_residual)
        .with_metadata("off_node_residual", off_node_residual);
    Ok(FirstCriticalSolution {
        density,
        c,
        support_length: length,
        collocation_residual,
        off_node_residual,
        rule,
        g,
    })
}
