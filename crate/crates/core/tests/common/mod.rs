//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use rand::Rng;

/// `s / sinh²(πs)` straight from the definition.
pub fn phi_direct(s: f64) -> f64 {
    s / (PI * s).sinh().powi(2)
}

/// Net stress on each free wall, written out without the library.
pub fn stresses(x: &[f64], k: f64, h: f64, sigma: f64) -> Vec<f64> {
    let y: Vec<f64> = std::iter::once(0.0).chain(x.iter().copied()).collect();
    (1..y.len())
        .map(|i| {
            let pair: f64 = (0..y.len()).filter(|&j| j != i).map(|j| phi_direct((y[i] - y[j]) / h)).sum();
            k / h * pair - sigma
        })
        .collect()
}

/// Damped gradient flow `x ← x + τ r(x)` with an adaptive step, run until the
/// stress residual drops below `tol · σ`.
pub fn gradient_flow(k: f64, h: f64, sigma: f64, n: usize, tol: f64) -> Vec<f64> {
    let mut x: Vec<f64> = (1..=n).map(|i| i as f64 * h).collect();
    let norm = |r: &[f64]| r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut r = stresses(&x, k, h, sigma);
    let mut tau = 0.1 * h * h / k;
    for _ in 0..5_000_000 {
        if norm(&r) < tol * sigma {
            return x;
        }
        let trial: Vec<f64> = x.iter().zip(&r).map(|(x, r)| x + tau * r).collect();
        let ordered = trial.iter().try_fold(0.0, |left, &v| (v > left).then_some(v)).is_some();
        if ordered {
            let r_trial = stresses(&trial, k, h, sigma);
            if norm(&r_trial) < norm(&r) {
                x = trial;
                r = r_trial;
                tau *= 1.2;
                continue;
            }
        }
        tau *= 0.5;
    }
    panic!("gradient flow did not reach {tol:e}");
}

/// Sorted positions in `(0, length]` with gaps at least `min_gap`.
pub fn random_configuration<R: Rng>(rng: &mut R, n: usize, length: f64, min_gap: f64) -> Vec<f64> {
    let mut gaps: Vec<f64> = (0..n).map(|_| min_gap + rng.gen::<f64>()).collect();
    let total: f64 = gaps.iter().sum();
    let scale = (length - n as f64 * min_gap).max(0.0) / (total - n as f64 * min_gap);
    gaps.iter_mut().for_each(|g| *g = min_gap + (*g - min_gap) * scale);
    gaps.iter()
        .scan(0.0, |x, g| {
            *x += g;
            Some(*x)
        })
        .collect()
}
