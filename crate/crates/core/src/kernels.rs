//! Interaction kernels between dislocation walls.
//!
//! `phi(s) = s / sinh²(πs)` is the stress exerted by a wall at separation `s`
//! (in units of the in-wall spacing), `v` its decaying primitive with
//! `v' = -phi`, and `psi(s) = 1/(π² s)` the single-slip-plane kernel. The
//! effective sums add up all neighbour contributions of an equispaced array.
//!
//! Every evaluation uses an overflow-safe exact form built on `exp_m1`; below
//! `small_arg_threshold` a Laurent/Taylor series takes over and above
//! `large_arg_threshold` a two-term exponential expansion.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::exp_poly_tail;

const PI2: f64 = PI * PI;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("kernel evaluated at zero separation")]
    SingularArgument,
    #[error("effective sum requires t > 0, got {0}")]
    Domain(f64),
    #[error("invalid kernel policy: {0}")]
    InvalidPolicy(String),
    #[error("invalid renormalization parameters: n = {n}, beta = {beta}")]
    InvalidRenormalization { n: usize, beta: f64 },
}

/// Branch selection and truncation controls for kernel evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelEvalPolicy {
    pub small_arg_threshold: f64,
    pub large_arg_threshold: f64,
    /// Relative bound on the neglected tail of an effective sum.
    pub tail_tolerance: f64,
    /// Beyond this many terms an effective sum falls back to its
    /// small-spacing asymptotic form.
    pub max_terms: u64,
}

impl Default for KernelEvalPolicy {
    fn default() -> Self {
        Self {
            small_arg_threshold: 1e-4,
            large_arg_threshold: 15.0,
            tail_tolerance: 1e-14,
            max_terms: 10_000_000,
        }
    }
}

/// Value of a truncated lattice sum together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveSum {
    pub value: f64,
    /// Number of summed terms (0 when the asymptotic form was used).
    pub terms: u64,
    /// Set when the term cap was hit and the asymptotic form was returned.
    pub asymptotic_fallback: bool,
}

impl KernelEvalPolicy {
    pub fn validate(&self) -> Result<(), KernelError> {
        let ok_small = self.small_arg_threshold.is_finite() && self.small_arg_threshold > 0.0;
        if !ok_small || !(self.large_arg_threshold > self.small_arg_threshold) || !self.large_arg_threshold.is_finite() {
            return Err(KernelError::InvalidPolicy(format!(
                "need 0 < small_arg_threshold < large_arg_threshold, got {} and {}",
                self.small_arg_threshold, self.large_arg_threshold
            )));
        }
        if !(self.tail_tolerance > 0.0) {
            return Err(KernelError::InvalidPolicy(format!(
                "tail_tolerance must be positive, got {}",
                self.tail_tolerance
            )));
        }
        if self.max_terms == 0 {
            return Err(KernelError::InvalidPolicy("max_terms must be positive".into()));
        }
        Ok(())
    }

    pub fn phi(&self, s: f64) -> Result<f64, KernelError> {
        nonzero(s)?;
        Ok(s.signum() * self.phi_pos(s.abs()))
    }

    pub fn phi_prime(&self, s: f64) -> Result<f64, KernelError> {
        nonzero(s)?;
        Ok(self.phi_prime_pos(s.abs()))
    }

    pub fn v(&self, s: f64) -> Result<f64, KernelError> {
        nonzero(s)?;
        Ok(self.v_pos(s.abs()))
    }

    fn phi_pos(&self, a: f64) -> f64 {
        if a < self.small_arg_threshold {
            let a2 = a * a;
            1.0 / (PI2 * a) - a / 3.0 + PI2 * a * a2 / 15.0 - 2.0 * PI2 * PI2 * a * a2 * a2 / 189.0
        } else if a > self.large_arg_threshold {
            let u = (-2.0 * PI * a).exp();
            4.0 * a * u * (1.0 + 2.0 * u)
        } else {
            let u = (-2.0 * PI * a).exp();
            let em = -(-2.0 * PI * a).exp_m1();
            4.0 * a * u / (em * em)
        }
    }

    fn phi_prime_pos(&self, a: f64) -> f64 {
        if a < self.small_arg_threshold {
            let a2 = a * a;
            -1.0 / (PI2 * a2) - 1.0 / 3.0 + PI2 * a2 / 5.0 - 10.0 * PI2 * PI2 * a2 * a2 / 189.0
        } else if a > self.large_arg_threshold {
            let u = (-2.0 * PI * a).exp();
            4.0 * u * (1.0 - 2.0 * PI * a) + 8.0 * u * u * (1.0 - 4.0 * PI * a)
        } else {
            let u = (-2.0 * PI * a).exp();
            let em = -(-2.0 * PI * a).exp_m1();
            4.0 * u / (em * em) * (1.0 - 2.0 * PI * a * (1.0 + u) / em)
        }
    }

    fn v_pos(&self, a: f64) -> f64 {
        if a < self.small_arg_threshold {
            let x = PI * a;
            let x2 = x * x;
            (1.0 - (2.0 * x).ln() + x2 / 6.0 - x2 * x2 / 60.0 + x2 * x2 * x2 / 567.0) / PI2
        } else if a > self.large_arg_threshold {
            let u = (-2.0 * PI * a).exp();
            2.0 * a / PI * u * (1.0 + u) + u / PI2 * (1.0 + 0.5 * u)
        } else {
            let u = (-2.0 * PI * a).exp();
            let em = -(-2.0 * PI * a).exp_m1();
            2.0 * a * u / (PI * em) - (-u).ln_1p() / PI2
        }
    }

    /// `Σ_{k≥1} V(kt)`.
    pub fn v_eff(&self, t: f64) -> Result<EffectiveSum, KernelError> {
        self.lattice_sum(t, LatticeKind::Energy)
    }

    /// `Σ_{k≥1} k φ(kt)`: stress exerted on a wall by all walls on one side
    /// of an equispaced array with spacing `t`.
    pub fn phi_eff(&self, t: f64) -> Result<EffectiveSum, KernelError> {
        self.lattice_sum(t, LatticeKind::Stress)
    }

    /// `Σ_{k≥1} k² φ'(kt)`, the derivative of `phi_eff`.
    pub fn phi_eff_prime(&self, t: f64) -> Result<EffectiveSum, KernelError> {
        self.lattice_sum(t, LatticeKind::StressGradient)
    }

    fn lattice_sum(&self, t: f64, kind: LatticeKind) -> Result<EffectiveSum, KernelError> {
        self.validate()?;
        if !(t > 0.0) || !t.is_finite() {
            return Err(KernelError::Domain(t));
        }
        let fallback = EffectiveSum {
            value: kind.asymptotic(t),
            terms: 0,
            asymptotic_fallback: true,
        };
        // the tail bound only applies once k t >= 1
        if (1.0 / t).ceil() >= self.max_terms as f64 {
            log::warn!("effective sum at t = {t:e} exceeds the term cap; using the asymptotic form");
            return Ok(fallback);
        }
        let mut sum = 0.0;
        let mut k: u64 = 0;
        while k < self.max_terms {
            k += 1;
            let s = k as f64 * t;
            sum += match kind {
                LatticeKind::Energy => self.v_pos(s),
                LatticeKind::Stress => k as f64 * self.phi_pos(s),
                LatticeKind::StressGradient => (k as f64).powi(2) * self.phi_prime_pos(s),
            };
            let next = s + t;
            if next >= 1.0 && kind.tail_bound(next, t) <= self.tail_tolerance * sum.abs() {
                return Ok(EffectiveSum {
                    value: sum,
                    terms: k,
                    asymptotic_fallback: false,
                });
            }
        }
        log::warn!("effective sum at t = {t:e} hit the term cap; using the asymptotic form");
        Ok(fallback)
    }
}

#[derive(Debug, Clone, Copy)]
enum LatticeKind {
    Energy,
    Stress,
    StressGradient,
}

impl LatticeKind {
    /// Upper bound on the sum of all terms with `k t >= start`, valid for
    /// `start >= 1`, where each majorant `m(s)` is decreasing:
    /// `Σ_{k: kt ≥ start} m(kt) ≤ m(start) + (1/t) ∫_start^∞ m`.
    fn tail_bound(self, start: f64, t: f64) -> f64 {
        let u0 = (-2.0 * PI * start).exp();
        let d = 1.0 - u0;
        // polynomial coefficients of the majorant in s, times e^{-2πs}
        let (coeffs, scale): ([f64; 4], f64) = match self {
            // V(s) ≤ (2s/π + 1/π²) e^{-2πs} / (1 - u0)
            LatticeKind::Energy => ([1.0 / (PI2 * d), 2.0 / (PI * d), 0.0, 0.0], 1.0),
            // k φ(kt) = (1/t) sφ(s), sφ(s) ≤ 4 s² e^{-2πs} / (1 - u0)²
            LatticeKind::Stress => ([0.0, 0.0, 4.0 / (d * d), 0.0], 1.0 / t),
            // k² |φ'(kt)| = (1/t²) s²|φ'(s)| ≤ 8π(1+u0)/(1-u0)³ s³ e^{-2πs}
            LatticeKind::StressGradient => (
                [0.0, 0.0, 0.0, 8.0 * PI * (1.0 + u0) / (d * d * d)],
                1.0 / (t * t),
            ),
        };
        let at_start: f64 = coeffs.iter().rev().fold(0.0, |acc, c| acc * start + c) * u0;
        scale * (at_start + exp_poly_tail(start, &coeffs) / t)
    }

    /// Euler-Maclaurin leading terms for small spacing.
    fn asymptotic(self, t: f64) -> f64 {
        match self {
            LatticeKind::Energy => 1.0 / (6.0 * PI * t) - (1.0 - t.ln()) / (2.0 * PI2),
            LatticeKind::Stress => 1.0 / (6.0 * PI * t * t) - 1.0 / (2.0 * PI2 * t),
            LatticeKind::StressGradient => -1.0 / (3.0 * PI * t.powi(3)) + 1.0 / (2.0 * PI2 * t * t),
        }
    }
}

fn nonzero(s: f64) -> Result<(), KernelError> {
    if s == 0.0 {
        Err(KernelError::SingularArgument)
    } else {
        Ok(())
    }
}

/// `φ(s) = s / sinh²(πs)` with the default policy.
pub fn phi(s: f64) -> Result<f64, KernelError> {
    KernelEvalPolicy::default().phi(s)
}

/// `φ'(s)` with the default policy; even in `s` and negative.
pub fn phi_prime(s: f64) -> Result<f64, KernelError> {
    KernelEvalPolicy::default().phi_prime(s)
}

/// `V(s) = (1/π) s coth(πs) - (1/π²) ln(2 sinh πs)` with the default policy.
pub fn v(s: f64) -> Result<f64, KernelError> {
    KernelEvalPolicy::default().v(s)
}

/// Renormalized energy density `V(s) + (ln(2π n α) - 1)/π²` with `α = n β²`.
pub fn v_hat(s: f64, n: usize, beta: f64) -> Result<f64, KernelError> {
    Ok(v(s)? + v_hat_shift(n, beta)?)
}

/// The constant that `v_hat` adds to `V`.
pub fn v_hat_shift(n: usize, beta: f64) -> Result<f64, KernelError> {
    if n == 0 || !(beta > 0.0) || !beta.is_finite() {
        return Err(KernelError::InvalidRenormalization { n, beta });
    }
    let n_alpha = (n as f64).powi(2) * beta * beta;
    Ok(((2.0 * PI * n_alpha).ln() - 1.0) / PI2)
}

/// `ψ(s) = 1 / (π² s)`.
pub fn psi(s: f64) -> Result<f64, KernelError> {
    nonzero(s)?;
    Ok(1.0 / (PI2 * s))
}

pub fn psi_prime(s: f64) -> Result<f64, KernelError> {
    nonzero(s)?;
    Ok(-1.0 / (PI2 * s * s))
}

/// Primitive of `-ψ`: `-ln|s| / π²`.
pub fn psi_potential(s: f64) -> Result<f64, KernelError> {
    nonzero(s)?;
    Ok(-s.abs().ln() / PI2)
}

pub fn v_eff(t: f64, policy: &KernelEvalPolicy) -> Result<EffectiveSum, KernelError> {
    policy.v_eff(t)
}

pub fn phi_eff(t: f64, policy: &KernelEvalPolicy) -> Result<EffectiveSum, KernelError> {
    policy.phi_eff(t)
}

pub fn phi_eff_prime(t: f64, policy: &KernelEvalPolicy) -> Result<EffectiveSum, KernelError> {
    policy.phi_eff_prime(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    // 100-digit evaluations of the closed forms
    const REFERENCE: [(f64, f64, f64); 6] = [
        (1e-3, 101.32085030966241, 0.61500741172921493),
        (0.5, 0.094411292609366478, 0.018852598663037762),
        (0.7, 0.03530044915456388, 6.803027151679763e-3),
        (1.0, 7.497748009667408e-3, 1.380463630599051e-3),
        (2.0, 2.78989334355971955e-5, 4.7935799499943664e-6),
        (10.0, 2.0631600250171361e-26, 3.3358816176553295e-27),
    ];

    #[test]
    fn matches_high_precision_values() {
        for (s, p, e) in REFERENCE {
            assert!(rel(phi(s).unwrap(), p) < 1e-14, "phi({s})");
            assert!(rel(v(s).unwrap(), e) < 1e-13, "v({s})");
        }
        assert!(rel(phi(15.0).unwrap(), 7.0284674054099731e-40) < 1e-13);
        assert!(rel(v(15.0).unwrap(), 1.1304842072097277e-40) < 1e-13);
    }

    #[test]
    fn zero_argument_is_rejected() {
        assert_eq!(phi(0.0), Err(KernelError::SingularArgument));
        assert_eq!(v(0.0), Err(KernelError::SingularArgument));
        assert_eq!(psi(0.0), Err(KernelError::SingularArgument));
        assert_eq!(phi_prime(0.0), Err(KernelError::SingularArgument));
    }

    #[test]
    fn parity() {
        for s in [1e-6, 1e-4, 0.3, 2.0, 16.0, 300.0] {
            assert_eq!(phi(-s).unwrap(), -phi(s).unwrap());
            assert_eq!(v(-s).unwrap(), v(s).unwrap());
            assert_eq!(phi_prime(-s).unwrap(), phi_prime(s).unwrap());
            assert_eq!(psi(-s).unwrap(), -psi(s).unwrap());
        }
    }

    #[test]
    fn no_overflow_far_out() {
        for s in [200.0, 250.0, 1e3, 1e6] {
            assert!(phi(s).unwrap().is_finite() && phi(s).unwrap() >= 0.0);
            assert!(v(s).unwrap().is_finite() && v(s).unwrap() >= 0.0);
            assert!(phi_prime(s).unwrap() <= 0.0);
        }
    }

    #[test]
    fn small_argument_limits() {
        let s = 1e-6;
        assert!(rel(phi(s).unwrap() * PI2 * s, 1.0) < 1e-5);
        assert!(rel(psi(1.0).unwrap(), 0.10132118364233778) < 1e-15);
        assert!((phi(1e-3).unwrap() - psi(1e-3).unwrap()).abs() / psi(1e-3).unwrap() < 1e-3);
    }

    #[test]
    fn branches_join_continuously() {
        let p = KernelEvalPolicy::default();
        for edge in [p.small_arg_threshold, p.large_arg_threshold] {
            let lo = edge * (1.0 - 1e-15);
            let hi = edge * (1.0 + 1e-15);
            assert!(rel(p.phi(lo).unwrap(), p.phi(hi).unwrap()) < 1e-12);
            assert!(rel(p.v(lo).unwrap(), p.v(hi).unwrap()) < 1e-12);
            assert!(rel(p.phi_prime(lo).unwrap(), p.phi_prime(hi).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn v_hat_shift_is_constant_and_vanishes_at_unit_argument() {
        let shift = v_hat_shift(150, 0.01).unwrap();
        for s in [0.01, 0.5, 3.0] {
            assert!((v_hat(s, 150, 0.01).unwrap() - v(s).unwrap() - shift).abs() < 1e-15);
        }
        // 2π n α = 1 leaves only the -1/π² shift
        let n = 4;
        let beta = (1.0 / (2.0 * PI)).sqrt() / n as f64;
        assert!((v_hat_shift(n, beta).unwrap() + 1.0 / PI2).abs() < 1e-15);
        assert!(v_hat(1.0, 0, 1.0).is_err());
    }

    #[test]
    fn v_hat_approaches_log_potential() {
        let (n, beta) = (1usize, 1e-4);
        let scale = (n as f64 * beta).powi(2);
        for s in [0.3, 2.0, 7.0] {
            let got = v_hat(scale * s, n, beta).unwrap();
            let want = psi_potential(s).unwrap();
            assert!((got - want).abs() <= 1e-3 * want.abs().max(1e-2), "s = {s}: {got} vs {want}");
        }
    }

    #[test]
    fn effective_sums_at_large_spacing() {
        let p = KernelEvalPolicy::default();
        assert!(p.v_eff(10.0).unwrap().value - v(10.0).unwrap() < 1e-20);
        let ratio = p.phi_eff(10.0).unwrap().value / phi(10.0).unwrap();
        assert!((ratio - 1.0).abs() < 1e-6);
    }

    #[test]
    fn effective_sums_at_small_spacing() {
        let p = KernelEvalPolicy::default();
        let t = 1e-3;
        let ve = p.v_eff(t).unwrap();
        assert!(!ve.asymptotic_fallback);
        // 40-digit reference sums: t·v_eff·6π = 0.99245, 2t²φ_eff·3π = 0.99905
        assert!((t * ve.value * 6.0 * PI - 0.99245).abs() < 1e-5);
        let pe = p.phi_eff(t).unwrap().value;
        assert!((2.0 * t * t * pe * 3.0 * PI - 0.99905).abs() < 1e-5);
        let pp = p.phi_eff_prime(t).unwrap().value;
        assert!((pp * (-3.0 * PI * t.powi(3)) - 0.99952).abs() < 1e-5);
    }

    #[test]
    fn term_cap_switches_to_asymptotics() {
        let p = KernelEvalPolicy {
            max_terms: 1000,
            ..Default::default()
        };
        let t = 1e-4;
        let capped = p.phi_eff(t).unwrap();
        assert!(capped.asymptotic_fallback);
        let full = KernelEvalPolicy::default().phi_eff(t).unwrap();
        assert!(!full.asymptotic_fallback);
        assert!(rel(capped.value, full.value) < 1e-6);
        let ve = KernelEvalPolicy::default().v_eff(t).unwrap().value;
        assert!(rel(p.v_eff(t).unwrap().value, ve) < 1e-6);
        let pp = KernelEvalPolicy::default().phi_eff_prime(t).unwrap().value;
        assert!(rel(p.phi_eff_prime(t).unwrap().value, pp) < 1e-6);
    }

    #[test]
    fn effective_sum_domain() {
        let p = KernelEvalPolicy::default();
        assert!(matches!(p.phi_eff(0.0), Err(KernelError::Domain(_))));
        assert!(matches!(p.v_eff(-1.0), Err(KernelError::Domain(_))));
        let bad = KernelEvalPolicy {
            small_arg_threshold: 20.0,
            ..Default::default()
        };
        assert!(matches!(bad.phi_eff(1.0), Err(KernelError::InvalidPolicy(_))));
    }
}
