//! Regime classification from the control parameter `β = sqrt(K/(nσh))`.
//!
//! The five regimes are ordered by increasing `β`. Two finite bands decide
//! where the critical regimes sit: `low_band` on `nβ` (first critical) and
//! `high_band` on `β` (second critical).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::MaterialParams;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScalingError {
    #[error("supercritical scaling needs 2K/(nhσ) > 1, got {log_argument}")]
    Inadmissible { log_argument: f64 },
    #[error("no closed-form pile-up length in the {0} regime; use the numerical continuum solver")]
    NoClosedForm(Regime),
    #[error("invalid classifier band {name}: [{min}, {max}] must be ordered, positive and contain 1")]
    InvalidBand { name: &'static str, min: f64, max: f64 },
    #[error("unknown regime `{0}`")]
    UnknownRegime(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Regime {
    Subcritical,
    FirstCritical,
    Intermediate,
    SecondCritical,
    Supercritical,
}

impl Regime {
    pub const ALL: [Regime; 5] = [
        Regime::Subcritical,
        Regime::FirstCritical,
        Regime::Intermediate,
        Regime::SecondCritical,
        Regime::Supercritical,
    ];

    /// 1-based position in the ordering by `β`.
    pub fn index(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_index(index: u8) -> Option<Self> {
        Self::ALL.get(usize::from(index).checked_sub(1)?).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::Subcritical => "Subcritical",
            Regime::FirstCritical => "FirstCritical",
            Regime::Intermediate => "Intermediate",
            Regime::SecondCritical => "SecondCritical",
            Regime::Supercritical => "Supercritical",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Regime {
    type Err = ScalingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Ok(i) = s.parse::<u8>() {
            return Regime::from_index(i).ok_or_else(|| ScalingError::UnknownRegime(s.into()));
        }
        Regime::ALL
            .into_iter()
            .find(|r| r.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| ScalingError::UnknownRegime(s.into()))
    }
}

/// Closed interval of a dimensionless control quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Band {
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifierThresholds {
    /// Band on `nβ` mapped to the first critical regime.
    pub low_band: Band,
    /// Band on `β` mapped to the second critical regime.
    pub high_band: Band,
}

impl Default for ClassifierThresholds {
    fn default() -> Self {
        Self {
            low_band: Band { min: 0.75, max: 10.0 },
            high_band: Band { min: 0.2, max: 5.0 },
        }
    }
}

impl ClassifierThresholds {
    pub fn validate(&self) -> Result<(), ScalingError> {
        for (name, b) in [("low_band", self.low_band), ("high_band", self.high_band)] {
            if !(b.min > 0.0 && b.min <= 1.0 && b.max >= 1.0 && b.max.is_finite()) {
                return Err(ScalingError::InvalidBand {
                    name,
                    min: b.min,
                    max: b.max,
                });
            }
        }
        Ok(())
    }
}

/// The two quantities compared against the classifier bands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryMargins {
    pub n_beta: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeClassification {
    pub regime: Regime,
    pub beta: f64,
    /// Aspect ratio `α_n = ℓ_n / (n h)`.
    pub alpha: f64,
    /// Scaling length `ℓ_n` (not the pile-up length).
    pub length_scale: f64,
    pub boundary_margins: BoundaryMargins,
    /// `c = nβ`, recorded for the first critical regime.
    pub c: Option<f64>,
}

impl RegimeClassification {
    /// Scaling data for a fixed regime, bypassing the classifier.
    pub fn for_regime(params: &MaterialParams, regime: Regime) -> Result<Self, ScalingError> {
        let b = beta(params);
        let length_scale = scaling_length(params, regime)?;
        let n = params.n_f64();
        Ok(Self {
            regime,
            beta: b,
            alpha: length_scale / (n * params.h),
            length_scale,
            boundary_margins: BoundaryMargins { n_beta: n * b, beta: b },
            c: (regime == Regime::FirstCritical).then_some(n * b),
        })
    }
}

/// `β = sqrt(K/(nσh))`.
pub fn beta(params: &MaterialParams) -> f64 {
    (params.k / (params.n_f64() * params.sigma * params.h)).sqrt()
}

pub fn classify(params: &MaterialParams, thresholds: &ClassifierThresholds) -> Result<RegimeClassification, ScalingError> {
    thresholds.validate()?;
    let b = beta(params);
    let nb = params.n_f64() * b;
    let regime = if b > thresholds.high_band.max {
        Regime::Supercritical
    } else if b >= thresholds.high_band.min {
        Regime::SecondCritical
    } else if nb > thresholds.low_band.max {
        Regime::Intermediate
    } else if nb >= thresholds.low_band.min {
        Regime::FirstCritical
    } else {
        Regime::Subcritical
    };
    RegimeClassification::for_regime(params, regime)
}

/// Scaling length `ℓ_n` balancing interaction and loading energy.
pub fn scaling_length(params: &MaterialParams, regime: Regime) -> Result<f64, ScalingError> {
    let MaterialParams { k, h, sigma, .. } = *params;
    let n = params.n_f64();
    match regime {
        Regime::Subcritical => Ok(k * n / sigma),
        Regime::FirstCritical | Regime::Intermediate | Regime::SecondCritical => Ok((k * n * h / sigma).sqrt()),
        Regime::Supercritical => {
            let log_argument = 2.0 * k / (n * h * sigma);
            if log_argument <= 1.0 {
                return Err(ScalingError::Inadmissible { log_argument });
            }
            Ok(n * h / (2.0 * PI) * log_argument.ln())
        }
    }
}

/// Physical extent of the equilibrium pile-up where a closed form exists.
pub fn pileup_length(params: &MaterialParams, regime: Regime) -> Result<f64, ScalingError> {
    let MaterialParams { k, h, sigma, .. } = *params;
    let n = params.n_f64();
    match regime {
        Regime::Subcritical => Ok(2.0 * n * k / (PI * PI * sigma)),
        Regime::Intermediate => Ok((2.0 * n * k * h / (3.0 * PI * sigma)).sqrt()),
        Regime::Supercritical => scaling_length(params, regime),
        Regime::FirstCritical | Regime::SecondCritical => Err(ScalingError::NoClosedForm(regime)),
    }
}
