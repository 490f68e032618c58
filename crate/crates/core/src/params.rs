//! Physical description of a pile-up problem.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamsError {
    #[error("`{field}` must be positive and finite, got {value}")]
    NotPositive { field: &'static str, value: f64 },
    #[error("`n` must be at least 1")]
    NoWalls,
    #[error("`nu` must lie in [0, 0.5), got {0}")]
    PoissonRatio(f64),
    #[error("`K` = {given} disagrees with πGb/(2(1-ν)) = {computed}")]
    InconsistentPrefactor { given: f64, computed: f64 },
}

/// Isotropic elastic constants from which the stress prefactor can be built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElasticConstants {
    /// Shear modulus.
    #[serde(rename = "G")]
    pub g: f64,
    /// Burgers vector length.
    pub b: f64,
    /// Poisson ratio.
    pub nu: f64,
}

impl ElasticConstants {
    /// `K = πGb / (2(1-ν))`.
    pub fn prefactor(&self) -> f64 {
        PI * self.g * self.b / (2.0 * (1.0 - self.nu))
    }
}

/// Stress prefactor `K`, in-wall spacing `h`, applied stress `sigma` and the
/// number `n` of free walls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaterialParams {
    #[serde(rename = "K")]
    pub k: f64,
    pub h: f64,
    pub sigma: f64,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none", flatten)]
    pub elastic: Option<ElasticConstants>,
}

impl MaterialParams {
    pub fn new(k: f64, h: f64, sigma: f64, n: usize) -> Result<Self, ParamsError> {
        let p = Self {
            k,
            h,
            sigma,
            n,
            elastic: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn from_elastic(elastic: ElasticConstants, h: f64, sigma: f64, n: usize) -> Result<Self, ParamsError> {
        let p = Self {
            k: elastic.prefactor(),
            h,
            sigma,
            n,
            elastic: Some(elastic),
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters with applied stress chosen so that `β = sqrt(K/(nσh))`
    /// takes the given value.
    pub fn with_beta(k: f64, h: f64, n: usize, beta: f64) -> Result<Self, ParamsError> {
        positive("beta", beta)?;
        Self::new(k, h, k / (n as f64 * h * beta * beta), n)
    }

    pub fn validate(&self) -> Result<(), ParamsError> {
        positive("K", self.k)?;
        positive("h", self.h)?;
        positive("sigma", self.sigma)?;
        if self.n == 0 {
            return Err(ParamsError::NoWalls);
        }
        if let Some(e) = self.elastic {
            positive("G", e.g)?;
            positive("b", e.b)?;
            if !(0.0..0.5).contains(&e.nu) {
                return Err(ParamsError::PoissonRatio(e.nu));
            }
            let computed = e.prefactor();
            if ((self.k - computed) / computed).abs() > 1e-12 {
                return Err(ParamsError::InconsistentPrefactor {
                    given: self.k,
                    computed,
                });
            }
        }
        Ok(())
    }

    pub fn n_f64(&self) -> f64 {
        self.n as f64
    }
}

fn positive(field: &'static str, value: f64) -> Result<(), ParamsError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ParamsError::NotPositive { field, value })
    }
}
