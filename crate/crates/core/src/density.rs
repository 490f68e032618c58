//! Sampled one-dimensional densities.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DensityError {
    #[error("grid and values differ in length ({grid} vs {values})")]
    LengthMismatch { grid: usize, values: usize },
    #[error("density needs at least two samples, got {0}")]
    TooFewSamples(usize),
    #[error("grid is not strictly increasing at index {0}")]
    UnorderedGrid(usize),
    #[error("density value at index {index} is negative or not finite: {value}")]
    InvalidValue { index: usize, value: f64 },
    #[error("density has non-positive mass {0}")]
    ZeroMass(f64),
    #[error("dimensionless field carries no length scale")]
    MissingLengthScale,
    #[error("frame mismatch: expected {expected}, found {found}")]
    FrameMismatch { expected: &'static str, found: &'static str },
}

/// Units in which positions (and hence densities) are expressed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Frame {
    Dimensional,
    /// Positions divided by `length_scale`; `None` for solutions of the
    /// parameter-free continuum equations.
    Dimensionless { length_scale: Option<f64> },
}

impl Frame {
    pub fn name(&self) -> &'static str {
        match self {
            Frame::Dimensional => "dimensional",
            Frame::Dimensionless { .. } => "dimensionless",
        }
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A nonnegative density sampled on a strictly increasing grid.
///
/// `mass` is the trapezoid integral of the samples unless the field was built
/// with [`DensityField::with_analytic_mass`], which is used for profiles with
/// an integrable singularity at the left end.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityField {
    grid: Vec<f64>,
    values: Vec<f64>,
    frame: Frame,
    mass: f64,
    singular_at_origin: bool,
    pub metadata: BTreeMap<String, f64>,
}

pub fn trapezoid(grid: &[f64], values: &[f64]) -> f64 {
    grid.windows(2)
        .zip(values.windows(2))
        .map(|(x, v)| 0.5 * (x[1] - x[0]) * (v[0] + v[1]))
        .sum()
}

impl DensityField {
    pub fn new(grid: Vec<f64>, values: Vec<f64>, frame: Frame) -> Result<Self, DensityError> {
        validate(&grid, &values)?;
        let mass = trapezoid(&grid, &values);
        if !(mass > 0.0) {
            return Err(DensityError::ZeroMass(mass));
        }
        Ok(Self {
            grid,
            values,
            frame,
            mass,
            singular_at_origin: false,
            metadata: BTreeMap::new(),
        })
    }

    /// A field whose mass is known in closed form, singular at `x = 0`.
    pub fn with_analytic_mass(grid: Vec<f64>, values: Vec<f64>, frame: Frame, mass: f64) -> Result<Self, DensityError> {
        validate(&grid, &values)?;
        if !(mass > 0.0) {
            return Err(DensityError::ZeroMass(mass));
        }
        Ok(Self {
            grid,
            values,
            frame,
            mass,
            singular_at_origin: true,
            metadata: BTreeMap::new(),
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn trapezoid_mass(&self) -> f64 {
        trapezoid(&self.grid, &self.values)
    }

    /// Whether the density behaves like `x^{-1/2}` towards `x = 0`.
    pub fn singular_at_origin(&self) -> bool {
        self.singular_at_origin
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn support(&self) -> (f64, f64) {
        (self.grid[0], self.grid[self.grid.len() - 1])
    }

    pub fn with_metadata(mut self, key: &str, value: f64) -> Self {
        self.metadata.insert(key.to_owned(), value);
        self
    }

    /// Piecewise-linear interpolant; `None` outside the sampled support.
    pub fn interpolate(&self, x: f64) -> Option<f64> {
        let (lo, hi) = self.support();
        if !(x >= lo && x <= hi) {
            return None;
        }
        let j = self.grid.partition_point(|&g| g <= x).clamp(1, self.grid.len() - 1);
        let (x0, x1) = (self.grid[j - 1], self.grid[j]);
        let w = (x - x0) / (x1 - x0);
        Some(self.values[j - 1] + w * (self.values[j] - self.values[j - 1]))
    }

    /// Second-order finite-difference derivative on the (possibly
    /// nonuniform) grid, one-sided at both ends.
    pub fn derivative(&self) -> Vec<f64> {
        let (x, f) = (&self.grid, &self.values);
        let m = x.len();
        if m == 2 {
            let d = (f[1] - f[0]) / (x[1] - x[0]);
            return vec![d, d];
        }
        let mut out = vec![0.0; m];
        for i in 1..m - 1 {
            let h1 = x[i] - x[i - 1];
            let h2 = x[i + 1] - x[i];
            out[i] = -h2 / (h1 * (h1 + h2)) * f[i - 1] + (h2 - h1) / (h1 * h2) * f[i] + h1 / (h2 * (h1 + h2)) * f[i + 1];
        }
        let (h1, h2) = (x[1] - x[0], x[2] - x[1]);
        out[0] = -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * f[0] + (h1 + h2) / (h1 * h2) * f[1] - h1 / (h2 * (h1 + h2)) * f[2];
        let (h1, h2) = (x[m - 1] - x[m - 2], x[m - 2] - x[m - 3]);
        out[m - 1] = (2.0 * h1 + h2) / (h1 * (h1 + h2)) * f[m - 1] - (h1 + h2) / (h1 * h2) * f[m - 2]
            + h1 / (h2 * (h1 + h2)) * f[m - 3];
        out
    }

    /// Multiply every value (and the mass) by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self, DensityError> {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        out.mass *= factor;
        if !(out.mass > 0.0) {
            return Err(DensityError::ZeroMass(out.mass));
        }
        Ok(out)
    }

    /// Dimensional field expressed in `x = x̃/ℓ`, `ρ = ρ̃ ℓ / n`, which maps
    /// mass `n` to mass 1.
    pub fn to_dimensionless(&self, length_scale: f64, n: f64) -> Result<Self, DensityError> {
        if self.frame != Frame::Dimensional {
            return Err(DensityError::FrameMismatch {
                expected: "dimensional",
                found: self.frame.name(),
            });
        }
        Ok(self.rescaled(
            1.0 / length_scale,
            length_scale / n,
            Frame::Dimensionless {
                length_scale: Some(length_scale),
            },
        ))
    }

    /// Inverse of [`DensityField::to_dimensionless`]. A field without a
    /// recorded length scale takes `length_scale`.
    pub fn to_dimensional(&self, n: f64, length_scale: Option<f64>) -> Result<Self, DensityError> {
        match (self.frame, length_scale) {
            (Frame::Dimensionless { length_scale: Some(l) }, _) | (Frame::Dimensionless { length_scale: None }, Some(l)) => {
                Ok(self.rescaled(l, n / l, Frame::Dimensional))
            }
            (Frame::Dimensionless { length_scale: None }, None) => Err(DensityError::MissingLengthScale),
            (Frame::Dimensional, _) => Err(DensityError::FrameMismatch {
                expected: "dimensionless",
                found: "dimensional",
            }),
        }
    }

    /// Same samples and metadata in another frame.
    pub fn relabeled(mut self, frame: Frame) -> Self {
        self.frame = frame;
        self
    }

    fn rescaled(&self, position_factor: f64, value_factor: f64, frame: Frame) -> Self {
        Self {
            grid: self.grid.iter().map(|x| x * position_factor).collect(),
            values: self.values.iter().map(|v| v * value_factor).collect(),
            frame,
            mass: self.mass * position_factor * value_factor,
            singular_at_origin: self.singular_at_origin,
            metadata: self.metadata.clone(),
        }
    }
}

fn validate(grid: &[f64], values: &[f64]) -> Result<(), DensityError> {
    if grid.len() != values.len() {
        return Err(DensityError::LengthMismatch {
            grid: grid.len(),
            values: values.len(),
        });
    }
    if grid.len() < 2 {
        return Err(DensityError::TooFewSamples(grid.len()));
    }
    if let Some(i) = grid.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(DensityError::UnorderedGrid(i + 1));
    }
    if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !(**v >= 0.0 && v.is_finite())) {
        return Err(DensityError::InvalidValue { index, value });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(f: impl Fn(f64) -> f64, m: usize) -> DensityField {
        let grid: Vec<f64> = (0..m).map(|i| (i as f64 / (m - 1) as f64).powi(2) * 2.0 + 0.1).collect();
        let values = grid.iter().map(|&x| f(x)).collect();
        DensityField::new(grid, values, Frame::Dimensional).unwrap()
    }

    #[test]
    fn rejects_bad_samples() {
        assert!(matches!(
            DensityField::new(vec![0.0, 0.0], vec![1.0, 1.0], Frame::Dimensional),
            Err(DensityError::UnorderedGrid(1))
        ));
        assert!(matches!(
            DensityField::new(vec![0.0, 1.0], vec![1.0, -1.0], Frame::Dimensional),
            Err(DensityError::InvalidValue { index: 1, .. })
        ));
        assert!(matches!(
            DensityField::new(vec![0.0, 1.0], vec![0.0, 0.0], Frame::Dimensional),
            Err(DensityError::ZeroMass(_))
        ));
    }

    #[test]
    fn derivative_is_exact_for_quadratics() {
        let f = field(|x| 3.0 * x * x - x + 2.0, 17);
        for (x, d) in f.grid().iter().zip(f.derivative()) {
            assert!((d - (6.0 * x - 1.0)).abs() < 1e-11, "{x}: {d}");
        }
    }

    #[test]
    fn interpolation_and_support() {
        let f = field(|x| 2.0 * x + 1.0, 9);
        assert!((f.interpolate(1.3).unwrap() - 3.6).abs() < 1e-14);
        assert_eq!(f.interpolate(0.0), None);
        assert_eq!(f.interpolate(f.support().1), Some(f.values()[8]));
    }

    #[test]
    fn frame_round_trip_preserves_samples() {
        let f = field(|x| (-x).exp(), 11);
        let d = f.to_dimensionless(4.0, 10.0).unwrap();
        assert!((d.mass() - f.mass() / 10.0).abs() < 1e-14);
        assert!((d.trapezoid_mass() - d.mass()).abs() < 1e-14);
        let back = d.to_dimensional(10.0, None).unwrap();
        for (a, b) in back.values().iter().zip(f.values()) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(matches!(d.to_dimensionless(1.0, 1.0), Err(DensityError::FrameMismatch { .. })));
    }
}
