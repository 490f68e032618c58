//! Discrete wall equilibria.
//!
//! `n` free walls at `0 < x_1 < … < x_n` interact pairwise with each other and
//! with a wall pinned at the origin, and are pushed towards it by the applied
//! stress. Equilibrium means zero net stress on every free wall:
//!
//! ```text
//! (K/h) Σ_{j≠i} φ((x_i - x_j)/h) - σ = 0,   i = 1..n,  x_0 = 0.
//! ```
//!
//! The solver works in units of `h` with `λ = K/(hσ)`, where the scaled
//! energy `e(s) = λ Σ_{i<j} P(s_j - s_i) + Σ s_i` has gradient `-r` and a
//! Hessian that is a symmetric M-matrix (every off-diagonal entry is
//! `λ f'(s_i - s_j) < 0`). Damped Newton with backtracking on `e` therefore
//! always has a descent direction.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::{DensityError, DensityField, Frame};
use crate::kernels::{self, KernelError, KernelEvalPolicy};
use crate::params::{MaterialParams, ParamsError};
use crate::scaling::{self, ClassifierThresholds, Regime, RegimeClassification, ScalingError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiscreteError {
    #[error("wall {index} is not strictly to the right of its left neighbour")]
    Unordered { index: usize },
    #[error("walls {} and {index} coincide", .index - 1)]
    Coincident { index: usize },
    #[error("wall position {index} is not finite")]
    NotFinite { index: usize },
    #[error("configuration has no walls")]
    Empty,
    #[error("expected {expected} positions, found {found}")]
    WrongCount { expected: usize, found: usize },
    #[error("configuration is in the {found} frame, expected {expected}")]
    FrameMismatch { expected: &'static str, found: &'static str },
    #[error("dimensionless configuration uses length scale {found}, the regime uses {expected}")]
    LengthScaleMismatch { expected: f64, found: f64 },
    #[error("invalid solver settings: {0}")]
    Settings(String),
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Scaling(#[from] ScalingError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Convergence(#[from] Box<ConvergenceFailure>),
}

/// Best iterate of a solve that did not reach the residual tolerance.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("no convergence after {iterations} iterations: max residual {residual_norm:e} (relative to σ)")]
pub struct ConvergenceFailure {
    pub best: WallConfiguration,
    pub residual_norm: f64,
    pub iterations: usize,
}

/// Ordered free-wall positions; the pinned wall at 0 is implicit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WallConfiguration {
    positions: Vec<f64>,
    frame: Frame,
}

impl WallConfiguration {
    pub fn new(positions: Vec<f64>, frame: Frame) -> Result<Self, DiscreteError> {
        if positions.is_empty() {
            return Err(DiscreteError::Empty);
        }
        let mut left = 0.0;
        for (i, &x) in positions.iter().enumerate() {
            let index = i + 1;
            if !x.is_finite() {
                return Err(DiscreteError::NotFinite { index });
            }
            if x == left {
                return Err(DiscreteError::Coincident { index });
            }
            if x < left {
                return Err(DiscreteError::Unordered { index });
            }
            left = x;
        }
        Ok(Self { positions, frame })
    }

    pub fn dimensional(positions: Vec<f64>) -> Result<Self, DiscreteError> {
        Self::new(positions, Frame::Dimensional)
    }

    /// `n` walls at `ℓ i / n`.
    pub fn equispaced(n: usize, length: f64, frame: Frame) -> Result<Self, DiscreteError> {
        Self::new((1..=n).map(|i| length * i as f64 / n as f64).collect(), frame)
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Positions divided by `length_scale`.
    pub fn to_dimensionless(&self, length_scale: f64) -> Result<Self, DiscreteError> {
        self.require_dimensional()?;
        Self::new(
            self.positions.iter().map(|x| x / length_scale).collect(),
            Frame::Dimensionless {
                length_scale: Some(length_scale),
            },
        )
    }

    pub fn to_dimensional(&self) -> Result<Self, DiscreteError> {
        match self.frame {
            Frame::Dimensionless {
                length_scale: Some(length_scale),
            } => Self::dimensional(self.positions.iter().map(|x| x * length_scale).collect()),
            Frame::Dimensionless { length_scale: None } => Err(DiscreteError::Density(DensityError::MissingLengthScale)),
            Frame::Dimensional => Err(DiscreteError::FrameMismatch {
                expected: "dimensionless",
                found: "dimensional",
            }),
        }
    }

    fn require_dimensional(&self) -> Result<(), DiscreteError> {
        match self.frame {
            Frame::Dimensional => Ok(()),
            other => Err(DiscreteError::FrameMismatch {
                expected: "dimensional",
                found: other.name(),
            }),
        }
    }

    /// Positions with the pinned wall prepended.
    fn with_origin(&self) -> Vec<f64> {
        std::iter::once(0.0).chain(self.positions.iter().copied()).collect()
    }
}

/// Pair law between walls (or single dislocations).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairInteraction {
    /// Walls of edge dislocations: stress `φ`, potential `V`.
    Wall(KernelEvalPolicy),
    /// Single slip plane: stress `ψ = 1/(π² s)`, potential `-ln|s|/π²`.
    SingleSlipPlane,
}

impl PairInteraction {
    fn stress(&self, s: f64) -> Result<f64, KernelError> {
        match self {
            PairInteraction::Wall(p) => p.phi(s),
            PairInteraction::SingleSlipPlane => kernels::psi(s),
        }
    }

    fn stress_prime(&self, s: f64) -> Result<f64, KernelError> {
        match self {
            PairInteraction::Wall(p) => p.phi_prime(s),
            PairInteraction::SingleSlipPlane => kernels::psi_prime(s),
        }
    }

    fn potential(&self, s: f64) -> Result<f64, KernelError> {
        match self {
            PairInteraction::Wall(p) => p.v(s),
            PairInteraction::SingleSlipPlane => kernels::psi_potential(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialGuess {
    /// Equispaced on `(0, ℓ_n]` with `ℓ_n` from the classified regime.
    EquispacedAtRegimeLength,
    /// Dimensional positions supplied by the caller.
    UserSupplied(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveSettings {
    /// Bound on `max_i |residual_i| / σ`.
    pub residual_tolerance: f64,
    pub max_iterations: usize,
    pub line_search_shrink: f64,
    pub initial_guess: InitialGuess,
    pub classifier: ClassifierThresholds,
    pub kernel_policy: KernelEvalPolicy,
}

impl Default for SolveSettings {
    fn default() -> Self {
        Self {
            residual_tolerance: 1e-10,
            max_iterations: 200,
            line_search_shrink: 0.5,
            initial_guess: InitialGuess::EquispacedAtRegimeLength,
            classifier: ClassifierThresholds::default(),
            kernel_policy: KernelEvalPolicy::default(),
        }
    }
}

impl SolveSettings {
    pub fn validate(&self) -> Result<(), DiscreteError> {
        if !(self.residual_tolerance > 0.0) {
            return Err(DiscreteError::Settings("residual_tolerance must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(DiscreteError::Settings("max_iterations must be at least 1".into()));
        }
        if !(self.line_search_shrink > 0.0 && self.line_search_shrink < 1.0) {
            return Err(DiscreteError::Settings("line_search_shrink must lie in (0, 1)".into()));
        }
        self.kernel_policy.validate()?;
        self.classifier.validate()?;
        Ok(())
    }
}

/// Converged configuration with solver diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Equilibrium {
    pub configuration: WallConfiguration,
    pub iterations: usize,
    /// `max_i |residual_i| / σ` at the returned configuration.
    pub residual_norm: f64,
    /// Dimensional energy after every accepted iterate, starting with the
    /// initial guess.
    pub energy_history: Vec<f64>,
}

/// Energy as the symmetric double sum `(K/2) Σ_{i≠j} V((x_i - x_j)/h) + σ Σ x_i`.
pub fn dimensional_energy(config: &WallConfiguration, params: &MaterialParams) -> Result<f64, DiscreteError> {
    config.require_dimensional()?;
    params.validate()?;
    let y = config.with_origin();
    let mut pair = 0.0;
    for (i, &yi) in y.iter().enumerate() {
        for (j, &yj) in y.iter().enumerate() {
            if i != j {
                pair += kernels::v((yi - yj) / params.h)?;
            }
        }
    }
    Ok(0.5 * params.k * pair + params.sigma * config.positions.iter().sum::<f64>())
}

/// Same energy written over neighbour order `k`: `K Σ_k Σ_j V((x_{j+k} - x_j)/h) + σ Σ x_j`.
pub fn dimensional_energy_one_sided(config: &WallConfiguration, params: &MaterialParams) -> Result<f64, DiscreteError> {
    config.require_dimensional()?;
    params.validate()?;
    let y = config.with_origin();
    let n = config.len();
    let mut pair = 0.0;
    for k in 1..=n {
        for j in 0..=n - k {
            pair += kernels::v((y[j + k] - y[j]) / params.h)?;
        }
    }
    Ok(params.k * pair + params.sigma * config.positions.iter().sum::<f64>())
}

/// Rescaled energy `Ẽ(nhα x) / (n²σhα)` of a dimensionless configuration.
///
/// The subcritical form uses the renormalized kernel `V̂_n` with prefactor
/// `1/n²`; every other regime uses `V` with prefactor `K/(n²σhα)` and argument
/// `nα (x_j - x_i)`.
pub fn dimensionless_energy(
    config: &WallConfiguration,
    params: &MaterialParams,
    regime: &RegimeClassification,
) -> Result<f64, DiscreteError> {
    params.validate()?;
    match config.frame {
        Frame::Dimensionless { length_scale } => {
            let length_scale = length_scale.unwrap_or(f64::NAN);
            if !(((length_scale - regime.length_scale) / regime.length_scale).abs() <= 1e-12) {
                return Err(DiscreteError::LengthScaleMismatch {
                    expected: regime.length_scale,
                    found: length_scale,
                });
            }
        }
        Frame::Dimensional => {
            return Err(DiscreteError::FrameMismatch {
                expected: "dimensionless",
                found: "dimensional",
            })
        }
    }
    if config.len() != params.n {
        return Err(DiscreteError::WrongCount {
            expected: params.n,
            found: config.len(),
        });
    }
    let n = params.n_f64();
    let n_alpha = n * regime.alpha;
    let (prefactor, shift) = match regime.regime {
        Regime::Subcritical => (1.0 / (n * n), kernels::v_hat_shift(params.n, regime.beta)?),
        _ => (params.k / (n * n * params.sigma * params.h * regime.alpha), 0.0),
    };
    let y = config.with_origin();
    let mut pair = 0.0;
    for k in 1..=params.n {
        for j in 0..=params.n - k {
            pair += kernels::v(n_alpha * (y[j + k] - y[j]))? + shift;
        }
    }
    Ok(prefactor * pair + config.positions.iter().sum::<f64>() / n)
}

/// Net stress on each free wall, `(K/h) Σ_{j≠i} φ((x_i - x_j)/h) - σ`.
pub fn residual(config: &WallConfiguration, params: &MaterialParams) -> Result<Vec<f64>, DiscreteError> {
    residual_with(config, params, PairInteraction::Wall(KernelEvalPolicy::default()))
}

pub fn residual_with(
    config: &WallConfiguration,
    params: &MaterialParams,
    interaction: PairInteraction,
) -> Result<Vec<f64>, DiscreteError> {
    config.require_dimensional()?;
    params.validate()?;
    let s: Vec<f64> = config.positions.iter().map(|x| x / params.h).collect();
    let problem = Scaled::new(params, interaction);
    Ok(problem.residual(&gaps(&s))?.iter().map(|r| params.sigma * r).collect())
}

/// Equilibrium of the wall model.
pub fn solve_equilibrium(params: &MaterialParams, settings: &SolveSettings) -> Result<Equilibrium, DiscreteError> {
    settings.validate()?;
    params.validate()?;
    let length = match settings.initial_guess {
        InitialGuess::EquispacedAtRegimeLength => Some(scaling::classify(params, &settings.classifier)?.length_scale),
        InitialGuess::UserSupplied(_) => None,
    };
    solve(params, settings, PairInteraction::Wall(settings.kernel_policy), length)
}

/// Equilibrium of `n` dislocations on one slip plane with kernel `ψ`, pinned
/// dislocation at the origin included. The default start is equispaced on
/// `(0, Kn/σ]`.
pub fn solve_efn(params: &MaterialParams, settings: &SolveSettings) -> Result<Equilibrium, DiscreteError> {
    settings.validate()?;
    params.validate()?;
    let length = scaling::scaling_length(params, Regime::Subcritical)?;
    solve(params, settings, PairInteraction::SingleSlipPlane, Some(length))
}

/// Discrete density `1/(x_i - x_{i-1})` at each wall, `x_0 = 0`. Needs at
/// least two walls, since a field of one sample has no mass.
///
/// For a dimensionless configuration the values are divided by `n` so that
/// the field agrees with [`DensityField::to_dimensionless`].
pub fn discrete_density(config: &WallConfiguration) -> Result<DensityField, DiscreteError> {
    let scale = match config.frame {
        Frame::Dimensional => 1.0,
        Frame::Dimensionless { .. } => 1.0 / config.len() as f64,
    };
    let y = config.with_origin();
    let values = y.windows(2).map(|w| scale / (w[1] - w[0])).collect();
    Ok(DensityField::new(config.positions.clone(), values, config.frame)?)
}

/// Problem in units of `h`, `λ = K/(hσ)`.
struct Scaled {
    lambda: f64,
    interaction: PairInteraction,
}

impl Scaled {
    fn new(params: &MaterialParams, interaction: PairInteraction) -> Self {
        Self {
            lambda: params.k / (params.h * params.sigma),
            interaction,
        }
    }

    fn energy(&self, g: &[f64]) -> Result<f64, KernelError> {
        let mut pair = 0.0;
        pairs(g, |_, _, d| {
            pair += self.interaction.potential(d)?;
            Ok(())
        })?;
        let load: f64 = positions(g).iter().sum();
        Ok(self.lambda * pair + load)
    }

    fn residual(&self, g: &[f64]) -> Result<Vec<f64>, KernelError> {
        let mut force = vec![0.0; g.len() + 1];
        pairs(g, |i, j, d| {
            let f = self.interaction.stress(d)?;
            force[i] += f;
            force[j] -= f;
            Ok(())
        })?;
        Ok(force[1..].iter().map(|f| self.lambda * f - 1.0).collect())
    }

    /// Hessian of the scaled energy in the positions, `-∂r/∂s`.
    fn hessian(&self, g: &[f64]) -> Result<DMatrix<f64>, KernelError> {
        let n = g.len();
        let mut h = DMatrix::<f64>::zeros(n, n);
        pairs(g, |i, j, d| {
            let d = self.lambda * self.interaction.stress_prime(d)?;
            h[(i - 1, i - 1)] -= d;
            if j > 0 {
                h[(i - 1, j - 1)] = d;
                h[(j - 1, i - 1)] = d;
                h[(j - 1, j - 1)] -= d;
            }
            Ok(())
        })?;
        Ok(h)
    }
}

/// Visit every pair `j < i` of walls, the pinned one having index 0, with
/// their separation accumulated from the gaps. Working with gaps keeps
/// nearest-neighbour separations exact when the positions are large.
fn pairs<F>(g: &[f64], mut visit: F) -> Result<(), KernelError>
where
    F: FnMut(usize, usize, f64) -> Result<(), KernelError>,
{
    for j in 0..g.len() {
        let mut d = 0.0;
        for (i, gap) in g.iter().enumerate().skip(j) {
            d += gap;
            visit(i + 1, j, d)?;
        }
    }
    Ok(())
}

fn positions(g: &[f64]) -> Vec<f64> {
    g.iter()
        .scan(0.0, |x, gap| {
            *x += gap;
            Some(*x)
        })
        .collect()
}

fn gaps(s: &[f64]) -> Vec<f64> {
    std::iter::once(0.0).chain(s.iter().copied()).collect::<Vec<_>>().windows(2).map(|w| w[1] - w[0]).collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn admissible(g: &[f64], min_gap: f64) -> bool {
    g.iter().all(|&d| d.is_finite() && d >= min_gap)
}

fn solve(
    params: &MaterialParams,
    settings: &SolveSettings,
    interaction: PairInteraction,
    guess_length: Option<f64>,
) -> Result<Equilibrium, DiscreteError> {
    let h = params.h;
    let start = match (&settings.initial_guess, guess_length) {
        (InitialGuess::UserSupplied(x), _) => {
            if x.len() != params.n {
                return Err(DiscreteError::WrongCount {
                    expected: params.n,
                    found: x.len(),
                });
            }
            WallConfiguration::dimensional(x.clone())?
        }
        (_, Some(length)) => WallConfiguration::equispaced(params.n, length, Frame::Dimensional)?,
        (_, None) => unreachable!("regime length is computed for the equispaced guess"),
    };
    let length_scale = guess_length.unwrap_or_else(|| start.positions[params.n - 1]);
    let min_gap = 1e-12 * length_scale / h;
    let problem = Scaled::new(params, interaction);
    let energy_scale = params.sigma * h;

    // iterate on the gaps; Newton directions are formed in the positions
    let mut g = gaps(&start.positions.iter().map(|x| x / h).collect::<Vec<_>>());
    let mut e = problem.energy(&g)?;
    let mut r = problem.residual(&g)?;
    let mut norm = max_abs(&r);
    let mut history = vec![energy_scale * e];
    let mut iterations = 0;

    let failure = |g: &[f64], norm: f64, iterations: usize| -> DiscreteError {
        let best = WallConfiguration::dimensional(positions(g).iter().map(|x| x * h).collect())
            .expect("iterates stay ordered");
        DiscreteError::Convergence(Box::new(ConvergenceFailure {
            best,
            residual_norm: norm,
            iterations,
        }))
    };

    while norm >= settings.residual_tolerance {
        if iterations == settings.max_iterations {
            return Err(failure(&g, norm, iterations));
        }
        iterations += 1;
        let hess = problem.hessian(&g)?;
        let rhs = DVector::from_column_slice(&r);
        let newton = hess.clone().cholesky().map(|c| c.solve(&rhs));
        let mut directions = Vec::with_capacity(2);
        if let Some(p) = newton {
            directions.push(p);
        }
        // steepest descent, scaled by the inverse Hessian diagonal
        directions.push(DVector::from_iterator(r.len(), r.iter().enumerate().map(|(i, ri)| ri / hess[(i, i)])));

        let mut accepted = None;
        for p in directions {
            let slope = -rhs.dot(&p);
            if !(slope < 0.0) {
                continue;
            }
            let mut step = 1.0;
            while step > 1e-16 {
                let mut left = 0.0;
                let trial: Vec<f64> = g
                    .iter()
                    .zip(p.iter())
                    .map(|(gap, dp)| {
                        let d = gap + step * (dp - left);
                        left = *dp;
                        d
                    })
                    .collect();
                if admissible(&trial, min_gap) {
                    let e_trial = problem.energy(&trial)?;
                    let armijo = e_trial <= e + 1e-4 * step * slope;
                    let roundoff = (e_trial - e).abs() <= 64.0 * f64::EPSILON * e.abs().max(1.0);
                    if armijo || roundoff {
                        let r_trial = problem.residual(&trial)?;
                        let n_trial = max_abs(&r_trial);
                        if armijo || n_trial < norm {
                            accepted = Some((trial, e_trial, r_trial, n_trial));
                            break;
                        }
                    }
                }
                step *= settings.line_search_shrink;
            }
            if accepted.is_some() {
                break;
            }
        }
        match accepted {
            Some((trial, e_trial, r_trial, n_trial)) => {
                g = trial;
                e = e_trial;
                r = r_trial;
                norm = n_trial;
                history.push(energy_scale * e);
            }
            None => return Err(failure(&g, norm, iterations)),
        }
        log::debug!("iteration {iterations}: residual {norm:e}, energy {e:e}");
    }

    Ok(Equilibrium {
        configuration: WallConfiguration::dimensional(positions(&g).iter().map(|x| x * h).collect())?,
        iterations,
        residual_norm: norm,
        energy_history: history,
    })
}
