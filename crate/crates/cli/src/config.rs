//! JSON run configuration.

use std::fmt;

use pileup_core::compare::CompareSettings;
use pileup_core::params::{ElasticConstants, MaterialParams, ParamsError};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Classify,
    SolveDiscrete,
    SolveEfn,
    SolveContinuum,
    Compare,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::SolveDiscrete => "solve-discrete",
            Command::SolveEfn => "solve-efn",
            Command::SolveContinuum => "solve-continuum",
            Command::Compare => "compare",
            Command::Sweep => "sweep",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What each sweep instance computes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepCommand {
    Classify,
    #[default]
    Compare,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub format: Format,
    /// Standard output when absent.
    pub path: Option<String>,
}

/// Problem parameters as written in a config. Either `sigma` or `beta` fixes
/// the load, and `K` may be replaced by the elastic constants `G`, `b`, `nu`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(rename = "G", default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
}

impl ProblemSpec {
    /// `self` with every field set in `over` replaced. Setting one of
    /// `sigma`/`beta` clears the other.
    pub fn merged(&self, over: &ProblemSpec) -> ProblemSpec {
        let mut out = self.clone();
        let pick = |a: &mut Option<f64>, b: Option<f64>| {
            if b.is_some() {
                *a = b;
            }
        };
        pick(&mut out.k, over.k);
        pick(&mut out.h, over.h);
        pick(&mut out.g, over.g);
        pick(&mut out.b, over.b);
        pick(&mut out.nu, over.nu);
        if over.n.is_some() {
            out.n = over.n;
        }
        if over.sigma.is_some() {
            out.sigma = over.sigma;
            out.beta = None;
        }
        if over.beta.is_some() {
            out.beta = over.beta;
            out.sigma = None;
        }
        out
    }

    /// Validated parameters; errors name the offending key below `path`.
    pub fn resolve(&self, path: &str) -> Result<MaterialParams, CliError> {
        let at = |key: &str| format!("{path}.{key}");
        let missing = |key: &str| CliError::config(at(key), "missing required field");
        let h = self.h.ok_or_else(|| missing("h"))?;
        let n = self.n.ok_or_else(|| missing("n"))?;
        let elastic = match (self.g, self.b, self.nu) {
            (None, None, None) => None,
            (Some(g), Some(b), Some(nu)) => Some(ElasticConstants { g, b, nu }),
            _ => return Err(CliError::config(at("G"), "`G`, `b` and `nu` must be given together")),
        };
        let k = match (self.k, elastic) {
            (Some(k), _) => k,
            (None, Some(e)) => e.prefactor(),
            (None, None) => return Err(missing("K")),
        };
        let sigma = match (self.sigma, self.beta) {
            (Some(s), None) => s,
            (None, Some(beta)) => {
                let p = MaterialParams::with_beta(k, h, n.max(1), beta).map_err(|e| params_error(path, e))?;
                p.sigma
            }
            (None, None) => return Err(missing("sigma")),
            (Some(_), Some(_)) => return Err(CliError::config(at("beta"), "give `sigma` or `beta`, not both")),
        };
        let p = MaterialParams {
            k,
            h,
            sigma,
            n,
            elastic,
        };
        p.validate().map_err(|e| params_error(path, e))?;
        Ok(p)
    }

    pub fn from_params(p: &MaterialParams) -> Self {
        Self {
            k: Some(p.k),
            h: Some(p.h),
            sigma: Some(p.sigma),
            n: Some(p.n),
            g: p.elastic.map(|e| e.g),
            b: p.elastic.map(|e| e.b),
            nu: p.elastic.map(|e| e.nu),
            beta: None,
        }
    }
}

fn params_error(path: &str, e: ParamsError) -> CliError {
    let key = match &e {
        ParamsError::NotPositive { field, .. } => field,
        ParamsError::NoWalls => "n",
        ParamsError::PoissonRatio(_) => "nu",
        ParamsError::InconsistentPrefactor { .. } => "K",
    };
    CliError::config(format!("{path}.{key}"), e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    problem: ProblemSpec,
    #[serde(default)]
    command: Option<Command>,
    #[serde(default)]
    settings: CompareSettings,
    #[serde(default)]
    output: OutputSpec,
    #[serde(default)]
    sweep: Option<Vec<ProblemSpec>>,
    #[serde(default)]
    sweep_command: SweepCommand,
}

/// A validated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: MaterialParams,
    pub command: Command,
    pub settings: CompareSettings,
    pub output: OutputSpec,
    /// Fully resolved sweep instances, in input order.
    pub sweep: Vec<MaterialParams>,
    pub sweep_command: SweepCommand,
}

/// Parse a JSON config. `command` overrides the document's `command`; the two
/// must agree when both are present.
pub fn parse_config(source: &str, command: Option<Command>) -> Result<RunConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(source);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::config(if path == "." { "<document>".into() } else { path }, e.into_inner().to_string())
    })?;
    let command = match (command, raw.command) {
        (Some(a), Some(b)) if a != b => {
            return Err(CliError::config(
                "command",
                format!("document asks for `{b}` but `{a}` was requested"),
            ))
        }
        (Some(c), _) | (None, Some(c)) => c,
        (None, None) => return Err(CliError::config("command", "missing required field")),
    };
    let problem = raw.problem.resolve("problem")?;
    let sweep = match (&raw.sweep, command) {
        (Some(list), Command::Sweep) if list.is_empty() => {
            return Err(CliError::config("sweep", "sweep needs at least one instance"))
        }
        (None, Command::Sweep) => return Err(CliError::config("sweep", "missing required field")),
        (Some(list), _) => list
            .iter()
            .enumerate()
            .map(|(i, over)| raw.problem.merged(over).resolve(&format!("sweep[{i}]")))
            .collect::<Result<_, _>>()?,
        (None, _) => Vec::new(),
    };
    Ok(RunConfig {
        problem,
        command,
        settings: raw.settings,
        output: raw.output,
        sweep,
        sweep_command: raw.sweep_command,
    })
}
