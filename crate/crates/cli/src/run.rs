//! Command dispatch.

use std::path::Path;
use std::time::Instant;

use pileup_core::compare::{normalize, run_comparison, CompareError, CompareSettings};
use pileup_core::continuum::{
    head_louat_density, linear_density, solve_first_critical, solve_second_critical_scaled, unit_constant_density,
};
use pileup_core::density::{DensityField, Frame};
use pileup_core::discrete::{discrete_density, solve_efn, solve_equilibrium, Equilibrium};
use pileup_core::params::MaterialParams;
use pileup_core::scaling::{self, Regime, RegimeClassification};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Command, Format, ProblemSpec, RunConfig, SweepCommand};
use crate::error::CliError;
use crate::output::{self, companion_path, Artifact, Cell, Table};

const CLASSIFY_COLUMNS: &[&str] = &[
    "regime",
    "beta",
    "alpha",
    "length_scale",
    "margin_n_beta",
    "margin_beta",
    "c",
    "frame",
];
const WALL_COLUMNS: &[&str] = &["index", "position", "discrete_density", "frame"];
const CONTINUUM_COLUMNS: &[&str] = &["x", "density", "regime", "frame"];
const CURVE_COLUMNS: &[&str] = &["curve", "x", "density", "frame"];
const SWEEP_COLUMNS: &[&str] = &[
    "index",
    "K",
    "h",
    "sigma",
    "n",
    "beta",
    "regime",
    "alpha",
    "length_scale",
    "bulk_error_l2",
    "bulk_error_max",
    "frame",
];

/// Execute `config` and write its artifacts. `jobs` bounds sweep
/// concurrency; 0 lets the thread pool decide.
pub fn run(config: &RunConfig, jobs: usize) -> Result<(), CliError> {
    let artifact = execute(config, jobs)?;
    let path = config.output.path.as_deref().map(Path::new);
    match config.output.format {
        Format::Json => output::write_json(output::open(path)?, &artifact.document),
        Format::Csv => {
            if let Some(companion) = &artifact.companion {
                let path = path.ok_or_else(|| {
                    CliError::config("output.path", "csv output of this command writes two files and needs a path")
                })?;
                output::write_json(output::open(Some(&companion_path(path)))?, companion)?;
            }
            artifact.table.write_csv(output::open(path)?)
        }
    }
}

pub fn execute(config: &RunConfig, jobs: usize) -> Result<Artifact, CliError> {
    let p = &config.problem;
    let s = &config.settings;
    let clock = Instant::now();
    let artifact = match config.command {
        Command::Classify => classify_artifact(p, s)?,
        Command::SolveDiscrete => wall_artifact(p, "wall", solve_equilibrium(p, &s.solve)?)?,
        Command::SolveEfn => wall_artifact(p, "single_slip_plane", solve_efn(p, &s.solve)?)?,
        Command::SolveContinuum => continuum_artifact(p, s)?,
        Command::Compare => compare_artifact(p, s)?,
        Command::Sweep => sweep_artifact(config, jobs)?,
    };
    log::info!("{} finished in {:.3} s", config.command, clock.elapsed().as_secs_f64());
    Ok(artifact)
}

fn classification(p: &MaterialParams, s: &CompareSettings) -> Result<RegimeClassification, CliError> {
    Ok(match s.regime {
        Some(r) => RegimeClassification::for_regime(p, r)?,
        None => scaling::classify(p, &s.solve.classifier)?,
    })
}

fn classify_artifact(p: &MaterialParams, s: &CompareSettings) -> Result<Artifact, CliError> {
    let c = classification(p, s)?;
    let mut table = Table::new(CLASSIFY_COLUMNS);
    table.push(vec![
        c.regime.name().into(),
        c.beta.into(),
        c.alpha.into(),
        c.length_scale.into(),
        c.boundary_margins.n_beta.into(),
        c.boundary_margins.beta.into(),
        c.c.into(),
        Frame::Dimensional.name().into(),
    ]);
    Ok(Artifact {
        table,
        document: json!({
            "problem": ProblemSpec::from_params(p),
            "classification": c,
            "frame": Frame::Dimensional.name(),
        }),
        companion: None,
    })
}

fn wall_artifact(p: &MaterialParams, model: &str, eq: Equilibrium) -> Result<Artifact, CliError> {
    log::info!("{model}: {} iterations, residual {:.3e}", eq.iterations, eq.residual_norm);
    let x = eq.configuration.positions();
    // a lone wall has no spacing to invert
    let density: Vec<Option<f64>> = if x.len() > 1 {
        discrete_density(&eq.configuration)?.values().iter().copied().map(Some).collect()
    } else {
        vec![None]
    };
    let frame = eq.configuration.frame().name();
    let mut table = Table::new(WALL_COLUMNS);
    for (i, (&xi, &d)) in x.iter().zip(&density).enumerate() {
        table.push(vec![(i + 1).into(), xi.into(), d.into(), frame.into()]);
    }
    Ok(Artifact {
        document: json!({
            "problem": ProblemSpec::from_params(p),
            "model": model,
            "iterations": eq.iterations,
            "residual_norm": eq.residual_norm,
            "frame": frame,
            "walls": table.to_json(),
        }),
        table,
        companion: None,
    })
}

/// Continuum prediction of the regime, mass 1 in the `ℓ_n` frame.
pub fn continuum_curve(p: &MaterialParams, s: &CompareSettings) -> Result<(RegimeClassification, DensityField), CliError> {
    let c = classification(p, s)?;
    let frame = Frame::Dimensionless {
        length_scale: Some(c.length_scale),
    };
    let n = p.n_f64();
    let points = s.integral.output_points;
    let rho = match c.regime {
        Regime::Subcritical => {
            head_louat_density(p, s.head_louat_prefactor, points)?.to_dimensionless(c.length_scale, n).map_err(CompareError::from)?
        }
        Regime::FirstCritical => solve_first_critical(n * c.beta, &s.integral)?.density.relabeled(frame),
        Regime::Intermediate => linear_density(p, points)?.to_dimensionless(c.length_scale, n).map_err(CompareError::from)?,
        Regime::SecondCritical => solve_second_critical_scaled(c.beta, &s.integral)?.density.relabeled(frame),
        Regime::Supercritical => unit_constant_density(points).relabeled(frame),
    };
    Ok((c, normalize(&rho, 1.0)?))
}

fn continuum_artifact(p: &MaterialParams, s: &CompareSettings) -> Result<Artifact, CliError> {
    let (c, rho) = continuum_curve(p, s)?;
    let frame = rho.frame().name();
    let mut table = Table::new(CONTINUUM_COLUMNS);
    for (&x, &v) in rho.grid().iter().zip(rho.values()) {
        table.push(vec![x.into(), v.into(), c.regime.name().into(), frame.into()]);
    }
    Ok(Artifact {
        table,
        document: json!({
            "problem": ProblemSpec::from_params(p),
            "classification": c,
            "density": rho,
        }),
        companion: None,
    })
}

fn compare_artifact(p: &MaterialParams, s: &CompareSettings) -> Result<Artifact, CliError> {
    let mut report = run_comparison(p, s)?;
    for (stage, seconds) in std::mem::take(&mut report.run_metadata.timings) {
        log::info!("compare {stage}: {seconds:.3} s");
    }
    let mut table = Table::new(CURVE_COLUMNS);
    for (name, rho) in [("discrete", &report.discrete), ("continuum", &report.continuum)] {
        for (&x, &v) in rho.grid().iter().zip(rho.values()) {
            table.push(vec![name.into(), x.into(), v.into(), rho.frame().name().into()]);
        }
    }
    let document = json!({ "problem": ProblemSpec::from_params(p), "report": report });
    let companion = {
        let mut summary = document.clone();
        if let Some(r) = summary["report"].as_object_mut() {
            r.remove("discrete");
            r.remove("continuum");
        }
        summary
    };
    Ok(Artifact {
        table,
        document,
        companion: Some(companion),
    })
}

fn sweep_row(index: usize, p: &MaterialParams, s: &CompareSettings, what: SweepCommand) -> Result<Vec<Cell>, CliError> {
    let (c, errors) = match what {
        SweepCommand::Classify => (classification(p, s)?, (None, None)),
        SweepCommand::Compare => {
            let r = run_comparison(p, s)?;
            (r.regime, (Some(r.bulk_error_l2), Some(r.bulk_error_max)))
        }
    };
    Ok(vec![
        index.into(),
        p.k.into(),
        p.h.into(),
        p.sigma.into(),
        p.n.into(),
        c.beta.into(),
        c.regime.name().into(),
        c.alpha.into(),
        c.length_scale.into(),
        errors.0.into(),
        errors.1.into(),
        Frame::Dimensional.name().into(),
    ])
}

fn sweep_artifact(config: &RunConfig, jobs: usize) -> Result<Artifact, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::config("jobs", e.to_string()))?;
    // collect keeps input order whatever the completion order
    let rows: Vec<Vec<Cell>> = pool.install(|| {
        config
            .sweep
            .par_iter()
            .enumerate()
            .map(|(i, p)| {
                sweep_row(i, p, &config.settings, config.sweep_command).map_err(|e| CliError::Sweep {
                    index: i,
                    source: Box::new(e),
                })
            })
            .collect::<Result<_, _>>()
    })?;
    let mut table = Table::new(SWEEP_COLUMNS);
    rows.into_iter().for_each(|r| table.push(r));
    let document: Value = table.to_json();
    Ok(Artifact {
        table,
        document,
        companion: None,
    })
}
