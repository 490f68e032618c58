use std::f64::consts::PI;

use pileup_core::compare::{bulk_error, compare_with_efn, normalize, run_comparison, CompareError, CompareSettings};
use pileup_core::density::{DensityField, Frame};
use pileup_core::discrete::{discrete_density, solve_equilibrium, SolveSettings};
use pileup_core::params::MaterialParams;
use pileup_core::scaling::{self, Regime};
use proptest::prelude::*;

const N: f64 = 150.0;

fn instance(beta: f64) -> MaterialParams {
    MaterialParams::with_beta(1.0, 10.0, 150, beta).unwrap()
}

fn field_strategy() -> impl Strategy<Value = DensityField> {
    prop::collection::vec((0.01f64..1.0, 0.0f64..5.0), 3..40).prop_map(|pts| {
        let mut x = 0.0;
        let (grid, values) = pts
            .into_iter()
            .map(|(dx, v)| {
                x += dx;
                (x, v + 0.01)
            })
            .unzip();
        DensityField::new(grid, values, Frame::Dimensional).unwrap()
    })
}

proptest! {
    #[test]
    fn a_field_has_no_error_against_itself(f in field_strategy(), exclusion in 0.0f64..0.3) {
        match bulk_error(&f, &f, exclusion) {
            Ok(e) => prop_assert_eq!(e, (0.0, 0.0)),
            Err(CompareError::EmptyBulk(..)) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn normalization_is_idempotent(f in field_strategy(), target in 0.1f64..10.0) {
        let g = normalize(&f, target).unwrap();
        prop_assert!((g.mass() / target - 1.0).abs() < 1e-12);
        let h = normalize(&g, target).unwrap();
        for (a, b) in g.values().iter().zip(h.values()) {
            prop_assert!((a - b).abs() <= 1e-14 * a.abs());
        }
    }
}

#[test]
fn relative_errors_do_not_depend_on_the_frame() {
    let p = instance(1.0 / N.sqrt());
    let eq = solve_equilibrium(&p, &SolveSettings::default()).unwrap();
    let dim = discrete_density(&eq.configuration).unwrap();
    let lin = pileup_core::continuum::linear_density(&p, 2001).unwrap();
    let l = scaling::scaling_length(&p, Regime::Intermediate).unwrap();
    let a = bulk_error(&normalize(&dim, N).unwrap(), &lin, 0.1).unwrap();
    let b = bulk_error(
        &normalize(&dim.to_dimensionless(l, N).unwrap(), 1.0).unwrap(),
        &lin.to_dimensionless(l, N).unwrap(),
        0.1,
    )
    .unwrap();
    assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12, "{a:?} {b:?}");
}

#[test]
fn intermediate_instance() {
    let r = run_comparison(&instance(1.0 / N.sqrt()), &CompareSettings::default()).unwrap();
    assert_eq!(r.regime.regime, Regime::Intermediate);
    assert!((r.fitted_parameters["slope"] / (-3.0 * PI) - 1.0).abs() < 0.05);
    assert!(r.bulk_error_l2 < 0.05);
    assert!((r.discrete.mass() - 1.0).abs() < 1e-12 && (r.continuum.mass() - 1.0).abs() < 1e-12);
}

#[test]
fn subcritical_instance() {
    let r = run_comparison(&instance(6.0 / (N * N.sqrt())), &CompareSettings::default()).unwrap();
    assert_eq!(r.regime.regime, Regime::Subcritical);
    assert!(r.fitted_parameters["sqrt_r_squared"] > 0.99);
    assert!((r.fitted_parameters["length_ratio"] - 1.0).abs() < 0.1);
    assert!((r.fitted_parameters["amplitude_over_mass_consistent"] - 1.0).abs() < 0.05);
}

#[test]
fn supercritical_instance() {
    let r = run_comparison(&instance(1e8), &CompareSettings::default()).unwrap();
    assert_eq!(r.regime.regime, Regime::Supercritical);
    assert!((r.fitted_parameters["plateau_mean"] - 1.0).abs() < 0.05);
    assert!(r.fitted_parameters["plateau_min"] > 0.95 && r.fitted_parameters["plateau_max"] < 1.05);
}

#[test]
fn critical_instances() {
    let first = run_comparison(&instance(5.0 / N), &CompareSettings::default()).unwrap();
    assert_eq!(first.regime.regime, Regime::FirstCritical);
    assert!(first.bulk_error_l2 < 0.1);
    let second = run_comparison(&instance(1.0), &CompareSettings::default()).unwrap();
    assert_eq!(second.regime.regime, Regime::SecondCritical);
    assert!(second.bulk_error_l2 < 0.1);
}

#[test]
fn wall_and_single_plane_pileups_coincide() {
    let p = instance(4.0 / (N * N.sqrt()));
    let e = compare_with_efn(&p, &SolveSettings::default(), 0.1).unwrap();
    assert!(e.bulk_error_max < 0.02);
}

#[test]
fn errors_shrink_as_walls_are_added() {
    let laws: [(Regime, fn(f64) -> f64); 5] = [
        (Regime::Subcritical, |n| 6.0 / (n * n.sqrt())),
        (Regime::FirstCritical, |n| 5.0 / n),
        (Regime::Intermediate, |n| 1.0 / n.sqrt()),
        (Regime::SecondCritical, |_| 1.0),
        (Regime::Supercritical, |_| 1e8),
    ];
    for (regime, law) in laws {
        let errors: Vec<f64> = [50usize, 150, 400]
            .iter()
            .map(|&n| {
                let p = MaterialParams::with_beta(1.0, 10.0, n, law(n as f64)).unwrap();
                let settings = CompareSettings {
                    regime: Some(regime),
                    ..Default::default()
                };
                run_comparison(&p, &settings).unwrap().bulk_error_l2
            })
            .collect();
        assert!(errors.windows(2).all(|w| w[1] <= w[0]), "{regime}: {errors:?}");
    }
}

#[test]
fn failures_name_their_stage() {
    let p = MaterialParams::with_beta(1.0, 10.0, 150, 0.1).unwrap();
    let settings = CompareSettings {
        regime: Some(Regime::Supercritical),
        ..Default::default()
    };
    assert!(matches!(run_comparison(&p, &settings), Err(CompareError::Classify(_))));
    let settings = CompareSettings {
        solve: SolveSettings {
            max_iterations: 1,
            ..Default::default()
        },
        ..Default::default()
    };
    let err = run_comparison(&p, &settings).unwrap_err();
    assert!(matches!(err, CompareError::Discrete(_)));
    assert!(err.to_string().starts_with("discrete stage"));
}
