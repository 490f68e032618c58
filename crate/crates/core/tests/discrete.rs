mod common;

use std::f64::consts::PI;

use pileup_core::density::Frame;
use pileup_core::discrete::{
    dimensional_energy, dimensional_energy_one_sided, dimensionless_energy, discrete_density, residual,
    solve_efn, solve_equilibrium, SolveSettings, WallConfiguration,
};
use pileup_core::kernels;
use pileup_core::params::MaterialParams;
use pileup_core::scaling::{self, Regime, RegimeClassification};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn config_strategy(max_n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..3.0, 1..=max_n).prop_map(|gaps| {
        gaps.iter()
            .scan(0.0, |x, g| {
                *x += g;
                Some(*x)
            })
            .collect()
    })
}

#[test]
fn residual_is_negative_energy_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [2usize, 5, 12] {
        for _ in 0..100 {
            let p = MaterialParams::new(rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0), rng.gen_range(0.05..1.0), n)
                .unwrap();
            let length = n as f64 * p.h * rng.gen_range(0.3..3.0);
            let x = common::random_configuration(&mut rng, n, length, 0.05 * p.h);
            let r = residual(&WallConfiguration::dimensional(x.clone()).unwrap(), &p).unwrap();
            let scale = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let step = 1e-4 * p.h;
            for i in 0..n {
                let energy_at = |d: f64| {
                    let mut y = x.clone();
                    y[i] += d;
                    dimensional_energy(&WallConfiguration::dimensional(y).unwrap(), &p).unwrap()
                };
                let fd = (energy_at(-2.0 * step) - 8.0 * energy_at(-step) + 8.0 * energy_at(step)
                    - energy_at(2.0 * step))
                    / (12.0 * step);
                assert!((fd + r[i]).abs() < 1e-6 * scale, "n = {n}, wall {i}: {fd} vs {}", -r[i]);
            }
        }
    }
}

#[test]
fn newton_matches_gradient_flow_for_few_walls() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut draws: Vec<(f64, f64, f64, usize)> = vec![(1.0, 1.0, 1.0, 3)];
    draws.extend((0..20).map(|_| {
        (rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0), rng.gen_range(0.2..2.0), rng.gen_range(1..=5))
    }));
    for (k, h, sigma, n) in draws {
        let p = MaterialParams::new(k, h, sigma, n).unwrap();
        let eq = solve_equilibrium(&p, &SolveSettings::default()).unwrap();
        let oracle = common::gradient_flow(k, h, sigma, n, 1e-12);
        for (a, b) in eq.configuration.positions().iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-8 * b, "{k} {h} {sigma} {n}: {a} vs {b}");
        }
    }
}

#[test]
fn solver_contracts() {
    let p = MaterialParams::new(1.0, 10.0, 0.01, 150).unwrap();
    let settings = SolveSettings::default();
    let eq = solve_equilibrium(&p, &settings).unwrap();
    let x = eq.configuration.positions();
    assert!(x[0] > 0.0 && x.windows(2).all(|w| w[1] > w[0]));
    let r = residual(&eq.configuration, &p).unwrap();
    assert!(r.iter().all(|v| v.abs() < settings.residual_tolerance * p.sigma * 10.0));
    assert!(eq.residual_norm < settings.residual_tolerance);
    assert!(eq.energy_history.windows(2).all(|w| w[1] <= w[0] + 1e-12 * w[0].abs()));
    let again = solve_equilibrium(&p, &settings).unwrap();
    assert_eq!(eq, again);
}

#[test]
fn pileup_shapes_at_three_stresses() {
    let shape = |sigma: f64| {
        let p = MaterialParams::new(1.0, 10.0, sigma, 150).unwrap();
        let eq = solve_equilibrium(&p, &SolveSettings::default()).unwrap();
        discrete_density(&eq.configuration).unwrap().values().to_vec()
    };
    let argmax = |v: &[f64]| v.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;

    // high stress: decreasing from a peak at the obstacle
    let high = shape(40.0);
    assert!(argmax(&high) < 5);
    assert!(high[5..].windows(2).all(|w| w[1] < w[0]));
    // moderate stress: peak close to the obstacle, then decay
    let mid = shape(0.01);
    assert!(argmax(&mid) < 15);
    assert!(mid[15..140].windows(2).all(|w| w[1] < w[0]));
    // low stress: dense walls, peak no longer dominant
    let low = shape(0.0005);
    let spread = low.iter().cloned().fold(0.0, f64::max) / low[75];
    assert!(spread < high.iter().cloned().fold(0.0, f64::max) / high[75]);
}

#[test]
fn single_plane_model() {
    let p = MaterialParams::new(1.0, 10.0, 0.01, 1).unwrap();
    let eq = solve_efn(&p, &SolveSettings::default()).unwrap();
    let want = 1.0 / (PI * PI * 0.01);
    assert!((eq.configuration.positions()[0] - want).abs() < 1e-9 * want);

    let n = 150.0f64;
    let p = MaterialParams::with_beta(1.0, 10.0, 150, 4.0 / (n * n.sqrt())).unwrap();
    let eq = solve_efn(&p, &SolveSettings::default()).unwrap();
    let length = *eq.configuration.positions().last().unwrap();
    let head_louat = 2.0 * n * p.k / (PI * PI * p.sigma);
    assert!((length / head_louat - 1.0).abs() < 0.05, "{}", length / head_louat);
}

#[test]
fn intermediate_interaction_term_matches_riemann_sum() {
    let n = 10_000usize;
    let p = MaterialParams::with_beta(1.0, 1.0, n, 1.0 / (n as f64).sqrt()).unwrap();
    let regime = RegimeClassification::for_regime(&p, Regime::Intermediate).unwrap();
    let config = WallConfiguration::equispaced(n, 1.0, Frame::Dimensionless {
        length_scale: Some(regime.length_scale),
    })
    .unwrap();
    let e = dimensionless_energy(&config, &p, &regime).unwrap();
    let linear = (n as f64 + 1.0) / (2.0 * n as f64);
    let interaction = e - linear;
    // β Σ_k V(βk) = 1/(6π) - β(1 - ln β)/(2π²) + O(β²); the log correction
    // is 5% of the leading term at β = 0.01
    let beta = regime.beta;
    let riemann = 1.0 / (6.0 * PI) - beta * (1.0 - beta.ln()) / (2.0 * PI * PI);
    assert!((interaction / riemann - 1.0).abs() < 5e-3, "{interaction} vs {riemann}");
    assert!((interaction * 6.0 * PI - 1.0).abs() < 0.06);
}

#[test]
fn dimensionless_energy_recovers_dimensional_energy() {
    let p = MaterialParams::with_beta(1.0, 2.0, 20, 0.3).unwrap();
    let regime = scaling::classify(&p, &Default::default()).unwrap();
    let dim = WallConfiguration::equispaced(20, 3.0 * regime.length_scale, Frame::Dimensional).unwrap();
    let e_dim = dimensional_energy(&dim, &p).unwrap();
    let e = dimensionless_energy(&dim.to_dimensionless(regime.length_scale).unwrap(), &p, &regime).unwrap();
    let n = p.n_f64();
    let scale = n * n * p.sigma * p.h * regime.alpha;
    assert!((e * scale - e_dim).abs() < 1e-12 * e_dim.abs());
}

proptest! {
    #[test]
    fn energy_forms_agree(x in config_strategy(20), k in 0.1f64..10.0, h in 0.1f64..10.0, sigma in 0.01f64..10.0) {
        let p = MaterialParams::new(k, h, sigma, x.len()).unwrap();
        let c = WallConfiguration::dimensional(x).unwrap();
        let a = dimensional_energy(&c, &p).unwrap();
        let b = dimensional_energy_one_sided(&c, &p).unwrap();
        prop_assert!((a - b).abs() <= 1e-13 * a.abs().max(b.abs()));
    }

    #[test]
    fn residual_is_scale_covariant(x in config_strategy(12), lambda in 0.01f64..100.0, sigma in 0.01f64..10.0) {
        let p = MaterialParams::new(1.0, 1.0, sigma, x.len()).unwrap();
        let q = MaterialParams::new(lambda, lambda, sigma, x.len()).unwrap();
        let scaled: Vec<f64> = x.iter().map(|v| v * lambda).collect();
        let a = residual(&WallConfiguration::dimensional(x).unwrap(), &p).unwrap();
        let b = residual(&WallConfiguration::dimensional(scaled).unwrap(), &q).unwrap();
        for (a, b) in a.iter().zip(&b) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn energy_is_affine_in_stress(x in config_strategy(10), sigma in 0.01f64..10.0) {
        let c = WallConfiguration::dimensional(x.clone()).unwrap();
        let p = MaterialParams::new(1.0, 1.0, sigma, x.len()).unwrap();
        let q = MaterialParams::new(1.0, 1.0, 2.0 * sigma, x.len()).unwrap();
        let gap = dimensional_energy(&c, &q).unwrap() - dimensional_energy(&c, &p).unwrap();
        let load: f64 = x.iter().sum::<f64>() * sigma;
        prop_assert!((gap - load).abs() <= 1e-12 * (1.0 + load));
    }

    #[test]
    fn discrete_density_is_positive(x in config_strategy(30).prop_filter("two walls", |x| x.len() > 1)) {
        let d = discrete_density(&WallConfiguration::dimensional(x).unwrap()).unwrap();
        prop_assert!(d.values().iter().all(|v| *v > 0.0));
    }
}

#[test]
fn single_wall_equilibrium_inverts_stress() {
    let sigma = kernels::phi(1.0).unwrap();
    let p = MaterialParams::new(1.0, 1.0, sigma, 1).unwrap();
    let eq = solve_equilibrium(&p, &SolveSettings::default()).unwrap();
    assert!((eq.configuration.positions()[0] - 1.0).abs() < 1e-10);
    let linear = (1..=8).map(|i| i as f64 / 8.0).sum::<f64>() / 8.0;
    assert!((linear - 9.0 / 16.0).abs() < 1e-15);
}
