use pileup_core::params::MaterialParams;
use pileup_core::scaling::{beta, classify, scaling_length, ClassifierThresholds, Regime};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = MaterialParams> {
    (1e-2f64..1e2, 1e-2f64..1e2, 1usize..2000, -9.0f64..9.0)
        .prop_map(|(k, h, n, log_beta)| MaterialParams::with_beta(k, h, n, 10f64.powf(log_beta)).unwrap())
}

proptest! {
    #[test]
    fn beta_is_exact(p in params()) {
        let want = (p.k / (p.n_f64() * p.sigma * p.h)).sqrt();
        prop_assert!((beta(&p) - want).abs() <= 1e-15 * want);
    }

    #[test]
    fn aspect_ratio_is_length_over_nh(p in params()) {
        let c = classify(&p, &ClassifierThresholds::default()).unwrap();
        prop_assert!(c.length_scale > 0.0);
        prop_assert!((c.alpha - c.length_scale / (p.n_f64() * p.h)).abs() <= 1e-12 * c.alpha);
    }

    #[test]
    fn subcritical_length_is_shorter_exactly_below_one_over_n(p in params()) {
        let a = scaling_length(&p, Regime::Subcritical).unwrap();
        let b = scaling_length(&p, Regime::Intermediate).unwrap();
        let nb = p.n_f64() * beta(&p);
        prop_assume!((nb - 1.0).abs() > 1e-9);
        prop_assert_eq!(a <= b, nb <= 1.0);
    }

    #[test]
    fn classification_depends_on_k_and_sigma_only_through_beta(p in params(), lambda in 1e-3f64..1e3) {
        let q = MaterialParams::new(lambda * p.k, p.h, lambda * p.sigma, p.n).unwrap();
        let t = ClassifierThresholds::default();
        let (a, b) = (classify(&p, &t).unwrap(), classify(&q, &t).unwrap());
        prop_assert_eq!(a.regime, b.regime);
        prop_assert!((a.beta - b.beta).abs() <= 1e-12 * a.beta);
    }

    #[test]
    fn length_is_nonincreasing_in_stress_within_a_regime(p in params(), factor in 1.0f64..1.5) {
        let t = ClassifierThresholds::default();
        let q = MaterialParams::new(p.k, p.h, p.sigma * factor, p.n).unwrap();
        let (a, b) = (classify(&p, &t).unwrap(), classify(&q, &t).unwrap());
        if a.regime == b.regime {
            prop_assert!(b.length_scale <= a.length_scale);
        }
    }
}
