//! Randomized invariants.

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twohop_core::deterministic::{analyze, k1_matrix, k2_matrix};
use twohop_core::fixed_point::{residuals_system1, solution_bounds};
use twohop_core::montecarlo::{mi_pair, ChannelSampler};
use twohop_core::output::fmt_num;
use twohop_core::{CorrelationSet, HermitianPsd, SolverOptions, SystemParams};

fn random_psd(n: usize, rng: &mut ChaCha8Rng) -> HermitianPsd {
    let rank = rng.random_range(1..=n);
    let g = DMatrix::from_fn(n, rank, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let m = &g * g.adjoint() * Complex64::from(3.0 / rank as f64);
    HermitianPsd::new((&m + m.adjoint()) * Complex64::from(0.5)).unwrap()
}

fn config(seed: u64) -> (CorrelationSet, SystemParams) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, l, m) = (rng.random_range(1..10), rng.random_range(1..10), rng.random_range(1..10));
    let corr = CorrelationSet::new(
        random_psd(n, &mut rng),
        random_psd(l, &mut rng),
        random_psd(l, &mut rng),
        random_psd(m, &mut rng),
    )
    .unwrap();
    let s = rng.random_range(0.05..4.0);
    let z = 10f64.powf(rng.random_range(-1.0..1.0));
    (corr, SystemParams::symmetric(n, l, m, s, z).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn covariance_is_positive_definite(seed in any::<u64>()) {
        let (corr, p) = config(seed);
        let a = analyze(&corr, &p, &SolverOptions::default()).unwrap();
        prop_assert!(a.model.min_eigenvalue() > 0.0, "V = {:?}", a.model.v);
        prop_assert!(a.model.mi_variance() > 0.0);
    }

    #[test]
    fn fixed_points_are_bracketed_and_accurate(seed in any::<u64>()) {
        let (corr, p) = config(seed);
        let a = analyze(&corr, &p, &SolverOptions::default()).unwrap();
        let s1 = &a.system1;
        prop_assert!(solution_bounds(&corr, &p).contains(s1.as_array()));
        let r = residuals_system1(&corr, &p, s1).unwrap();
        prop_assert!(r.iter().all(|v| *v <= 1e-10 * s1.as_array().iter().fold(1.0f64, |m, x| m.max(x.abs()))));
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
        prop_assert!(rel(k1_matrix(&a.functionals, s1, &p).determinant(), a.functionals.delta_v1) < 1e-9);
        prop_assert!(rel(k2_matrix(&a.functionals, &p).determinant(), a.functionals.delta_v2) < 1e-9);
    }

    #[test]
    fn mutual_information_pair_is_ordered(seed in any::<u64>(), index in 0u64..1000) {
        let (corr, p) = config(seed);
        let ch = ChannelSampler::new(&corr).unwrap().sample(seed, index);
        let (i1, i2) = mi_pair(&ch, &p).unwrap();
        prop_assert!(i1 >= i2 - 1e-12 && i2 >= -1e-12);
    }

    #[test]
    fn numbers_round_trip(x in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(fmt_num(x).parse::<f64>().unwrap(), x);
    }
}
