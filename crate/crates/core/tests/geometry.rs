use approx::assert_relative_eq;
use heatlab_core::geometry::{
    capacity_annulus, classify_parabolicity, end_resistance, fit_volume_exponent, radial_harmonic, volume,
    volume_between, End, Parabolicity,
};
use heatlab_core::{RadialProfile, WeightedModel};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

fn model() -> impl Strategy<Value = WeightedModel> {
    prop_oneof![
        (2u32..6).prop_map(|n| WeightedModel::new(RadialProfile::euclidean(n).unwrap())),
        (2u32..5).prop_map(|n| WeightedModel::new(RadialProfile::hyperbolic(n).unwrap())),
        (0.05f64..=1.0, 2u32..5, 0.5f64..2.0)
            .prop_map(|(a, n, c)| WeightedModel::new(RadialProfile::exp_alpha(a, n, c).unwrap())),
        (0.0f64..3.0).prop_map(|b| WeightedModel::new(RadialProfile::power(b, 2).unwrap())),
        Just(WeightedModel::flat()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig {
        rng_seed: RngSeed::Fixed(0x5eed),
        ..ProptestConfig::with_cases(64)
    })]

    #[test]
    fn volume_is_monotone_and_additive(m in model(), a in 0.0f64..4.0, w1 in 0.01f64..4.0, w2 in 0.01f64..4.0) {
        let (b, c) = (a + w1, a + w1 + w2);
        let va = volume(&m, a).unwrap();
        let vb = volume(&m, b).unwrap();
        let vc = volume(&m, c).unwrap();
        prop_assert!(va <= vb && vb < vc);
        let split = volume_between(&m, a, b).unwrap() + volume_between(&m, b, c).unwrap();
        prop_assert!((split - volume_between(&m, a, c).unwrap()).abs() <= 1e-7 * (vc - va));
    }

    #[test]
    fn capacity_shrinks_as_the_annulus_widens(m in model(), a in 0.2f64..3.0, w in 0.05f64..3.0, grow in 0.05f64..3.0) {
        let narrow = capacity_annulus(&m, a, a + w).unwrap();
        let wide = capacity_annulus(&m, a, a + w + grow).unwrap();
        prop_assert!(wide < narrow, "{wide} !< {narrow}");
        let inner = capacity_annulus(&m, a + 0.5 * w, a + w).unwrap();
        prop_assert!(inner > narrow);
    }

    #[test]
    fn harmonic_functions_interpolate_their_data(m in model(), r1 in 0.2f64..3.0, c1 in -5.0f64..5.0, c2 in -5.0f64..5.0, dr in 0.0f64..3.0) {
        let u = radial_harmonic(&m, c1, c2, r1).unwrap();
        prop_assert!((u.eval(r1).unwrap() - c1).abs() < 1e-12);
        // The flux S·u' is the constant c2, so u moves monotonically with c2.
        let moved = u.eval(r1 + dr).unwrap() - c1;
        prop_assert!(moved * c2 >= -1e-12);
    }
}

#[test]
fn capacity_of_an_annulus_in_space() {
    // 1/∫₁² r⁻² dr = 2.
    let m = WeightedModel::new(RadialProfile::euclidean(3).unwrap());
    assert_relative_eq!(capacity_annulus(&m, 1.0, 2.0).unwrap(), 2.0, max_relative = 1e-10);
}

#[test]
fn nonparabolic_capacities_converge_to_the_end_resistance() {
    for m in [
        WeightedModel::new(RadialProfile::euclidean(3).unwrap()),
        WeightedModel::new(RadialProfile::hyperbolic(2).unwrap()),
        WeightedModel::new(RadialProfile::power(2.0, 2).unwrap()),
    ] {
        assert_eq!(
            classify_parabolicity(&m, End::Plus).unwrap(),
            Parabolicity::Nonparabolic
        );
        let res = end_resistance(&m, 1.0, End::Plus, 1e-12).unwrap().unwrap();
        let far = capacity_annulus(&m, 1.0, 400.0).unwrap();
        assert!((far * res - 1.0).abs() < 5e-3, "cap {far} vs 1/{res}");
    }
}

#[test]
fn parabolic_capacities_vanish_logarithmically() {
    // On the plane cap(1, b) = 1/log b.
    let m = WeightedModel::new(RadialProfile::euclidean(2).unwrap());
    assert_eq!(classify_parabolicity(&m, End::Plus).unwrap(), Parabolicity::Parabolic);
    for b in [10.0f64, 1e3, 1e6] {
        assert_relative_eq!(capacity_annulus(&m, 1.0, b).unwrap(), 1.0 / b.ln(), max_relative = 1e-8);
    }
    // S = exp(-√r): 1/S is not integrable at infinity.
    let decaying = WeightedModel::new(RadialProfile::exp_alpha(0.5, 2, 1.0).unwrap());
    assert_eq!(
        classify_parabolicity(&decaying, End::Plus).unwrap(),
        Parabolicity::Parabolic
    );
}

#[test]
fn volume_growth_exponent_of_space() {
    let m = WeightedModel::new(RadialProfile::euclidean(3).unwrap());
    let k = fit_volume_exponent(&m, (1.0, 100.0)).unwrap();
    assert!((k - 3.0).abs() < 0.01, "exponent {k}");
}
