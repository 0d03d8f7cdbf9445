use heatlab_core::geometry::volume;
use heatlab_core::isoperimetry::profile_halfline;
use heatlab_core::solver::BoundaryCondition;
use heatlab_core::spectral::{
    fit_decay_exponent, fk_connected_sum, heat_upper_bound, lambda1_dirichlet, lambda1_rayleigh_upper,
    FaberKrahnFunction, GammaInverter,
};
use heatlab_core::{RadialProfile, WeightedModel};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

fn growing_model() -> impl Strategy<Value = WeightedModel> {
    prop_oneof![
        (2u32..5).prop_map(|n| WeightedModel::new(RadialProfile::euclidean(n).unwrap())),
        (2u32..4).prop_map(|n| WeightedModel::new(RadialProfile::hyperbolic(n).unwrap())),
        (0.0f64..2.0, 2u32..4).prop_map(|(b, n)| WeightedModel::new(RadialProfile::power(b, n).unwrap())),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig {
        rng_seed: RngSeed::Fixed(0x5eed),
        ..ProptestConfig::with_cases(48)
    })]

    #[test]
    fn power_gamma_has_a_closed_form(c in 0.1f64..10.0, n in 0.5f64..6.0, t in 1e-2f64..1e2) {
        // ∫₀^γ dv/(c v^(1-2/n)) = (n/2c)γ^(2/n).
        let fk = FaberKrahnFunction::power(c, n).unwrap();
        let g = GammaInverter::new(&fk, t).unwrap().gamma(t).unwrap();
        let exact = (2.0 * c * t / n).powf(0.5 * n);
        prop_assert!((g / exact - 1.0).abs() < 1e-6, "{g} vs {exact}");
        let u = heat_upper_bound(&fk, t).unwrap();
        prop_assert!((u / (4.0 * (c * t / n).powf(-0.5 * n)) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn glued_gamma_increases_and_the_bound_decreases(
        c1 in 0.1f64..5.0, n1 in 1.0f64..4.0, c2 in 0.1f64..5.0, n2 in 1.0f64..4.0,
        glue in 0.05f64..1.0, q in 1.0f64..4.0,
    ) {
        let parts = [FaberKrahnFunction::power(c1, n1).unwrap(), FaberKrahnFunction::power(c2, n2).unwrap()];
        let fk = fk_connected_sum(&parts, glue, q).unwrap();
        let inv = GammaInverter::new(&fk, 100.0).unwrap();
        let mut prev = (0.0, f64::INFINITY);
        for k in 0..=30 {
            let t = 1e-2 * 1e4f64.powf(k as f64 / 30.0);
            let g = inv.gamma(t).unwrap();
            let u = inv.upper(t).unwrap();
            prop_assert!(g > prev.0 && u < prev.1, "t = {t}: γ {g}, bound {u}");
            prev = (g, u);
        }
    }

    #[test]
    fn rayleigh_quotient_bounds_the_eigenvalue(m in growing_model(), r in 0.5f64..15.0) {
        let l = lambda1_dirichlet(&m, r, BoundaryCondition::Neumann).unwrap();
        let ray = lambda1_rayleigh_upper(&m, r).unwrap();
        prop_assert!(l > 0.0 && l <= ray * (1.0 + 1e-9), "λ₁ {l} > {ray}");
        let bigger = lambda1_dirichlet(&m, 1.5 * r, BoundaryCondition::Neumann).unwrap();
        prop_assert!(bigger < l);
    }

    #[test]
    fn cheeger_bound_holds_on_space_forms(n in 2u32..5, r in 0.5f64..10.0) {
        let m = WeightedModel::new(RadialProfile::euclidean(n).unwrap());
        let j = profile_halfline(&m).unwrap();
        let v = volume(&m, r).unwrap();
        let l = lambda1_dirichlet(&m, r, BoundaryCondition::Neumann).unwrap();
        let q = j.eval(v) / v;
        prop_assert!(l >= 0.25 * q * q, "λ₁ {l} < {}", 0.25 * q * q);
    }

    #[test]
    fn stretched_exponentials_are_fitted(beta in 0.1f64..1.2, c in 0.2f64..3.0, a in -2.0f64..2.0) {
        let times: Vec<f64> = (0..25).map(|k| 10.0 * 100f64.powf(k as f64 / 24.0)).collect();
        let values: Vec<f64> = times.iter().map(|t| (-a - c * t.powf(beta)).exp()).collect();
        prop_assume!(values.iter().all(|v| *v > 0.0));
        let fit = fit_decay_exponent(&times, &values).unwrap();
        prop_assert!((fit.beta - beta).abs() < 0.02, "β {} vs {beta}", fit.beta);
        prop_assert!(!fit.polynomial);
    }

    #[test]
    fn power_laws_are_flagged_polynomial(p in 0.5f64..3.0) {
        let times: Vec<f64> = (0..25).map(|k| 10.0 * 100f64.powf(k as f64 / 24.0)).collect();
        let values: Vec<f64> = times.iter().map(|t| t.powf(-p)).collect();
        prop_assert!(fit_decay_exponent(&times, &values).unwrap().polynomial);
    }
}

#[test]
fn power_law_bound_on_the_plane() {
    // Λ = π/v on R²: γ(s) = πs, so 4/γ(t/2) = 8/(πt).
    let fk = FaberKrahnFunction::power(std::f64::consts::PI, 2.0).unwrap();
    let u = heat_upper_bound(&fk, 2.0).unwrap();
    assert!((u - 4.0 / std::f64::consts::PI).abs() < 1e-9, "{u}");
}
