use heatlab_core::htransform::build_two_end_weight;
use heatlab_core::isoperimetry::{
    asymptotic_profile, functional_lower_bound, generalized_inverse, h0_inf, profile_halfline, profile_sphere,
    warped_product_profile, IsoProfile, ProfileKind,
};
use heatlab_core::monotone::MonotoneTab;
use heatlab_core::pipeline::{split_point, two_end_model};
use heatlab_core::{Error, RadialProfile, Side, WeightedModel};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

/// Breakpoints 0 = b₀ < … < b_m and nonincreasing positive values on each cell.
fn steps() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    prop::collection::vec((0.01f64..3.0, 0.0f64..2.0), 1..12).prop_map(|cells| {
        let mut b = vec![0.0];
        let mut v = Vec::new();
        let mut level = 10.0;
        for (w, drop) in &cells {
            b.push(b.last().unwrap() + w);
            level -= drop;
            v.push(level.max(0.05));
        }
        v.push(0.0);
        (b, v)
    })
}

fn rectangles(b: &[f64], v: &[f64]) -> f64 {
    b.windows(2).zip(v).map(|(w, y)| (w[1] - w[0]) * y).sum()
}

proptest! {
    #![proptest_config(ProptestConfig {
        rng_seed: RngSeed::Fixed(0x5eed),
        ..ProptestConfig::with_cases(200)
    })]

    #[test]
    fn inverse_preserves_the_integral((b, v) in steps()) {
        let phi = MonotoneTab::step_nonincreasing(b.clone(), v.clone()).unwrap();
        let pair = generalized_inverse(&phi).unwrap();
        let area = rectangles(&b, &v);
        prop_assert!((phi.integral() - area).abs() <= 1e-12 * area);
        prop_assert!((pair.phi_star.integral() - area).abs() <= 1e-12 * area);
        prop_assert!((pair.common_integral - area).abs() <= 1e-12 * area);
    }

    #[test]
    fn inverse_is_the_sup_of_the_superlevel_set((b, v) in steps(), s in 0.0f64..11.0) {
        let phi = MonotoneTab::step_nonincreasing(b.clone(), v.clone()).unwrap();
        prop_assume!(v.iter().all(|&y| (y - s).abs() > 1e-9));
        let star = generalized_inverse(&phi).unwrap().phi_star;
        let oracle = (0..b.len() - 1).filter(|&k| v[k] > s).map(|k| b[k + 1]).fold(0.0, f64::max);
        prop_assert_eq!(star.eval(s), oracle);
    }

    #[test]
    fn double_inversion_returns_the_function((b, v) in steps(), t in 0.0f64..30.0) {
        let phi = MonotoneTab::step_nonincreasing(b.clone(), v).unwrap();
        prop_assume!(b.iter().all(|&x| (x - t).abs() > 1e-9));
        let star = generalized_inverse(&phi).unwrap().phi_star;
        let back = generalized_inverse(&star).unwrap().phi_star;
        prop_assert!((back.eval(t) - phi.eval(t)).abs() < 1e-12, "{} vs {}", back.eval(t), phi.eval(t));
    }

    #[test]
    fn functional_bound_matches_a_brute_force_minimum(
        a in 0.1f64..5.0, p in 0.2f64..=1.0, c in 0.1f64..5.0, q in 0.2f64..=1.0,
        mass in 0.5f64..10.0, v in 0.01f64..100.0,
    ) {
        let f = move |x: f64| a * x.powf(p);
        let g = move |y: f64| c * y.powf(q);
        let h0 = h0_inf(&f, &g, mass, v).unwrap();
        // Dense scan of y on (0, P/2] in log scale.
        let brute = (0..=20_000)
            .map(|k| 0.5 * mass * 1e-12f64.powf(k as f64 / 20_000.0))
            .map(|y| f(v / y) * y + g(y) * v / y)
            .fold(f64::INFINITY, f64::min);
        prop_assert!(h0 <= brute * (1.0 + 1e-9) && h0 >= brute * (1.0 - 1e-4), "{h0} vs {brute}");
        let lb = functional_lower_bound(&f, &g, mass, v).unwrap();
        prop_assert!((lb - (h0 / 6.0).min(f(v / mass) * mass / 8.0)).abs() <= 1e-12 * lb);
    }

    #[test]
    fn euclidean_profile_is_the_power_law(n in 2u32..6, v in 1e-3f64..1e6) {
        let j = profile_halfline(&WeightedModel::new(RadialProfile::euclidean(n).unwrap())).unwrap();
        let k = n as f64;
        let exact = (k * v).powf((k - 1.0) / k);
        prop_assert!((j.eval(v) / exact - 1.0).abs() < 1e-8, "{} vs {exact}", j.eval(v));
    }

    #[test]
    fn out_of_range_alpha_is_rejected(alpha in prop_oneof![-3.0f64..=0.0, 1.0001f64..4.0]) {
        prop_assert!(matches!(asymptotic_profile(alpha, 2, 1.0), Err(Error::Range(_))));
    }
}

#[test]
fn linear_inverse_preserves_the_integral() {
    let phi = MonotoneTab::linear_nonincreasing(vec![0.0, 1.0, 3.0, 4.0], vec![5.0, 3.0, 1.0, 0.0]).unwrap();
    let trapezoids = 4.0 + 4.0 + 0.5;
    let pair = generalized_inverse(&phi).unwrap();
    assert!((phi.integral() - trapezoids).abs() < 1e-12);
    assert!((pair.phi_star.integral() - trapezoids).abs() < 1e-12);
    assert!((pair.phi_star.eval(2.0) - 2.0).abs() < 1e-12);
}

#[test]
fn increasing_tables_are_not_inverted() {
    let up = MonotoneTab::new(
        vec![0.0, 1.0],
        vec![0.0, 1.0],
        heatlab_core::monotone::Direction::Nondecreasing,
        heatlab_core::monotone::Interpolation::Linear,
        true,
        heatlab_core::monotone::Extrapolation::Zero,
    )
    .unwrap();
    assert!(generalized_inverse(&up).is_err());
}

#[test]
fn envelope_has_nonincreasing_ratio() {
    // The transformed plus end starts at the minimum of S̃, where J_ν/v is not monotone.
    let m = two_end_model(0.5, 2, RadialProfile::hyperbolic(2).unwrap(), 1.0).unwrap();
    let pair = build_two_end_weight(&m).unwrap();
    let plus = pair
        .transformed
        .half_line_view(split_point(&pair.transformed), Side::Plus)
        .unwrap();
    let j = profile_halfline(&plus).unwrap();
    let env = j.ratio_envelope(2048);
    let (lo, hi) = env.sample_range();
    let mut prev = f64::INFINITY;
    for k in 0..=400 {
        let v = lo * (hi / lo).powf(k as f64 / 400.0);
        let (e, raw) = (env.eval(v), j.eval(v));
        assert!(e <= raw * (1.0 + 1e-12), "envelope above J at {v}");
        assert!(e / v <= prev * (1.0 + 1e-12), "ratio grows at {v}");
        prev = e / v;
    }
    assert!(env.check_j_over_v(2048).is_none());
}

#[test]
fn warped_constant_follows_the_comparison_constant() {
    let base = || profile_halfline(&WeightedModel::new(RadialProfile::euclidean(3).unwrap())).unwrap();
    let sphere = || profile_sphere(2, 2.0).unwrap();
    let mass = sphere().total_mass();
    let one = warped_product_profile(base(), sphere(), mass, 1.0).unwrap();
    let four = warped_product_profile(base(), sphere(), mass, 4.0).unwrap();
    let c = |j: &IsoProfile| match j.kind() {
        ProfileKind::Warped(w) => w.c,
        other => panic!("unexpected {other:?}"),
    };
    assert_eq!(c(&one), 0.5);
    assert_eq!(c(&four), 0.125);
    for v in [0.1, 1.0, 10.0, 1e3] {
        assert!((four.eval(v) * 4.0 / one.eval(v) - 1.0).abs() < 1e-12);
    }
}
