use heatlab_core::htransform::{build_two_end_weight, diagonal_identity_error, TransformPair};
use heatlab_core::pipeline::two_end_model;
use heatlab_core::solver::{kernel_diag, BoundaryCondition, GridSpec};
use heatlab_core::{RadialProfile, Weight, WeightedModel};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

fn pair(alpha: f64, n: u32) -> TransformPair {
    let m = two_end_model(alpha, n, RadialProfile::hyperbolic(n).unwrap(), 1.0).unwrap();
    build_two_end_weight(&m).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig {
        rng_seed: RngSeed::Fixed(0x5eed),
        ..ProptestConfig::with_cases(12)
    })]

    #[test]
    fn weight_is_nondecreasing_and_transforms_the_area(alpha in 0.1f64..=1.0, n in 2u32..4, xs in prop::collection::vec(-30.0f64..40.0, 2..40)) {
        let p = pair(alpha, n);
        let mut xs = xs;
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut prev = 0.0;
        for &r in &xs {
            let h = p.h(r);
            prop_assert!(h >= 1.0, "h({r}) = {h}");
            prop_assert!(h >= prev * (1.0 - 1e-12));
            prev = h;
            let expect = p.base.log_weighted_area(r) + 2.0 * h.ln();
            let got = p.transformed.log_weighted_area(r);
            prop_assert!((got - expect).abs() <= 1e-12 * expect.abs().max(1.0));
        }
    }
}

fn ratio_band(alpha: f64, lo: f64, hi: f64) -> (f64, f64) {
    let p = pair(alpha, 2);
    let mut band = (f64::INFINITY, 0.0f64);
    for k in 0..=400 {
        let r = lo * (hi / lo).powf(k as f64 / 400.0);
        let reference = (2.0 - 2.0 * alpha) * r.ln() + r.powf(alpha);
        let q = (p.transformed.log_weighted_area(r) - reference).exp();
        band = (band.0.min(q), band.1.max(q));
    }
    band
}

#[test]
fn transformed_area_grows_like_the_reference_at_one_half() {
    let (lo, hi) = ratio_band(0.5, 4.0, 400.0);
    assert!(lo >= 0.25 && hi <= 4.0, "S̃/(r e^√r) in [{lo}, {hi}]");
}

#[test]
fn transformed_area_grows_like_the_reference_at_one() {
    let (lo, hi) = ratio_band(1.0, 2.0, 20.0);
    assert!(lo >= 0.25 && hi <= 4.0, "S̃/e^r in [{lo}, {hi}]");
}

#[test]
fn weight_tends_to_one_on_the_minus_end() {
    let p = pair(0.5, 2);
    assert!(p.h(-40.0) - 1.0 < 1e-12);
    assert!(
        (p.h(1.0) / p.kappa1 - 1.0).abs() < 1e-12,
        "h(1) = {}, κ₁ = {}",
        p.h(1.0),
        p.kappa1
    );
}

#[test]
fn diagonal_kernels_differ_by_h_squared() {
    // Affine weight on the line: h = 1 + r is harmonic for S ≡ 1.
    let base = WeightedModel::new(RadialProfile::power(0.0, 2).unwrap());
    let p = TransformPair::new(
        base,
        Weight::Affine {
            intercept: 1.0,
            slope: 1.0,
        },
        1.0,
        1.0,
    )
    .unwrap();
    let grid = GridSpec::uniform(0.0, 12.0, 1201, 0.002);
    let sources: Vec<usize> = vec![50, 100, 200];
    let times = [0.25, 0.5, 1.0];
    let q = kernel_diag(&p.base, &grid, BoundaryCondition::Dirichlet, &times, &sources).unwrap();
    let qt = kernel_diag(&p.transformed, &grid, BoundaryCondition::Dirichlet, &times, &sources).unwrap();
    let err = diagonal_identity_error(&p, &q, &qt);
    assert!(err < 1e-3, "relative error {err}");
}
