use heatlab_core::pipeline::{calibration_index, two_end_pipeline_with, PipelineOptions};
use heatlab_core::quadrature::logspace;
use heatlab_core::solver::GridSpec;
use heatlab_core::{Error, RadialProfile};

fn small() -> PipelineOptions {
    PipelineOptions {
        grid: GridSpec::uniform(-30.0, 300.0, 1500, 0.2),
        source_count: 9,
        iso_points: 21,
        eigen_points: 4,
        ..PipelineOptions::default()
    }
}

#[test]
fn bounds_are_ordered_and_calibrated() {
    let times = logspace(10.0, 400.0, 7);
    let rep = two_end_pipeline_with(0.5, 2, RadialProfile::hyperbolic(2).unwrap(), &times, &small()).unwrap();
    assert_eq!(rep.kappa2, 1.0);
    assert!(rep.h_ref >= 1.0 && rep.kappa1 > 1.0);
    assert_eq!(rep.calibration_time, 10.0);
    assert!((rep.upper[0] / rep.numeric[0] - 1.0).abs() < 1e-12);
    for k in 0..times.len() {
        assert!(rep.numeric[k] <= rep.upper[k] * (1.0 + 1e-12), "t = {}", times[k]);
        assert!(rep.log_lower[k] <= rep.numeric[k].ln(), "t = {}", times[k]);
    }
    assert!(rep.upper.windows(2).all(|w| w[1] < w[0]));
    assert_eq!(rep.iso.len(), 21);
    assert_eq!(rep.eigen.len(), 4);
    for row in &rep.eigen {
        assert!(row.lambda1 <= row.rayleigh_upper * (1.0 + 1e-9), "R = {}", row.r);
        assert!(row.fk_lower <= row.lambda1, "R = {}", row.r);
    }
    assert_eq!(rep.target_exponent, 1.0 / 3.0);
}

#[test]
fn calibration_can_be_anchored_later() {
    let times = logspace(10.0, 400.0, 7);
    let opts = PipelineOptions {
        calibration_anchor: Some(60.0),
        ..small()
    };
    let rep = two_end_pipeline_with(0.5, 2, RadialProfile::hyperbolic(2).unwrap(), &times, &opts).unwrap();
    let k = calibration_index(&times, Some(60.0));
    assert_eq!(rep.calibration_time, times[k]);
    assert!((rep.upper[k] / rep.numeric[k] - 1.0).abs() < 1e-12);
}

#[test]
fn anchors_snap_to_the_nearest_time_in_log_scale() {
    let times = [10.0, 20.0, 40.0];
    assert_eq!(calibration_index(&times, None), 0);
    assert_eq!(calibration_index(&times, Some(25.0)), 1);
    assert_eq!(calibration_index(&times, Some(30.0)), 2);
    assert_eq!(calibration_index(&times, Some(1e6)), 2);
}

#[test]
fn failures_name_their_stage() {
    let times = [10.0, 20.0];
    // A flat minus end is parabolic, so no bounded harmonic weight exists.
    match two_end_pipeline_with(0.5, 2, RadialProfile::flat(), &times, &small()) {
        Err(Error::Precondition(m)) => assert!(m.starts_with("build_two_end_weight"), "{m}"),
        other => panic!("unexpected {other:?}"),
    }
    assert!(matches!(
        two_end_pipeline_with(0.5, 2, RadialProfile::hyperbolic(2).unwrap(), &[20.0, 10.0], &small()),
        Err(Error::Argument(_))
    ));
    assert!(matches!(
        two_end_pipeline_with(1.5, 2, RadialProfile::hyperbolic(2).unwrap(), &times, &small()),
        Err(Error::Range(_))
    ));
}
