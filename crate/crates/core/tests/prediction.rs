use proptest::prelude::*;
use tilestream_core::prediction::{error_experiment, fit, fit_at, window};
use tilestream_core::traces::{linear_trace, sinusoid_trace};
use tilestream_core::{Orientation, PredictorConfig, TimedOrientation};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn linear_motion_is_predicted_exactly(yaw0 in -180.0f64..180.0, speed in -90.0f64..90.0, pitch in -80.0f64..80.0, interval in 0.1f64..2.0) {
        let trace = linear_trace(8.0, 30.0, yaw0, speed, pitch);
        let errors = error_experiment(&trace, interval, 0.5, 0.5).unwrap();
        prop_assert!(!errors.is_empty());
        for e in errors {
            prop_assert!(e < 1e-6, "error {}", e);
        }
    }

    /// Shifting the whole trace in time shifts the fitted model with it.
    #[test]
    fn time_translation_invariance(shift in 0.0f64..100.0, amplitude in 1.0f64..90.0) {
        let base = sinusoid_trace(4.0, 30.0, amplitude, 3.0, 0.3, 0.0);
        let moved: Vec<TimedOrientation> = base.iter().map(|s| TimedOrientation::new(s.t + shift, s.o)).collect();
        let cfg = PredictorConfig::new(0.5, 1.0).unwrap();
        // window edges off the 30 Hz sample grid, so rounding can't move a sample across them
        let a = fit_at(&base, &cfg, 2.01).unwrap();
        let b = fit_at(&moved, &cfg, 2.01 + shift).unwrap();
        let (pa, pb) = (a.predict(3.01), b.predict(3.01 + shift));
        prop_assert!((pa.yaw() - pb.yaw()).abs() < 1e-6);
        prop_assert!((a.yaw_slope - b.yaw_slope).abs() < 1e-4);
    }

    /// Rotating the viewer in yaw rotates the prediction by the same angle.
    #[test]
    fn yaw_offset_equivariance(offset in -180.0f64..180.0) {
        let base = sinusoid_trace(4.0, 30.0, 40.0, 3.0, 0.0, 0.0);
        let turned: Vec<TimedOrientation> = base
            .iter()
            .map(|s| TimedOrientation::new(s.t, Orientation::yaw_pitch(s.o.yaw() + offset, s.o.pitch())))
            .collect();
        let cfg = PredictorConfig::new(0.3, 1.0).unwrap();
        let a = fit_at(&base, &cfg, 2.0).unwrap().predict(3.0);
        let b = fit_at(&turned, &cfg, 2.0).unwrap().predict(3.0);
        let d = tilestream_core::geometry::orthodromic_distance(&Orientation::yaw_pitch(a.yaw() + offset, a.pitch()), &b);
        prop_assert!(d < 1e-6, "{}", d);
    }
}

#[test]
fn crossing_the_seam_keeps_a_straight_line() {
    // yaw runs 170 -> 190 (= -170)
    let trace = linear_trace(2.0, 30.0, 170.0, 10.0, 0.0);
    let m = fit(window(&trace, 1.5, 1.5), 1.5).unwrap();
    assert!((m.yaw_slope - 10.0).abs() < 1e-9);
    assert!((m.predict(2.5).yaw() - (-165.0)).abs() < 1e-9);
}

#[test]
fn window_falls_back_to_latest_sample() {
    let trace = vec![
        TimedOrientation::new(0.0, Orientation::yaw_pitch(10.0, 0.0)),
        TimedOrientation::new(5.0, Orientation::yaw_pitch(20.0, 0.0)),
    ];
    assert_eq!(window(&trace, 3.0, 0.1), &trace[..1]);
    assert_eq!(window(&trace, -1.0, 0.1), &trace[..1]);
    let m = fit_at(&trace, &PredictorConfig::new(0.1, 1.0).unwrap(), 3.0).unwrap();
    assert_eq!(m.predict(4.0).yaw(), 10.0);
}

#[test]
fn trace_shorter_than_interval_plus_timeframe_is_an_error() {
    let trace = linear_trace(1.0, 30.0, 0.0, 5.0, 0.0);
    assert!(error_experiment(&trace, 1.0, 0.1, 0.1).is_err());
    assert!(error_experiment(&[], 1.0, 0.1, 0.1).is_err());
}
