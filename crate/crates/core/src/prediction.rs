//! Linear-regression head-orientation prediction.
//!
//! Yaw and pitch are fitted independently by ordinary least squares over the
//! samples of the last `timeframe` seconds. Yaw is unwrapped first so a viewer
//! turning across the +-180 degree seam keeps a continuous line.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{orthodromic_distance, wrap_yaw, Orientation, TimedOrientation};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictorConfig {
    /// Regression window length `T` in seconds.
    pub timeframe: f64,
    /// Prediction interval `I` in seconds.
    pub interval: f64,
}

impl PredictorConfig {
    pub fn new(timeframe: f64, interval: f64) -> Result<Self> {
        if !(timeframe > 0.0) {
            return Err(invalid("timeframe", format!("{timeframe} must be positive")));
        }
        if !(interval > 0.0) {
            return Err(invalid("interval", format!("{interval} must be positive")));
        }
        Ok(Self { timeframe, interval })
    }

    /// `T = 0.1 s` and `I` equal to the segment length.
    pub fn for_segment_length(segment_length: f64) -> Self {
        Self {
            timeframe: 0.1,
            interval: segment_length,
        }
    }
}

/// Fitted lines for yaw and pitch. Intercepts are the fitted values at
/// `fit_time`; slopes are in degrees per second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionModel {
    pub yaw_slope: f64,
    pub yaw_intercept: f64,
    pub pitch_slope: f64,
    pub pitch_intercept: f64,
    pub fit_time: f64,
    pub sample_count: usize,
}

impl RegressionModel {
    pub fn predict(&self, t_future: f64) -> Orientation {
        let dt = t_future - self.fit_time;
        Orientation::yaw_pitch(
            self.yaw_intercept + self.yaw_slope * dt,
            self.pitch_intercept + self.pitch_slope * dt,
        )
    }
}

/// Fits a model to `window`, evaluated relative to `now`.
pub fn fit(window: &[TimedOrientation], now: f64) -> Result<RegressionModel> {
    if window.is_empty() {
        return Err(Error::NoSamples);
    }
    let ts: Vec<f64> = window.iter().map(|s| s.t - now).collect();
    let yaws = unwrap_yaw(window.iter().map(|s| s.o.yaw()));
    let pitches: Vec<f64> = window.iter().map(|s| s.o.pitch()).collect();
    let (yaw_slope, yaw_intercept) = least_squares(&ts, &yaws);
    let (pitch_slope, pitch_intercept) = least_squares(&ts, &pitches);
    Ok(RegressionModel {
        yaw_slope,
        yaw_intercept: wrap_yaw(yaw_intercept),
        pitch_slope,
        pitch_intercept,
        fit_time: now,
        sample_count: window.len(),
    })
}

/// Samples of a time-sorted trace with `t` in `[now - timeframe, now]`. Falls
/// back to the latest sample before `now` when the window holds none, so a
/// sparse or finished trace still yields a constant prediction.
pub fn window(trace: &[TimedOrientation], now: f64, timeframe: f64) -> &[TimedOrientation] {
    let lo = trace.partition_point(|s| s.t < now - timeframe);
    let hi = trace.partition_point(|s| s.t <= now);
    if lo < hi {
        &trace[lo..hi]
    } else if hi > 0 {
        &trace[hi - 1..hi]
    } else {
        &trace[..trace.len().min(1)]
    }
}

/// Windows `trace` at `now` and fits a model.
pub fn fit_at(trace: &[TimedOrientation], cfg: &PredictorConfig, now: f64) -> Result<RegressionModel> {
    fit(window(trace, now, cfg.timeframe), now)
}

/// Sample of a time-sorted trace closest in time to `t`; ties go to the earlier one.
pub fn nearest_sample(trace: &[TimedOrientation], t: f64) -> Option<&TimedOrientation> {
    let i = trace.partition_point(|s| s.t < t);
    match (i.checked_sub(1).and_then(|j| trace.get(j)), trace.get(i)) {
        (Some(a), Some(b)) => Some(if t - a.t <= b.t - t { a } else { b }),
        (a, b) => a.or(b),
    }
}

/// Steps through `trace` every `step` seconds, predicting `interval` seconds
/// ahead from the last `timeframe` seconds and recording the orthodromic
/// distance to the recorded orientation nearest `t + interval`. The model is
/// evaluated at that sample's own timestamp, so off-grid intervals don't
/// count sampling jitter as prediction error.
///
/// Steps are aligned to multiples of `step`; the first step is the earliest
/// one with a full window behind it and the last one still has a recorded
/// orientation at `t + interval`.
pub fn error_experiment(trace: &[TimedOrientation], interval: f64, timeframe: f64, step: f64) -> Result<Vec<f64>> {
    let cfg = PredictorConfig::new(timeframe, interval)?;
    if !(step > 0.0) {
        return Err(invalid("step", format!("{step} must be positive")));
    }
    let (first, last) = match (trace.first(), trace.last()) {
        (Some(a), Some(b)) => (a.t, b.t),
        _ => return Err(Error::NoSamples),
    };
    let required = interval + timeframe;
    if last - first <= required {
        return Err(Error::TraceTooShort {
            duration: last - first,
            required,
        });
    }
    const EPS: f64 = 1e-9;
    let mut k = ((first + timeframe) / step - EPS).ceil() as i64;
    let mut errors = Vec::new();
    loop {
        let now = k as f64 * step;
        if now + interval > last + EPS {
            break;
        }
        let model = fit_at(trace, &cfg, now)?;
        let actual = nearest_sample(trace, now + interval).ok_or(Error::NoSamples)?;
        let predicted = model.predict(actual.t);
        errors.push(orthodromic_distance(&predicted, &actual.o));
        k += 1;
    }
    Ok(errors)
}

/// Removes +-360 degree jumps between consecutive yaw samples.
fn unwrap_yaw(yaws: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for y in yaws {
        let next = match out.last() {
            Some(&prev) => prev + wrap_yaw(y - prev),
            None => y,
        };
        out.push(next);
    }
    out
}

/// Returns `(slope, value at x = 0)`. Degenerate inputs give a constant at the mean.
fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx <= f64::EPSILON * n * (1.0 + mx * mx) {
        return (0.0, my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(samples: &[(f64, f64, f64)]) -> Vec<TimedOrientation> {
        samples
            .iter()
            .map(|&(t, y, p)| TimedOrientation::new(t, Orientation::yaw_pitch(y, p)))
            .collect()
    }

    #[test]
    fn constant_orientation_has_zero_slope() {
        let w: Vec<_> = (0..10).map(|i| (i as f64 * 0.01, 42.0, -5.0)).collect();
        let m = fit(&trace(&w), 0.09).unwrap();
        assert_eq!(m.sample_count, 10);
        assert!(m.yaw_slope.abs() < 1e-12 && m.pitch_slope.abs() < 1e-12);
        assert!((m.yaw_intercept - 42.0).abs() < 1e-9);
        assert!((m.pitch_intercept + 5.0).abs() < 1e-9);
        let p = m.predict(3.0);
        assert!((p.yaw() - 42.0).abs() < 1e-9 && (p.pitch() + 5.0).abs() < 1e-9);
    }

    #[test]
    fn exact_linear_motion() {
        let w: Vec<_> = (0..10).map(|i| (i as f64 * 0.1, i as f64, 0.0)).collect();
        let m = fit(&trace(&w), 0.9).unwrap();
        assert!((m.yaw_slope - 10.0).abs() < 1e-9);
    }

    #[test]
    fn unwraps_across_the_seam() {
        let m = fit(
            &trace(&[(0.0, 179.0, 0.0), (0.1, -180.0, 0.0), (0.2, -179.0, 0.0)]),
            0.2,
        )
        .unwrap();
        assert!((m.yaw_slope - 10.0).abs() < 1e-9, "slope {}", m.yaw_slope);
    }

    #[test]
    fn single_sample_is_constant_and_empty_fails() {
        let m = fit(&trace(&[(1.0, 20.0, 10.0)]), 1.0).unwrap();
        assert_eq!(m.yaw_slope, 0.0);
        assert_eq!(m.predict(5.0), Orientation::yaw_pitch(20.0, 10.0));
        assert!(matches!(fit(&[], 0.0), Err(Error::NoSamples)));
    }

    #[test]
    fn predict_examples() {
        let m = RegressionModel {
            yaw_slope: 10.0,
            yaw_intercept: 0.0,
            pitch_slope: 0.0,
            pitch_intercept: 0.0,
            fit_time: 0.0,
            sample_count: 2,
        };
        assert!((m.predict(1.5).yaw() - 15.0).abs() < 1e-12);
        let up = RegressionModel {
            pitch_slope: 50.0,
            pitch_intercept: 80.0,
            ..m
        };
        assert_eq!(up.predict(0.3).pitch(), 90.0);
    }

    #[test]
    fn window_selection() {
        let t = trace(&[(0.0, 0.0, 0.0), (0.5, 1.0, 0.0), (1.0, 2.0, 0.0), (1.5, 3.0, 0.0)]);
        assert_eq!(window(&t, 1.0, 0.5).len(), 2);
        assert_eq!(window(&t, 1.2, 0.1).len(), 1);
        assert_eq!(window(&t, 1.2, 0.1)[0].t, 1.0);
        assert_eq!(window(&t, 0.0, 0.1).len(), 1);
    }

    #[test]
    fn nearest_sample_lookup() {
        let t = trace(&[(0.0, 0.0, 0.0), (1.0, 1.0, 0.0)]);
        assert_eq!(nearest_sample(&t, 0.4).unwrap().t, 0.0);
        assert_eq!(nearest_sample(&t, 0.6).unwrap().t, 1.0);
        assert_eq!(nearest_sample(&t, 7.0).unwrap().t, 1.0);
        assert!(nearest_sample(&[], 0.0).is_none());
    }

    #[test]
    fn experiment_rejects_short_traces() {
        let t = trace(&[(0.0, 0.0, 0.0), (1.0, 1.0, 0.0)]);
        assert!(matches!(
            error_experiment(&t, 1.0, 0.1, 1.0),
            Err(Error::TraceTooShort { .. })
        ));
        assert!(error_experiment(&t, 0.2, 0.1, 0.0).is_err());
    }

    #[test]
    fn stationary_trace_has_no_error() {
        let w: Vec<_> = (0..500).map(|i| (i as f64 / 50.0, 77.0, 12.0)).collect();
        let errs = error_experiment(&trace(&w), 1.0, 0.1, 1.5).unwrap();
        assert!(!errs.is_empty());
        assert!(errs.iter().all(|&e| e < 1e-6));
    }
}
