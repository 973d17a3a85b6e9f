//! Viewing-trace files and synthetic trace generators.
//!
//! Viewing traces are CSV files with a header. Two layouts are accepted:
//!
//! - `t_seconds,yaw_deg,pitch_deg,roll_deg`
//! - `t,qw,qx,qy,qz`: a unit quaternion rotating the reference view
//!   direction `(1, 0, 0)` (x forward, y left, z up) into the viewer's view
//!   direction. Yaw and pitch come from the rotated forward axis; roll is the
//!   angle of the rotated up axis around it, positive when tilting right.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Error, Result};
use crate::geometry::{Orientation, TimedOrientation};
use crate::netsim::{NetworkTrace, PACKET_BYTES};

pub const EULER_HEADER: &str = "t_seconds,yaw_deg,pitch_deg,roll_deg";

/// Converts a `(w, x, y, z)` quaternion to an orientation.
pub fn quaternion_to_orientation(w: f64, x: f64, y: f64, z: f64) -> Orientation {
    let n = (w * w + x * x + y * y + z * z).sqrt();
    let (w, x, y, z) = (w / n, x / n, y / n, z / n);
    let forward = [
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y + w * z),
        2.0 * (x * z - w * y),
    ];
    let up = [
        2.0 * (x * z + w * y),
        2.0 * (y * z - w * x),
        1.0 - 2.0 * (x * x + y * y),
    ];
    let base = Orientation::from_direction(forward);
    let (sy, cy) = base.yaw().to_radians().sin_cos();
    let (sp, cp) = base.pitch().to_radians().sin_cos();
    let ref_up = [-sp * cy, -sp * sy, cp];
    let ref_left = [-sy, cy, 0.0];
    let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let roll = (-dot(up, ref_left)).atan2(dot(up, ref_up)).to_degrees();
    Orientation::new(base.yaw(), base.pitch(), roll)
}

#[derive(Clone, Copy)]
enum Layout {
    Euler,
    Quaternion,
}

pub fn parse_viewing_trace(text: &str, path: &Path) -> Result<Vec<TimedOrientation>> {
    let err = |line: usize, reason: String| Error::Parse {
        path: path.into(),
        line,
        reason,
    };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| err(0, "empty viewing trace".into()))?;
    let columns: Vec<String> = header.split(',').map(|c| c.trim().to_ascii_lowercase()).collect();
    let layout = match columns.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        [_, y, p, r] if y.starts_with("yaw") && p.starts_with("pitch") && r.starts_with("roll") => Layout::Euler,
        [_, "qw", "qx", "qy", "qz"] => Layout::Quaternion,
        _ => {
            return Err(err(
                1,
                format!("unrecognized header `{header}` (expected `{EULER_HEADER}` or `t,qw,qx,qy,qz`)"),
            ))
        }
    };
    let mut out: Vec<TimedOrientation> = Vec::new();
    for (i, line) in lines {
        let fields: Result<Vec<f64>> = line
            .split(',')
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|_| err(i + 1, format!("`{}` is not a number", f.trim())))
            })
            .collect();
        let f = fields?;
        let o = match (layout, f.as_slice()) {
            (Layout::Euler, [_, yaw, pitch, roll]) => Orientation::new(*yaw, *pitch, *roll),
            (Layout::Quaternion, [_, w, x, y, z]) => quaternion_to_orientation(*w, *x, *y, *z),
            _ => return Err(err(i + 1, format!("expected {} columns", columns.len()))),
        };
        let t = f[0];
        if !(t >= 0.0) {
            return Err(err(i + 1, format!("negative timestamp {t}")));
        }
        if let Some(prev) = out.last() {
            if t <= prev.t {
                return Err(err(i + 1, format!("timestamp {t} does not increase")));
            }
        }
        out.push(TimedOrientation::new(t, o));
    }
    if out.is_empty() {
        return Err(err(0, "viewing trace has no samples".into()));
    }
    Ok(out)
}

pub fn load_viewing_trace(path: impl AsRef<Path>) -> Result<Vec<TimedOrientation>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.into(),
        source,
    })?;
    parse_viewing_trace(&text, path)
}

pub fn format_viewing_trace(trace: &[TimedOrientation]) -> String {
    let mut out = String::from(EULER_HEADER);
    out.push('\n');
    for s in trace {
        out.push_str(&format!("{},{},{},{}\n", s.t, s.o.yaw(), s.o.pitch(), s.o.roll()));
    }
    out
}

pub fn save_viewing_trace(path: impl AsRef<Path>, trace: &[TimedOrientation]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_viewing_trace(trace)).map_err(|source| Error::Io {
        path: path.into(),
        source,
    })
}

/// `.csv` files of a directory in file-name order.
pub fn trace_files(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let io = |source| Error::Io {
        path: dir.into(),
        source,
    };
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "csv") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Loads every viewing trace of a directory, in file-name order.
pub fn load_trace_dir(dir: impl AsRef<Path>) -> Result<Vec<(PathBuf, Vec<TimedOrientation>)>> {
    let files = trace_files(&dir)?;
    if files.is_empty() {
        return Err(invalid(
            "trace directory",
            format!("no .csv traces in {}", dir.as_ref().display()),
        ));
    }
    files
        .into_iter()
        .map(|p| load_viewing_trace(&p).map(|t| (p, t)))
        .collect()
}

fn sample_times(duration: f64, rate_hz: f64) -> impl Iterator<Item = f64> {
    let n = (duration * rate_hz).floor() as usize;
    (0..=n).map(move |i| i as f64 / rate_hz)
}

/// Constant angular velocity in yaw at fixed pitch.
pub fn linear_trace(duration: f64, rate_hz: f64, yaw0: f64, yaw_speed: f64, pitch: f64) -> Vec<TimedOrientation> {
    sample_times(duration, rate_hz)
        .map(|t| TimedOrientation::new(t, Orientation::yaw_pitch(yaw0 + yaw_speed * t, pitch)))
        .collect()
}

/// `yaw(t) = center + amplitude * sin(2 pi t / period + phase)` at pitch 0.
pub fn sinusoid_trace(
    duration: f64,
    rate_hz: f64,
    amplitude: f64,
    period: f64,
    phase: f64,
    center: f64,
) -> Vec<TimedOrientation> {
    sample_times(duration, rate_hz)
        .map(|t| {
            let yaw = center + amplitude * (std::f64::consts::TAU * t / period + phase).sin();
            TimedOrientation::new(t, Orientation::yaw_pitch(yaw, 0.0))
        })
        .collect()
}

/// Parameters of [`hotspot_trace`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HotspotSpec {
    pub duration: f64,
    pub rate_hz: f64,
    pub center: Orientation,
    /// Standard deviation of yaw around the center, degrees.
    pub yaw_spread: f64,
    /// Standard deviation of pitch around the center, degrees.
    pub pitch_spread: f64,
}

impl Default for HotspotSpec {
    fn default() -> Self {
        Self {
            duration: 40.0,
            rate_hz: 30.0,
            center: Orientation::yaw_pitch(0.0, 0.0),
            yaw_spread: 30.0,
            pitch_spread: 10.0,
        }
    }
}

/// A viewer drifting smoothly around a point of interest.
///
/// Each angle is a per-viewer offset plus three slow sinusoids; offset and
/// oscillation each carry half of the requested variance, so samples are
/// spread roughly normally around the center.
pub fn hotspot_trace(spec: &HotspotSpec, seed: u64) -> Vec<TimedOrientation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut wander = |spread: f64| {
        let offset = Normal::new(0.0, spread / 2f64.sqrt())
            .map(|n| n.sample(&mut rng))
            .unwrap_or(0.0);
        let amplitude = spread / 3f64.sqrt();
        let waves: Vec<(f64, f64)> = (0..3)
            .map(|_| {
                (
                    rng.random_range(0.02..0.2),
                    rng.random_range(0.0..std::f64::consts::TAU),
                )
            })
            .collect();
        move |t: f64| {
            offset
                + waves
                    .iter()
                    .map(|(f, ph)| amplitude * (std::f64::consts::TAU * f * t + ph).sin())
                    .sum::<f64>()
        }
    };
    let yaw = wander(spec.yaw_spread);
    let pitch = wander(spec.pitch_spread);
    sample_times(spec.duration, spec.rate_hz)
        .map(|t| {
            TimedOrientation::new(
                t,
                Orientation::yaw_pitch(spec.center.yaw() + yaw(t), spec.center.pitch() + pitch(t)),
            )
        })
        .collect()
}

/// `count` hot-spot viewers with seeds `seed, seed + 1, ...`.
pub fn hotspot_traces(spec: &HotspotSpec, count: usize, seed: u64) -> Vec<Vec<TimedOrientation>> {
    (0..count)
        .map(|i| hotspot_trace(spec, seed.wrapping_add(i as u64)))
        .collect()
}

/// Millisecond packet trace delivering each phase's rate for its duration.
/// `phases` are `(seconds, bits per second)`.
pub fn piecewise_network_trace(phases: &[(f64, f64)]) -> Result<NetworkTrace> {
    let packet_bits = (PACKET_BYTES * 8) as f64;
    let mut slots = Vec::new();
    let mut credit = 0.0;
    let mut ms = 0u64;
    for &(seconds, bps) in phases {
        if !(seconds > 0.0) || !(bps >= 0.0) {
            return Err(invalid("network phase", format!("({seconds} s, {bps} bit/s)")));
        }
        let end = ms + (seconds * 1000.0).round() as u64;
        while ms < end {
            ms += 1;
            credit += bps / 1000.0 / packet_bits;
            while credit >= 1.0 {
                slots.push(ms as f64);
                credit -= 1.0;
            }
        }
    }
    if slots.last() != Some(&(ms as f64)) {
        // pin the period to the full length of the phases
        slots.push(ms as f64);
    }
    NetworkTrace::new(slots)
}

pub fn constant_network_trace(bps: f64, seconds: f64) -> Result<NetworkTrace> {
    piecewise_network_trace(&[(seconds, bps)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_quaternion_looks_forward() {
        let o = quaternion_to_orientation(1.0, 0.0, 0.0, 0.0);
        assert_eq!((o.yaw(), o.pitch(), o.roll()), (0.0, 0.0, 0.0));
    }

    #[test]
    fn quaternion_axes() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // 90 degrees about z: look left
        let o = quaternion_to_orientation(h, 0.0, 0.0, h);
        assert!((o.yaw() - 90.0).abs() < 1e-9 && o.pitch().abs() < 1e-9);
        // -90 degrees about y tilts forward up to the pole
        let o = quaternion_to_orientation(h, 0.0, -h, 0.0);
        assert!((o.pitch() - 90.0).abs() < 1e-6);
        // 30 degrees about x rolls without moving the view direction
        let (s, c) = 15f64.to_radians().sin_cos();
        let o = quaternion_to_orientation(c, s, 0.0, 0.0);
        assert!(o.yaw().abs() < 1e-9 && o.pitch().abs() < 1e-9);
        assert!((o.roll().abs() - 30.0).abs() < 1e-9);
    }

    #[test]
    fn euler_round_trip() {
        let trace = linear_trace(2.0, 10.0, 170.0, 20.0, -3.5);
        let text = format_viewing_trace(&trace);
        assert!(text.starts_with(EULER_HEADER));
        assert_eq!(parse_viewing_trace(&text, Path::new("t.csv")).unwrap(), trace);
    }

    #[test]
    fn quaternion_layout_is_detected() {
        let text = "t,qw,qx,qy,qz\n0.0,1,0,0,0\n0.5,0.7071067811865476,0,0,0.7071067811865476\n";
        let t = parse_viewing_trace(text, Path::new("q.csv")).unwrap();
        assert_eq!(t.len(), 2);
        assert!((t[1].o.yaw() - 90.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_malformed_traces() {
        let p = Path::new("bad.csv");
        assert!(parse_viewing_trace("", p).is_err());
        assert!(parse_viewing_trace("a,b\n1,2\n", p).is_err());
        assert!(parse_viewing_trace(&format!("{EULER_HEADER}\n"), p).is_err());
        let e = parse_viewing_trace(&format!("{EULER_HEADER}\n0,0,0,0\n0,1,0,0\n"), p).unwrap_err();
        assert!(e.to_string().contains(":3:"), "{e}");
        assert!(parse_viewing_trace(&format!("{EULER_HEADER}\n0,x,0,0\n"), p).is_err());
    }

    #[test]
    fn hotspot_is_deterministic() {
        let spec = HotspotSpec {
            duration: 5.0,
            ..HotspotSpec::default()
        };
        assert_eq!(hotspot_trace(&spec, 3), hotspot_trace(&spec, 3));
        assert_ne!(hotspot_trace(&spec, 3), hotspot_trace(&spec, 4));
        assert_eq!(hotspot_trace(&spec, 3).len(), 151);
    }

    #[test]
    fn piecewise_rates() {
        let t = piecewise_network_trace(&[(2.0, 12e6), (2.0, 1.2e6)]).unwrap();
        assert_eq!(t.duration_ms(), 4000.0);
        // 2000 + 200 packets
        assert_eq!(t.packet_count(), 2200);
        assert!((t.average_bps() - 6.6e6).abs() < 1.0);
        assert!(piecewise_network_trace(&[(0.0, 1.0)]).is_err());
    }
}
