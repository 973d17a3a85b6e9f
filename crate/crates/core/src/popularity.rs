//! Tile popularity from recorded viewing traces.
//!
//! Every orientation sample of every trace adds its viewport visibility to the
//! heat of the segment it falls into. The heat is then quantized into one
//! quality level per tile and segment under a bitrate budget.

use serde::{Deserialize, Serialize};

use crate::adaptation::greedy_upgrade;
use crate::error::{invalid, Error, Result};
use crate::geometry::{rank_descending, FovSpec, TileGrid, TimedOrientation, ViewportSampler};
use crate::manifest::{segment_count, QualityAssignment, VideoManifest};

/// Accumulated visibility mass per segment and tile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatMap {
    pub grid: TileGrid,
    /// Indexed `[segment][tile]`.
    pub heat: Vec<Vec<f64>>,
}

impl HeatMap {
    pub fn segment_count(&self) -> usize {
        self.heat.len()
    }

    /// Heat of each tile summed over all segments.
    pub fn totals(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.tile_count()];
        for seg in &self.heat {
            for (o, h) in out.iter_mut().zip(seg) {
                *o += h;
            }
        }
        out
    }
}

/// Quality level per segment and tile, stored in the manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PopularityTrace(Vec<Vec<u8>>);

impl PopularityTrace {
    pub fn new(levels: Vec<Vec<u8>>) -> Self {
        Self(levels)
    }

    pub fn levels(&self) -> &[Vec<u8>] {
        &self.0
    }

    pub fn segment_count(&self) -> usize {
        self.0.len()
    }

    pub fn assignment(&self, segment: usize) -> Option<QualityAssignment> {
        self.0.get(segment).cloned().map(QualityAssignment)
    }
}

/// Sums per-sample visibility into per-segment heat. Samples at or past
/// `duration` are ignored.
pub fn build_heat(
    traces: &[Vec<TimedOrientation>],
    grid: &TileGrid,
    fov: FovSpec,
    segment_length: f64,
    duration: f64,
    samples_per_axis: usize,
) -> Result<HeatMap> {
    if traces.is_empty() {
        return Err(invalid("traces", "at least one viewing trace is required"));
    }
    if !(duration > 0.0) || !(segment_length > 0.0) {
        return Err(invalid("duration", "duration and segment length must be positive"));
    }
    let sampler = ViewportSampler::new(fov, samples_per_axis)?;
    let segments = segment_count(duration, segment_length);
    let mut heat = vec![vec![0.0; grid.tile_count()]; segments];
    for trace in traces {
        for s in trace {
            if s.t < 0.0 || s.t >= duration {
                continue;
            }
            let seg = ((s.t / segment_length).floor() as usize).min(segments - 1);
            sampler.accumulate(&s.o, grid, &mut heat[seg]);
        }
    }
    Ok(HeatMap { grid: *grid, heat })
}

/// Default popularity budget: a quarter of the tiles (rounded up) at the top
/// quality and the rest at the lowest, in bits per second.
pub fn default_budget(manifest: &VideoManifest) -> f64 {
    manifest.nominal_bitrate(manifest.tile_count().div_ceil(4))
}

/// Turns heat into quality levels.
///
/// Per segment, tiles with positive heat are visited hottest first (ties by
/// tile index) and raised one level at a time; the walk stops at the first
/// step that would push the segment above `budget` bits per second, leaving
/// that tile at the last level that fit and every later tile at level 0.
pub fn quantize(heat: &HeatMap, budget: f64, manifest: &VideoManifest) -> Result<PopularityTrace> {
    if manifest.quality_count() < 2 {
        return Err(invalid("quality_count", "need at least two quality levels"));
    }
    if !(budget > 0.0) {
        return Err(invalid("budget", format!("{budget} must be positive")));
    }
    if heat.grid != manifest.grid() {
        return Err(invalid("grid", "heat map and manifest grids differ"));
    }
    if heat.segment_count() != manifest.segment_count() {
        return Err(Error::LengthMismatch {
            left: heat.segment_count(),
            right: manifest.segment_count(),
        });
    }
    let budget_bits = budget * manifest.segment_length();
    let levels = heat
        .heat
        .iter()
        .enumerate()
        .map(|(seg, h)| {
            let order: Vec<usize> = rank_descending(h).into_iter().filter(|&t| h[t] > 0.0).collect();
            greedy_upgrade(manifest, seg, &order, budget_bits)
        })
        .collect();
    Ok(PopularityTrace(levels))
}

/// Mean level of each tile over all segments.
pub fn average_quality_map(trace: &PopularityTrace) -> Result<Vec<f64>> {
    let first = trace.0.first().ok_or(Error::NoSamples)?;
    let mut sums = vec![0.0; first.len()];
    for seg in &trace.0 {
        for (s, &l) in sums.iter_mut().zip(seg) {
            *s += l as f64;
        }
    }
    let n = trace.0.len() as f64;
    Ok(sums.into_iter().map(|s| s / n).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Orientation;
    use crate::manifest::{synthesize, SynthSpec};

    fn manifest() -> VideoManifest {
        synthesize(&SynthSpec {
            duration: 6.0,
            ..SynthSpec::default()
        })
        .unwrap()
    }

    fn staring(o: Orientation, duration: f64) -> Vec<TimedOrientation> {
        (0..(duration * 10.0) as usize)
            .map(|i| TimedOrientation::new(i as f64 / 10.0, o))
            .collect()
    }

    #[test]
    fn narrow_fov_concentrates_heat() {
        let g = TileGrid::new(4, 4).unwrap();
        let trace = staring(g.tile_center(2, 2), 6.0);
        let heat = build_heat(&[trace], &g, FovSpec::new(0.1, 0.1).unwrap(), 1.5, 6.0, 8).unwrap();
        assert_eq!(heat.segment_count(), 4);
        for seg in &heat.heat {
            let total: f64 = seg.iter().sum();
            assert!((seg[g.index(2, 2)] - total).abs() < 1e-12);
            assert!((total - 15.0).abs() < 1e-9);
        }
    }

    #[test]
    fn samples_past_duration_are_ignored() {
        let g = TileGrid::new(4, 4).unwrap();
        let trace = staring(g.tile_center(0, 0), 10.0);
        let heat = build_heat(&[trace], &g, FovSpec::default(), 1.5, 3.0, 8).unwrap();
        let total: f64 = heat.heat.iter().flatten().sum();
        assert!((total - 30.0).abs() < 1e-9);
        assert!(build_heat(&[], &g, FovSpec::default(), 1.5, 3.0, 8).is_err());
    }

    #[test]
    fn quantize_unconstrained_and_starved() {
        let m = manifest();
        let heat = HeatMap {
            grid: m.grid(),
            heat: vec![vec![1.0; 16]; m.segment_count()],
        };
        let all_high = quantize(&heat, 1e12, &m).unwrap();
        assert!(all_high.levels().iter().flatten().all(|&l| l == 2));
        let starved = quantize(&heat, 1.0, &m).unwrap();
        assert!(starved.levels().iter().flatten().all(|&l| l == 0));
    }

    #[test]
    fn quantize_picks_the_hot_spot() {
        let m = manifest();
        let mut seg = vec![0.1; 16];
        for t in [5, 6, 9, 10] {
            seg[t] = 5.0;
        }
        let heat = HeatMap {
            grid: m.grid(),
            heat: vec![seg; m.segment_count()],
        };
        // 4 tiles high + 12 low at 1.6 Mbit/s base
        let budget = (4.0 + 12.0 * 0.0625) * 1_600_000.0;
        let p = quantize(&heat, budget, &m).unwrap();
        for levels in p.levels() {
            for (t, &l) in levels.iter().enumerate() {
                let expected = if [5, 6, 9, 10].contains(&t) { 2 } else { 0 };
                assert_eq!(l, expected, "tile {t}");
            }
        }
        assert_eq!(default_budget(&m), budget);
    }

    #[test]
    fn average_quality_examples() {
        let constant = PopularityTrace::new(vec![vec![1; 4]; 3]);
        assert_eq!(average_quality_map(&constant).unwrap(), vec![1.0; 4]);
        let alternating = PopularityTrace::new(vec![vec![0; 2], vec![2; 2], vec![0; 2], vec![2; 2]]);
        assert_eq!(average_quality_map(&alternating).unwrap(), vec![1.0; 2]);
        assert!(average_quality_map(&PopularityTrace::new(vec![])).is_err());
    }
}
