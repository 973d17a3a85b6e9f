//! Tiled and segmented video description.
//!
//! A manifest records the tile grid, the quality ladder and the byte size of
//! every `(segment, tile, quality)` object, plus the optional popularity trace.
//! It is stored as a single JSON document (see `schema/manifest.schema.json`).

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::TileGrid;
use crate::popularity::PopularityTrace;

/// One quality level per tile for a single segment.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QualityAssignment(pub Vec<u8>);

impl QualityAssignment {
    pub fn uniform(tiles: usize, level: u8) -> Self {
        Self(vec![level; tiles])
    }

    pub fn levels(&self) -> &[u8] {
        &self.0
    }

    pub fn mean_level(&self) -> f64 {
        self.0.iter().map(|&l| l as f64).sum::<f64>() / self.0.len() as f64
    }
}

/// Grid coordinates of one tile stream, in the style of an MPEG-DASH spatial
/// relationship descriptor: column and row of the tile within `cols x rows`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SrdCoordinates {
    pub col: usize,
    pub row: usize,
    pub cols: usize,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VideoManifest {
    name: String,
    /// Seconds.
    duration: f64,
    /// Seconds.
    segment_length: f64,
    grid: TileGrid,
    quality_count: usize,
    /// Multipliers of `base_bitrate`, lowest quality first.
    bitrate_factors: Vec<f64>,
    /// Bits per second of one tile stream at factor 1.
    base_bitrate: f64,
    tiles: Vec<SrdCoordinates>,
    /// Bytes, indexed `[segment][tile][quality]`.
    sizes: Vec<Vec<Vec<u64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    popularity: Option<PopularityTrace>,
}

/// Number of segments of a `duration` second video cut every `segment_length` seconds.
pub fn segment_count(duration: f64, segment_length: f64) -> usize {
    ((duration / segment_length) - 1e-9).ceil().max(1.0) as usize
}

/// Files written by a DASH tiler: one initialization segment plus the media
/// segments for every tile and quality, and the manifest itself.
pub fn file_count(cols: usize, rows: usize, qualities: usize, duration: f64, segment_length: f64) -> usize {
    cols * rows * qualities * (segment_count(duration, segment_length) + 1) + 1
}

/// Default quality ladder: factors `4^-(q-1-l)`, i.e. 0.0625, 0.25, 1 for three levels.
pub fn default_factors(qualities: usize) -> Vec<f64> {
    (0..qualities)
        .map(|l| 0.25f64.powi((qualities - 1 - l) as i32))
        .collect()
}

/// Parameters for [`synthesize`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub name: String,
    pub duration: f64,
    pub segment_length: f64,
    pub cols: usize,
    pub rows: usize,
    pub qualities: usize,
    pub base_bitrate: f64,
    /// Per-(segment, tile) size spread in `[0, 1)`.
    pub variability: f64,
    pub seed: u64,
    #[serde(default)]
    pub factors: Option<Vec<f64>>,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            name: "synthetic".into(),
            duration: 40.0,
            segment_length: 1.5,
            cols: 4,
            rows: 4,
            qualities: 3,
            base_bitrate: 1_600_000.0,
            variability: 0.0,
            seed: 0,
            factors: None,
        }
    }
}

/// Builds a manifest with sizes `base_bitrate * factor * s / 8 * u`, where
/// `u` is drawn once per (segment, tile) from `[1 - variability, 1 + variability]`.
pub fn synthesize(spec: &SynthSpec) -> Result<VideoManifest> {
    if !(spec.duration > 0.0) {
        return Err(invalid("duration", format!("{} must be positive", spec.duration)));
    }
    if !(spec.segment_length > 0.0) {
        return Err(invalid(
            "segment_length",
            format!("{} must be positive", spec.segment_length),
        ));
    }
    if spec.qualities == 0 || spec.qualities > u8::MAX as usize {
        return Err(invalid("qualities", format!("{} not in 1..=255", spec.qualities)));
    }
    if !(spec.base_bitrate > 0.0) {
        return Err(invalid(
            "base_bitrate",
            format!("{} must be positive", spec.base_bitrate),
        ));
    }
    if !(0.0..1.0).contains(&spec.variability) {
        return Err(invalid("variability", format!("{} not in [0, 1)", spec.variability)));
    }
    let grid = TileGrid::new(spec.cols, spec.rows)?;
    let factors = spec.factors.clone().unwrap_or_else(|| default_factors(spec.qualities));
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let segments = segment_count(spec.duration, spec.segment_length);
    let nominal = spec.base_bitrate * spec.segment_length / 8.0;
    let sizes = (0..segments)
        .map(|_| {
            (0..grid.tile_count())
                .map(|_| {
                    let u = 1.0 + spec.variability * (2.0 * rng.random::<f64>() - 1.0);
                    factors
                        .iter()
                        .map(|f| ((nominal * f * u).round() as u64).max(1))
                        .collect()
                })
                .collect()
        })
        .collect();
    let manifest = VideoManifest {
        name: spec.name.clone(),
        duration: spec.duration,
        segment_length: spec.segment_length,
        grid,
        quality_count: spec.qualities,
        bitrate_factors: factors,
        base_bitrate: spec.base_bitrate,
        tiles: srd_coordinates(&grid),
        sizes,
        popularity: None,
    };
    manifest.validate()?;
    Ok(manifest)
}

fn srd_coordinates(grid: &TileGrid) -> Vec<SrdCoordinates> {
    (0..grid.tile_count())
        .map(|i| {
            let (col, row) = grid.coords(i);
            SrdCoordinates {
                col,
                row,
                cols: grid.cols,
                rows: grid.rows,
            }
        })
        .collect()
}

fn field_err(field: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::Manifest {
        field: field.into(),
        reason: reason.into(),
    }
}

impl VideoManifest {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn segment_length(&self) -> f64 {
        self.segment_length
    }

    pub fn grid(&self) -> TileGrid {
        self.grid
    }

    pub fn tile_count(&self) -> usize {
        self.grid.tile_count()
    }

    pub fn quality_count(&self) -> usize {
        self.quality_count
    }

    pub fn top_level(&self) -> u8 {
        (self.quality_count - 1) as u8
    }

    pub fn bitrate_factors(&self) -> &[f64] {
        &self.bitrate_factors
    }

    pub fn base_bitrate(&self) -> f64 {
        self.base_bitrate
    }

    pub fn tiles(&self) -> &[SrdCoordinates] {
        &self.tiles
    }

    pub fn segment_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn popularity(&self) -> Option<&PopularityTrace> {
        self.popularity.as_ref()
    }

    pub fn has_popularity(&self) -> bool {
        self.popularity.is_some()
    }

    pub fn set_popularity(&mut self, trace: PopularityTrace) -> Result<()> {
        self.check_popularity(&trace)?;
        self.popularity = Some(trace);
        Ok(())
    }

    /// Bytes of one tile segment. Panics on out-of-range indices.
    pub fn size(&self, segment: usize, tile: usize, level: u8) -> u64 {
        self.sizes[segment][tile][level as usize]
    }

    fn check_segment(&self, segment: usize) -> Result<()> {
        if segment >= self.segment_count() {
            return Err(Error::SegmentOutOfRange {
                segment,
                count: self.segment_count(),
            });
        }
        Ok(())
    }

    /// Bits needed to fetch `segment` with `assignment`.
    pub fn segment_bits(&self, segment: usize, assignment: &QualityAssignment) -> Result<f64> {
        self.check_segment(segment)?;
        if assignment.0.len() != self.tile_count() {
            return Err(Error::LengthMismatch {
                left: assignment.0.len(),
                right: self.tile_count(),
            });
        }
        Ok(self.segment_bits_unchecked(segment, assignment.levels()))
    }

    pub(crate) fn segment_bits_unchecked(&self, segment: usize, levels: &[u8]) -> f64 {
        8.0 * levels
            .iter()
            .enumerate()
            .map(|(tile, &l)| self.sizes[segment][tile][l as usize])
            .sum::<u64>() as f64
    }

    /// Bytes of the whole video with every tile at `level`.
    pub fn total_bytes_at(&self, level: u8) -> u64 {
        self.sizes
            .iter()
            .flat_map(|seg| seg.iter().map(|t| t[level as usize]))
            .sum()
    }

    /// Bytes of every object at every quality.
    pub fn total_bytes(&self) -> u64 {
        self.sizes.iter().flatten().flatten().sum()
    }

    /// Byte range `(offset, length)` of a segment inside the single file that
    /// groups all segments of one tile stream at one quality.
    pub fn byte_range(&self, segment: usize, tile: usize, level: u8) -> Result<(u64, u64)> {
        self.check_segment(segment)?;
        let offset = self.sizes[..segment].iter().map(|s| s[tile][level as usize]).sum();
        Ok((offset, self.size(segment, tile, level)))
    }

    /// Nominal bits per second with `top_tiles` tiles at the highest quality
    /// and the rest at the lowest.
    pub fn nominal_bitrate(&self, top_tiles: usize) -> f64 {
        let top = *self.bitrate_factors.last().unwrap_or(&1.0);
        let low = self.bitrate_factors[0];
        let rest = self.tile_count().saturating_sub(top_tiles);
        self.base_bitrate * (top_tiles.min(self.tile_count()) as f64 * top + rest as f64 * low)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) {
            return Err(field_err("duration", "must be positive"));
        }
        if !(self.segment_length > 0.0) {
            return Err(field_err("segment_length", "must be positive"));
        }
        if self.grid.cols == 0 || self.grid.rows == 0 {
            return Err(field_err("grid", "must have at least one tile"));
        }
        if self.quality_count == 0 || self.quality_count > u8::MAX as usize {
            return Err(field_err("quality_count", "must be in 1..=255"));
        }
        if self.bitrate_factors.len() != self.quality_count {
            return Err(field_err(
                "bitrate_factors",
                format!(
                    "has {} entries, expected {}",
                    self.bitrate_factors.len(),
                    self.quality_count
                ),
            ));
        }
        if self.bitrate_factors.windows(2).any(|w| !(w[0] < w[1])) || !self.bitrate_factors.iter().all(|f| *f > 0.0) {
            return Err(field_err("bitrate_factors", "must be positive and strictly increasing"));
        }
        if !(self.base_bitrate > 0.0) {
            return Err(field_err("base_bitrate", "must be positive"));
        }
        if self.tiles != srd_coordinates(&self.grid) {
            return Err(field_err("tiles", "must list every grid tile in row-major order"));
        }
        let segments = segment_count(self.duration, self.segment_length);
        if self.sizes.len() != segments {
            return Err(field_err(
                "sizes",
                format!("has {} segments, expected {segments}", self.sizes.len()),
            ));
        }
        for (s, seg) in self.sizes.iter().enumerate() {
            if seg.len() != self.grid.tile_count() {
                return Err(field_err(format!("sizes[{s}]"), "wrong tile count"));
            }
            for (t, levels) in seg.iter().enumerate() {
                if levels.len() != self.quality_count {
                    return Err(field_err(format!("sizes[{s}][{t}]"), "wrong quality count"));
                }
                if let Some(q) = levels.iter().position(|&b| b == 0) {
                    return Err(field_err(format!("sizes[{s}][{t}][{q}]"), "size must be positive"));
                }
                if levels.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(field_err(
                        format!("sizes[{s}][{t}]"),
                        "sizes must strictly increase with quality",
                    ));
                }
            }
        }
        if let Some(p) = &self.popularity {
            self.check_popularity(p)?;
        }
        Ok(())
    }

    fn check_popularity(&self, p: &PopularityTrace) -> Result<()> {
        if p.segment_count() != self.segment_count() {
            return Err(field_err(
                "popularity",
                format!("has {} segments, expected {}", p.segment_count(), self.segment_count()),
            ));
        }
        for (s, levels) in p.levels().iter().enumerate() {
            if levels.len() != self.tile_count() {
                return Err(field_err(format!("popularity[{s}]"), "wrong tile count"));
            }
            if levels.iter().any(|&l| l as usize >= self.quality_count) {
                return Err(field_err(format!("popularity[{s}]"), "level out of range"));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let manifest: VideoManifest = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            field_err(
                if path.is_empty() { ".".into() } else { path },
                e.into_inner().to_string(),
            )
        })?;
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|source| Error::Io {
            path: path.into(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.into(),
            source,
        })?;
        Self::from_json(&text)
    }
}
