//! Sphere and equirectangular geometry.
//!
//! Orientations are yaw/pitch pairs in degrees. Yaw grows counter-clockwise
//! seen from above, pitch grows towards the north pole. The view direction of
//! `(yaw, pitch)` is `(cos p cos y, cos p sin y, sin p)`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Head orientation. Roll is carried along but does not move the viewport.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Orientation {
    yaw: f64,
    pitch: f64,
    roll: f64,
}

impl Orientation {
    /// Builds a normalized orientation: yaw wrapped into `[-180, 180)`, pitch
    /// clamped into `[-90, 90]`.
    pub fn new(yaw: f64, pitch: f64, roll: f64) -> Self {
        Self {
            yaw: wrap_yaw(yaw),
            pitch: pitch.clamp(-90.0, 90.0),
            roll,
        }
    }

    pub fn yaw_pitch(yaw: f64, pitch: f64) -> Self {
        Self::new(yaw, pitch, 0.0)
    }

    pub fn yaw(&self) -> f64 {
        self.yaw
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn roll(&self) -> f64 {
        self.roll
    }

    /// Unit view-direction vector.
    pub fn direction(&self) -> [f64; 3] {
        let (sy, cy) = self.yaw.to_radians().sin_cos();
        let (sp, cp) = self.pitch.to_radians().sin_cos();
        [cp * cy, cp * sy, sp]
    }

    /// Orientation looking along `v`. `v` need not be normalized.
    pub fn from_direction(v: [f64; 3]) -> Self {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let z = (v[2] / norm).clamp(-1.0, 1.0);
        Self::yaw_pitch(v[1].atan2(v[0]).to_degrees(), z.asin().to_degrees())
    }
}

/// Wraps an angle in degrees into `[-180, 180)`.
pub fn wrap_yaw(yaw: f64) -> f64 {
    let w = (yaw + 180.0).rem_euclid(360.0) - 180.0;
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if w >= 180.0 {
        w - 360.0
    } else {
        w
    }
}

/// Great-circle distance between two view directions in degrees, in `[0, 180]`.
pub fn orthodromic_distance(a: &Orientation, b: &Orientation) -> f64 {
    let (va, vb) = (a.direction(), b.direction());
    let dot = va[0] * vb[0] + va[1] * vb[1] + va[2] * vb[2];
    // atan2 keeps precision near 0 and 180 degrees, where acos does not
    let cross = [
        va[1] * vb[2] - va[2] * vb[1],
        va[2] * vb[0] - va[0] * vb[2],
        va[0] * vb[1] - va[1] * vb[0],
    ];
    let sin = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    sin.atan2(dot).to_degrees()
}

/// An orientation sample of a viewing trace. `t` is playback time in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimedOrientation {
    pub t: f64,
    pub o: Orientation,
}

impl TimedOrientation {
    pub fn new(t: f64, o: Orientation) -> Self {
        Self { t, o }
    }
}

/// Equirectangular partition into `cols x rows` tiles of equal angular extent.
///
/// Tile `(i, j)` spans yaw `[-180 + i*360/cols, -180 + (i+1)*360/cols)`; rows are
/// counted from the north pole down. Tiles are flattened row-major,
/// `index = j * cols + i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TileGrid {
    pub cols: usize,
    pub rows: usize,
}

impl TileGrid {
    pub fn new(cols: usize, rows: usize) -> Result<Self> {
        if cols == 0 || rows == 0 {
            return Err(invalid("grid", format!("{cols}x{rows} has no tiles")));
        }
        Ok(Self { cols, rows })
    }

    pub fn tile_count(&self) -> usize {
        self.cols * self.rows
    }

    pub fn index(&self, col: usize, row: usize) -> usize {
        row * self.cols + col
    }

    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index % self.cols, index / self.cols)
    }

    pub fn tile_width(&self) -> f64 {
        360.0 / self.cols as f64
    }

    pub fn tile_height(&self) -> f64 {
        180.0 / self.rows as f64
    }

    /// Column/row of the tile containing `(yaw, pitch)`. Intervals are
    /// half-open in index space, so a boundary belongs to the higher index.
    pub fn tile_of(&self, yaw: f64, pitch: f64) -> (usize, usize) {
        let col = ((wrap_yaw(yaw) + 180.0) / self.tile_width()).floor() as usize;
        let row = ((90.0 - pitch.clamp(-90.0, 90.0)) / self.tile_height()).floor() as usize;
        (col.min(self.cols - 1), row.min(self.rows - 1))
    }

    /// Orientation at the angular center of tile `(col, row)`.
    pub fn tile_center(&self, col: usize, row: usize) -> Orientation {
        Orientation::yaw_pitch(
            -180.0 + (col as f64 + 0.5) * self.tile_width(),
            90.0 - (row as f64 + 0.5) * self.tile_height(),
        )
    }
}

pub fn tile_of_direction(o: &Orientation, grid: &TileGrid) -> (usize, usize) {
    grid.tile_of(o.yaw, o.pitch)
}

/// Rectangular field of view in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FovSpec {
    pub h_fov: f64,
    pub v_fov: f64,
}

impl Default for FovSpec {
    fn default() -> Self {
        Self {
            h_fov: 100.0,
            v_fov: 100.0,
        }
    }
}

impl FovSpec {
    pub fn new(h_fov: f64, v_fov: f64) -> Result<Self> {
        for (field, v) in [("h_fov", h_fov), ("v_fov", v_fov)] {
            if !(v > 0.0 && v <= 180.0) {
                return Err(invalid(field, format!("{v} not in (0, 180]")));
            }
        }
        Ok(Self { h_fov, v_fov })
    }
}

/// Per-tile share of the viewport. Scores are nonnegative and sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibilityMap {
    pub grid: TileGrid,
    pub scores: Vec<f64>,
}

impl VisibilityMap {
    pub fn score(&self, col: usize, row: usize) -> f64 {
        self.scores[self.grid.index(col, row)]
    }

    pub fn visible_tiles(&self) -> usize {
        self.scores.iter().filter(|&&s| s > 0.0).count()
    }

    /// Tile indices by descending score, ties by ascending index.
    pub fn ranked(&self) -> Vec<usize> {
        rank_descending(&self.scores)
    }
}

pub(crate) fn rank_descending(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order
}

pub const DEFAULT_SAMPLES_PER_AXIS: usize = 32;

/// Precomputed viewport sample directions for one FoV.
///
/// Samples sit at the cell centers of a `samples x samples` grid of angular
/// offsets across the FoV rectangle. An offset `(h, v)` is a great-circle
/// rotation of the view direction: `h` around the viewer's up axis, then `v`
/// towards the up axis.
#[derive(Debug, Clone)]
pub struct ViewportSampler {
    fov: FovSpec,
    samples_per_axis: usize,
    local: Vec<[f64; 3]>,
}

impl ViewportSampler {
    pub fn new(fov: FovSpec, samples_per_axis: usize) -> Result<Self> {
        if samples_per_axis < 2 {
            return Err(invalid("samples_per_axis", "must be at least 2"));
        }
        let n = samples_per_axis;
        let offsets = |extent: f64| -> Vec<f64> {
            (0..n)
                .map(|k| (-extent / 2.0 + (k as f64 + 0.5) * extent / n as f64).to_radians())
                .collect()
        };
        let (hs, vs) = (offsets(fov.h_fov), offsets(fov.v_fov));
        let mut local = Vec::with_capacity(n * n);
        for &v in &vs {
            let (sv, cv) = v.sin_cos();
            for &h in &hs {
                let (sh, ch) = h.sin_cos();
                local.push([cv * ch, cv * sh, sv]);
            }
        }
        Ok(Self {
            fov,
            samples_per_axis,
            local,
        })
    }

    pub fn fov(&self) -> FovSpec {
        self.fov
    }

    pub fn samples_per_axis(&self) -> usize {
        self.samples_per_axis
    }

    pub fn visibility(&self, o: &Orientation, grid: &TileGrid) -> VisibilityMap {
        let mut scores = vec![0.0; grid.tile_count()];
        self.accumulate(o, grid, &mut scores);
        VisibilityMap { grid: *grid, scores }
    }

    /// Adds the visibility of `o` into `scores` (one entry per tile).
    pub fn accumulate(&self, o: &Orientation, grid: &TileGrid, scores: &mut [f64]) {
        let weight = 1.0 / self.local.len() as f64;
        let (sy, cy) = o.yaw.to_radians().sin_cos();
        let (sp, cp) = o.pitch.to_radians().sin_cos();
        for l in &self.local {
            // Ry(-pitch), then Rz(yaw)
            let x1 = l[0] * cp - l[2] * sp;
            let z1 = l[0] * sp + l[2] * cp;
            let x = x1 * cy - l[1] * sy;
            let y = x1 * sy + l[1] * cy;
            let yaw = y.atan2(x).to_degrees();
            let pitch = z1.clamp(-1.0, 1.0).asin().to_degrees();
            let (col, row) = grid.tile_of(yaw, pitch);
            scores[grid.index(col, row)] += weight;
        }
    }
}

/// Visibility of every tile for a viewer looking at `o`.
pub fn tile_visibility(
    o: &Orientation,
    fov: FovSpec,
    grid: &TileGrid,
    samples_per_axis: usize,
) -> Result<VisibilityMap> {
    Ok(ViewportSampler::new(fov, samples_per_axis)?.visibility(o, grid))
}
