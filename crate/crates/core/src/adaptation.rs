//! Quality selection policies and the prediction/popularity transition.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::VisibilityMap;
use crate::manifest::{QualityAssignment, VideoManifest};
use crate::popularity::PopularityTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    Naive,
    Prediction,
    Popularity,
    PredictionBa,
    Transition,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 5] = [
        PolicyKind::Naive,
        PolicyKind::Prediction,
        PolicyKind::Popularity,
        PolicyKind::PredictionBa,
        PolicyKind::Transition,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PolicyKind::Naive => "naive",
            PolicyKind::Prediction => "prediction",
            PolicyKind::Popularity => "popularity",
            PolicyKind::PredictionBa => "prediction-ba",
            PolicyKind::Transition => "transition",
        }
    }

    pub fn needs_popularity(&self) -> bool {
        matches!(self, PolicyKind::Popularity | PolicyKind::Transition)
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL.into_iter().find(|p| p.as_str() == s).ok_or_else(|| {
            invalid(
                "policy",
                format!("unknown policy `{s}` (naive | prediction | popularity | prediction-ba | transition)"),
            )
        })
    }
}

/// Raises tiles in `order` one level at a time, starting from all-lowest.
/// Stops at the first step that would exceed `budget_bits`; that step is not
/// taken and later tiles stay at level 0.
pub(crate) fn greedy_upgrade(manifest: &VideoManifest, segment: usize, order: &[usize], budget_bits: f64) -> Vec<u8> {
    let mut levels = vec![0u8; manifest.tile_count()];
    let mut bytes: u64 = (0..manifest.tile_count()).map(|t| manifest.size(segment, t, 0)).sum();
    for &tile in order {
        for level in 1..=manifest.top_level() {
            let step = manifest.size(segment, tile, level) - manifest.size(segment, tile, level - 1);
            if 8.0 * (bytes + step) as f64 > budget_bits {
                return levels;
            }
            bytes += step;
            levels[tile] = level;
        }
    }
    levels
}

pub fn select_naive(manifest: &VideoManifest) -> QualityAssignment {
    QualityAssignment::uniform(manifest.tile_count(), manifest.top_level())
}

/// Visible tiles at the highest quality, everything else at the lowest.
pub fn unconstrained_prediction(manifest: &VideoManifest, visibility: &VisibilityMap) -> QualityAssignment {
    QualityAssignment(
        visibility
            .scores
            .iter()
            .map(|&s| if s > 0.0 { manifest.top_level() } else { 0 })
            .collect(),
    )
}

/// Viewport-driven selection under a bandwidth budget in bits per second.
/// `None` means no estimate exists yet and the selection is unconstrained.
pub fn select_prediction(
    manifest: &VideoManifest,
    segment: usize,
    visibility: &VisibilityMap,
    budget: Option<f64>,
) -> Result<QualityAssignment> {
    check_visibility(manifest, segment, visibility)?;
    let Some(budget) = budget else {
        return Ok(unconstrained_prediction(manifest, visibility));
    };
    let order: Vec<usize> = visibility
        .ranked()
        .into_iter()
        .filter(|&t| visibility.scores[t] > 0.0)
        .collect();
    Ok(QualityAssignment(greedy_upgrade(
        manifest,
        segment,
        &order,
        budget * manifest.segment_length(),
    )))
}

pub fn select_popularity(popularity: Option<&PopularityTrace>, segment: usize) -> Result<QualityAssignment> {
    let trace = popularity.ok_or(Error::MissingPopularity)?;
    trace.assignment(segment).ok_or(Error::SegmentOutOfRange {
        segment,
        count: trace.segment_count(),
    })
}

/// Unconstrained prediction lowered by the same number of levels on every
/// tile (floored at 0), using the smallest shift that fits the budget.
pub fn select_prediction_ba(
    manifest: &VideoManifest,
    segment: usize,
    visibility: &VisibilityMap,
    budget: Option<f64>,
) -> Result<QualityAssignment> {
    check_visibility(manifest, segment, visibility)?;
    let full = unconstrained_prediction(manifest, visibility);
    let Some(budget) = budget else {
        return Ok(full);
    };
    let budget_bits = budget * manifest.segment_length();
    for shift in 0..=manifest.top_level() {
        let levels: Vec<u8> = full.0.iter().map(|l| l.saturating_sub(shift)).collect();
        if manifest.segment_bits_unchecked(segment, &levels) <= budget_bits {
            return Ok(QualityAssignment(levels));
        }
    }
    Ok(QualityAssignment::uniform(manifest.tile_count(), 0))
}

fn check_visibility(manifest: &VideoManifest, segment: usize, visibility: &VisibilityMap) -> Result<()> {
    if visibility.grid != manifest.grid() {
        return Err(invalid("visibility", "grid differs from the manifest grid"));
    }
    if segment >= manifest.segment_count() {
        return Err(Error::SegmentOutOfRange {
            segment,
            count: manifest.segment_count(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransitionMode {
    SensoryPrediction,
    ContentPopularity,
}

impl TransitionMode {
    pub fn policy(&self) -> PolicyKind {
        match self {
            TransitionMode::SensoryPrediction => PolicyKind::Prediction,
            TransitionMode::ContentPopularity => PolicyKind::Popularity,
        }
    }
}

/// Switches between sensory prediction and content popularity.
///
/// Drops to popularity when the estimate is strictly below the threshold `A`
/// and returns to prediction once it reaches `hysteresis * A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionState {
    pub active: TransitionMode,
    /// Last threshold in bits per second.
    pub threshold: Option<f64>,
    pub hysteresis: f64,
}

impl Default for TransitionState {
    fn default() -> Self {
        Self {
            active: TransitionMode::SensoryPrediction,
            threshold: None,
            hysteresis: 1.0,
        }
    }
}

impl TransitionState {
    pub fn new(hysteresis: f64) -> Result<Self> {
        if !(hysteresis >= 1.0) {
            return Err(invalid("hysteresis", format!("{hysteresis} must be at least 1")));
        }
        Ok(Self {
            hysteresis,
            ..Self::default()
        })
    }

    /// Decides the policy of the next segment. `required` is the bitrate of
    /// the prediction assignment the viewer would get with unlimited
    /// bandwidth; it becomes the new threshold.
    pub fn step(&mut self, estimate: Option<f64>, required: f64) -> PolicyKind {
        self.threshold = Some(required);
        self.active = match estimate {
            None => TransitionMode::SensoryPrediction,
            Some(e) if e < required => TransitionMode::ContentPopularity,
            Some(e) if e >= self.hysteresis * required => TransitionMode::SensoryPrediction,
            Some(_) => self.active,
        };
        self.active.policy()
    }
}
