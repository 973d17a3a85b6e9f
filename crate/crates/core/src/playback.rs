//! Session event loop and the multi-iteration experiment driver.
//!
//! The client keeps exactly one segment of lookahead. Segment `k` starts
//! downloading once segment `k - 1` is both downloaded and playing; playback
//! of `k` is scheduled one segment length after its download starts. A late
//! download pauses playback for the difference and shifts every later
//! segment. Segment 0 therefore always starts at 0 and plays at `s`.
//!
//! Each tile is looked up in the edge cache: hits travel over a constant-rate
//! cache link, misses over the trace-driven origin link, both concurrently.

use serde::{Deserialize, Serialize};

use crate::adaptation::{
    select_naive, select_popularity, select_prediction, select_prediction_ba, unconstrained_prediction, PolicyKind,
    TransitionState,
};
use crate::cachesim::{warm, CacheConfig, EdgeCache};
use crate::error::{invalid, Error, Result};
use crate::geometry::{FovSpec, TimedOrientation, ViewportSampler, DEFAULT_SAMPLES_PER_AXIS};
use crate::manifest::{QualityAssignment, VideoManifest};
use crate::netsim::{BandwidthEstimator, ConstantLink, LastSampleEstimator, NetworkTrace, OriginDownload, OriginLink};
use crate::prediction::{fit_at, PredictorConfig};
use crate::stats::{mean, quantile, MeanStd};

/// Tunables shared by every session of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionParams {
    /// Regression window in seconds.
    pub timeframe: f64,
    /// Prediction interval in seconds; the segment length when unset.
    pub interval: Option<f64>,
    pub fov: FovSpec,
    pub samples_per_axis: usize,
    /// Cache-to-client rate in bits per second.
    pub cache_link_bps: f64,
    pub hysteresis: f64,
}

impl Default for SessionParams {
    fn default() -> Self {
        Self {
            timeframe: 0.1,
            interval: None,
            fov: FovSpec::default(),
            samples_per_axis: DEFAULT_SAMPLES_PER_AXIS,
            cache_link_bps: 100e6,
            hysteresis: 1.0,
        }
    }
}

impl SessionParams {
    pub fn predictor(&self, segment_length: f64) -> Result<PredictorConfig> {
        PredictorConfig::new(self.timeframe, self.interval.unwrap_or(segment_length))
    }
}

pub struct SessionConfig<'a> {
    pub manifest: &'a VideoManifest,
    pub viewing: &'a [TimedOrientation],
    pub network: &'a NetworkTrace,
    pub policy: PolicyKind,
    pub params: SessionParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub segment: usize,
    /// Selector that produced the assignment; never `transition`.
    pub active: PolicyKind,
    pub assignment: QualityAssignment,
    pub bytes_total: u64,
    pub bytes_from_cache: u64,
    pub bytes_from_origin: u64,
    pub download_start: f64,
    pub download_end: f64,
    pub stall: f64,
    pub mean_quality: f64,
    /// Origin estimate after this segment's download, bits per second.
    pub estimate_bps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionMetrics {
    pub records: Vec<SegmentRecord>,
    pub total_stall: f64,
    pub avg_quality: f64,
    pub total_bytes: u64,
    /// `1 - bytes / bytes at the highest quality`, per segment.
    pub savings_vs_naive: Vec<f64>,
}

impl SessionMetrics {
    fn from_records(manifest: &VideoManifest, records: Vec<SegmentRecord>) -> Self {
        let total_stall = records.iter().map(|r| r.stall).sum();
        let avg_quality = mean(&records.iter().map(|r| r.mean_quality).collect::<Vec<_>>());
        let total_bytes = records.iter().map(|r| r.bytes_total).sum();
        let savings_vs_naive = records
            .iter()
            .map(|r| 1.0 - r.bytes_total as f64 / naive_segment_bytes(manifest, r.segment) as f64)
            .collect();
        Self {
            records,
            total_stall,
            avg_quality,
            total_bytes,
            savings_vs_naive,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("metrics serialize")
    }
}

fn naive_segment_bytes(manifest: &VideoManifest, segment: usize) -> u64 {
    (0..manifest.tile_count())
        .map(|t| manifest.size(segment, t, manifest.top_level()))
        .sum()
}

/// Per-segment `1 - bytes / naive bytes`.
pub fn savings_vs_naive(metrics: &SessionMetrics, naive: &SessionMetrics) -> Result<Vec<f64>> {
    if metrics.records.len() != naive.records.len() {
        return Err(Error::LengthMismatch {
            left: metrics.records.len(),
            right: naive.records.len(),
        });
    }
    Ok(metrics
        .records
        .iter()
        .zip(&naive.records)
        .map(|(m, n)| 1.0 - m.bytes_total as f64 / n.bytes_total as f64)
        .collect())
}

/// Plays one session. The cache, when given, is read and updated in place.
pub fn simulate(cfg: &SessionConfig<'_>, mut cache: Option<&mut EdgeCache>) -> Result<SessionMetrics> {
    let manifest = cfg.manifest;
    let s = manifest.segment_length();
    let predictor = cfg.params.predictor(s)?;
    let uses_prediction = matches!(
        cfg.policy,
        PolicyKind::Prediction | PolicyKind::PredictionBa | PolicyKind::Transition
    );
    if uses_prediction {
        let (first, last) = match (cfg.viewing.first(), cfg.viewing.last()) {
            (Some(f), Some(l)) => (f.t, l.t),
            _ => return Err(Error::NoSamples),
        };
        if last - first < predictor.timeframe {
            return Err(Error::TraceTooShort {
                duration: last - first,
                required: predictor.timeframe,
            });
        }
    }
    if cfg.policy.needs_popularity() {
        let p = manifest.popularity().ok_or(Error::MissingPopularity)?;
        if p.segment_count() != manifest.segment_count() {
            return Err(Error::LengthMismatch {
                left: p.segment_count(),
                right: manifest.segment_count(),
            });
        }
    }
    let sampler = ViewportSampler::new(cfg.params.fov, cfg.params.samples_per_axis)?;
    let grid = manifest.grid();
    let mut origin = OriginLink::new(cfg.network.clone());
    let mut cache_link = ConstantLink::new(cfg.params.cache_link_bps)?;
    let mut estimator = LastSampleEstimator::default();
    let mut transition = TransitionState::new(cfg.params.hysteresis)?;
    let mut start = 0.0;
    let mut records = Vec::with_capacity(manifest.segment_count());

    for k in 0..manifest.segment_count() {
        let estimate = estimator.estimate().map(|e| e.bits_per_second);
        let popularity = || select_popularity(manifest.popularity(), k);
        let (active, assignment) = if uses_prediction {
            let target = k as f64 * s;
            let now = (target - predictor.interval).max(0.0);
            let model = fit_at(cfg.viewing, &predictor, now)?;
            let vis = sampler.visibility(&model.predict(target), &grid);
            match cfg.policy {
                PolicyKind::PredictionBa => (
                    PolicyKind::PredictionBa,
                    select_prediction_ba(manifest, k, &vis, estimate)?,
                ),
                PolicyKind::Transition => {
                    let required = manifest.segment_bits(k, &unconstrained_prediction(manifest, &vis))? / s;
                    match transition.step(estimate, required) {
                        PolicyKind::Popularity => (PolicyKind::Popularity, popularity()?),
                        _ => (PolicyKind::Prediction, select_prediction(manifest, k, &vis, estimate)?),
                    }
                }
                _ => (PolicyKind::Prediction, select_prediction(manifest, k, &vis, estimate)?),
            }
        } else if cfg.policy == PolicyKind::Popularity {
            (PolicyKind::Popularity, popularity()?)
        } else {
            (PolicyKind::Naive, select_naive(manifest))
        };

        let bytes_total: u64 = assignment
            .levels()
            .iter()
            .enumerate()
            .map(|(t, &l)| manifest.size(k, t, l))
            .sum();
        let (hit, miss) = match cache.as_deref_mut() {
            Some(c) => c.request_segment(manifest, k, &assignment)?,
            None => (0, bytes_total),
        };
        let cache_end = cache_link.transfer(start, hit);
        let origin_end = origin.transfer(start, miss);
        if miss > 0 {
            estimator.record(OriginDownload {
                bytes: miss,
                start,
                end: origin_end,
            });
        }
        let end = cache_end.max(origin_end).max(start);
        let scheduled = start + s;
        let stall = (end - scheduled).max(0.0);
        records.push(SegmentRecord {
            segment: k,
            active,
            mean_quality: assignment.mean_level(),
            assignment,
            bytes_total,
            bytes_from_cache: hit,
            bytes_from_origin: miss,
            download_start: start,
            download_end: end,
            stall,
            estimate_bps: estimator.estimate().map(|e| e.bits_per_second),
        });
        start = scheduled + stall;
    }
    Ok(SessionMetrics::from_records(manifest, records))
}

pub struct ExperimentConfig<'a> {
    pub manifest: &'a VideoManifest,
    pub network: &'a NetworkTrace,
    /// Iteration `i` plays trace `i % len`; all traces warm the cache.
    pub traces: &'a [Vec<TimedOrientation>],
    pub policies: &'a [PolicyKind],
    pub iterations: usize,
    pub cache: Option<CacheConfig>,
    pub params: SessionParams,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyRuns {
    pub policy: PolicyKind,
    /// One session per iteration, in iteration order.
    pub sessions: Vec<SessionMetrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub runs: Vec<PolicyRuns>,
}

/// Runs every policy for every iteration. Each (policy, iteration) pair gets
/// its own cache warmed with the permutation seeded by `seed + iteration`.
pub fn run_experiment(cfg: &ExperimentConfig<'_>) -> Result<ExperimentReport> {
    if cfg.iterations == 0 {
        return Err(invalid("iterations", "must be at least 1"));
    }
    if cfg.traces.is_empty() {
        return Err(invalid("traces", "at least one viewing trace is required"));
    }
    if cfg.policies.is_empty() {
        return Err(invalid("policies", "at least one policy is required"));
    }
    let sampler = ViewportSampler::new(cfg.params.fov, cfg.params.samples_per_axis)?;
    let mut runs: Vec<PolicyRuns> = cfg
        .policies
        .iter()
        .map(|&policy| PolicyRuns {
            policy,
            sessions: Vec::with_capacity(cfg.iterations),
        })
        .collect();
    for i in 0..cfg.iterations {
        // warming is deterministic, so one warm cache is cloned per policy
        let warmed = match cfg.cache {
            Some(c) => {
                let mut cache = EdgeCache::new(c);
                warm(
                    &mut cache,
                    cfg.manifest,
                    cfg.traces,
                    &sampler,
                    cfg.seed.wrapping_add(i as u64),
                )?;
                cache.reset_stats();
                Some(cache)
            }
            None => None,
        };
        let viewing = &cfg.traces[i % cfg.traces.len()];
        for run in &mut runs {
            let session = SessionConfig {
                manifest: cfg.manifest,
                viewing,
                network: cfg.network,
                policy: run.policy,
                params: cfg.params,
            };
            let mut cache = warmed.clone();
            run.sessions.push(simulate(&session, cache.as_mut())?);
        }
    }
    Ok(ExperimentReport { runs })
}

impl ExperimentReport {
    pub fn sessions(&self, policy: PolicyKind) -> Option<&[SessionMetrics]> {
        self.runs
            .iter()
            .find(|r| r.policy == policy)
            .map(|r| r.sessions.as_slice())
    }

    /// Flat per-segment rows in policy, iteration, segment order.
    pub fn rows(&self) -> Vec<SegmentRow> {
        let mut rows = Vec::new();
        for run in &self.runs {
            for (iteration, session) in run.sessions.iter().enumerate() {
                for (r, &savings) in session.records.iter().zip(&session.savings_vs_naive) {
                    rows.push(SegmentRow {
                        policy: run.policy,
                        iteration,
                        segment: r.segment,
                        active: r.active,
                        levels: r
                            .assignment
                            .levels()
                            .iter()
                            .map(u8::to_string)
                            .collect::<Vec<_>>()
                            .join(" "),
                        mean_quality: r.mean_quality,
                        bytes_total: r.bytes_total,
                        bytes_from_cache: r.bytes_from_cache,
                        bytes_from_origin: r.bytes_from_origin,
                        download_start: r.download_start,
                        download_end: r.download_end,
                        stall: r.stall,
                        estimate_bps: r.estimate_bps,
                        savings_vs_naive: savings,
                    });
                }
            }
        }
        rows
    }

    pub fn summary(&self) -> Summary {
        summarize(&self.rows())
    }
}

/// One CSV line of the per-segment report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRow {
    pub policy: PolicyKind,
    pub iteration: usize,
    pub segment: usize,
    pub active: PolicyKind,
    /// Space-separated tile levels in tile order.
    pub levels: String,
    pub mean_quality: f64,
    pub bytes_total: u64,
    pub bytes_from_cache: u64,
    pub bytes_from_origin: u64,
    pub download_start: f64,
    pub download_end: f64,
    pub stall: f64,
    pub estimate_bps: Option<f64>,
    pub savings_vs_naive: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySummary {
    pub policy: PolicyKind,
    pub sessions: usize,
    pub avg_quality: MeanStd,
    pub avg_quality_min: f64,
    pub avg_quality_max: f64,
    pub total_stall: MeanStd,
    pub total_bytes: MeanStd,
    pub bytes_from_cache_fraction: f64,
    /// Over all segments of all sessions.
    pub savings: MeanStd,
    pub savings_p10: f64,
    pub savings_median: f64,
    pub savings_p90: f64,
    /// Fraction of sessions using popularity adaptation, per segment.
    pub popularity_share: Vec<f64>,
    /// Estimate across sessions per segment; absent where no session had one.
    pub estimate_bps: Vec<Option<MeanStd>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub policies: Vec<PolicySummary>,
    /// Mean avg quality of transition over prediction-ba, in percent.
    pub quality_gain_percent: Option<f64>,
}

impl Summary {
    pub fn policy(&self, policy: PolicyKind) -> Option<&PolicySummary> {
        self.policies.iter().find(|p| p.policy == policy)
    }
}

/// Aggregates report rows. Rows of a policy must be grouped by iteration
/// and ordered by segment, as produced by [`ExperimentReport::rows`].
pub fn summarize(rows: &[SegmentRow]) -> Summary {
    let mut order: Vec<PolicyKind> = Vec::new();
    for r in rows {
        if !order.contains(&r.policy) {
            order.push(r.policy);
        }
    }
    let policies: Vec<PolicySummary> = order
        .into_iter()
        .map(|policy| {
            let mine: Vec<&SegmentRow> = rows.iter().filter(|r| r.policy == policy).collect();
            summarize_policy(policy, &mine)
        })
        .collect();
    let quality_gain_percent = match (
        policies.iter().find(|p| p.policy == PolicyKind::Transition),
        policies.iter().find(|p| p.policy == PolicyKind::PredictionBa),
    ) {
        (Some(t), Some(b)) if b.avg_quality.mean > 0.0 => Some((t.avg_quality.mean / b.avg_quality.mean - 1.0) * 100.0),
        _ => None,
    };
    Summary {
        policies,
        quality_gain_percent,
    }
}

fn summarize_policy(policy: PolicyKind, rows: &[&SegmentRow]) -> PolicySummary {
    let mut sessions: Vec<Vec<&SegmentRow>> = Vec::new();
    for r in rows {
        match sessions.last_mut() {
            Some(s) if s[0].iteration == r.iteration => s.push(r),
            _ => sessions.push(vec![r]),
        }
    }
    let quality: Vec<f64> = sessions
        .iter()
        .map(|s| mean(&s.iter().map(|r| r.mean_quality).collect::<Vec<_>>()))
        .collect();
    let stall: Vec<f64> = sessions.iter().map(|s| s.iter().map(|r| r.stall).sum()).collect();
    let bytes: Vec<f64> = sessions
        .iter()
        .map(|s| s.iter().map(|r| r.bytes_total).sum::<u64>() as f64)
        .collect();
    let all_bytes: u64 = rows.iter().map(|r| r.bytes_total).sum();
    let cache_bytes: u64 = rows.iter().map(|r| r.bytes_from_cache).sum();
    let savings: Vec<f64> = rows.iter().map(|r| r.savings_vs_naive).collect();
    let segments = sessions.iter().map(Vec::len).max().unwrap_or(0);
    let column = |k: usize| sessions.iter().filter_map(move |s| s.get(k));
    let popularity_share = (0..segments)
        .map(|k| {
            let n = column(k).count();
            column(k).filter(|r| r.active == PolicyKind::Popularity).count() as f64 / n as f64
        })
        .collect();
    let estimate_bps = (0..segments)
        .map(|k| {
            let e: Vec<f64> = column(k).filter_map(|r| r.estimate_bps).collect();
            (!e.is_empty()).then(|| MeanStd::of(&e))
        })
        .collect();
    PolicySummary {
        policy,
        sessions: sessions.len(),
        avg_quality: MeanStd::of(&quality),
        avg_quality_min: quality.iter().copied().fold(f64::INFINITY, f64::min),
        avg_quality_max: quality.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        total_stall: MeanStd::of(&stall),
        total_bytes: MeanStd::of(&bytes),
        bytes_from_cache_fraction: if all_bytes == 0 {
            0.0
        } else {
            cache_bytes as f64 / all_bytes as f64
        },
        savings: MeanStd::of(&savings),
        savings_p10: quantile(&savings, 0.1),
        savings_median: quantile(&savings, 0.5),
        savings_p90: quantile(&savings, 0.9),
        popularity_share,
        estimate_bps,
    }
}
