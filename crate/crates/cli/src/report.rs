//! Report files of the `run` command and their verification.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::json;
use tilestream_core::playback::{summarize, SegmentRow, Summary};

use crate::fail::{Classify, CliResult, Failure};
use crate::spec::ExperimentSpec;

pub const SEGMENTS: &str = "segments.csv";
pub const POLICIES: &str = "policies.csv";
pub const SHARE: &str = "popularity_share.csv";
pub const ESTIMATES: &str = "estimates.csv";
pub const SUMMARY: &str = "summary.json";

#[derive(Serialize)]
struct PolicyLine<'a> {
    policy: &'a str,
    sessions: usize,
    avg_quality_mean: f64,
    avg_quality_std: f64,
    avg_quality_min: f64,
    avg_quality_max: f64,
    total_stall_mean: f64,
    total_stall_std: f64,
    total_bytes_mean: f64,
    bytes_from_cache_fraction: f64,
    savings_mean: f64,
    savings_std: f64,
    savings_p10: f64,
    savings_median: f64,
    savings_p90: f64,
}

#[derive(Serialize)]
struct ShareLine<'a> {
    policy: &'a str,
    segment: usize,
    popularity_share: f64,
}

#[derive(Serialize)]
struct EstimateLine<'a> {
    policy: &'a str,
    segment: usize,
    mean_bps: Option<f64>,
    std_bps: Option<f64>,
}

fn csv_text<T: Serialize>(rows: impl IntoIterator<Item = T>) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).runtime_err("csv")?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Runtime(format!("csv: {e}")))?;
    String::from_utf8(bytes).runtime_err("csv")
}

/// Derived CSV files, keyed by file name.
fn derived_files(summary: &Summary) -> CliResult<Vec<(&'static str, String)>> {
    let policies = csv_text(summary.policies.iter().map(|p| PolicyLine {
        policy: p.policy.as_str(),
        sessions: p.sessions,
        avg_quality_mean: p.avg_quality.mean,
        avg_quality_std: p.avg_quality.std,
        avg_quality_min: p.avg_quality_min,
        avg_quality_max: p.avg_quality_max,
        total_stall_mean: p.total_stall.mean,
        total_stall_std: p.total_stall.std,
        total_bytes_mean: p.total_bytes.mean,
        bytes_from_cache_fraction: p.bytes_from_cache_fraction,
        savings_mean: p.savings.mean,
        savings_std: p.savings.std,
        savings_p10: p.savings_p10,
        savings_median: p.savings_median,
        savings_p90: p.savings_p90,
    }))?;
    let share = csv_text(summary.policies.iter().flat_map(|p| {
        p.popularity_share.iter().enumerate().map(|(segment, &s)| ShareLine {
            policy: p.policy.as_str(),
            segment,
            popularity_share: s,
        })
    }))?;
    let estimates = csv_text(summary.policies.iter().flat_map(|p| {
        p.estimate_bps.iter().enumerate().map(|(segment, e)| EstimateLine {
            policy: p.policy.as_str(),
            segment,
            mean_bps: e.map(|e| e.mean),
            std_bps: e.map(|e| e.std),
        })
    }))?;
    Ok(vec![(POLICIES, policies), (SHARE, share), (ESTIMATES, estimates)])
}

fn summary_json(spec: &ExperimentSpec, network_average_bps: f64, summary: &Summary) -> String {
    let mut s = serde_json::to_string_pretty(&json!({
        "config": spec,
        "seed": spec.seed,
        "network_average_bps": network_average_bps,
        "summary": summary,
    }))
    .expect("summary serializes");
    s.push('\n');
    s
}

/// Writes every report file into `spec.out`.
pub fn write(spec: &ExperimentSpec, network_average_bps: f64, rows: &[SegmentRow]) -> CliResult<Summary> {
    let summary = summarize(rows);
    let mut files = vec![(SEGMENTS, csv_text(rows)?)];
    files.extend(derived_files(&summary)?);
    files.push((SUMMARY, summary_json(spec, network_average_bps, &summary)));
    fs::create_dir_all(&spec.out).runtime_err(&format!("{}", spec.out.display()))?;
    for (name, text) in files {
        let path = spec.out.join(name);
        fs::write(&path, text).runtime_err(&format!("{}", path.display()))?;
    }
    Ok(summary)
}

/// Re-reads the per-segment CSV, recomputes every summary and compares it
/// with the files on disk. Returns the mismatching file names.
pub fn verify(dir: &Path) -> CliResult<Vec<String>> {
    let seg_path = dir.join(SEGMENTS);
    let mut reader = csv::Reader::from_path(&seg_path).usage_err(&seg_path.display().to_string())?;
    let rows: Vec<SegmentRow> = reader
        .deserialize()
        .collect::<Result<_, _>>()
        .usage_err(&seg_path.display().to_string())?;
    let summary = summarize(&rows);
    let mut mismatches = Vec::new();
    for (name, expected) in derived_files(&summary)? {
        let path = dir.join(name);
        let actual = fs::read_to_string(&path).usage_err(&path.display().to_string())?;
        if actual != expected {
            mismatches.push(name.to_string());
        }
    }
    let sum_path = dir.join(SUMMARY);
    let text = fs::read_to_string(&sum_path).usage_err(&sum_path.display().to_string())?;
    let stored: serde_json::Value = serde_json::from_str(&text).usage_err(&sum_path.display().to_string())?;
    let recomputed = serde_json::to_value(&summary).expect("summary serializes");
    if stored.get("summary") != Some(&recomputed) {
        mismatches.push(SUMMARY.to_string());
    }
    Ok(mismatches)
}
