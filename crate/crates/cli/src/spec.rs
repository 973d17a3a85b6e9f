//! Experiment specification: flags, config file and defaults merged in that
//! order of precedence.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tilestream_core::playback::SessionParams;
use tilestream_core::{EvictionPolicy, FovSpec, PolicyKind};

use crate::fail::{usage, Classify, CliResult};

pub const OUT_ENV: &str = "TILESTREAM_OUT";
pub const DEFAULT_OUT: &str = "tilestream-out";

/// Config file layout; every field is optional.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub manifest: Option<PathBuf>,
    pub traces: Option<PathBuf>,
    pub network: Option<PathBuf>,
    pub network_scale: Option<f64>,
    pub policies: Option<Vec<PolicyKind>>,
    pub cache_policy: Option<EvictionPolicy>,
    /// Bytes.
    pub cache_capacity: Option<u64>,
    /// Fraction of the total video size; used when no byte capacity is set.
    pub cache_fraction: Option<f64>,
    pub iterations: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub params: Option<SessionParams>,
}

impl SpecFile {
    /// Reads a config file; relative paths inside resolve against its directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).usage_err(&format!("--config {}", path.display()))?;
        let mut spec: SpecFile = serde_json::from_str(&text).usage_err(&format!("--config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut spec.manifest, &mut spec.traces, &mut spec.network, &mut spec.out]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(spec)
    }

    /// Fields of `self` win over `lower`.
    pub fn over(self, lower: SpecFile) -> SpecFile {
        SpecFile {
            manifest: self.manifest.or(lower.manifest),
            traces: self.traces.or(lower.traces),
            network: self.network.or(lower.network),
            network_scale: self.network_scale.or(lower.network_scale),
            policies: self.policies.or(lower.policies),
            cache_policy: self.cache_policy.or(lower.cache_policy),
            cache_capacity: self.cache_capacity.or(lower.cache_capacity),
            cache_fraction: self.cache_fraction.or(lower.cache_fraction),
            iterations: self.iterations.or(lower.iterations),
            seed: self.seed.or(lower.seed),
            out: self.out.or(lower.out),
            params: self.params.or(lower.params),
        }
    }
}

/// Fully resolved experiment, echoed into the summary.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSpec {
    pub manifest: PathBuf,
    pub traces: PathBuf,
    pub network: PathBuf,
    pub network_scale: f64,
    pub policies: Vec<PolicyKind>,
    pub cache_policy: Option<EvictionPolicy>,
    pub cache_capacity: Option<u64>,
    pub cache_fraction: Option<f64>,
    pub iterations: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub params: SessionParams,
}

impl ExperimentSpec {
    pub fn resolve(spec: SpecFile) -> CliResult<Self> {
        let required = |v: Option<PathBuf>, flag: &str| {
            v.ok_or_else(|| usage(format!("{flag} is required (flag or config file)")))
        };
        let network_scale = spec.network_scale.unwrap_or(1.0);
        if !(network_scale > 0.0 && network_scale.is_finite()) {
            return Err(usage(format!("--network-scale: {network_scale} must be positive")));
        }
        let iterations = spec.iterations.unwrap_or(30);
        if iterations == 0 {
            return Err(usage("--iterations: must be at least 1"));
        }
        let policies = spec.policies.unwrap_or_else(|| PolicyKind::ALL.to_vec());
        if policies.is_empty() {
            return Err(usage("--policies: at least one policy is required"));
        }
        if let Some(f) = spec.cache_fraction {
            if !(f > 0.0) {
                return Err(usage(format!("--cache-fraction: {f} must be positive")));
            }
        }
        if spec.cache_capacity == Some(0) {
            return Err(usage("--cache-capacity: must be positive"));
        }
        let has_capacity = spec.cache_capacity.is_some() || spec.cache_fraction.is_some();
        let cache_policy = match (spec.cache_policy, has_capacity) {
            (Some(p), _) => Some(p),
            (None, true) => Some(EvictionPolicy::Lfuda),
            (None, false) => None,
        };
        let params = spec.params.unwrap_or_default();
        FovSpec::new(params.fov.h_fov, params.fov.v_fov).usage_err("params.fov")?;
        Ok(Self {
            manifest: required(spec.manifest, "--manifest")?,
            traces: required(spec.traces, "--traces")?,
            network: required(spec.network, "--network")?,
            network_scale,
            policies,
            cache_policy,
            cache_capacity: spec.cache_capacity,
            // half the video by default once a cache is requested
            cache_fraction: match (cache_policy, spec.cache_capacity, spec.cache_fraction) {
                (Some(_), None, None) => Some(0.5),
                (_, _, f) => f,
            },
            iterations,
            seed: spec.seed.unwrap_or(0),
            out: spec
                .out
                .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
            params,
        })
    }

    /// Cache capacity in bytes for a video of `total_bytes`.
    pub fn capacity(&self, total_bytes: u64) -> Option<u64> {
        self.cache_policy?;
        Some(match (self.cache_capacity, self.cache_fraction) {
            (Some(c), _) => c,
            (None, Some(f)) => ((total_bytes as f64 * f).round() as u64).max(1),
            (None, None) => total_bytes / 2,
        })
    }
}
