//! Fixtures shared by the benchmarks.

use tilestream_core::cachesim::warm;
use tilestream_core::geometry::{TimedOrientation, ViewportSampler};
use tilestream_core::manifest::synthesize;
use tilestream_core::popularity::{build_heat, default_budget, quantize};
use tilestream_core::traces::{hotspot_traces, piecewise_network_trace, HotspotSpec};
use tilestream_core::{CacheConfig, EdgeCache, EvictionPolicy, FovSpec, NetworkTrace, SynthSpec, VideoManifest};

pub struct Scenario {
    pub manifest: VideoManifest,
    pub traces: Vec<Vec<TimedOrientation>>,
    pub network: NetworkTrace,
}

/// 40 s, 4x4, three qualities, 30 hot-spot viewers and a two-phase link.
pub fn scenario() -> Scenario {
    let mut manifest = synthesize(&SynthSpec::default()).expect("default spec is valid");
    let traces = hotspot_traces(&HotspotSpec::default(), 30, 7);
    let heat = build_heat(
        &traces,
        &manifest.grid(),
        FovSpec::default(),
        manifest.segment_length(),
        manifest.duration(),
        16,
    )
    .expect("valid heat inputs");
    let popularity = quantize(&heat, default_budget(&manifest), &manifest).expect("valid budget");
    manifest.set_popularity(popularity).expect("matching shape");
    let base = manifest.base_bitrate();
    let network = piecewise_network_trace(&[(7.5, 20.0 * base), (60.0, 6.0 * base)]).expect("valid phases");
    Scenario {
        manifest,
        traces,
        network,
    }
}

/// LFUDA cache at half the video size, warmed with every trace.
pub fn warm_cache(s: &Scenario, seed: u64) -> EdgeCache {
    let config = CacheConfig::new(s.manifest.total_bytes() / 2, EvictionPolicy::Lfuda).expect("non-zero capacity");
    let mut cache = EdgeCache::new(config);
    let sampler = ViewportSampler::new(FovSpec::default(), 16).expect("valid sampler");
    warm(&mut cache, &s.manifest, &s.traces, &sampler, seed).expect("warm-up succeeds");
    cache
}
