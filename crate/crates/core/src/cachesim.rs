//! Byte-capacity edge cache with LRU, LFUDA and GDSF eviction.
//!
//! All three policies keep a priority per entry and evict the lowest one,
//! ties going to the least recently used entry:
//!
//! - LRU: the logical access clock.
//! - LFUDA: `L + frequency`.
//! - GDSF: `L + frequency / size`.
//!
//! `L` starts at 0 and is set to the priority of each evicted entry, so
//! entries admitted later start above everything evicted before them.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{FovSpec, TimedOrientation, ViewportSampler};
use crate::manifest::{QualityAssignment, VideoManifest};
use crate::prediction::nearest_sample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvictionPolicy {
    Lru,
    Lfuda,
    Gdsf,
}

impl EvictionPolicy {
    pub fn as_str(&self) -> &'static str {
        match self {
            EvictionPolicy::Lru => "lru",
            EvictionPolicy::Lfuda => "lfuda",
            EvictionPolicy::Gdsf => "gdsf",
        }
    }
}

impl fmt::Display for EvictionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EvictionPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lru" => Ok(EvictionPolicy::Lru),
            "lfuda" => Ok(EvictionPolicy::Lfuda),
            "gdsf" => Ok(EvictionPolicy::Gdsf),
            _ => Err(invalid(
                "cache policy",
                format!("unknown policy `{s}` (lru | lfuda | gdsf)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CacheConfig {
    /// Bytes.
    pub capacity: u64,
    pub policy: EvictionPolicy,
}

impl CacheConfig {
    pub fn new(capacity: u64, policy: EvictionPolicy) -> Result<Self> {
        if capacity == 0 {
            return Err(invalid("capacity", "must be positive"));
        }
        Ok(Self { capacity, policy })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CacheKey {
    pub video: u32,
    pub segment: u32,
    pub tile: u32,
    pub quality: u8,
}

impl CacheKey {
    pub fn new(segment: usize, tile: usize, quality: u8) -> Self {
        Self {
            video: 0,
            segment: segment as u32,
            tile: tile as u32,
            quality,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lookup {
    Hit,
    Miss,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheStats {
    pub requests: u64,
    pub hits: u64,
    pub bytes_requested: u64,
    pub bytes_hit: u64,
}

impl CacheStats {
    /// Cache hit rate; 0 before the first request.
    pub fn chr(&self) -> f64 {
        ratio(self.hits, self.requests)
    }

    /// Byte hit rate; 0 before the first request.
    pub fn bhr(&self) -> f64 {
        ratio(self.bytes_hit, self.bytes_requested)
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    size: u64,
    frequency: u64,
    priority: f64,
    last_access: u64,
}

/// Eviction order: priority, then recency. `last_access` is unique per entry.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Rank {
    priority: f64,
    last_access: u64,
    key: CacheKey,
}

impl Eq for Rank {}

impl Ord for Rank {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.priority
            .total_cmp(&other.priority)
            .then(self.last_access.cmp(&other.last_access))
            .then(self.key.cmp(&other.key))
    }
}

impl PartialOrd for Rank {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone)]
pub struct EdgeCache {
    config: CacheConfig,
    entries: HashMap<CacheKey, Entry>,
    order: BTreeSet<Rank>,
    used: u64,
    inflation: f64,
    clock: u64,
    stats: CacheStats,
}

impl EdgeCache {
    pub fn new(config: CacheConfig) -> Self {
        Self {
            config,
            entries: HashMap::new(),
            order: BTreeSet::new(),
            used: 0,
            inflation: 0.0,
            clock: 0,
            stats: CacheStats::default(),
        }
    }

    pub fn config(&self) -> CacheConfig {
        self.config
    }

    /// Bytes currently stored.
    pub fn occupancy(&self) -> u64 {
        self.used
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, key: &CacheKey) -> bool {
        self.entries.contains_key(key)
    }

    /// The aging term `L`.
    pub fn inflation(&self) -> f64 {
        self.inflation
    }

    pub fn stats(&self) -> CacheStats {
        self.stats
    }

    /// Clears the counters; contents and policy state are kept.
    pub fn reset_stats(&mut self) {
        self.stats = CacheStats::default();
    }

    /// Stored keys in ascending order.
    pub fn contents(&self) -> Vec<CacheKey> {
        let mut keys: Vec<CacheKey> = self.entries.keys().copied().collect();
        keys.sort();
        keys
    }

    fn priority(&self, frequency: u64, size: u64) -> f64 {
        match self.config.policy {
            EvictionPolicy::Lru => self.clock as f64,
            EvictionPolicy::Lfuda => self.inflation + frequency as f64,
            EvictionPolicy::Gdsf => self.inflation + frequency as f64 / size as f64,
        }
    }

    /// Looks `key` up, inserting it on a miss when it fits the capacity at all.
    pub fn request(&mut self, key: CacheKey, size: u64) -> Result<Lookup> {
        if size == 0 {
            return Err(invalid("size", "requested object size must be positive"));
        }
        self.clock += 1;
        self.stats.requests += 1;
        self.stats.bytes_requested += size;

        if let Some(mut entry) = self.entries.get(&key).copied() {
            self.stats.hits += 1;
            self.stats.bytes_hit += size;
            self.order.remove(&Rank {
                priority: entry.priority,
                last_access: entry.last_access,
                key,
            });
            entry.frequency += 1;
            entry.last_access = self.clock;
            entry.priority = self.priority(entry.frequency, entry.size);
            self.insert_entry(key, entry);
            return Ok(Lookup::Hit);
        }

        if size > self.config.capacity {
            return Ok(Lookup::Miss);
        }
        while self.used + size > self.config.capacity {
            self.evict_one();
        }
        let entry = Entry {
            size,
            frequency: 1,
            priority: self.priority(1, size),
            last_access: self.clock,
        };
        self.used += size;
        self.insert_entry(key, entry);
        Ok(Lookup::Miss)
    }

    fn insert_entry(&mut self, key: CacheKey, entry: Entry) {
        self.order.insert(Rank {
            priority: entry.priority,
            last_access: entry.last_access,
            key,
        });
        self.entries.insert(key, entry);
    }

    fn evict_one(&mut self) {
        let victim = self.order.pop_first().expect("over capacity with no entries");
        let entry = self.entries.remove(&victim.key).expect("ranked entry exists");
        self.used -= entry.size;
        if self.config.policy != EvictionPolicy::Lru {
            self.inflation = victim.priority;
        }
    }

    /// Requests every tile of `segment` at its assigned level. Returns the
    /// bytes served from the cache and from the origin.
    pub fn request_segment(
        &mut self,
        manifest: &VideoManifest,
        segment: usize,
        assignment: &QualityAssignment,
    ) -> Result<(u64, u64)> {
        let (mut hit, mut miss) = (0, 0);
        for (tile, &level) in assignment.levels().iter().enumerate() {
            let size = manifest.size(segment, tile, level);
            match self.request(CacheKey::new(segment, tile, level), size)? {
                Lookup::Hit => hit += size,
                Lookup::Miss => miss += size,
            }
        }
        Ok((hit, miss))
    }
}

/// Quality levels for a viewer actually looking at the given visibility map:
/// visible tiles ranked by visibility are split into equal bands from the top
/// level down to level 1; invisible tiles get level 0.
pub fn warm_assignment(scores: &[f64], top_level: u8) -> QualityAssignment {
    let ranked = crate::geometry::rank_descending(scores);
    let visible = scores.iter().filter(|&&s| s > 0.0).count();
    let mut levels = vec![0u8; scores.len()];
    if top_level == 0 {
        return QualityAssignment(levels);
    }
    let bands = top_level as usize;
    for (rank, &tile) in ranked.iter().take(visible).enumerate() {
        levels[tile] = top_level - (rank * bands / visible) as u8;
    }
    QualityAssignment(levels)
}

/// Viewing sessions replayed into the cache before a measurement.
///
/// The traces are shuffled with `seed`; each one is then played through the
/// whole video, requesting every tile segment at the quality matching the
/// viewer's recorded orientation at the segment start.
pub fn warm(
    cache: &mut EdgeCache,
    manifest: &VideoManifest,
    traces: &[Vec<TimedOrientation>],
    sampler: &ViewportSampler,
    seed: u64,
) -> Result<()> {
    let mut order: Vec<usize> = (0..traces.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let grid = manifest.grid();
    for i in order {
        for segment in 0..manifest.segment_count() {
            let t = segment as f64 * manifest.segment_length();
            let Some(sample) = nearest_sample(&traces[i], t) else {
                continue;
            };
            let vis = sampler.visibility(&sample.o, &grid);
            let assignment = warm_assignment(&vis.scores, manifest.top_level());
            cache.request_segment(manifest, segment, &assignment)?;
        }
    }
    Ok(())
}

/// Convenience wrapper building the sampler from a FoV.
pub fn warm_with_fov(
    cache: &mut EdgeCache,
    manifest: &VideoManifest,
    traces: &[Vec<TimedOrientation>],
    fov: FovSpec,
    seed: u64,
) -> Result<()> {
    let sampler = ViewportSampler::new(fov, crate::geometry::DEFAULT_SAMPLES_PER_AXIS)?;
    warm(cache, manifest, traces, &sampler, seed)
}

/// Requests the manifest's popularity trace once and returns the stats of
/// exactly those requests.
pub fn replay_popularity(cache: &mut EdgeCache, manifest: &VideoManifest) -> Result<CacheStats> {
    let popularity = manifest.popularity().ok_or(Error::MissingPopularity)?;
    cache.reset_stats();
    for segment in 0..manifest.segment_count() {
        let assignment = popularity.assignment(segment).expect("validated length");
        cache.request_segment(manifest, segment, &assignment)?;
    }
    Ok(cache.stats())
}
