//! Reference models shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Zipf;
use tilestream_core::{CacheKey, EvictionPolicy};

/// Brute-force cache: every eviction scans all entries for the smallest
/// `(priority, last access)`.
pub struct ScanCache {
    policy: EvictionPolicy,
    capacity: u64,
    entries: Vec<(CacheKey, u64, u64, f64, u64)>, // key, size, frequency, priority, last access
    inflation: f64,
    clock: u64,
}

impl ScanCache {
    pub fn new(policy: EvictionPolicy, capacity: u64) -> Self {
        Self {
            policy,
            capacity,
            entries: Vec::new(),
            inflation: 0.0,
            clock: 0,
        }
    }

    fn priority(&self, frequency: u64, size: u64) -> f64 {
        match self.policy {
            EvictionPolicy::Lru => self.clock as f64,
            EvictionPolicy::Lfuda => self.inflation + frequency as f64,
            EvictionPolicy::Gdsf => self.inflation + frequency as f64 / size as f64,
        }
    }

    pub fn used(&self) -> u64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn keys(&self) -> Vec<CacheKey> {
        let mut k: Vec<CacheKey> = self.entries.iter().map(|e| e.0).collect();
        k.sort();
        k
    }

    /// Returns true on a hit.
    pub fn request(&mut self, key: CacheKey, size: u64) -> bool {
        self.clock += 1;
        if let Some(i) = self.entries.iter().position(|e| e.0 == key) {
            let frequency = self.entries[i].2 + 1;
            let p = self.priority(frequency, self.entries[i].1);
            let clock = self.clock;
            let e = &mut self.entries[i];
            e.2 = frequency;
            e.3 = p;
            e.4 = clock;
            return true;
        }
        if size > self.capacity {
            return false;
        }
        while self.used() + size > self.capacity {
            let victim = (0..self.entries.len())
                .min_by(|&a, &b| {
                    let (ea, eb) = (&self.entries[a], &self.entries[b]);
                    ea.3.total_cmp(&eb.3).then(ea.4.cmp(&eb.4))
                })
                .unwrap();
            let e = self.entries.swap_remove(victim);
            if self.policy != EvictionPolicy::Lru {
                self.inflation = e.3;
            }
        }
        let p = self.priority(1, size);
        self.entries.push((key, size, 1, p, self.clock));
        false
    }
}

/// Textbook LRU: a recency-ordered map plus a key index.
pub struct ListLru {
    capacity: u64,
    used: u64,
    by_time: BTreeMap<u64, (CacheKey, u64)>,
    index: HashMap<CacheKey, u64>,
    clock: u64,
}

impl ListLru {
    pub fn new(capacity: u64) -> Self {
        Self {
            capacity,
            used: 0,
            by_time: BTreeMap::new(),
            index: HashMap::new(),
            clock: 0,
        }
    }

    pub fn request(&mut self, key: CacheKey, size: u64) -> bool {
        self.clock += 1;
        if let Some(t) = self.index.get(&key).copied() {
            let v = self.by_time.remove(&t).unwrap();
            self.by_time.insert(self.clock, v);
            self.index.insert(key, self.clock);
            return true;
        }
        if size > self.capacity {
            return false;
        }
        while self.used + size > self.capacity {
            let (_, (k, s)) = self.by_time.pop_first().unwrap();
            self.index.remove(&k);
            self.used -= s;
        }
        self.by_time.insert(self.clock, (key, size));
        self.index.insert(key, self.clock);
        self.used += size;
        false
    }
}

pub fn key(id: u32) -> CacheKey {
    CacheKey {
        video: 0,
        segment: id,
        tile: 0,
        quality: 0,
    }
}

/// Uniform random requests over `objects` ids with sizes fixed per id.
pub fn uniform_workload(seed: u64, ops: usize, objects: u32, max_size: u64) -> Vec<(CacheKey, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sizes: Vec<u64> = (0..objects).map(|_| rng.random_range(1..=max_size)).collect();
    (0..ops)
        .map(|_| {
            let id = rng.random_range(0..objects);
            (key(id), sizes[id as usize])
        })
        .collect()
}

/// How object sizes relate to popularity rank in [`zipf_workload`].
#[derive(Clone, Copy)]
pub enum Sizes {
    /// The `r`-th most popular object has `r` units.
    Anticorrelated,
    /// Sizes scattered over 1..=1000 units independently of rank.
    Independent,
}

/// Zipf(1.0) requests over `objects` ids; one unit is 100 bytes.
pub fn zipf_workload(seed: u64, ops: usize, objects: u32, sizes: Sizes) -> Vec<(CacheKey, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zipf = Zipf::new(objects as f64, 1.0).unwrap();
    (0..ops)
        .map(|_| {
            let rank = zipf.sample(&mut rng) as u64;
            let units = match sizes {
                Sizes::Anticorrelated => rank,
                Sizes::Independent => rank * 7919 % 1000 + 1,
            };
            (key(rank as u32), 100 * units)
        })
        .collect()
}

/// Total bytes of all distinct objects of a workload.
pub fn distinct_bytes(ops: &[(CacheKey, u64)]) -> u64 {
    let mut seen = HashMap::new();
    for &(k, s) in ops {
        seen.insert(k, s);
    }
    seen.values().sum()
}
