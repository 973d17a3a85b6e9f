//! Packet-trace replay for the origin link.
//!
//! Trace files use the Mahimahi convention: one integer millisecond timestamp
//! per line, each line an opportunity to deliver one 1500-byte packet. Past
//! the last timestamp the trace repeats, shifted by its duration.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const PACKET_BYTES: u64 = 1500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkTrace {
    /// Delivery opportunities in milliseconds, non-decreasing.
    slots: Vec<f64>,
}

impl NetworkTrace {
    pub fn new(slots_ms: Vec<f64>) -> Result<Self> {
        if slots_ms.is_empty() {
            return Err(invalid("network trace", "empty"));
        }
        if slots_ms.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(invalid("network trace", "timestamps must be finite and non-negative"));
        }
        if slots_ms.windows(2).any(|w| w[1] < w[0]) {
            return Err(invalid("network trace", "timestamps must not decrease"));
        }
        if !(slots_ms[slots_ms.len() - 1] > 0.0) {
            return Err(invalid("network trace", "duration must be positive"));
        }
        Ok(Self { slots: slots_ms })
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut slots = Vec::new();
        let mut prev = 0u64;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let err = |reason: String| Error::Parse {
                path: path.into(),
                line: i + 1,
                reason,
            };
            let t: u64 = line
                .parse()
                .map_err(|_| err(format!("`{line}` is not a non-negative integer")))?;
            if t < prev {
                return Err(err(format!("timestamp {t} is smaller than the previous {prev}")));
            }
            prev = t;
            slots.push(t as f64);
        }
        if slots.is_empty() {
            return Err(Error::Parse {
                path: path.into(),
                line: 0,
                reason: "empty network trace".into(),
            });
        }
        Self::new(slots).map_err(|e| Error::Parse {
            path: path.into(),
            line: 0,
            reason: e.to_string(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.into(),
            source,
        })?;
        Self::parse(&text, path)
    }

    /// Mahimahi text form; timestamps are rounded to whole milliseconds.
    pub fn to_mahimahi(&self) -> String {
        let mut out = String::with_capacity(self.slots.len() * 6);
        for t in &self.slots {
            out.push_str(&format!("{}\n", t.round() as u64));
        }
        out
    }

    pub fn slots_ms(&self) -> &[f64] {
        &self.slots
    }

    pub fn packet_count(&self) -> usize {
        self.slots.len()
    }

    /// Replay period in milliseconds (the last timestamp).
    pub fn duration_ms(&self) -> f64 {
        self.slots[self.slots.len() - 1]
    }

    /// Mean capacity over one period in bits per second.
    pub fn average_bps(&self) -> f64 {
        (self.packet_count() as u64 * PACKET_BYTES * 8) as f64 / (self.duration_ms() / 1000.0)
    }

    /// Multiplies throughput by `factor` by dividing every timestamp by it.
    pub fn scale(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(invalid("scale", format!("{factor} must be positive")));
        }
        Ok(Self {
            slots: self.slots.iter().map(|t| t / factor).collect(),
        })
    }

    /// Time in milliseconds of slot `k` of the cyclically extended trace.
    pub fn slot_time(&self, k: u64) -> f64 {
        let n = self.slots.len() as u64;
        self.slots[(k % n) as usize] + (k / n) as f64 * self.duration_ms()
    }

    /// Index of the first slot strictly after `t_ms`.
    pub fn first_slot_after(&self, t_ms: f64) -> u64 {
        let period = self.duration_ms();
        let n = self.slots.len() as u64;
        let cycle = (t_ms / period).floor().max(0.0);
        let offset = t_ms - cycle * period;
        let i = self.slots.partition_point(|&s| s <= offset) as u64;
        let mut k = cycle as u64 * n + i;
        // guard against rounding at cycle boundaries
        while k > 0 && self.slot_time(k - 1) > t_ms {
            k -= 1;
        }
        while self.slot_time(k) <= t_ms {
            k += 1;
        }
        k
    }
}

/// A trace with a consumption cursor. Transfers are sequential: a transfer
/// only uses slots after `start` that earlier transfers left unused.
#[derive(Debug, Clone)]
pub struct OriginLink {
    trace: NetworkTrace,
    next_slot: u64,
}

impl OriginLink {
    pub fn new(trace: NetworkTrace) -> Self {
        Self { trace, next_slot: 0 }
    }

    pub fn trace(&self) -> &NetworkTrace {
        &self.trace
    }

    /// Slots consumed so far.
    pub fn consumed(&self) -> u64 {
        self.next_slot
    }

    /// Sends `bytes` starting at `start` seconds and returns the completion
    /// time in seconds: the time of the last of `ceil(bytes / 1500)` slots.
    pub fn transfer(&mut self, start: f64, bytes: u64) -> f64 {
        if bytes == 0 {
            return start;
        }
        let packets = bytes.div_ceil(PACKET_BYTES);
        let first = self.trace.first_slot_after(start * 1000.0).max(self.next_slot);
        let last = first + packets - 1;
        self.next_slot = last + 1;
        self.trace.slot_time(last) / 1000.0
    }
}

/// Completion time of a transfer on a fresh link.
pub fn transfer_time(trace: &NetworkTrace, start: f64, bytes: u64) -> f64 {
    OriginLink::new(trace.clone()).transfer(start, bytes)
}

/// Cache-to-client link with constant rate, busy while serving.
#[derive(Debug, Clone)]
pub struct ConstantLink {
    rate_bps: f64,
    busy_until: f64,
}

impl ConstantLink {
    pub fn new(rate_bps: f64) -> Result<Self> {
        if !(rate_bps > 0.0) {
            return Err(invalid("cache link rate", format!("{rate_bps} must be positive")));
        }
        Ok(Self {
            rate_bps,
            busy_until: 0.0,
        })
    }

    pub fn transfer(&mut self, start: f64, bytes: u64) -> f64 {
        if bytes == 0 {
            return start;
        }
        let begin = start.max(self.busy_until);
        self.busy_until = begin + (bytes * 8) as f64 / self.rate_bps;
        self.busy_until
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandwidthEstimate {
    pub bits_per_second: f64,
    /// Seconds.
    pub measured_at: f64,
}

/// A finished transfer over the origin link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OriginDownload {
    pub bytes: u64,
    pub start: f64,
    pub end: f64,
}

/// Passive throughput estimation from completed origin downloads.
pub trait BandwidthEstimator {
    fn record(&mut self, download: OriginDownload);
    /// `None` until the first origin download completes.
    fn estimate(&self) -> Option<BandwidthEstimate>;
}

/// Assumes the throughput of the most recent origin download persists.
#[derive(Debug, Clone, Default)]
pub struct LastSampleEstimator {
    last: Option<BandwidthEstimate>,
}

impl BandwidthEstimator for LastSampleEstimator {
    fn record(&mut self, d: OriginDownload) {
        if d.bytes == 0 || !(d.end > d.start) {
            return;
        }
        self.last = Some(BandwidthEstimate {
            bits_per_second: (d.bytes * 8) as f64 / (d.end - d.start),
            measured_at: d.end,
        });
    }

    fn estimate(&self) -> Option<BandwidthEstimate> {
        self.last
    }
}

/// Estimate over a download history; `None` for an empty history.
pub fn estimate(history: &[OriginDownload]) -> Option<BandwidthEstimate> {
    let mut e = LastSampleEstimator::default();
    history.iter().for_each(|d| e.record(*d));
    e.estimate()
}
