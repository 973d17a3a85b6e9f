//! Trace-driven simulation of tiled 360-degree video streaming.
//!
//! The crate models a client that streams an equirectangular video cut into
//! an `n x m` tile grid and fixed-length temporal segments. For every segment
//! the client picks one quality level per tile using one of several
//! adaptation policies:
//!
//! - `naive`: every tile at the highest quality.
//! - `prediction`: linear-regression viewport prediction, tiles upgraded in
//!   visibility order until the origin bandwidth estimate is exhausted.
//! - `popularity`: per-segment quality levels stored in the manifest,
//!   derived from many recorded viewing traces.
//! - `prediction-ba`: unconstrained prediction lowered uniformly until it fits
//!   the bandwidth estimate.
//! - `transition`: prediction while the origin estimate covers the predicted
//!   demand, popularity otherwise, switching only at segment boundaries.
//!
//! Tiles are served either by an edge cache ([`cachesim`]) or by an origin
//! link replayed from a packet-arrival trace ([`netsim`]). The session loop in
//! [`playback`] measures stalling, average tile quality and bandwidth savings.

pub mod adaptation;
pub mod cachesim;
mod error;
pub mod geometry;
pub mod manifest;
pub mod netsim;
pub mod playback;
pub mod popularity;
pub mod prediction;
pub mod stats;
pub mod traces;

pub use adaptation::{PolicyKind, TransitionMode, TransitionState};
pub use cachesim::{CacheConfig, CacheKey, CacheStats, EdgeCache, EvictionPolicy, Lookup};
pub use error::{Error, Result};
pub use geometry::{FovSpec, Orientation, TileGrid, TimedOrientation, VisibilityMap};
pub use manifest::{QualityAssignment, SynthSpec, VideoManifest};
pub use netsim::{BandwidthEstimate, NetworkTrace, OriginLink};
pub use playback::{ExperimentConfig, ExperimentReport, SegmentRecord, SessionConfig, SessionMetrics, SessionParams};
pub use popularity::{HeatMap, PopularityTrace};
pub use prediction::{PredictorConfig, RegressionModel};
