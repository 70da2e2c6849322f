//! Search-based generation of platformer level segments for persona agents.
//!
//! The crate is `no_std` and only needs `alloc`. It contains the tile level
//! model, a deterministic forward model, best-first persona planners, the
//! gameplay metrics used as fitness, a latent decoder, and a CMA-ES
//! optimiser. File formats, the experiment harness and the command line
//! live in the `levelgen` crate.

#![no_std]

extern crate alloc;

pub mod agents;
pub mod cmaes;
pub mod error;
pub mod genspace;
pub mod level;
mod linalg;
pub mod metrics;
pub mod sim;
pub mod stats;

pub use agents::{AgentConfig, HeuristicTerms, Persona, SearchStats};
pub use error::{CmaError, LatentError, LevelError, MetricError, SimError, StatsError};
pub use genspace::{decode, GeneratorSpec, LatentVector, LevelGenerator, LATENT_DIM};
pub use level::{content_stats, parse_level, serialize_level, Cell, ContentStats, Level, TileKind};
pub use metrics::{evaluate, evaluate_with, Evaluation, MetricId, MetricScore};
pub use sim::{run_playthrough, Action, EventRecord, EventType, Limits, PlaythroughResult, SimState};
pub use stats::{wilcoxon_rank_sum, RankSumResult};
