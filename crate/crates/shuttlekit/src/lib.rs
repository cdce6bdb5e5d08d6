//! Post-detection analytics for badminton match video.
//!
//! Takes per-frame object-detector output (shuttlecock candidates, player /
//! court / net boxes) and per-clip hit classifications, and turns them into
//! the eleven per-shot prediction fields of the match-analysis task, plus the
//! evaluation metrics and analytic architecture-cost accounting around them.
//!
//! The crate is organized by pipeline stage:
//!
//! - [`io`] — detector / classifier stream parsing and the prediction CSV.
//! - [`trajectory`] — shuttlecock track denoising and heatmap rendering.
//! - [`events`] — sliding-window hit detection from clip classifications.
//! - [`features`] — bounding-box geometry and encodings for the predictors.
//! - [`metrics`] — tolerance-based scoring and detection F1.
//! - [`flops`] — analytic FLOPs accounting for encoder-decoder networks.
//! - [`synth`] — synthetic rally generation with controllable noise.
//! - [`pipeline`] — end-to-end orchestration used by the CLI.
//!
//! Everything is deterministic: pure functions over immutable inputs, with
//! all randomness drawn from explicitly seeded generators.

pub mod config;
pub mod error;
pub mod events;
pub mod features;
pub mod flops;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod synth;
pub mod trajectory;
pub mod types;

pub use error::{Error, Result};
pub use types::{BoundingBox, Player, Point};
