//! Extraction of highway on-ramp merging scenarios from vehicle
//! trajectory data.
//!
//! The pipeline turns raw object tracks into categorized merging
//! scenarios in five stages:
//!
//! 1. [`ingest`]: load trajectories and a lane model, associate lanes,
//!    drop clipped tracks.
//! 2. [`features`]: per-frame lateral observations (normalized centerline
//!    offset and a border-crossing marker) against a tracked reference
//!    lane.
//! 3. [`hmm`]: decode the observation series into driving primitives
//!    (Idle, Approach, Cross, Change) with a Viterbi decoder over a
//!    Gaussian-emission hidden Markov model.
//! 4. [`extraction`]: cut candidate maneuvers out of the primitive series
//!    and classify them against a pattern library by dynamic time warping
//!    similarity.
//! 5. [`assessment`] and [`categorization`]: compute post-encroachment
//!    times against surrounding mainline vehicles and bucket each scenario
//!    as free, in front, behind or into.
//!
//! [`behavior`] aggregates extracted scenarios into distribution reports,
//! and [`synth`] generates labeled synthetic datasets for evaluation.
//! [`pipeline`] wires the stages together behind the file-based interface
//! that the `rampmine` binary exposes.
//!
//! # Runnable examples
//!
//! Each major capability has a self-contained example:
//!
//! ```text
//! cargo run --example frenet_projection    arc-length projection and maneuver positions
//! cargo run --example decode_primitives    Viterbi decoding of a lane change profile
//! cargo run --example match_patterns       DTW similarity and pattern classification
//! cargo run --example generate_dataset     synthetic labeled dataset on disk
//! cargo run --example extract_scenarios    full pipeline over a synthetic dataset
//! cargo run --example assess_pet           post-encroachment time for a merge
//! cargo run --example behavior_report      distribution report over extracted scenarios
//! ```

pub mod assessment;
pub mod behavior;
pub mod categorization;
pub mod error;
pub mod extraction;
pub mod features;
pub mod geometry;
pub mod hmm;
pub mod ingest;
pub mod pipeline;
pub mod synth;

pub use error::{Error, Result};
