//! Learning sparse, task-specialized control sets for state-lattice path
//! planners.
//!
//! The crate turns demonstration paths into a small set of motion
//! primitives tuned to a task distribution, and evaluates the learned set
//! against dense and arc-length-factor baselines inside a full lattice
//! planner with collision checking.

pub mod baseline_dl;
pub mod cli;
pub mod closest_path;
pub mod clustering;
pub mod config;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod grid;
pub mod lattice;
pub mod manifest;
pub mod optimizer;
pub mod planner;
pub mod scenario;
pub mod scoring;
pub mod spiral;
pub mod svg;

pub use error::{Error, Result};
