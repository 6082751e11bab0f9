//! Scale-free camera control through facial-landmark correspondences.
//!
//! The crate covers the pinhole model, two-view and PnP pose recovery,
//! landmark templates and their rasterized condition maps, camera
//! trajectories, the training-data augmentation pipeline, a synthetic
//! multi-view head oracle, and the camera-correctness evaluation harness.

pub mod camera;
pub mod datagen;
pub mod epipolar;
pub mod error;
pub mod eval;
pub mod jsonio;
pub mod landmarks;
pub mod oracle;
mod par;
pub mod rng;
pub mod service;
pub mod trajectory;

pub use error::{Error, ErrorClass, Result};
