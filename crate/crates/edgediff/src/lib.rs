//! Perceptual color-difference maps and aggregate scores for image pairs.
//!
//! The library implements a family of image difference models built from
//! shared stages: local adaptation with per-pixel white points, opponent
//! contrast-sensitivity filtering, and uniform-color-space differencing.
//! Each model runs in a baseline variant and an edge-aware variant in which
//! the spatial filters are generalized to stop at edges, so that the
//! appearance of one region leaks less into its neighbors.
//!
//! Modules:
//! - [`color`]: XYZ / LMS / CIELAB / IPT / OKLab / opponent conversions and
//!   the embedded table of published matrices.
//! - [`adaptation`]: von Kries and CAT02/CAT16-style chromatic adaptation,
//!   luminance-level adaptation factor.
//! - [`csf`]: parametric contrast-sensitivity curves, flattening and oblique
//!   modifiers, frequency-domain filter rasters.
//! - [`filtering`]: Gaussian, frequency-domain, bilateral, and edge-aware
//!   CSF filters.
//! - [`pipeline`]: the end-to-end difference models.
//! - [`metrics`]: per-pixel difference maps and Minkowski pooling.
//! - [`harness`]: tone-mapping distortion generation, image I/O, and the
//!   sweep experiment runner.

pub mod adaptation;
pub mod color;
mod config;
pub mod csf;
mod error;
pub mod filtering;
pub mod harness;
mod image;
pub mod metrics;
pub mod pipeline;

pub use error::{Error, Result};
pub use image::{ChannelPlane, OpponentImage, Space, TristimulusImage};
