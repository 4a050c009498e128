//! Topological feature extraction for grayscale images and planar point clouds.
//!
//! The crate turns an image into a point cloud ([`imaging`]), builds a filtered
//! simplicial complex on it ([`complex`]), reduces the boundary matrix over GF(2)
//! to a persistence diagram ([`persistence`]) and vectorizes the diagram as
//! landscapes, silhouettes ([`vectorize`]) or path signatures ([`signature`]).
//! Diagrams can be compared with the bottleneck distance ([`metrics`]), and
//! [`eval`] holds a small logistic baseline, segmentation IoU and a synthetic
//! image generator. [`pipeline`] wires the stages together for the CLI.

pub mod complex;
pub mod error;
pub mod eval;
pub mod imaging;
pub mod metrics;
pub mod persistence;
pub mod pipeline;
pub mod pointcloud;
pub mod signature;
pub mod vectorize;

pub use error::{Error, Result};
